import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, grammar
from attrgram import GrowConfig, Grower, RuleBitmap, Xoshiro256, extract_rule, grow, load_grammar
from attrgram.grow import (Exhausted, GrowError, NoApplicableRule, RenderError,
                           RevertLimitExceeded, render_terminal)

SENTENCE = "The shape is a circle with color {} and size {}"


@pytest.fixture(scope="module")
def circle_g():
    return load_grammar(FIXTURES / "circle.grammar")


def red3(g):
    return g.instance("circle", {"color": "red", "size": 3})


def test_level_zero_renders_the_start(circle_g):
    r = grow(circle_g, red3(circle_g), GrowConfig(max_level=0))
    assert r.lines == [SENTENCE.format("red", 3)]
    assert r.pops == 1 and r.stack_at_threshold == 1


def test_level_one_gives_one_or_two_lines(circle_g):
    seen = set()
    for seed in range(60):
        r = grow(circle_g, red3(circle_g), GrowConfig(seed=seed, max_level=1))
        seen.add(tuple(r.lines))
    assert seen == {(SENTENCE.format("red", 3),),
                    (SENTENCE.format("green", 3), SENTENCE.format("blue", 3))}


def test_start_by_name_and_unset_slots(circle_g):
    with pytest.raises(GrowError):
        grow(circle_g, "CIRCLE")
    with pytest.raises(RenderError) as info:
        grow(circle_g, "circle", GrowConfig(max_level=0))
    assert "unset" in str(info.value)


def test_config_validation():
    with pytest.raises(ValueError):
        GrowConfig(max_level=-1)
    with pytest.raises(ValueError):
        GrowConfig(max_reverts_per_pop=0)


ONLY_REVERT = """%%
%token X_T
%symbol x
%symbol top
%%
X_T : "x"
%%
x -> X_T
top -> x { revert; } | x x { revert; }
%%
"""


def test_every_alternative_reverting_is_an_error():
    g = grammar(ONLY_REVERT)
    with pytest.raises(NoApplicableRule) as info:
        grow(g, "top")
    assert info.value.symbol == "top"
    with pytest.raises(RevertLimitExceeded):
        grow(g, "top", GrowConfig(max_reverts_per_pop=1))


def test_no_terminal_alternative_at_threshold():
    g = grammar(ONLY_REVERT.replace(" { revert; } | x x { revert; }", " x"))
    with pytest.raises(NoApplicableRule) as info:
        grow(g, "top", GrowConfig(max_level=0))
    assert "threshold" in str(info.value)


# -- extract_rule ------------------------------------------------------------

def test_extract_rule_single_and_both(circle_g):
    sid = circle_g.symbol("circle").packed_id
    ids = circle_g.rule_ids_for(sid)
    bm = RuleBitmap(len(circle_g.alternatives))
    seen = {extract_rule(circle_g, sid, bm, Xoshiro256(s)) for s in range(200)}
    assert seen == set(ids)
    assert extract_rule(circle_g, sid, bm, Xoshiro256(0), terminal_only=True) == ids[0]
    bm.set(ids[0])
    assert extract_rule(circle_g, sid, bm, Xoshiro256(0)) == ids[1]
    bm.set(ids[1])
    with pytest.raises(Exhausted):
        extract_rule(circle_g, sid, bm, Xoshiro256(0))
    bm.clear()
    assert len(bm) == 0


def test_bitmap_bounds():
    bm = RuleBitmap(3)
    with pytest.raises(IndexError):
        bm.set(3)


@given(st.lists(st.integers(0, 63)))
def test_bitmap_is_monotone_until_cleared(ids):
    bm = RuleBitmap(64)
    seen = set()
    for i in ids:
        bm.set(i)
        seen.add(i)
        assert all(bm.check(j) for j in seen)
        assert len(bm) == len(seen)


# -- rendering ---------------------------------------------------------------

MOVQ = """%%
%token I_MOV_I_R
%attribute suffix, char*, "q", "l"
%attribute imm, int
%attribute xreg, char*
%symbol i_mov_i_r, suffix, suffix, imm, imm, xreg, reg
%%
I_MOV_I_R : "mov"suffix "$"imm", "reg
%%
i_mov_i_r -> I_MOV_I_R
%%
"""


def test_render_spacing(mips):
    g = grammar(MOVQ)
    inst = g.instance("I_MOV_I_R", {"suffix": "q", "imm": 5, "reg": "%eax"})
    assert render_terminal(inst, g.representation("I_MOV_I_R")) == "movq $5, %eax"
    lab = mips.instance("CODE_LABEL", {"name": "main"})
    assert render_terminal(lab, mips.representation("CODE_LABEL")) == "main:"
    with pytest.raises(RenderError):
        render_terminal(mips.instance("I_JMP_L"), mips.representation("I_JMP_L"))


ORDERED = """%%
%token A_T, B_T, C_T
%attribute n, int
%symbol a, n, n
%symbol b, n, n
%symbol c, n, n
%symbol root, n, n
%%
A_T : "a" n
B_T : "b" n
C_T : "c" n
%%
a -> A_T
b -> B_T
c -> C_T
root -> a b c { $1.n = $$.n; $2.n = $$.n + 1; $3.n = $$.n + 2; }
      | a C_T { $1.n = $$.n; $2.n = 0; }
%%
"""


def test_rhs_is_emitted_left_to_right():
    g = grammar(ORDERED)
    outs = {tuple(grow(g, g.instance("root", {"n": 1}), GrowConfig(seed=s)).lines)
            for s in range(40)}
    assert outs == {("a 1", "b 2", "c 3"), ("a 1", "c 0")}


def test_observer_sees_atomic_reverts():
    g = load_grammar(FIXTURES / "revert.grammar")
    events = []
    for seed in range(20):
        Grower(g, GrowConfig(seed=seed), observer=events.append).grow(
            g.instance("choice", {"w": "x", "n": 2}))
    reverts = [e for e in events if e.kind == "revert"]
    assert reverts
    for e in reverts:
        assert e.after.values == e.before.values == {"w": "x", "n": 2}


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**63), st.integers(0, 6))
def test_same_seed_same_output(seed, level):
    g = load_grammar(FIXTURES / "circle.grammar")
    runs = [grow(g, red3(g), GrowConfig(seed=seed, max_level=level)) for _ in range(2)]
    assert runs[0] == runs[1]
    assert runs[0].pops <= level + (runs[0].stack_at_threshold or 0)


def test_grower_carries_label_counter(mips):
    grower = Grower(mips, GrowConfig())
    start = mips.instance("set_l_r_i_t", {"dest": "%rax", "src": "%rbx", "imm": 1})
    first = grower.grow(start.copy()).lines
    second = grower.grow(start.copy()).lines
    assert first[0] == "cmpq $1, %rbx" and first[1] == "jl .L0"
    assert second[1] == "jl .L2"
