from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, grammar
from attrgram import ParseError, build_tokenizer, load_grammar, parse_text, reduce_check
from attrgram.model import Pattern
from attrgram.parse import ReductionError, SymbolStream, TokenizerError

SPACED = grammar("""%%
%token DADDIU, LOAD_DW, ADDQ
%attribute reg, char*, "$t0", "$t1", "$sp", "$a0"
%attribute imm, int, !!-?[0-9]+!!
%symbol daddiu, reg, dest, reg, reg1, imm, imm
%symbol load_dw, reg, dest, imm, offset, reg, base
%symbol addq
%%
DADDIU : "daddiu" dest "," reg1 "," imm
LOAD_DW : "ld" dest "," offset "(" base ")"
ADDQ : "addq"
%%
daddiu -> DADDIU
load_dw -> LOAD_DW
addq -> ADDQ
%%
""")


def test_spaced_template_matches_with_or_without_blanks():
    for line in ("daddiu $t0, $t1, 4", "daddiu $t0,$t1,4", "  daddiu  $t0 , $t1 ,4"):
        (inst,) = parse_text(SPACED, line)
        assert inst.name == "DADDIU"
        assert inst.values == {"dest": "$t0", "reg1": "$t1", "imm": 4}


def test_memory_operand():
    (inst,) = parse_text(SPACED, "ld $a0, 16($sp)")
    assert inst.name == "LOAD_DW"
    assert inst.values == {"dest": "$a0", "offset": 16, "base": "$sp"}


def test_empty_input_gives_empty_stream():
    for text in ("", "\n\n   \n"):
        s = parse_text(SPACED, text)
        assert len(s) == 0 and not s.truncated


def test_unmatched_line_is_located():
    with pytest.raises(ParseError) as info:
        parse_text(SPACED, "ld $a0, 16($sp)\n  daddiu $t9, $t1, 4\n", origin="prog.s")
    assert (info.value.loc.line, info.value.loc.column) == (2, 3)
    assert "prog.s:2:3" in str(info.value)


def test_capacity_truncates():
    text = "addq\n" * 5
    s = parse_text(SPACED, text, capacity=5)
    assert len(s) == 5 and not s.truncated
    s = parse_text(SPACED, text + "addq\n", capacity=5)
    assert len(s) == 5 and s.truncated
    with pytest.raises(ValueError):
        parse_text(SPACED, text, capacity=0)


def test_several_terminals_on_one_line():
    s = parse_text(SPACED, "addq addq daddiu $t0, $t1, 4")
    assert s.names() == ["ADDQ", "ADDQ", "DADDIU"]


def test_tokenizer_literals_and_classes():
    spec = build_tokenizer(SPACED)
    assert "addq" in spec.literals and "daddiu" in spec.literals and "(" in spec.literals
    reg = next(c for c in spec.classes if c.attr == "reg")
    assert reg.enumerated and reg.regex.fullmatch("$sp")
    assert [c.attr for c in spec.classes] == ["reg", "imm"]
    toks = spec.tokenize("ld $a0, -16($sp)")
    assert [(k, t) for k, t, _ in toks] == [
        ("literal", "ld"), ("reg", "$a0"), ("literal", ","), ("imm", "-16"),
        ("literal", "("), ("reg", "$sp"), ("literal", ")")]


def test_tokenizer_rejects_empty_matching_pattern():
    # validation already reports such a domain as DOM; the tokenizer guards on its own
    g = grammar("%%\n%token T\n%attribute n, int, !![0-9]+!!\n"
                "%symbol t, n, n\n%%\nT : n\n%%\nt -> T\n%%\n")
    g.attributes[0] = replace(g.attributes[0], domain=Pattern("[0-9]*"))
    with pytest.raises(TokenizerError):
        build_tokenizer(g)


def test_mips_fixture_parses_every_line():
    g = load_grammar(FIXTURES / "mips_x86.grammar")
    text = (FIXTURES / "fib.s").read_text()
    s = parse_text(g, text)
    assert len(s) == sum(1 for ln in text.splitlines() if ln.strip())
    assert s.names()[0] == "CODE_LABEL"
    assert "LOAD_DW" in s.names() and "BGE_R_R" in s.names()


# -- reductions --------------------------------------------------------------

@pytest.fixture(scope="module")
def reduce_g():
    return load_grammar(FIXTURES / "reduce.grammar")


def test_single_reduction(reduce_g):
    s = parse_text(reduce_g, "a 1\nb 2\n")
    assert s.names() == ["c"] and s[0]["v"] == 3


def test_no_reduction_without_match(reduce_g):
    s = parse_text(reduce_g, "b 1\na 2\n")
    assert s.names() == ["B_T", "A_T"]


def test_reductions_can_be_disabled(reduce_g):
    assert parse_text(reduce_g, "a 1\nb 2\n", reductions=False).names() == ["A_T", "B_T"]


def test_reduction_runtime_error_is_reported():
    g = grammar("""%%
%token A_T
%attribute v, int
%symbol a, v, v
%symbol c, v, v
%%
A_T : "a" v
%%
a -> A_T
%%
c <- a a { $$.v = $1.v + $2.v; }
""")
    with pytest.raises(ReductionError):
        parse_text(g, "a 9223372036854775807\na 1\n")


def test_cycling_reductions_hit_the_limit():
    g = grammar("""%%
%token A_T
%symbol a
%symbol b
%%
A_T : "a"
%%
a -> A_T
%%
b <- a
a <- b
""")
    with pytest.raises(ReductionError) as info:
        parse_text(g, "a\n")
    assert "cycle" in str(info.value)


def _suffix_free(g, s):
    for rule in g.reductions:
        k = len(rule.rhs)
        if k <= len(s):
            tail = [g.owner_of(x.name) if x.is_terminal else x.name for x in s[-k:]]
            if tail == list(rule.rhs):
                return False
    return True


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("ab"), st.integers(0, 1000)), max_size=30))
def test_cascade_reaches_fixpoint_deterministically(items):
    g = load_grammar(FIXTURES / "reduce_cascade.grammar")
    text = "".join(f"{k} {v}\n" for k, v in items)
    one, two = parse_text(g, text), parse_text(g, text)
    assert _suffix_free(g, one)
    assert [(x.name, x.values) for x in one] == [(x.name, x.values) for x in two]
    # reductions only add, so the total is preserved
    assert sum(x["v"] for x in one) == sum(v for _, v in items)


def test_reduce_check_on_prebuilt_stream(reduce_g):
    s = SymbolStream([reduce_g.instance("A_T", {"v": 1}), reduce_g.instance("B_T", {"v": 1})])
    assert reduce_check(s, reduce_g) == 1
    assert reduce_check(s, reduce_g) == 0
