import pytest

from conftest import FIXTURES
from attrgram import GrammarError, assign_ids, load_grammar_text, parse_grammar, prepare, validate
from attrgram.model import PackedId, SymbolKind
from attrgram.validation import CapacityError, check_capacity

BASE = """%%
%token CIRCLE
%attribute color, char*, "red", "green", "blue"
%symbol circle, color, color
%%
CIRCLE : "circle" color
%%
circle -> CIRCLE
%%
"""


def codes(text):
    return validate(parse_grammar(text)).codes()


def test_fixture_grammars_are_clean():
    for path in FIXTURES.glob("*.grammar"):
        assert validate(parse_grammar(path.read_text(), str(path))).ok, path


def test_base_is_clean():
    assert codes(BASE) == []


def test_missing_representation_is_r3():
    assert codes(BASE.replace('CIRCLE : "circle" color\n', "")) == ["R3"]


def test_duplicate_representation_is_r3():
    assert codes(BASE.replace('CIRCLE : "circle" color\n',
                              'CIRCLE : "circle" color\nCIRCLE : "c" color\n')) == ["R3"]


def test_duplicate_symbol_is_r4():
    assert codes(BASE.replace("%symbol circle, color, color\n",
                              "%symbol circle, color, color\n%symbol circle\n")) == ["R4"]


def test_symbol_and_attribute_share_namespace():
    assert codes(BASE.replace("%token CIRCLE", "%token CIRCLE\n%symbol color")) == ["R4"]


def test_two_single_terminal_alternatives_is_r1():
    text = BASE.replace("%token CIRCLE", "%token CIRCLE, DISC").replace(
        'CIRCLE : "circle" color', 'CIRCLE : "circle" color\nDISC : "disc" color').replace(
        "circle -> CIRCLE", "circle -> CIRCLE | DISC")
    assert codes(text) == ["R1"]


def test_terminal_owned_twice_is_r2():
    text = BASE.replace("%symbol circle, color, color",
                        "%symbol circle, color, color\n%symbol ring, color, color").replace(
        "circle -> CIRCLE", "circle -> CIRCLE\nring -> CIRCLE")
    assert codes(text) == ["R2"]


def test_errors_are_collected_not_first_only():
    text = BASE.replace('CIRCLE : "circle" color\n', "").replace(
        "%symbol circle, color, color\n", "%symbol circle, color, color\n%symbol circle\n")
    assert sorted(codes(text)) == ["R3", "R4"]


def test_dangling_references():
    text = BASE.replace("circle -> CIRCLE", "circle -> CIRCLE | square")
    assert codes(text) == ["REF"]
    text = BASE.replace("%symbol circle, color, color", "%symbol circle, colour, color")
    assert "REF" in codes(text)


def test_unknown_slot_in_representation():
    assert codes(BASE.replace('"circle" color', '"circle" hue')) == ["SLOT"]


def test_domain_checks():
    assert codes(BASE.replace('"red", "green", "blue"', '"red", "red"')) == ["DOM"]
    bad = BASE.replace("%token CIRCLE", "%token CIRCLE\n%attribute n, int, !![0-9]*!!")
    assert codes(bad) == ["DOM"]


def test_translation_rules():
    two = BASE.replace("%symbol circle, color, color",
                       "%symbol circle, color, color\n%symbol shape, color, color\n"
                       "%symbol blob")
    assert codes(two + "circle <-> shape\n") == []
    assert codes(two + "circle <-> shape blob\n") == ["T1"]
    assert codes(two + "circle <-> shape\ncircle <-> blob\n") == ["T2"]
    assert codes(two + "circle <-> shape { revert; }\n") == ["T3"]
    assert codes(two + "circle <-> CIRCLE\n") == ["KIND"]


def test_action_errors_are_reported_with_location():
    text = BASE.replace("circle -> CIRCLE", "circle -> CIRCLE\n   | circle { $3.color = 1; }")
    report = validate(parse_grammar(text, "g"))
    assert report.codes() == ["ACT"]
    issue = next(iter(report))
    assert issue.loc.line == 9


def test_prepare_raises_with_every_issue():
    text = BASE.replace('CIRCLE : "circle" color\n', "").replace(
        "circle -> CIRCLE", "circle -> CIRCLE | square")
    with pytest.raises(GrammarError) as info:
        prepare(parse_grammar(text))
    assert sorted(i.code for i in info.value.issues) == ["R3", "REF"]


def test_restrictions_two_and_three_by_count():
    g = load_grammar_text((FIXTURES / "mips_x86.grammar").read_text())
    for t in g.terminals():
        assert sum(1 for r in g.representations if r.terminal == t.name) == 1
        assert sum(1 for r in g.expansions for alt in r.alternatives
                   if alt.rhs == (t.name,)) == 1


# -- ids ---------------------------------------------------------------------

ORDER = """%%
%symbol first
%token A, B
%symbol second
%%
A : "a"
B : "b"
%%
first -> A
second -> B
%%
"""


def test_first_terminal_and_first_nonterminal():
    g = load_grammar_text(ORDER)
    a = g.symbol("A").packed_id
    assert a.is_terminal and a.numeric_id == 0
    first = g.symbol("first").packed_id
    assert not first.is_terminal
    assert first.kind is SymbolKind.NONTERMINAL
    ids = [s.numeric_id for s in g.symbols]
    assert len(set(ids)) == len(ids)


def test_ids_are_deterministic():
    one = assign_ids(parse_grammar(ORDER))
    two = assign_ids(parse_grammar(ORDER))
    assert one == two
    assert [s.packed_id for s in one.symbols] == [s.packed_id for s in two.symbols]
    assert load_grammar_text(ORDER) == load_grammar_text(ORDER)


def test_capacity():
    check_capacity(2**31 - 1)
    with pytest.raises(CapacityError):
        check_capacity(2**31)
    with pytest.raises(CapacityError):
        assign_ids(parse_grammar(ORDER), id_bits=1)


def test_rule_table_maps_ids_to_rule_ids():
    g = load_grammar_text(ORDER)
    assert g.rule_ids_for("first") == (0,)
    assert g.rule_ids_for(g.symbol("second").packed_id) == (1,)
    assert isinstance(g.symbol("B").packed_id, PackedId)
