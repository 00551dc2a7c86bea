import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cata import catalog
from cata.frontend import (
    FrontendError,
    ParseError,
    ValidationError,
    lower_script,
    parse_script,
    parse_term,
    print_script,
    print_term,
    read_sexprs,
)
from cata.terms import INT, CataApp, Ctor, Lit, Sel, TheoryApp, Var, free_vars
from cata.terms import Test as IsCtor

TREE = "(declare-datatypes ((Tree 0)) (((Leaf) (Node (left Tree) (elem Int) (right Tree)))))\n"
SIZE = """(define-catamorphism SizeI ((t Tree)) Int
  (ite (is-Leaf t) 0 (+ (SizeI (left t)) 1 (SizeI (right t)))))
(declare-range SizeI ((c Int)) (>= c 0))
"""


def script(body: str, extra: str = SIZE):
    return parse_script(TREE + extra + body + "\n(check-sat)\n")


def test_sumtree_fixture_parses(fixture_text):
    s = parse_script(fixture_text("sumtree.smt2"))
    assert set(s.catas) == {"SumTree"}
    assert len(s.assertions) == 2
    assert {v.name for v in free_vars(s.formula)} == {"t1", "t2", "t3"}


def test_legacy_and_new_datatype_syntax_agree():
    old = parse_script("(declare-datatypes () ((Tree Leaf (Node (left Tree) (elem Int) (right Tree)))))\n"
                       "(declare-fun t () Tree)(assert (is-Leaf t))(check-sat)")
    new = parse_script(TREE + "(declare-fun t () Tree)(assert (is-Leaf t))(check-sat)")
    assert old.signature.datatypes["Tree"] == new.signature.datatypes["Tree"]


def test_catamorphism_cases_are_split_by_constructor():
    s = script("(declare-fun t () Tree)(assert (> (SizeI t) 1))")
    cata = s.catas["SizeI"]
    assert [c.ctor for c in cata.cases] == ["Leaf", "Node"]
    assert cata.empty == Lit(0, INT)
    assert cata.range_pred is not None and not cata.range_pred.is_trivial


def test_term_kinds():
    s = script("(declare-fun t () Tree)(declare-fun x () Int)(assert true)")
    sig = s.signature
    assert isinstance(parse_term("(SizeI t)", sig, {"t": Var("t", sig.resolve_sort("Tree"))}), CataApp)
    t = Var("t", sig.resolve_sort("Tree"))
    env = {"t": t}
    assert isinstance(parse_term("(left t)", sig, env), Sel)
    assert isinstance(parse_term("(is-Node t)", sig, env), IsCtor)
    assert isinstance(parse_term("(Node t 1 Leaf)", sig, env), Ctor)
    assert isinstance(parse_term("(+ 1 2 3)", sig), TheoryApp)


@pytest.mark.parametrize("text, fragment", [
    ("(assert (SizeI 3))", "sort"),
    ("(assert (undefined_fn 1))", "undefined_fn"),
    ("(assert (= 1 true))", "sort"),
])
def test_ill_formed_terms_are_rejected(text, fragment):
    with pytest.raises((ValidationError, Exception)) as err:
        script(text)
    assert fragment.lower() in str(err.value).lower()


def test_unbalanced_parenthesis_reports_position():
    with pytest.raises(ParseError) as err:
        parse_script(TREE + "(declare-fun t () Tree)\n(assert (is-Leaf t)\n(check-sat)")
    assert err.value.span is not None


def test_unknown_command():
    with pytest.raises(FrontendError) as err:
        parse_script(TREE + "(frobnicate)\n(check-sat)")
    assert "frobnicate" in str(err.value)


def test_missing_check_sat():
    with pytest.raises(ValidationError):
        parse_script(TREE + "(declare-fun t () Tree)(assert (is-Leaf t))")
    assert parse_script(TREE + "(declare-fun t () Tree)(assert (is-Leaf t))", require_check_sat=False)


def test_catamorphism_must_recurse_on_children_only():
    bad = """(define-catamorphism Bad ((t Tree)) Int
  (ite (is-Leaf t) 0 (Bad t)))
"""
    with pytest.raises(ValidationError):
        script("(declare-fun t () Tree)(assert (= (Bad t) 0))", bad)


def test_print_parse_round_trip_of_catalog():
    text = catalog.script_text(*catalog.BUILTIN_NAMES)
    s = parse_script(text, require_check_sat=False)
    again = parse_script(print_script(s), require_check_sat=False)
    assert set(again.catas) == set(s.catas)
    for name in s.catas:
        assert again.catas[name].cases == s.catas[name].cases


def test_lowered_script_has_no_catamorphism_commands(fixture_text):
    out = lower_script(parse_script(fixture_text("sumtree.smt2")))
    assert "define-catamorphism" not in out
    assert "declare-fun SumTree" in out
    assert "SumTree_GeneratedCatDefineFun" in out
    assert read_sexprs(out)


def test_real_literals_print_as_decimals():
    assert print_term(Lit(5, INT)) == "5"
    s = parse_script(TREE.replace("Int", "Real") + "(declare-fun x () Real)(assert (= x 2.5))(check-sat)")
    assert "2.5" in print_term(s.formula)


def test_negative_integers_print_as_unary_minus():
    assert print_term(Lit(-3, INT)) == "(- 3)"


def test_quoted_symbols_round_trip():
    s = parse_script(TREE + "(declare-fun |odd name| () Int)(assert (= |odd name| 1))(check-sat)")
    assert "|odd name|" in print_term(s.formula)


@settings(max_examples=100, deadline=None)
@given(st.recursive(st.integers(-50, 50).map(lambda n: str(n) if n >= 0 else f"(- {-n})"),
                    lambda kids: st.tuples(st.sampled_from(["+", "-", "*"]), kids, kids)
                    .map(lambda t: f"({t[0]} {t[1]} {t[2]})"), max_leaves=8))
def test_integer_term_print_parse_is_identity(text):
    sig = script("(assert true)").signature
    t = parse_term(text, sig)
    assert parse_term(print_term(t), sig) == t
