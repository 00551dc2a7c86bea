import pytest
from hypothesis import given
from hypothesis import strategies as st

from cata import analysis, catalog
from cata.oracle import enumerate_trees, eval_cata
from cata.script import ASSOCIATIVE, UNCLASSIFIED, monotonic

from conftest import needs_z3


def test_catalan_small_values():
    assert [analysis.catalan(n) for n in range(8)] == [1, 1, 2, 5, 14, 42, 132, 429]
    with pytest.raises(ValueError):
        analysis.catalan(-1)


@given(st.integers(1, 200))
def test_catalan_recurrence(n):
    c = analysis.catalan
    assert c(n) == sum(c(i) * c(n - 1 - i) for i in range(n))


def test_num_shapes_rejects_even_sizes():
    assert analysis.num_shapes(7) == 5
    for bad in (0, 4, -3):
        with pytest.raises(ValueError):
            analysis.num_shapes(bad)


@pytest.mark.parametrize("p, h", [(0, 0), (1, 2), (2, 3), (4, 3), (5, 4), (14, 5), (10000, 10), (50000, 11)])
def test_catalan_height_is_the_least_h_with_catalan_above_p(p, h):
    assert analysis.catalan_height(p) == h
    assert analysis.catalan(h) > p
    assert h == 0 or analysis.catalan(h - 1) <= p


def test_bound_modes():
    assert analysis.unroll_bound(ASSOCIATIVE, 3).mode == "catalan"
    r = analysis.unroll_bound(monotonic(2), 3)
    assert (r.mode, r.depth) == ("linear", 5)
    with pytest.raises(analysis.NoBound):
        analysis.unroll_bound(UNCLASSIFIED, 3)
    with pytest.raises(ValueError):
        analysis.unroll_bound(ASSOCIATIVE, -1)


def test_range_check_needs_a_predicate():
    with pytest.raises(analysis.AnalysisError):
        analysis.check_range_overapprox(catalog.builtin("Sum"), None)


def test_combination_rejects_duplicates_and_mixed_inputs():
    size = catalog.builtin("SizeI")
    with pytest.raises(analysis.AnalysisError):
        analysis.combine_catas([size, size])
    with pytest.raises(analysis.AnalysisError):
        analysis.combine_catas([size, catalog.builtin("DW")])
    with pytest.raises(analysis.AnalysisError):
        analysis.combine_catas([])


def test_product_agrees_with_components_on_every_small_tree():
    parts = [catalog.builtin(n) for n in ("Set", "SizeI", "Min", "Sum")]
    product, tup = analysis.combine_catas(parts, "Quad")
    assert tup.name == "Quad_Tuple" and tup.constructors[0].name == "mkTuple_4"
    sig = analysis.combined_signature(product, tup, catalog.signature())
    for t in enumerate_trees(7, (0, 1, 2), parts[0].input, sig):
        combined = eval_cata(product, t, sig)
        assert combined.args == tuple(eval_cata(c, t, sig) for c in parts)


@needs_z3
def test_semantic_counterexample_for_height(z3_config):
    r = analysis.detect_associative_semantic(catalog.builtin("Height"), z3_config, catalog.signature())
    assert r.result == "fails"
    assert "c1" in r.counterexample
    assert r.line().startswith("ASSOCIATIVE-SEMANTIC FAILS")


@needs_z3
def test_range_step_failure(z3_config):
    from cata.frontend import parse_term
    from cata.script import RangePred

    size = catalog.builtin("SizeI")
    c = size.range_pred.param
    narrow = size.with_range(RangePred(c, parse_term("(<= c 3)", catalog.signature(), {"c": c})))
    r = analysis.check_range_overapprox(narrow, z3_config, catalog.signature())
    assert r.result == "fails" and r.note == "inductive step"


@needs_z3
def test_product_is_associative(z3_config):
    product, tup = analysis.combine_catas([catalog.builtin("Set"), catalog.builtin("SizeI")])
    sig = analysis.combined_signature(product, tup, catalog.signature())
    verdicts = analysis.classify(product, z3_config, sig)
    assert verdicts["syntactic"].holds and verdicts["semantic"].holds
