from collections import Counter

import pytest

from cata import catalog
from cata.frontend import parse_script
from cata.oracle import (
    OracleError,
    brute_force_sat,
    count_st,
    enumerate_trees,
    eval_cata,
    format_value,
    inorder_elements,
    leaf,
    minbeta_bounded,
    node,
    shape,
    shapes_of_size,
)

SAMPLE = catalog.sample_tree()


@pytest.mark.parametrize("name, expected", [
    ("Set", "{1, 2}"),
    ("SizeI", "2"),
    ("Height", "2"),
    ("Sum", "3"),
    ("List_inorder", "(1 2)"),
    ("List_preorder", "(2 1)"),
])
def test_catalog_values_on_the_sample_tree(name, expected):
    v = eval_cata(catalog.builtin(name), SAMPLE)
    assert format_value(v) == expected


def test_min_on_the_sample_tree():
    v = eval_cata(catalog.builtin("Min"), SAMPLE)
    assert "1" in format_value(v)


def test_tree_sizes_are_odd_and_height_bounded():
    for t in enumerate_trees(9, (0, 1)):
        assert t.size % 2 == 1
        assert t.size >= 2 * t.height + 1


def test_enumeration_counts():
    by_size = Counter(t.size for t in enumerate_trees(7, (0, 1)))
    # shapes times element assignments: Catalan(n) * 2^n for n internal nodes
    assert by_size == {1: 1, 3: 2, 5: 8, 7: 40}


def test_shapes():
    assert len(shapes_of_size(7)) == 5
    assert len({shape(t) for t in enumerate_trees(7, (0, 1)) if t.size == 7}) == 5


def test_inorder_elements():
    t = node(node(leaf(), 1, leaf()), 2, node(leaf(), 3, leaf()))
    assert inorder_elements(t) == [1, 2, 3]


def test_count_st():
    assert [count_st(h) for h in range(4)] == [1, 2, 5, 26]
    with pytest.raises(ValueError):
        count_st(-1)


def test_minbeta_grows_with_height():
    size = catalog.builtin("SizeI")
    assert minbeta_bounded(size, 1, 7, (0,)) == 1
    assert minbeta_bounded(size, 2, 7, (0,)) >= 2
    with pytest.raises(OracleError):
        minbeta_bounded(size, 9, 5, (0,))


HEAD = """(declare-datatypes ((Tree 0)) (((Leaf) (Node (left Tree) (elem Int) (right Tree)))))
(define-catamorphism SizeI ((t Tree)) Int
  (ite (is-Leaf t) 0 (+ (SizeI (left t)) 1 (SizeI (right t)))))
(declare-fun t () Tree)
"""


def _phi(body):
    s = parse_script(HEAD + f"(assert {body})(check-sat)")
    return s.formula, s.signature


def test_brute_force_finds_a_witness():
    phi, sig = _phi("(= (SizeI t) 2)")
    r = brute_force_sat(phi, sig, 5, (0,))
    assert r.sat
    (value,) = r.witness.values()
    assert value.size == 5


def test_brute_force_respects_the_size_bound():
    phi, sig = _phi("(= (SizeI t) 3)")
    assert not brute_force_sat(phi, sig, 5, (0,)).sat
    assert brute_force_sat(phi, sig, 7, (0,)).sat


def test_selector_on_a_leaf():
    phi, sig = _phi("(and (is-Leaf t) (= (SizeI (left t)) 1))")
    assert brute_force_sat(phi, sig, 5, (0,), selector_mode="total").sat
    assert not brute_force_sat(phi, sig, 5, (0,), selector_mode="strict").sat


def test_result_text():
    phi, sig = _phi("(= (SizeI t) 7)")
    assert str(brute_force_sat(phi, sig, 3, (0,))) == "no-model-within-bounds"
