import pytest
from hypothesis import given
from hypothesis import strategies as st

from cata.terms import (
    BOOL,
    FALSE,
    INT,
    TRUE,
    SortError,
    TheoryApp,
    Var,
    contains,
    datatype_sort,
    free_vars,
    int_lit,
    mk_and,
    mk_eq,
    mk_ite,
    mk_or,
    set_sort,
    substitute,
    term_size,
    transform,
)

X, Y = Var("x", INT), Var("y", INT)


def plus(a, b):
    return TheoryApp("+", (a, b), INT)


def test_sorts():
    assert str(set_sort(INT)) == "(Set Int)"
    assert datatype_sort("Tree").is_datatype
    assert not INT.is_datatype


def test_connective_shortcuts():
    assert mk_and() == TRUE and mk_or() == FALSE
    assert mk_and(mk_eq(X, Y)) == mk_eq(X, Y)
    with pytest.raises(SortError):
        mk_eq(X, TRUE)
    with pytest.raises(SortError):
        mk_ite(X, X, Y)


def test_substitute_and_free_vars():
    t = plus(X, plus(Y, X))
    assert free_vars(t) == {X, Y}
    s = substitute(t, {X: int_lit(1)})
    assert free_vars(s) == {Y}
    assert contains(s, int_lit(1)) and not contains(s, X)


def test_transform_replaces_top_down():
    t = plus(X, Y)
    out = transform(t, lambda u: int_lit(0) if u == X else None)
    assert out == plus(int_lit(0), Y)


terms = st.recursive(st.sampled_from([X, Y, int_lit(0), int_lit(1)]),
                     lambda kids: st.tuples(kids, kids).map(lambda p: plus(*p)), max_leaves=10)


@given(terms)
def test_identity_substitution(t):
    assert substitute(t, {}) == t
    assert substitute(t, {X: X}) == t


@given(terms)
def test_renaming_round_trip(t):
    z = Var("z", INT)
    renamed = substitute(t, {X: z})
    assert X not in free_vars(renamed)
    assert substitute(renamed, {z: X}) == t
    assert term_size(renamed) == term_size(t)


@given(terms)
def test_terms_are_hashable_values(t):
    assert {t: 1}[substitute(t, {})] == 1
    assert mk_eq(t, t).sort == BOOL
