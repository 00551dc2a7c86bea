"""Sorted terms of the parametric logic.

Formulas are Bool-sorted terms: the connectives ``and``, ``or``, ``not``,
``=>``, ``xor``, ``=`` (iff on Bool), ``ite`` and ``distinct`` are theory
applications like any other operator.  Every node records its sort; the
nodes are immutable and hashable so they can be used as dictionary keys
(frontiers, substitutions, memo tables).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Union


class SortError(Exception):
    """Ill-sorted term.  ``path`` lists argument indices from the root."""

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        self.message = message
        self.path = tuple(path)
        where = f" at argument path {list(self.path)}" if self.path else ""
        super().__init__(f"{message}{where}")

    def nested(self, index: int) -> "SortError":
        return SortError(self.message, (index,) + self.path)


SORT_KINDS = ("datatype", "element", "collection", "boolean", "builtin")


@dataclass(frozen=True)
class Sort:
    name: str
    params: tuple["Sort", ...] = ()
    kind: str = field(default="builtin", compare=False)

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return "(" + " ".join([self.name] + [str(p) for p in self.params]) + ")"

    @property
    def is_datatype(self) -> bool:
        return self.kind == "datatype"


BOOL = Sort("Bool", kind="boolean")
INT = Sort("Int")
REAL = Sort("Real")
STRING = Sort("String")


def set_sort(elem: Sort) -> Sort:
    return Sort("Set", (elem,), kind="collection")


def bag_sort(elem: Sort) -> Sort:
    return Sort("Bag", (elem,), kind="collection")


def seq_sort(elem: Sort) -> Sort:
    return Sort("Seq", (elem,), kind="collection")


def datatype_sort(name: str) -> Sort:
    return Sort(name, kind="datatype")


class Term:
    """Base of all term nodes."""

    sort: Sort

    def children(self) -> tuple["Term", ...]:
        return ()

    def with_children(self, children: tuple["Term", ...]) -> "Term":
        return self

    def __str__(self) -> str:
        from .frontend import print_term

        return print_term(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str
    sort: Sort

    def __repr__(self) -> str:
        return f"Var({self.name!r}, {self.sort})"


LitValue = Union[bool, int, Fraction, str]


@dataclass(frozen=True, repr=False)
class Lit(Term):
    value: LitValue
    sort: Sort

    def __post_init__(self):
        if self.sort == REAL and not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    def __repr__(self) -> str:
        return f"Lit({self.value!r}, {self.sort})"


@dataclass(frozen=True, repr=False)
class Ctor(Term):
    """Constructor application; nullary constructors have ``args == ()``."""

    name: str
    args: tuple[Term, ...]
    sort: Sort

    def children(self):
        return self.args

    def with_children(self, children):
        return Ctor(self.name, tuple(children), self.sort)

    def __repr__(self) -> str:
        return f"Ctor({self.name!r}, {list(self.args)!r})"


@dataclass(frozen=True, repr=False)
class Sel(Term):
    name: str
    arg: Term
    sort: Sort

    def children(self):
        return (self.arg,)

    def with_children(self, children):
        (arg,) = children
        return Sel(self.name, arg, self.sort)

    def __repr__(self) -> str:
        return f"Sel({self.name!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class Test(Term):
    """Tester ``is-<ctor>``; always Bool-sorted."""

    ctor: str
    arg: Term
    sort: Sort = BOOL

    def children(self):
        return (self.arg,)

    def with_children(self, children):
        (arg,) = children
        return Test(self.ctor, arg)

    def __repr__(self) -> str:
        return f"Test({self.ctor!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class CataApp(Term):
    cata: str
    arg: Term
    sort: Sort

    def children(self):
        return (self.arg,)

    def with_children(self, children):
        (arg,) = children
        return CataApp(self.cata, arg, self.sort)

    def __repr__(self) -> str:
        return f"CataApp({self.cata!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class FunApp(Term):
    """Application of a declared (uninterpreted) or defined function."""

    name: str
    args: tuple[Term, ...]
    sort: Sort

    def children(self):
        return self.args

    def with_children(self, children):
        return FunApp(self.name, tuple(children), self.sort)

    def __repr__(self) -> str:
        return f"FunApp({self.name!r}, {list(self.args)!r})"


@dataclass(frozen=True, repr=False)
class TheoryApp(Term):
    """Operator of the element/collection theories (including Boolean
    connectives).  Nullary qualified constants such as
    ``(as set.empty (Set Int))`` carry their sort and no arguments."""

    op: str
    args: tuple[Term, ...]
    sort: Sort

    def children(self):
        return self.args

    def with_children(self, children):
        return TheoryApp(self.op, tuple(children), self.sort)

    def __repr__(self) -> str:
        return f"TheoryApp({self.op!r}, {list(self.args)!r})"


Formula = Term

TRUE = Lit(True, BOOL)
FALSE = Lit(False, BOOL)


def iter_subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def transform(t: Term, fn: Callable[[Term], Term | None]) -> Term:
    """Rebuild ``t`` top-down: ``fn`` may return a replacement for a node
    (which is not descended into) or ``None`` to recurse."""
    replacement = fn(t)
    if replacement is not None:
        return replacement
    kids = t.children()
    if not kids:
        return t
    new = tuple(transform(k, fn) for k in kids)
    if all(a is b for a, b in zip(new, kids)):
        return t
    return t.with_children(new)


def transform_bottom_up(t: Term, fn: Callable[[Term], Term]) -> Term:
    kids = t.children()
    if kids:
        new = tuple(transform_bottom_up(k, fn) for k in kids)
        if not all(a is b for a, b in zip(new, kids)):
            t = t.with_children(new)
    return fn(t)


def substitute(t: Term, bindings: Mapping[Term, Term]) -> Term:
    """Simultaneous substitution.

    Keys are usually variables but any subterm may be replaced (the
    normalizer replaces selector applications).  There are no binders in
    the term language, so substitution is trivially capture-free.
    """
    for key, value in bindings.items():
        if key.sort != value.sort:
            raise SortError(
                f"substitution of {key} (sort {key.sort}) by a term of sort {value.sort}"
            )
    if not bindings:
        return t
    return transform(t, bindings.get)


def free_vars(t: Term) -> set[Var]:
    return {s for s in iter_subterms(t) if isinstance(s, Var)}


def term_size(t: Term) -> int:
    return sum(1 for _ in iter_subterms(t))


def contains(t: Term, sub: Term) -> bool:
    return any(s == sub for s in iter_subterms(t))


# --- small constructors for Boolean structure -------------------------------

def mk_not(a: Term) -> Term:
    return TheoryApp("not", (a,), BOOL)


def mk_and(*args: Term) -> Term:
    args = tuple(args)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return TheoryApp("and", args, BOOL)


def mk_or(*args: Term) -> Term:
    args = tuple(args)
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return TheoryApp("or", args, BOOL)


def mk_eq(a: Term, b: Term) -> Term:
    if a.sort != b.sort:
        raise SortError(f"= between {a.sort} and {b.sort}")
    return TheoryApp("=", (a, b), BOOL)


def mk_neq(a: Term, b: Term) -> Term:
    return mk_not(mk_eq(a, b))


def mk_ite(c: Term, a: Term, b: Term) -> Term:
    if c.sort != BOOL or a.sort != b.sort:
        raise SortError("ill-sorted ite")
    return TheoryApp("ite", (c, a, b), a.sort)


def int_lit(n: int) -> Lit:
    return Lit(int(n), INT)


def real_lit(x) -> Lit:
    return Lit(Fraction(x), REAL)
