"""Catamorphism analysis: shape combinatorics, unrolling bounds,
associativity and range checks against a solver, and componentwise
combination of associative catamorphisms."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from . import backend as be
from .frontend import print_datatypes, print_sort, print_symbol, print_term
from .script import (
    ASSOCIATIVE,
    AssocDecomposition,
    CataCase,
    CataClass,
    CataDef,
    Constructor,
    DatatypeDecl,
    RangePred,
    Signature,
    find_assoc_decomposition,
)
from .terms import (
    BOOL,
    TRUE,
    CataApp,
    Ctor,
    FunApp,
    Sel,
    Term,
    TheoryApp,
    Var,
    datatype_sort,
    iter_subterms,
    mk_and,
    mk_not,
    mk_or,
)


class AnalysisError(Exception):
    pass


class NoBound(AnalysisError):
    """The catamorphism's class admits no unrolling bound."""


# --- combinatorics -----------------------------------------------------------------

@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("catalan needs n >= 0")
    c = 1
    for k in range(n):
        # C(k+1) = 2(2k+1)/(k+2) * C(k); the product is always divisible
        c = c * 2 * (2 * k + 1)
        assert c % (k + 2) == 0
        c //= k + 2
    return c


def num_shapes(size: int) -> int:
    if size < 1 or size % 2 == 0:
        raise ValueError(f"tree sizes are odd and positive, got {size}")
    return catalan((size - 1) // 2)


@dataclass(frozen=True)
class BoundReport:
    p: int
    mode: str  # linear | catalan
    depth: int
    justification: str

    def __str__(self) -> str:
        return f"bound {self.depth} ({self.mode}, p={self.p}, {self.justification})"


def catalan_height(p: int) -> int:
    h = 0
    while catalan(h) <= p:
        h += 1
    return h


def unroll_bound(cls: CataClass, p: int) -> BoundReport:
    if p < 0:
        raise ValueError("p must be non-negative")
    if cls.kind == "associative":
        return BoundReport(p, "catalan", catalan_height(p), "associative")
    if cls.kind == "monotonic":
        return BoundReport(p, "linear", cls.abstraction_height + p, f"monotonic({cls.abstraction_height})")
    raise NoBound("unclassified catamorphism: no unrolling bound can be claimed")


# --- solver-backed checks ----------------------------------------------------------

@dataclass(frozen=True)
class AnalysisVerdict:
    property: str  # associative-syntactic | associative-semantic | range-overapprox
    result: str  # holds | fails | unknown
    counterexample: str | None = None
    note: str | None = None

    @property
    def holds(self) -> bool:
        return self.result == "holds"

    def line(self) -> str:
        out = f"{self.property.upper()} {self.result.upper()}"
        if self.note:
            out += f" ({self.note})"
        if self.counterexample:
            out += " " + " ".join(self.counterexample.split())
        return out


def _dependencies(cata: CataDef, sig: Signature | None) -> tuple[list[str], set[str]]:
    """Declarations of the uninterpreted functions and datatypes the
    catamorphism's result-level terms mention."""
    terms = [c.body for c in cata.cases]
    if cata.range_pred:
        terms.append(cata.range_pred.body)
    funs: set[str] = set()
    for t in terms:
        for s in iter_subterms(t):
            if isinstance(s, FunApp):
                funs.add(s.name)
            if isinstance(s, CataApp):
                raise AnalysisError(f"{cata.name}: result-level terms mention a catamorphism")
    return sorted(funs), funs


def _session_lines(cata: CataDef, sig: Signature | None, dialect: str, extra_dts=()) -> list[str]:
    lines = []
    dts = []
    if sig is not None:
        dts.extend(sig.datatypes.values())
    dts.extend(extra_dts)
    if dts:
        lines.append(print_datatypes(dts, dialect))
    names, _ = _dependencies(cata, sig)
    for name in names:
        if sig is None or name not in sig.functions:
            raise AnalysisError(f"{cata.name}: unknown function {name}")
        f = sig.functions[name]
        if f.is_defined:
            params = " ".join(f"({print_symbol(p.name)} {print_sort(p.sort, dialect)})" for p in f.params)
            lines.append(f"(define-fun {print_symbol(name)} ({params}) {print_sort(f.result, dialect)} "
                         f"{print_term(f.body, dialect)})")
        else:
            args = " ".join(print_sort(s, dialect) for s in f.arg_sorts)
            lines.append(f"(declare-fun {print_symbol(name)} ({args}) {print_sort(f.result, dialect)})")
    return lines


def _query(name: str, cata: CataDef, sig: Signature | None, config: be.SolverConfig,
           consts: list[Var], goal: Term, note: str | None = None) -> AnalysisVerdict:
    dialect = config.printer_dialect
    try:
        with be.start(config) as s:
            for line in _session_lines(cata, sig, dialect):
                s.command(line)
            for v in consts:
                s.command(f"(declare-fun {print_symbol(v.name)} () {print_sort(v.sort, dialect)})")
            s.assert_text(print_term(goal, dialect))
            r = s.check_sat(None, values=[print_symbol(v.name) for v in consts])
    except be.BackendError as err:
        return AnalysisVerdict(name, "unknown", note=f"backend: {err}")
    if r.verdict == "unsat":
        return AnalysisVerdict(name, "holds", note=note)
    if r.verdict == "sat":
        return AnalysisVerdict(name, "fails", r.values_text, note)
    return AnalysisVerdict(name, "unknown", note=note)


def _range(cata: CataDef, value: Term) -> Term:
    if cata.range_pred is None:
        return TRUE
    return cata.range_pred.apply(value)


def _consts(cata: CataDef, n: int, prefix: str = "c") -> list[Var]:
    return [Var(f"{prefix}{i}", cata.result) for i in range(1, n + 1)]


def _elem_sort(cata: CataDef):
    roles = cata.roles
    if roles is None:
        raise AnalysisError(f"{cata.name}: input is not a binary tree")
    return roles.elem_sort


def detect_associative_syntactic(cata: CataDef, config: be.SolverConfig,
                                 sig: Signature | None = None) -> AnalysisVerdict:
    """Is the operator of the decomposition associative on the range?"""
    dec = cata.assoc or find_assoc_decomposition(cata)
    if dec is None:
        return AnalysisVerdict("associative-syntactic", "fails",
                               note="combine has no decomposition into an operator and an element map")
    a, b, c = _consts(cata, 3)
    goal = mk_and(_range(cata, a), _range(cata, b), _range(cata, c),
                  mk_not(_eq(dec.op(dec.op(a, b), c), dec.op(a, dec.op(b, c)))))
    return _query("associative-syntactic", cata, sig, config, [a, b, c], goal)


def detect_associative_semantic(cata: CataDef, config: be.SolverConfig,
                                sig: Signature | None = None) -> AnalysisVerdict:
    """Rotation query: does combine give the same value for both nestings
    of three subtrees?  Holds relative to the range predicate."""
    c1, c2, c3 = _consts(cata, 3)
    es = _elem_sort(cata)
    e1, e2 = Var("e1", es), Var("e2", es)
    right_nested = cata.combine(c1, e1, cata.combine(c2, e2, c3))
    left_nested = cata.combine(cata.combine(c1, e1, c2), e2, c3)
    goal = mk_and(_range(cata, c1), _range(cata, c2), _range(cata, c3),
                  mk_not(_eq(right_nested, left_nested)))
    return _query("associative-semantic", cata, sig, config, [c1, c2, c3, e1, e2], goal,
                  note="relative to the range predicate")


def check_range_overapprox(cata: CataDef, config: be.SolverConfig,
                           sig: Signature | None = None) -> AnalysisVerdict:
    """Inductive check that the range predicate covers every value: the
    base case first, then the step over combine."""
    if cata.range_pred is None:
        raise AnalysisError(f"{cata.name} has no range predicate")
    name = "range-overapprox"
    empty = Var("empty", cata.result)
    base = _query(name, cata, sig, config, [empty],
                  mk_and(_eq(empty, cata.empty), mk_not(cata.range_pred.apply(cata.empty))))
    if base.result != "holds":
        note = "base case: the empty value is outside the range" if base.result == "fails" else base.note
        return replace(base, note=note)
    c1, c2 = _consts(cata, 2)
    e = Var("e", _elem_sort(cata))
    step = mk_and(cata.range_pred.apply(c1), cata.range_pred.apply(c2),
                  mk_not(cata.range_pred.apply(cata.combine(c1, e, c2))))
    r = _query(name, cata, sig, config, [c1, c2, e], step)
    if r.result == "fails":
        return replace(r, note="inductive step")
    return r


def _eq(a: Term, b: Term) -> Term:
    return TheoryApp("=", (a, b), BOOL)


# --- combination ---------------------------------------------------------------------

TUPLE_CTOR = "mkTuple_{}"


def tuple_datatype(name: str, sorts, arity_tag: str | None = None) -> DatatypeDecl:
    tag = arity_tag or str(len(sorts))
    fields = tuple((f"proj_{i}", s) for i, s in enumerate(sorts, 1))
    return DatatypeDecl(name, (Constructor(TUPLE_CTOR.format(tag), fields),))


def combine_catas(catas: list[CataDef], name: str | None = None) -> tuple[CataDef, DatatypeDecl]:
    """The product catamorphism over a fresh tuple datatype, computed
    componentwise.  Every component must be declared associative."""
    if not catas:
        raise AnalysisError("nothing to combine")
    names = [c.name for c in catas]
    if len(set(names)) != len(names):
        raise AnalysisError("catamorphisms to combine must have distinct names")
    for c in catas:
        if not c.is_associative:
            raise AnalysisError(
                f"{c.name} is not associative: the product of a non-associative catamorphism "
                "may lose monotonicity, so completeness would not carry over")
        if c.input != catas[0].input:
            raise AnalysisError(f"{c.name} is over {c.input.name}, expected {catas[0].input.name}")
    name = name or "x".join(names)
    tup = tuple_datatype(f"{name}_Tuple", [c.result for c in catas])
    tsort = datatype_sort(tup.name)
    ctor = tup.constructors[0].name
    roles = catas[0].roles
    if roles is None:
        raise AnalysisError("combination is defined over binary trees")

    def mk(parts):
        return Ctor(ctor, tuple(parts), tsort)

    def proj(i, v):
        return Sel(f"proj_{i}", v, catas[i - 1].result)

    left = Var("@left", tsort)
    elem = Var("@elem", roles.elem_sort)
    right = Var("@right", tsort)
    node_body = mk(c.combine(proj(i, left), elem, proj(i, right)) for i, c in enumerate(catas, 1))
    cases = (CataCase(roles.leaf, (), mk(c.empty for c in catas)),
             CataCase(roles.node, (left, elem, right), node_body))
    x, y, e = Var("@x", tsort), Var("@y", tsort), Var("@e", roles.elem_sort)
    decs = [c.assoc or find_assoc_decomposition(c) for c in catas]
    assoc = None
    if all(decs):
        assoc = AssocDecomposition(
            x, y, mk(d.op(proj(i, x), proj(i, y)) for i, d in enumerate(decs, 1)),
            e, mk(d.delta(e) for d in decs))
    product = CataDef(name, catas[0].input, tsort, cases, None, assoc, ASSOCIATIVE)
    return product, tup


def combined_signature(product: CataDef, tup: DatatypeDecl, base: Signature) -> Signature:
    sig = base.copy()
    if tup.name not in sig.datatypes:
        sig.declare_datatype(tup)
    sig.add_cata(product)
    return sig


def classify(cata: CataDef, config: be.SolverConfig, sig: Signature | None = None) -> dict[str, AnalysisVerdict]:
    return {
        "syntactic": detect_associative_syntactic(cata, config, sig),
        "semantic": detect_associative_semantic(cata, config, sig),
    }


__all__ = [
    "AnalysisError", "NoBound", "catalan", "num_shapes", "BoundReport", "catalan_height",
    "unroll_bound", "AnalysisVerdict", "detect_associative_syntactic",
    "detect_associative_semantic", "check_range_overapprox", "combine_catas",
    "combined_signature", "tuple_datatype", "classify", "RangePred",
]
