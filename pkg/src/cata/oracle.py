"""Brute-force ground truth: tree enumeration, concrete evaluation of terms
and catamorphisms, bounded inverse-image counts, and exhaustive search for
small models.

Selector applications on the wrong constructor (``left(Leaf)``) can be
read two ways:

``total``
    SMT-LIB semantics.  ``left(Leaf)`` is some fixed but unknown tree; the
    search treats every such application it meets as one more unknown and
    branches over its possible values.
``strict``
    The formula is put in negation normal form and any literal whose
    evaluation needs an undefined selector value is false.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from . import theory
from .script import CataDef, DatatypeDecl, Signature, binary_tree
from .terms import (
    BOOL,
    INT,
    REAL,
    CataApp,
    Ctor,
    FunApp,
    Lit,
    Sel,
    Sort,
    Term,
    Test,
    TheoryApp,
    Var,
    free_vars,
)


class OracleError(Exception):
    """The oracle cannot interpret something (missing table, unknown op)."""


class _NeedValue(Exception):
    def __init__(self, key, sort: Sort):
        self.key = key
        self.sort = sort


class _Undefined(Exception):
    pass


# --- concrete datatype values ---------------------------------------------------------

@dataclass(frozen=True)
class DTValue:
    """A constructor application over concrete values.  ``size`` counts
    constructor nodes of the value's own datatype; ``height`` is the
    longest chain of such nodes below the root."""

    dt: str
    ctor: str
    args: tuple = ()
    size: int = field(default=1, compare=False, repr=False)
    height: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        kids = [a for a in self.args if isinstance(a, DTValue) and a.dt == self.dt]
        object.__setattr__(self, "size", 1 + sum(k.size for k in kids))
        object.__setattr__(self, "height", 1 + max(k.height for k in kids) if kids else 0)
        if len(kids) in (0, 2) and all(getattr(k, "_full", True) for k in kids):
            assert self.size >= 2 * self.height + 1
            assert self.size % 2 == 1
        else:
            object.__setattr__(self, "_full", False)

    def __str__(self) -> str:
        return format_value(self)


def leaf(dt: str = "Tree", ctor: str = "Leaf") -> DTValue:
    return DTValue(dt, ctor)


def node(left: DTValue, elem, right: DTValue, ctor: str = "Node") -> DTValue:
    return DTValue(left.dt, ctor, (left, elem, right))


SLEAF = DTValue("Shape", "SLeaf")


def snode(left: DTValue, right: DTValue) -> DTValue:
    return DTValue("Shape", "SNode", (left, right))


def shape(t: DTValue) -> DTValue:
    """Erase elements, keeping recursive structure."""
    kids = [shape(a) for a in t.args if isinstance(a, DTValue) and a.dt == t.dt]
    if not kids:
        return SLEAF
    if len(kids) != 2:
        raise OracleError("shape is defined for binary trees only")
    return snode(*kids)


def shapes_of_size(s: int) -> list[DTValue]:
    if s < 1 or s % 2 == 0:
        return []
    return _shapes(s)


_shape_memo: dict[int, list[DTValue]] = {}


def _shapes(s: int) -> list[DTValue]:
    if s not in _shape_memo:
        if s == 1:
            _shape_memo[s] = [SLEAF]
        else:
            out = []
            for ls in range(1, s - 1, 2):
                for left in _shapes(ls):
                    for right in _shapes(s - 1 - ls):
                        out.append(snode(left, right))
            _shape_memo[s] = out
    return _shape_memo[s]


def inorder_elements(t: DTValue) -> list:
    if not t.args:
        return []
    left, e, right = t.args
    return inorder_elements(left) + [e] + inorder_elements(right)


def format_value(v) -> str:
    if isinstance(v, DTValue):
        if not v.args:
            return v.ctor
        return "(" + " ".join([v.ctor] + [format_value(a) for a in v.args]) + ")"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        if v.denominator == 1:
            s = f"{abs(v.numerator)}.0"
        else:
            s = f"(/ {abs(v.numerator)}.0 {v.denominator}.0)"
        return f"(- {s})" if v < 0 else s
    if isinstance(v, int):
        return f"(- {-v})" if v < 0 else str(v)
    if isinstance(v, str):
        return '"' + v.replace('"', '""') + '"'
    if isinstance(v, frozenset):
        items = sorted(v, key=repr)
        if items and all(isinstance(x, tuple) and len(x) == 2 for x in items):
            return "{" + ", ".join(f"{format_value(e)}:{k}" for e, k in items) + "}"
        return "{" + ", ".join(format_value(x) for x in items) + "}"
    if isinstance(v, tuple):
        return "(" + " ".join(format_value(x) for x in v) + ")"
    return str(v)


# --- value universes --------------------------------------------------------------------

class Universe:
    """Finite stand-ins for every sort: trees up to ``max_size``, the
    given element domain for scalar sorts, and small collections."""

    def __init__(self, sig: Signature, domain: Sequence = (0, 1, 2), max_size: int = 5,
                 domains: Mapping[str, Sequence] | None = None):
        if max_size < 1:
            raise ValueError("max_size must be at least 1")
        if not domain:
            raise ValueError("element domain must be non-empty")
        self.sig = sig
        self.domain = tuple(domain)
        self.max_size = max_size
        self.domains = dict(domains or {})
        self._memo: dict = {}

    def values(self, sort: Sort) -> list:
        key = ("sort", sort)
        if key not in self._memo:
            self._memo[key] = self._values(sort)
        return self._memo[key]

    def _values(self, sort: Sort) -> list:
        if sort.name in self.domains and not sort.params:
            return list(self.domains[sort.name])
        if sort == BOOL:
            return [False, True]
        if sort == REAL:
            return [Fraction(x) for x in self.domain]
        if sort == INT:
            return [x for x in self.domain if isinstance(x, int) and not isinstance(x, bool)] or list(self.domain)
        decl = self.sig.datatypes.get(sort.name)
        if decl is not None and not sort.params:
            if decl.is_recursive:
                return list(self.trees(decl))
            return [v for c in decl.constructors for v in self._ctor_values(decl, c, {})]
        elem = sort.params[0] if sort.params else None
        if sort.name == "Set":
            base = self.values(elem)
            return [frozenset(c) for r in range(len(base) + 1) for c in itertools.combinations(base, r)]
        if sort.name == "Bag":
            base = self.values(elem)
            out = []
            for counts in itertools.product(range(3), repeat=len(base)):
                out.append(frozenset((e, k) for e, k in zip(base, counts) if k))
            return out
        if sort.name == "Seq":
            base = self.values(elem)
            return [tuple(p) for n in range(3) for p in itertools.product(base, repeat=n)]
        return list(self.domain)

    def _ctor_values(self, decl: DatatypeDecl, c, _):
        pools = [self.values(s) for _, s in c.fields]
        for combo in itertools.product(*pools):
            yield DTValue(decl.name, c.name, tuple(combo))

    def trees_of_size(self, decl: DatatypeDecl, s: int) -> list[DTValue]:
        key = ("trees", decl.name, s)
        if key in self._memo:
            return self._memo[key]
        out = []
        for c in decl.constructors:
            rec = sorted(decl.recursive_positions(c.name))
            if not rec:
                if s == 1:
                    out.extend(self._ctor_values(decl, c, {}))
                continue
            for split in _compositions(s - 1, len(rec)):
                sizes = dict(zip(rec, split))
                pools = []
                for i, (_, fs) in enumerate(c.fields):
                    pools.append(self.trees_of_size(decl, sizes[i]) if i in sizes else self.values(fs))
                if any(not p for p in pools):
                    continue
                for combo in itertools.product(*pools):
                    out.append(DTValue(decl.name, c.name, tuple(combo)))
        self._memo[key] = out
        return out

    def trees(self, decl: DatatypeDecl, max_size: int | None = None) -> Iterator[DTValue]:
        limit = self.max_size if max_size is None else max_size
        for s in range(1, limit + 1):
            yield from self.trees_of_size(decl, s)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _default_tree(elem_sort: Sort = INT) -> tuple[Signature, DatatypeDecl]:
    sig = Signature()
    decl = binary_tree("Tree", elem_sort)
    sig.declare_datatype(decl)
    return sig, decl


def enumerate_trees(max_size: int, domain: Sequence, decl: DatatypeDecl | None = None,
                    sig: Signature | None = None) -> Iterator[DTValue]:
    """Every tree of size <= ``max_size`` over ``domain``, by size and then
    lexicographically on (left, element index, right)."""
    if decl is None:
        sig, decl = _default_tree()
    elif sig is None:
        sig = Signature()
        sig.declare_datatype(decl)
    return Universe(sig, domain, max_size).trees(decl)


# --- evaluation ---------------------------------------------------------------------

class Evaluator:
    """Concrete interpretation of terms.  ``funcs`` interprets declared
    (uninterpreted) functions, e.g. ``{"dirty": lambda w: w in {...}}``."""

    def __init__(self, sig: Signature, funcs: Mapping[str, Callable] | None = None,
                 selector_mode: str = "total", junk: Mapping | None = None):
        if selector_mode not in ("total", "strict"):
            raise ValueError("selector_mode must be 'total' or 'strict'")
        self.sig = sig
        self.funcs = dict(funcs or {})
        self.selector_mode = selector_mode
        self.junk = dict(junk or {})
        self._cata_memo: dict = {}

    def eval(self, t: Term, env: Mapping[Var, object]):
        if isinstance(t, Var):
            try:
                return env[t]
            except KeyError:
                raise OracleError(f"no value for variable {t.name}") from None
        if isinstance(t, Lit):
            return t.value
        if isinstance(t, Ctor):
            return DTValue(t.sort.name, t.name, tuple(self.eval(a, env) for a in t.args))
        if isinstance(t, Sel):
            v = self.eval(t.arg, env)
            decl, c, i = self.sig.selectors[t.name]
            if v.ctor == c.name:
                return v.args[i]
            if self.selector_mode == "strict":
                raise _Undefined()
            key = (t.name, v)
            if key not in self.junk:
                raise _NeedValue(key, t.sort)
            return self.junk[key]
        if isinstance(t, Test):
            return self.eval(t.arg, env).ctor == t.ctor
        if isinstance(t, CataApp):
            return self.eval_cata(self.sig.catas[t.cata], self.eval(t.arg, env))
        if isinstance(t, FunApp):
            args = [self.eval(a, env) for a in t.args]
            f = self.sig.functions.get(t.name)
            if f is not None and f.is_defined:
                return self.eval(f.body, {**env, **dict(zip(f.params, args))})
            if t.name not in self.funcs:
                raise OracleError(f"no interpretation for function {t.name}")
            return self.funcs[t.name](*args)
        if isinstance(t, TheoryApp):
            return self._theory(t, env)
        raise OracleError(f"cannot evaluate {t!r}")

    def _theory(self, t: TheoryApp, env):
        op = t.op
        if op == "ite":
            branch = t.args[1] if self.eval(t.args[0], env) else t.args[2]
            return theory.apply_op("ite", [True, self.eval(branch, env), None], t.sort)
        if op == "and":
            return all(self.eval(a, env) for a in t.args)
        if op == "or":
            return any(self.eval(a, env) for a in t.args)
        if op not in theory.OPERATORS:
            raise OracleError(f"no concrete semantics for operator {op}")
        args = [self.eval(a, env) for a in t.args]
        try:
            return theory.apply_op(op, args, t.sort)
        except theory.EvalError as err:
            raise OracleError(str(err)) from None

    def eval_cata(self, cata: CataDef, v: DTValue):
        key = (cata.name, v)
        hit = self._cata_memo.get(key)
        if hit is not None or key in self._cata_memo:
            return hit
        case = cata.case(v.ctor)
        rec = cata.input.recursive_positions(v.ctor)
        vals = [self.eval_cata(cata, a) if i in rec else a for i, a in enumerate(v.args)]
        out = self.eval(case.body, dict(zip(case.params, vals)))
        self._cata_memo[key] = out
        return out


def eval_cata(cata: CataDef, t: DTValue, sig: Signature | None = None,
              funcs: Mapping[str, Callable] | None = None):
    return Evaluator(sig or _cata_signature(cata), funcs).eval_cata(cata, t)


def _cata_signature(cata: CataDef) -> Signature:
    from . import catalog

    sig = catalog.signature()
    if cata.name not in sig.catas or sig.catas[cata.name] != cata:
        sig = sig.copy()
        sig.catas[cata.name] = cata
    return sig


def inorder_fold(cata: CataDef, t: DTValue, sig: Signature | None = None,
                 funcs: Mapping[str, Callable] | None = None):
    """``empty (+) delta(e1) (+) empty (+) delta(e2) ... (+) empty`` over the
    in-order element listing, using the catamorphism's associative
    decomposition."""
    if cata.assoc is None:
        raise OracleError(f"{cata.name} has no associative decomposition")
    ev = Evaluator(sig or _cata_signature(cata), funcs)
    a = cata.assoc
    empty = ev.eval(cata.empty, {})
    acc = empty
    for e in inorder_elements(t):
        d = ev.eval(a.delta_body, {a.elem: e})
        acc = ev.eval(a.op_body, {a.x: acc, a.y: d})
        acc = ev.eval(a.op_body, {a.x: acc, a.y: empty})
    return acc


# --- inverse-image counting -----------------------------------------------------------

def _value_counts(cata: CataDef, universe: Universe, ev: Evaluator) -> tuple[list, Counter]:
    trees = list(universe.trees(cata.input))
    values = [ev.eval_cata(cata, t) for t in trees]
    return list(zip(trees, values)), Counter(values)


def beta_bounded(cata: CataDef, t: DTValue, max_size: int, domain: Sequence,
                 sig: Signature | None = None, funcs: Mapping[str, Callable] | None = None) -> int:
    """Number of trees of size <= ``max_size`` over ``domain`` with the
    same catamorphism value as ``t`` (a lower bound on the true count)."""
    sig = sig or _cata_signature(cata)
    ev = Evaluator(sig, funcs)
    universe = Universe(sig, domain, max_size)
    target = ev.eval_cata(cata, t)
    return sum(1 for u in universe.trees(cata.input) if ev.eval_cata(cata, u) == target)


def minbeta_bounded(cata: CataDef, h: int, max_size: int, domain: Sequence,
                    sig: Signature | None = None, funcs: Mapping[str, Callable] | None = None) -> int:
    sig = sig or _cata_signature(cata)
    ev = Evaluator(sig, funcs)
    pairs, counts = _value_counts(cata, Universe(sig, domain, max_size), ev)
    betas = [counts[v] for t, v in pairs if t.height == h]
    if not betas:
        raise OracleError(f"no tree of height {h} within size {max_size}")
    return min(betas)


def count_st(h: int) -> int:
    """Number of unit-element trees of height at most ``h``."""
    if h < 0:
        raise ValueError("h must be non-negative")
    n = 1
    for _ in range(h):
        n = n * n + 1
    return n


# --- bounded satisfiability ---------------------------------------------------------------

@dataclass
class OracleResult:
    sat: bool
    witness: dict | None = None
    junk: dict = field(default_factory=dict)

    def __str__(self) -> str:
        if not self.sat:
            return "no-model-within-bounds"
        lines = ["sat"]
        for v, val in self.witness.items():
            lines.append(f"  {v.name} = {format_value(val)}")
        for (sel, arg), val in self.junk.items():
            lines.append(f"  ({sel} {format_value(arg)}) = {format_value(val)}")
        return "\n".join(lines)


_CONNECTIVES = {"and", "or", "not", "=>", "xor"}


def _is_bool_structure(t: Term) -> bool:
    if not isinstance(t, TheoryApp):
        return False
    if t.op in _CONNECTIVES:
        return True
    if t.op in ("=", "distinct", "ite") and t.args and all(a.sort == BOOL for a in t.args[-2:]):
        return t.op != "ite" or t.sort == BOOL
    return False


def nnf(t: Term, positive: bool = True) -> Term:
    """Negation normal form over ``and``/``or``; every other Bool-sorted
    term is a literal, possibly under one ``not``."""
    if isinstance(t, Lit) and t.sort == BOOL:
        return Lit(t.value == positive, BOOL)
    if not _is_bool_structure(t):
        return t if positive else TheoryApp("not", (t,), BOOL)
    op, a = t.op, t.args
    if op == "not":
        return nnf(a[0], not positive)
    if op in ("and", "or"):
        flip = {"and": "or", "or": "and"}
        return TheoryApp(op if positive else flip[op], tuple(nnf(x, positive) for x in a), BOOL)
    if op == "=>":
        parts = [TheoryApp("not", (x,), BOOL) for x in a[:-1]] + [a[-1]]
        return nnf(TheoryApp("or", tuple(parts), BOOL), positive)
    if op == "xor":
        acc = a[0]
        for x in a[1:]:
            acc = TheoryApp("or", (TheoryApp("and", (acc, TheoryApp("not", (x,), BOOL)), BOOL),
                                   TheoryApp("and", (TheoryApp("not", (acc,), BOOL), x), BOOL)), BOOL)
        return nnf(acc, positive)
    if op == "=":
        pairs = [TheoryApp("or", (TheoryApp("and", (x, y), BOOL),
                                  TheoryApp("and", (TheoryApp("not", (x,), BOOL),
                                                    TheoryApp("not", (y,), BOOL)), BOOL)), BOOL)
                 for x, y in zip(a, a[1:])]
        return nnf(TheoryApp("and", tuple(pairs), BOOL), positive)
    if op == "distinct":
        if len(a) > 2:
            return nnf(Lit(False, BOOL), positive)
        return nnf(TheoryApp("not", (TheoryApp("=", a, BOOL),), BOOL), positive)
    if op == "ite":
        c, x, y = a
        expanded = TheoryApp("or", (TheoryApp("and", (c, x), BOOL),
                                    TheoryApp("and", (TheoryApp("not", (c,), BOOL), y), BOOL)), BOOL)
        return nnf(expanded, positive)
    raise AssertionError(op)  # pragma: no cover


def _eval_strict(t: Term, ev: Evaluator, env) -> bool:
    if isinstance(t, TheoryApp) and t.op in ("and", "or") and t.sort == BOOL:
        results = (_eval_strict(x, ev, env) for x in t.args)
        return all(results) if t.op == "and" else any(results)
    try:
        return bool(ev.eval(t, env))
    except _Undefined:
        return False


def brute_force_sat(formula: Term, sig: Signature, max_size: int = 5, domain: Sequence = (0, 1, 2),
                    selector_mode: str = "total", funcs: Mapping[str, Callable] | None = None,
                    domains: Mapping[str, Sequence] | None = None,
                    variables: Sequence[Var] | None = None) -> OracleResult:
    """Exhaustive search over assignments to the free variables (in name
    order unless ``variables`` is given); returns the first witness."""
    universe = Universe(sig, domain, max_size, domains)
    vs = list(variables) if variables is not None else sorted(free_vars(formula), key=lambda v: v.name)
    pools = [universe.values(v.sort) for v in vs]
    body = nnf(formula) if selector_mode == "strict" else formula
    ev = Evaluator(sig, funcs, selector_mode)
    for combo in itertools.product(*pools):
        env = dict(zip(vs, combo))
        junk = _satisfy(body, ev, env, universe, {})
        if junk is not None:
            return OracleResult(True, env, junk)
    return OracleResult(False)


def _satisfy(body: Term, ev: Evaluator, env, universe: Universe, junk: dict):
    ev.junk = junk
    try:
        if ev.selector_mode == "strict":
            ok = _eval_strict(body, ev, env)
        else:
            ok = bool(ev.eval(body, env))
        return dict(junk) if ok else None
    except _NeedValue as need:
        for value in universe.values(need.sort):
            found = _satisfy(body, ev, env, universe, {**junk, need.key: value})
            if found is not None:
                return found
        return None


def evaluate(formula: Term, sig: Signature, env: Mapping[Var, object],
             funcs: Mapping[str, Callable] | None = None, selector_mode: str = "total",
             junk: Mapping | None = None) -> bool:
    """Truth value of ``formula`` under a complete assignment."""
    ev = Evaluator(sig, funcs, selector_mode, junk)
    if selector_mode == "strict":
        return _eval_strict(nnf(formula), ev, env)
    return bool(ev.eval(formula, env))
