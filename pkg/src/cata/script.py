"""Datatype declarations, catamorphism definitions, the signature, and the
sort checker."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from . import theory
from .terms import (
    BOOL,
    CataApp,
    Ctor,
    FunApp,
    Lit,
    Sel,
    Sort,
    SortError,
    Term,
    TheoryApp,
    Test,
    Var,
    datatype_sort,
    free_vars,
    iter_subterms,
    mk_and,
    mk_ite,
    substitute,
)


@dataclass(frozen=True)
class Constructor:
    name: str
    fields: tuple[tuple[str, Sort], ...] = ()

    @property
    def selectors(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.fields)


@dataclass(frozen=True)
class BinaryRoles:
    """Which constructor/selector names play Leaf, Node, left, elem, right."""

    leaf: str
    node: str
    left: str
    elem: str
    right: str
    elem_sort: Sort


@dataclass(frozen=True)
class DatatypeDecl:
    name: str
    constructors: tuple[Constructor, ...]

    def __post_init__(self):
        if not self.constructors:
            raise SortError(f"datatype {self.name} has no constructors")
        seen = set()
        for c in self.constructors:
            for s in c.selectors:
                if s in seen:
                    raise SortError(f"duplicate selector {s} in datatype {self.name}")
                seen.add(s)
        if not any(not self.recursive_positions(c.name) for c in self.constructors):
            raise SortError(f"datatype {self.name} has no base constructor")

    @property
    def sort(self) -> Sort:
        return datatype_sort(self.name)

    def constructor(self, name: str) -> Constructor:
        for c in self.constructors:
            if c.name == name:
                return c
        raise KeyError(name)

    def recursive_positions(self, ctor: str) -> frozenset[int]:
        c = self.constructor(ctor)
        return frozenset(i for i, (_, s) in enumerate(c.fields) if s.name == self.name and not s.params)

    @property
    def is_recursive(self) -> bool:
        return any(self.recursive_positions(c.name) for c in self.constructors)

    @property
    def base_constructors(self) -> tuple[Constructor, ...]:
        return tuple(c for c in self.constructors if not self.recursive_positions(c.name))

    def binary_roles(self) -> BinaryRoles | None:
        """Roles for the binary-tree specialization, or ``None`` when this
        datatype is not shaped ``Leaf | Node(tree, elem, tree)``."""
        if len(self.constructors) != 2:
            return None
        a, b = self.constructors
        leaf, node = (a, b) if not a.fields else (b, a)
        if leaf.fields or len(node.fields) != 3:
            return None
        if self.recursive_positions(node.name) != frozenset({0, 2}):
            return None
        (l, _), (e, es), (r, _) = node.fields
        return BinaryRoles(leaf.name, node.name, l, e, r, es)


def binary_tree(name: str, elem_sort: Sort, leaf="Leaf", node="Node",
                left="left", elem="elem", right="right") -> DatatypeDecl:
    s = datatype_sort(name)
    return DatatypeDecl(
        name,
        (Constructor(leaf), Constructor(node, ((left, s), (elem, elem_sort), (right, s)))),
    )


@dataclass(frozen=True)
class FunDecl:
    name: str
    arg_sorts: tuple[Sort, ...]
    result: Sort
    params: tuple[Var, ...] | None = None
    body: Term | None = None

    @property
    def is_defined(self) -> bool:
        return self.body is not None


# --- catamorphisms ------------------------------------------------------------

@dataclass(frozen=True)
class CataCase:
    """``cata(C(f1..fn)) = body`` where ``params[i]`` stands for
    ``cata(fi)`` on recursive fields and for ``fi`` otherwise."""

    ctor: str
    params: tuple[Var, ...]
    body: Term


@dataclass(frozen=True)
class RangePred:
    param: Var
    body: Term

    def apply(self, value: Term) -> Term:
        return substitute(self.body, {self.param: value})

    @property
    def is_trivial(self) -> bool:
        return self.body == Lit(True, BOOL)


@dataclass(frozen=True)
class AssocDecomposition:
    """``combine(a, e, b) = a (+) delta(e) (+) b`` with ``(+)`` associative."""

    x: Var
    y: Var
    op_body: Term
    elem: Var
    delta_body: Term

    def op(self, a: Term, b: Term) -> Term:
        return substitute(self.op_body, {self.x: a, self.y: b})

    def delta(self, e: Term) -> Term:
        return substitute(self.delta_body, {self.elem: e})


@dataclass(frozen=True)
class CataClass:
    kind: str = "unclassified"
    abstraction_height: int | None = None

    def __post_init__(self):
        if self.kind not in ("unclassified", "monotonic", "associative"):
            raise ValueError(f"unknown catamorphism class {self.kind}")
        if self.kind == "monotonic" and (self.abstraction_height is None or self.abstraction_height < 0):
            raise ValueError("monotonic class needs abstraction_height >= 0")

    def __str__(self) -> str:
        if self.kind == "monotonic":
            return f"(monotonic {self.abstraction_height})"
        return self.kind


UNCLASSIFIED = CataClass()
ASSOCIATIVE = CataClass("associative")


def monotonic(abstraction_height: int) -> CataClass:
    return CataClass("monotonic", abstraction_height)


@dataclass(frozen=True)
class CataDef:
    name: str
    input: DatatypeDecl
    result: Sort
    cases: tuple[CataCase, ...]
    range_pred: RangePred | None = None
    assoc: AssocDecomposition | None = None
    declared_class: CataClass = UNCLASSIFIED
    # name of the bound tree variable in the surface definition
    param_name: str = field(default="t", compare=False)

    def case(self, ctor: str) -> CataCase:
        for c in self.cases:
            if c.ctor == ctor:
                return c
        raise KeyError(ctor)

    def instantiate(self, ctor: str, values: Sequence[Term]) -> Term:
        case = self.case(ctor)
        if len(values) != len(case.params):
            raise SortError(f"{self.name}: {ctor} case takes {len(case.params)} values")
        return substitute(case.body, dict(zip(case.params, values)))

    @property
    def roles(self) -> BinaryRoles | None:
        return self.input.binary_roles()

    def _need_roles(self) -> BinaryRoles:
        roles = self.roles
        if roles is None:
            raise ValueError(f"{self.name}: input datatype {self.input.name} is not a binary tree")
        return roles

    @property
    def empty(self) -> Term:
        return self.instantiate(self._need_roles().leaf, ())

    def combine(self, left: Term, elem: Term, right: Term) -> Term:
        return self.instantiate(self._need_roles().node, (left, elem, right))

    def unfold(self, arg: Term, recurse) -> Term:
        """One-step unfolding over an arbitrary tree term: an ``ite``
        cascade over testers; ``recurse(sub)`` supplies the value used for
        each recursive field."""
        branches = []
        for ctor in self.input.constructors:
            rec = self.input.recursive_positions(ctor.name)
            values = []
            for i, (sel, fsort) in enumerate(ctor.fields):
                sub = Sel(sel, arg, fsort)
                values.append(recurse(sub) if i in rec else sub)
            branches.append((ctor.name, self.instantiate(ctor.name, values)))
        out = branches[-1][1]
        for ctor, body in reversed(branches[:-1]):
            out = mk_ite(Test(ctor, arg), body, out)
        return out

    def with_range(self, pred: RangePred | None) -> "CataDef":
        return replace(self, range_pred=pred)

    def with_class(self, cls: CataClass) -> "CataDef":
        return replace(self, declared_class=cls)

    @property
    def is_associative(self) -> bool:
        return self.declared_class.kind == "associative"


_ASSOC_OPS = {"+", "*", "and", "or", "set.union", "set.inter", "bag.union_disjoint", "seq.++"}


def find_assoc_decomposition(cata: CataDef) -> AssocDecomposition | None:
    """Read ``(+)`` and ``delta`` off the node case when it is syntactically
    ``op(cL, D, cR)``, ``op(op(cL, D), cR)`` or ``op(cL, op(D, cR))`` with
    ``D`` free of ``cL``/``cR``.  Whether ``op`` is associative is a
    separate (solver) question."""
    roles = cata.roles
    if roles is None:
        return None
    case = cata.case(roles.node)
    cl, e, cr = case.params
    body = case.body

    def head(t: Term):
        if isinstance(t, TheoryApp) and t.args:
            return ("theory", t.op)
        if isinstance(t, FunApp):
            return ("fun", t.name)
        return None

    def clean(t: Term) -> bool:
        fv = free_vars(t)
        return cl not in fv and cr not in fv

    h = head(body)
    if h is None:
        return None
    delta = None
    if len(body.args) == 3 and h[0] == "theory" and h[1] in _ASSOC_OPS:
        a, d, b = body.args
        if a == cl and b == cr and clean(d):
            delta = d
    elif len(body.args) == 2:
        a, b = body.args
        if head(a) == h and len(a.args) == 2 and b == cr and a.args[0] == cl and clean(a.args[1]):
            delta = a.args[1]
        elif head(b) == h and len(b.args) == 2 and a == cl and b.args[1] == cr and clean(b.args[0]):
            delta = b.args[0]
    if delta is None:
        return None
    # "@"-prefixed names are reserved in SMT-LIB, so they never clash with
    # user symbols
    x = Var("@x", cata.result)
    y = Var("@y", cata.result)
    if h[0] == "theory":
        op_body = TheoryApp(h[1], (x, y), cata.result)
    else:
        op_body = FunApp(h[1], (x, y), cata.result)
    elem = Var("@e", e.sort)
    return AssocDecomposition(x, y, op_body, elem, substitute(delta, {e: elem}))


# --- signature ----------------------------------------------------------------

class Signature:
    """Everything declared so far in a script; builds well-sorted terms."""

    def __init__(self):
        self.sorts: dict[str, Sort] = {}
        self.datatypes: dict[str, DatatypeDecl] = {}
        self.ctors: dict[str, tuple[DatatypeDecl, Constructor]] = {}
        self.selectors: dict[str, tuple[DatatypeDecl, Constructor, int]] = {}
        self.functions: dict[str, FunDecl] = {}
        self.constants: dict[str, Var] = {}
        self.catas: dict[str, CataDef] = {}

    def copy(self) -> "Signature":
        new = Signature()
        for k, v in vars(self).items():
            setattr(new, k, dict(v))
        return new

    # declarations
    def _fresh_name(self, name: str):
        if (name in self.sorts or name in self.ctors or name in self.selectors
                or name in self.functions or name in self.constants or name in self.catas):
            raise SortError(f"{name} is already declared")

    def declare_sort(self, name: str) -> Sort:
        self._fresh_name(name)
        s = Sort(name, kind="element")
        self.sorts[name] = s
        return s

    def declare_datatype(self, decl: DatatypeDecl):
        self._fresh_name(decl.name)
        self.sorts[decl.name] = decl.sort
        self.datatypes[decl.name] = decl
        for c in decl.constructors:
            self._fresh_name(c.name)
            self.ctors[c.name] = (decl, c)
            for i, (sel, _) in enumerate(c.fields):
                self._fresh_name(sel)
                self.selectors[sel] = (decl, c, i)

    def declare_fun(self, name: str, arg_sorts: Sequence[Sort], result: Sort) -> Term | None:
        self._fresh_name(name)
        if not arg_sorts:
            v = Var(name, result)
            self.constants[name] = v
            return v
        for i, s in enumerate(arg_sorts):
            if self.is_tree_sort(s):
                raise SortError(f"function {name} over tree sort {s} is outside the logic", (i,))
        self.functions[name] = FunDecl(name, tuple(arg_sorts), result)
        return None

    def define_fun(self, name: str, params: Sequence[Var], result: Sort, body: Term):
        self._fresh_name(name)
        for i, p in enumerate(params):
            if self.is_tree_sort(p.sort):
                raise SortError(f"function {name} over tree sort {p.sort} is outside the logic", (i,))
        got = well_sorted(body, self, {p.name: p.sort for p in params})
        if got != result:
            raise SortError(f"body of {name} has sort {got}, declared {result}")
        self.functions[name] = FunDecl(name, tuple(p.sort for p in params), result, tuple(params), body)

    def add_cata(self, cata: CataDef):
        if cata.name not in self.catas:
            self._fresh_name(cata.name)
        self.catas[cata.name] = cata

    def resolve_sort(self, name: str, params: Sequence[Sort] = ()) -> Sort:
        builtin = {"Bool": BOOL, "Int": theory.INT, "Real": theory.REAL}
        if not params:
            if name in builtin:
                return builtin[name]
            if name == "String":
                from .terms import STRING

                return STRING
            if name in self.sorts:
                return self.sorts[name]
        else:
            from .terms import bag_sort, seq_sort, set_sort

            makers = {"Set": set_sort, "Bag": bag_sort, "Seq": seq_sort}
            if name in makers and len(params) == 1:
                return makers[name](params[0])
        raise SortError(f"unknown sort {name}")

    def is_tree_sort(self, s: Sort) -> bool:
        decl = self.datatypes.get(s.name)
        return decl is not None and not s.params and decl.is_recursive

    # term builders
    def ctor(self, name: str, *args: Term) -> Term:
        if name not in self.ctors:
            raise SortError(f"unknown constructor {name}")
        decl, c = self.ctors[name]
        if len(args) != len(c.fields):
            raise SortError(f"{name} expects {len(c.fields)} arguments, got {len(args)}")
        for i, (a, (_, fs)) in enumerate(zip(args, c.fields)):
            if a.sort != fs:
                raise SortError(f"{name}: argument of sort {a.sort}, expected {fs}", (i,))
        return Ctor(name, tuple(args), decl.sort)

    def sel(self, name: str, arg: Term) -> Term:
        if name not in self.selectors:
            raise SortError(f"unknown selector {name}")
        decl, c, i = self.selectors[name]
        if arg.sort != decl.sort:
            raise SortError(f"{name}: argument of sort {arg.sort}, expected {decl.sort}", (0,))
        return Sel(name, arg, c.fields[i][1])

    def test(self, ctor: str, arg: Term) -> Term:
        if ctor not in self.ctors:
            raise SortError(f"unknown constructor {ctor} in tester")
        decl, _ = self.ctors[ctor]
        if arg.sort != decl.sort:
            raise SortError(f"is-{ctor}: argument of sort {arg.sort}, expected {decl.sort}", (0,))
        return Test(ctor, arg)

    def cata(self, name: str, arg: Term) -> Term:
        if name not in self.catas:
            raise SortError(f"unknown catamorphism {name}")
        c = self.catas[name]
        if arg.sort != c.input.sort:
            raise SortError(f"{name}: argument of sort {arg.sort}, expected {c.input.sort}", (0,))
        return CataApp(name, arg, c.result)

    def fun(self, name: str, *args: Term) -> Term:
        if name in self.constants and not args:
            return self.constants[name]
        if name not in self.functions:
            raise SortError(f"unknown function {name}")
        f = self.functions[name]
        if len(args) != len(f.arg_sorts):
            raise SortError(f"{name} expects {len(f.arg_sorts)} arguments, got {len(args)}")
        for i, (a, s) in enumerate(zip(args, f.arg_sorts)):
            if a.sort != s:
                raise SortError(f"{name}: argument of sort {a.sort}, expected {s}", (i,))
        return FunApp(name, tuple(args), f.result)

    def op(self, op: str, *args: Term, declared: Sort | None = None) -> Term:
        self._check_tree_args(op, [a.sort for a in args])
        sort = theory.op_sort(op, [a.sort for a in args], declared)
        return TheoryApp(op, tuple(args), sort)

    def _check_tree_args(self, op: str, sorts: Sequence[Sort]):
        if op in ("=", "distinct", "ite"):
            return
        for i, s in enumerate(sorts):
            if self.is_tree_sort(s):
                raise SortError(f"theory operator {op} applied to tree sort {s}", (i,))


def well_sorted(t: Term, sig: Signature, env: Mapping[str, Sort] | None = None) -> Sort:
    """Recompute the sort of ``t`` from scratch and compare with the sorts
    recorded in its nodes.  Free variables must be bound by ``env`` or be
    declared constants of ``sig``."""

    def bound(v: Var) -> Sort:
        if env is not None and v.name in env:
            return env[v.name]
        if v.name in sig.constants:
            return sig.constants[v.name].sort
        raise SortError(f"unbound variable {v.name}")

    def go(node: Term) -> Sort:
        kid_sorts = []
        for i, k in enumerate(node.children()):
            try:
                kid_sorts.append(go(k))
            except SortError as err:
                raise err.nested(i) from None
        if isinstance(node, Var):
            s = bound(node)
            if s != node.sort:
                raise SortError(f"variable {node.name} used at sort {node.sort}, bound at {s}")
            return s
        if isinstance(node, Lit):
            expected = {bool: "Bool", int: "Int", str: "String"}.get(type(node.value), "Real")
            if node.sort.name != expected:
                raise SortError(f"literal {node.value!r} tagged with sort {node.sort}")
            return node.sort
        if isinstance(node, Ctor):
            rebuilt = sig.ctor(node.name, *_with_sorts(node.args, kid_sorts))
        elif isinstance(node, Sel):
            rebuilt = sig.sel(node.name, _with_sorts(node.children(), kid_sorts)[0])
        elif isinstance(node, Test):
            rebuilt = sig.test(node.ctor, _with_sorts(node.children(), kid_sorts)[0])
        elif isinstance(node, CataApp):
            rebuilt = sig.cata(node.cata, _with_sorts(node.children(), kid_sorts)[0])
        elif isinstance(node, FunApp):
            rebuilt = sig.fun(node.name, *_with_sorts(node.args, kid_sorts))
        elif isinstance(node, TheoryApp):
            declared = node.sort if node.op in theory.NULLARY else None
            rebuilt = sig.op(node.op, *_with_sorts(node.args, kid_sorts), declared=declared)
        else:
            raise SortError(f"unknown term node {type(node).__name__}")
        if rebuilt.sort != node.sort:
            raise SortError(f"node records sort {node.sort}, computed {rebuilt.sort}")
        return rebuilt.sort

    return go(t)


def _with_sorts(args: Iterable[Term], sorts: Sequence[Sort]) -> list[Term]:
    # stand-ins so the builders can be reused for checking
    return [Var(f"_arg{i}", s) for i, s in enumerate(sorts)]


# --- scripts --------------------------------------------------------------------

@dataclass(frozen=True)
class DeclareSort:
    name: str


@dataclass(frozen=True)
class DeclareDatatypes:
    decls: tuple[DatatypeDecl, ...]


@dataclass(frozen=True)
class DeclareFun:
    name: str
    arg_sorts: tuple[Sort, ...]
    result: Sort


@dataclass(frozen=True)
class DefineFun:
    name: str
    params: tuple[Var, ...]
    result: Sort
    body: Term


@dataclass(frozen=True)
class DefineCata:
    cata: CataDef


@dataclass(frozen=True)
class DeclareRange:
    cata: str
    pred: RangePred


@dataclass(frozen=True)
class SetCataClass:
    cata: str
    cls: CataClass


@dataclass(frozen=True)
class Assert:
    term: Term


@dataclass(frozen=True)
class CheckSat:
    pass


@dataclass(frozen=True)
class Passthrough:
    """``set-logic``/``set-option``/``set-info``/``get-model``/``exit``,
    kept verbatim."""

    text: str


@dataclass
class Script:
    commands: tuple
    signature: Signature

    @property
    def assertions(self) -> list[Term]:
        return [c.term for c in self.commands if isinstance(c, Assert)]

    @property
    def formula(self) -> Term:
        return mk_and(*self.assertions)

    @property
    def catas(self) -> dict[str, CataDef]:
        return self.signature.catas

    @property
    def datatypes(self) -> list[DatatypeDecl]:
        return list(self.signature.datatypes.values())

    @property
    def constants(self) -> list[Var]:
        return list(self.signature.constants.values())

    def catas_used(self) -> list[str]:
        names = []
        for a in self.assertions:
            for s in iter_subterms(a):
                if isinstance(s, CataApp) and s.cata not in names:
                    names.append(s.cata)
        return names
