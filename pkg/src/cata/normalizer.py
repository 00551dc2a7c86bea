"""Translation of a formula into an equisatisfiable disjunction of
standard-form clauses.

A standard-form clause is a conjunction of disequalities between distinct
tree variables plus a collection/element part in which every
catamorphism is applied to a tree variable.  The pipeline is:

1. DNF.
2. Selector and tester elimination (each selector application becomes a
   fresh constructor binding, innermost first).
3. Tree unification; element-level constraints are left as residual
   equalities.
4. Disequality reduction.
5. Partial evaluation of catamorphisms over constructor terms.

Besides the formula, each clause records how to get back: ``bindings``
maps eliminated variables to terms over the clause's variables, and
``provenance`` says which selector (or purified subterm) each fresh
variable stands for.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .script import Signature
from .terms import (
    BOOL,
    CataApp,
    Ctor,
    Lit,
    Sel,
    Term,
    Test,
    TheoryApp,
    Var,
    contains,
    free_vars,
    iter_subterms,
    mk_and,
    mk_eq,
    mk_not,
    substitute,
    term_size,
    transform,
    transform_bottom_up,
)

DEFAULT_CAP = 100_000


class NormalizeError(Exception):
    pass


class ClauseExplosion(NormalizeError):
    def __init__(self, cap: int):
        super().__init__(f"clause count exceeds the cap of {cap}")
        self.cap = cap


@dataclass
class Clause:
    """A conjunctive clause under construction."""

    literals: list[Term]
    bindings: dict[Var, Term] = field(default_factory=dict)
    provenance: list[tuple[Var, Term]] = field(default_factory=list)

    def copy(self) -> "Clause":
        return Clause(list(self.literals), dict(self.bindings), list(self.provenance))

    def substitute(self, sigma: dict[Var, Term]) -> "Clause":
        """Apply ``sigma`` to the literals and fold it into ``bindings``."""
        lits = [substitute(l, sigma) for l in self.literals]
        binds = {k: substitute(v, sigma) for k, v in self.bindings.items()}
        binds.update(sigma)
        return Clause(lits, binds, list(self.provenance))

    @property
    def formula(self) -> Term:
        return mk_and(*self.literals)


@dataclass(frozen=True)
class StandardClause:
    tree_diseqs: frozenset
    ce_part: tuple[Term, ...]
    bindings: tuple[tuple[Var, Term], ...] = ()
    provenance: tuple[tuple[Var, Term], ...] = ()

    @property
    def p(self) -> int:
        return len(self.tree_diseqs)

    @property
    def formula(self) -> Term:
        diseqs = []
        for pair in sorted(self.tree_diseqs, key=lambda s: sorted(v.name for v in s)):
            a, b = sorted(pair, key=lambda v: v.name)
            diseqs.append(mk_not(mk_eq(a, b)))
        return mk_and(*diseqs, *self.ce_part)

    @property
    def variables(self) -> set[Var]:
        return free_vars(self.formula)

    def __str__(self) -> str:
        from .frontend import print_term

        return print_term(self.formula)


# --- literal helpers --------------------------------------------------------------

def _negated(lit: Term) -> tuple[bool, Term]:
    if isinstance(lit, TheoryApp) and lit.op == "not":
        return False, lit.args[0]
    return True, lit


def _tree_eq(sig: Signature, atom: Term) -> bool:
    return (isinstance(atom, TheoryApp) and atom.op == "=" and len(atom.args) == 2
            and sig.is_tree_sort(atom.args[0].sort))


def _fresh_start(terms: Iterable[Term], prefix: str) -> int:
    pat = re.compile(re.escape(prefix) + r"(\d+)$")
    top = -1
    for t in terms:
        for v in free_vars(t):
            m = pat.match(v.name)
            if m:
                top = max(top, int(m.group(1)))
    return top + 1


class Normalizer:
    def __init__(self, sig: Signature, cap: int = DEFAULT_CAP, prefix: str = "_nf"):
        self.sig = sig
        self.cap = cap
        self.prefix = prefix
        self.counter = 0

    def fresh(self, sort) -> Var:
        v = Var(f"{self.prefix}{self.counter}", sort)
        self.counter += 1
        return v

    def _check_cap(self, n: int):
        if n > self.cap:
            raise ClauseExplosion(self.cap)

    # Step 1 -------------------------------------------------------------------
    def to_dnf(self, phi: Term) -> list[list[Term]]:
        return self._dnf(phi, True)

    def _dnf(self, t: Term, pos: bool) -> list[list[Term]]:
        sig = self.sig
        if isinstance(t, Lit) and t.sort == BOOL:
            return [[]] if t.value == pos else []
        if not isinstance(t, TheoryApp):
            return [[t if pos else mk_not(t)]]
        op, a = t.op, t.args
        if op == "not":
            return self._dnf(a[0], not pos)
        if op in ("and", "or"):
            conj = (op == "and") == pos
            parts = [self._dnf(x, pos) for x in a]
            return self._conj(parts) if conj else self._disj(parts)
        if op == "=>":
            return self._dnf(TheoryApp("or", tuple(mk_not(x) for x in a[:-1]) + (a[-1],), BOOL), pos)
        if op == "xor":
            acc = a[0]
            for x in a[1:]:
                acc = TheoryApp("not", (TheoryApp("=", (acc, x), BOOL),), BOOL)
            return self._dnf(acc, pos)
        if op == "ite" and t.sort == BOOL:
            c, x, y = a
            expanded = TheoryApp("or", (TheoryApp("and", (c, x), BOOL),
                                        TheoryApp("and", (mk_not(c), y), BOOL)), BOOL)
            return self._dnf(expanded, pos)
        if op in ("=", "distinct") and a and a[0].sort == BOOL:
            if op == "distinct":
                if len(a) > 2:
                    return self._dnf(Lit(False, BOOL), pos)
                return self._dnf(mk_not(TheoryApp("=", a, BOOL)), pos)
            pairs = [TheoryApp("or", (TheoryApp("and", (x, y), BOOL),
                                      TheoryApp("and", (mk_not(x), mk_not(y)), BOOL)), BOOL)
                     for x, y in zip(a, a[1:])]
            return self._dnf(mk_and(*pairs), pos)
        if op in ("=", "distinct") and a and sig.is_tree_sort(a[0].sort):
            if op == "=" and len(a) > 2:
                return self._dnf(mk_and(*(mk_eq(x, y) for x, y in zip(a, a[1:]))), pos)
            if op == "distinct":
                pairs = [mk_not(mk_eq(a[i], a[j])) for i in range(len(a)) for j in range(i + 1, len(a))]
                return self._dnf(mk_and(*pairs), pos)
        return [[t if pos else mk_not(t)]]

    def _conj(self, parts: list[list[list[Term]]]) -> list[list[Term]]:
        out: list[list[Term]] = [[]]
        for p in parts:
            self._check_cap(len(out) * len(p))
            out = [x + y for x in out for y in p]
        return out

    def _disj(self, parts: list[list[list[Term]]]) -> list[list[Term]]:
        out = [c for p in parts for c in p]
        self._check_cap(len(out))
        return out

    # Step 2 -------------------------------------------------------------------
    def _innermost_selector(self, clause: Clause) -> Sel | None:
        for lit in clause.literals:
            for s in iter_subterms(lit):
                if (isinstance(s, Sel) and self.sig.is_tree_sort(s.arg.sort)
                        and not any(isinstance(x, Sel) and self.sig.is_tree_sort(x.arg.sort)
                                    for x in iter_subterms(s.arg))):
                    return s
        return None

    def _ctor_binding(self, u: Term, ctor_name: str) -> tuple[Term, list[Var], list[tuple[Var, Term]]]:
        decl, c = self.sig.ctors[ctor_name]
        fs = [self.fresh(fsort) for _, fsort in c.fields]
        prov = [(f, Sel(sel, u, fsort)) for f, (sel, fsort) in zip(fs, c.fields)]
        return Ctor(c.name, tuple(fs), decl.sort), fs, prov

    def eliminate_selectors(self, clause: Clause) -> Clause:
        clause = clause.copy()
        while True:
            s = self._innermost_selector(clause)
            if s is None:
                return clause
            decl, c, i = self.sig.selectors[s.name]
            ctor_term, fs, prov = self._ctor_binding(s.arg, c.name)
            clause.literals = [transform(l, lambda x: fs[i] if x == s else None) for l in clause.literals]
            clause.literals.append(mk_eq(s.arg, ctor_term))
            clause.provenance.extend(prov)

    def eliminate_testers(self, clause: Clause) -> list[Clause]:
        alternatives: list[list[tuple[list[Term], list]]] = []
        kept = []
        for lit in clause.literals:
            pos, atom = _negated(lit)
            if isinstance(atom, Test) and self.sig.is_tree_sort(atom.arg.sort):
                decl, _ = self.sig.ctors[atom.ctor]
                ctors = [atom.ctor] if pos else [c.name for c in decl.constructors if c.name != atom.ctor]
                options = []
                for name in ctors:
                    ctor_term, _, prov = self._ctor_binding(atom.arg, name)
                    options.append(([mk_eq(atom.arg, ctor_term)], prov))
                alternatives.append(options)
            else:
                for s in iter_subterms(atom):
                    if isinstance(s, Test) and self.sig.is_tree_sort(s.arg.sort) and s is not atom:
                        raise NormalizeError(f"tester nested under a theory term: {s}")
                kept.append(lit)
        out = []
        combos = 1
        for a in alternatives:
            combos *= len(a)
        self._check_cap(combos)
        for choice in product(*alternatives):
            c = Clause(kept + [l for lits, _ in choice for l in lits], dict(clause.bindings),
                       list(clause.provenance) + [p for _, prov in choice for p in prov])
            out.append(c)
        return out

    # Step 3 -------------------------------------------------------------------
    def purify(self, clause: Clause) -> Clause:
        """Name every non-variable element argument of a tree constructor,
        so that constructor arguments are variables."""
        clause = clause.copy()
        extra = []

        def fix(t: Term) -> Term:
            if isinstance(t, Ctor) and self.sig.is_tree_sort(t.sort):
                decl, c = self.sig.ctors[t.name]
                rec = decl.recursive_positions(c.name)
                args = list(t.args)
                changed = False
                for i, a in enumerate(args):
                    if i not in rec and not isinstance(a, Var):
                        v = self.fresh(a.sort)
                        extra.append(mk_eq(v, a))
                        clause.provenance.append((v, a))
                        args[i] = v
                        changed = True
                if changed:
                    return Ctor(t.name, tuple(args), t.sort)
            return t

        clause.literals = [transform_bottom_up(l, fix) for l in clause.literals] + extra
        return clause

    def unify_trees(self, clause: Clause) -> Clause | None:
        """``None`` when unification fails (the clause is unsatisfiable)."""
        eqs, rest = [], []
        for lit in clause.literals:
            pos, atom = _negated(lit)
            if pos and _tree_eq(self.sig, atom):
                eqs.append(atom.args)
            else:
                rest.append(lit)
        sigma: dict[Var, Term] = {}
        residual: list[Term] = []
        work = deque(eqs)
        while work:
            a, b = work.popleft()
            a, b = substitute(a, sigma), substitute(b, sigma)
            if a == b:
                continue
            if isinstance(b, Var) and not isinstance(a, Var):
                a, b = b, a
            if isinstance(a, Var):
                if contains(b, a):
                    return None
                sigma = {k: substitute(v, {a: b}) for k, v in sigma.items()}
                sigma[a] = b
                continue
            if isinstance(a, Ctor) and isinstance(b, Ctor):
                if a.name != b.name:
                    return None
                for x, y in zip(a.args, b.args):
                    if self.sig.is_tree_sort(x.sort):
                        work.append((x, y))
                    elif x != y:
                        residual.append(mk_eq(x, y))
                continue
            raise NormalizeError(f"cannot unify tree terms {a} and {b}")
        out = Clause(rest, clause.bindings, clause.provenance).substitute(sigma)
        out.literals.extend(substitute(r, sigma) for r in residual)
        return out

    # Step 4 -------------------------------------------------------------------
    def _pending_diseq(self, clause: Clause) -> int | None:
        for i, lit in enumerate(clause.literals):
            pos, atom = _negated(lit)
            if not pos and _tree_eq(self.sig, atom):
                a, b = atom.args
                if not (isinstance(a, Var) and isinstance(b, Var) and a != b):
                    return i
        return None

    def reduce_disequalities(self, clause: Clause) -> list[Clause]:
        done = []
        queue = deque([clause])
        while queue:
            c = queue.popleft()
            i = self._pending_diseq(c)
            if i is None:
                done.append(c)
                continue
            lead = c.literals[i]
            rest = c.literals[:i] + c.literals[i + 1:]
            a, b = _negated(lead)[1].args
            produced = self._reduce_one(a, b, Clause(rest, c.bindings, c.provenance))
            measure = term_size(lead)
            for new in produced:
                for lit in new.literals[len(rest):]:
                    pos, atom = _negated(lit)
                    if not pos and _tree_eq(self.sig, atom):
                        assert term_size(lit) < measure, "disequality reduction did not shrink"
            queue.extend(produced)
            self._check_cap(len(queue) + len(done))
        return done

    def _reduce_one(self, a: Term, b: Term, c: Clause) -> list[Clause]:
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var) and isinstance(b, Var):
            return []  # t != t
        if isinstance(a, Ctor) and isinstance(b, Ctor):
            if a.name != b.name:
                return [c]
            out = []
            for x, y in zip(a.args, b.args):
                n = c.copy()
                n.literals.append(mk_not(mk_eq(x, y)))
                out.append(n)
            return out
        if isinstance(a, Var) and isinstance(b, Ctor):
            if contains(b, a):
                # a variable never equals a constructor term containing it
                return [c]
            decl, _ = self.sig.ctors[b.name]
            out = []
            for ctor in decl.constructors:
                ctor_term, fs, prov = self._ctor_binding(a, ctor.name)
                base = c.substitute({a: ctor_term})
                base.provenance.extend(prov)
                if ctor.name != b.name:
                    out.append(base)
                    continue
                for f, y in zip(fs, b.args):
                    n = base.copy()
                    n.literals.append(mk_not(mk_eq(f, y)))
                    out.append(n)
            return out
        raise NormalizeError(f"unexpected tree disequality between {a} and {b}")

    # Step 5 -------------------------------------------------------------------
    def partial_eval_cata(self, clause: Clause) -> Clause:
        sig = self.sig

        def peval(t: Term) -> Term | None:
            if isinstance(t, CataApp) and isinstance(t.arg, Ctor):
                cata = sig.catas[t.cata]
                decl = cata.input
                rec = decl.recursive_positions(t.arg.name)
                vals = [transform(CataApp(t.cata, x, cata.result), peval) if i in rec else x
                        for i, x in enumerate(t.arg.args)]
                return cata.instantiate(t.arg.name, vals)
            return None

        out = clause.copy()
        out.literals = [transform(l, peval) for l in out.literals]
        return out

    # pipeline ----------------------------------------------------------------------
    def to_standard_form(self, phi: Term) -> list[StandardClause]:
        self.counter = max(self.counter, _fresh_start([phi], self.prefix))
        for t in iter_subterms(phi):
            if isinstance(t, CataApp) and self.sig.is_tree_sort(t.sort):
                raise NormalizeError(f"catamorphism {t.cata} returns a tree; not supported here")
            if isinstance(t, TheoryApp) and t.op == "ite" and self.sig.is_tree_sort(t.sort):
                raise NormalizeError("tree-sorted ite is outside the logic")
        result = []
        for lits in self.to_dnf(phi):
            clause = self.eliminate_selectors(Clause(lits))
            assert_no_selectors(self.sig, clause.literals)
            for c in self.eliminate_testers(clause):
                u = self.unify_trees(self.purify(c))
                if u is None:
                    continue
                assert_no_tree_equalities(self.sig, u.literals)
                for r in self.reduce_disequalities(u):
                    assert_variable_diseqs(self.sig, r.literals)
                    r = self.partial_eval_cata(r)
                    assert_variable_cata_args(r.literals)
                    result.append(self._finish(r))
                    self._check_cap(len(result))
        return result

    def _finish(self, c: Clause) -> StandardClause:
        diseqs, ce = set(), []
        for lit in c.literals:
            pos, atom = _negated(lit)
            if not pos and _tree_eq(self.sig, atom):
                diseqs.add(frozenset(atom.args))
            elif lit == Lit(True, BOOL):
                continue
            else:
                ce.append(lit)
        return StandardClause(frozenset(diseqs), tuple(ce), tuple(c.bindings.items()), tuple(c.provenance))


# --- structural postconditions ------------------------------------------------------

def assert_no_selectors(sig: Signature, literals: Sequence[Term]):
    for l in literals:
        for s in iter_subterms(l):
            if isinstance(s, Sel) and sig.is_tree_sort(s.arg.sort):
                raise AssertionError(f"selector left after elimination: {s}")


def assert_no_tree_equalities(sig: Signature, literals: Sequence[Term]):
    for l in literals:
        pos, atom = _negated(l)
        if pos and _tree_eq(sig, atom):
            raise AssertionError(f"tree equality left after unification: {l}")
        if isinstance(atom, Test) and sig.is_tree_sort(atom.arg.sort):
            raise AssertionError(f"tester left after elimination: {l}")


def assert_variable_diseqs(sig: Signature, literals: Sequence[Term]):
    for l in literals:
        pos, atom = _negated(l)
        if _tree_eq(sig, atom):
            a, b = atom.args
            if pos or not (isinstance(a, Var) and isinstance(b, Var) and a != b):
                raise AssertionError(f"tree literal not a variable disequality: {l}")


def assert_variable_cata_args(literals: Sequence[Term]):
    for l in literals:
        for s in iter_subterms(l):
            if isinstance(s, CataApp) and not isinstance(s.arg, Var):
                raise AssertionError(f"catamorphism applied to a non-variable: {s}")


def is_standard(sig: Signature, clause: StandardClause) -> bool:
    try:
        lits = list(clause.ce_part)
        assert_no_selectors(sig, lits)
        assert_no_tree_equalities(sig, lits)
        assert_variable_diseqs(sig, lits)
        assert_variable_cata_args(lits)
    except AssertionError:
        return False
    return all(len(p) == 2 and all(isinstance(v, Var) for v in p) for p in clause.tree_diseqs)


# --- module-level entry points ----------------------------------------------------------

def to_dnf(phi: Term, sig: Signature, cap: int = DEFAULT_CAP) -> list[list[Term]]:
    return Normalizer(sig, cap).to_dnf(phi)


def to_standard_form(phi: Term, sig: Signature, cap: int = DEFAULT_CAP) -> list[StandardClause]:
    return Normalizer(sig, cap).to_standard_form(phi)


def max_disequalities(phi: Term, sig: Signature, cap: int = DEFAULT_CAP) -> int:
    """``p``: the largest tree-disequality count over the standard-form
    clauses (0 when there are none)."""
    return max((c.p for c in to_standard_form(phi, sig, cap)), default=0)
