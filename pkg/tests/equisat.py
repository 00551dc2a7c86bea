"""Oracle-side equisatisfiability check between a formula and its
standard-form clauses, using the clause bindings and provenance to move
witnesses in both directions."""
from __future__ import annotations

from dataclasses import dataclass

from cata.normalizer import StandardClause
from cata.oracle import Evaluator, OracleError, Universe, brute_force_sat, evaluate
from cata.terms import Term, free_vars


@dataclass
class EquisatReport:
    formula_sat: bool
    clause_sat: bool
    forward_ok: bool  # formula witness extends to some clause
    backward_ok: bool  # clause witness rebuilds a formula witness

    @property
    def ok(self) -> bool:
        return self.forward_ok and self.backward_ok


def _default(sig, sort):
    return Universe(sig, (0,), 1).values(sort)[0]


def extend_witness(clause: StandardClause, witness: dict, sig) -> dict | None:
    """Values for the clause's fresh variables, computed from the terms they
    stand for; ``None`` when one of those terms is undefined."""
    ev = Evaluator(sig, None, "strict")
    env = dict(witness)
    try:
        for v, term in clause.provenance:
            env[v] = ev.eval(term, env)
    except (OracleError, Exception):
        return None
    return env


def rebuild_witness(phi: Term, clause: StandardClause, witness: dict, sig) -> dict:
    ev = Evaluator(sig, None, "strict")
    env = dict(witness)
    binds = dict(clause.bindings)
    out = {}
    for v in free_vars(phi):
        if v in binds:
            for w in free_vars(binds[v]):
                env.setdefault(w, _default(sig, w.sort))
            out[v] = ev.eval(binds[v], env)
        else:
            out[v] = env.get(v, _default(sig, v.sort))
    return out


def check_equisat(phi: Term, clauses: list[StandardClause], sig, domain, max_size: int = 5,
                  clause_size: int = 3, clause_budget: int = 50_000) -> EquisatReport:
    fwd = brute_force_sat(phi, sig, max_size, domain, selector_mode="strict")
    forward_ok = True
    if fwd.sat:
        forward_ok = False
        for c in clauses:
            env = extend_witness(c, fwd.witness, sig)
            if env is None or not free_vars(c.formula) <= set(env):
                continue
            if evaluate(c.formula, sig, env, selector_mode="strict"):
                forward_ok = True
                break

    universe = Universe(sig, domain, clause_size)
    clause_sat, backward_ok = False, True
    for c in clauses:
        vs = free_vars(c.formula)
        n = 1
        for v in vs:
            n *= len(universe.values(v.sort))
        size = clause_size if n <= clause_budget else 1
        r = brute_force_sat(c.formula, sig, size, domain, selector_mode="strict")
        if not r.sat:
            continue
        clause_sat = True
        orig = rebuild_witness(phi, c, r.witness, sig)
        backward_ok = evaluate(phi, sig, orig, selector_mode="strict")
        break
    return EquisatReport(fwd.sat, clause_sat, forward_ok, backward_ok)
