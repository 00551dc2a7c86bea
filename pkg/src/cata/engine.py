"""The unrolling decision loop.

Each catamorphism is sent to the solver as an uninterpreted function with
the same name.  Round ``d`` first checks the formula together with the
control conditions (every frontier node is a base constructor); SAT there
is trustworthy.  Otherwise it checks the formula with the range
restrictions on the frontier; UNSAT there is trustworthy.  If neither
check decides, the frontier is unrolled one level and the loop repeats.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

from . import backend as be
from .analysis import NoBound, unroll_bound
from .frontend import (
    cata_declaration,
    cata_define_funs,
    print_command,
    print_term,
    unroll_assertion,
)
from .normalizer import NormalizeError, max_disequalities
from .script import (
    Assert,
    CataDef,
    DeclareDatatypes,
    DeclareFun,
    DeclareSort,
    DefineFun,
    Passthrough,
    Script,
)
from .terms import FALSE, CataApp, Ctor, Sel, Term, Test, TheoryApp, free_vars, iter_subterms, mk_or

log = logging.getLogger(__name__)

BOUND_MODES = ("off", "auto", "strict")


class EngineError(Exception):
    pass


class MissingRange(EngineError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    max_unroll: int = 64
    bound_mode: str = "auto"
    deadline_s: float | None = None  # wall-clock budget for the whole loop

    def __post_init__(self):
        if self.max_unroll < 0:
            raise ValueError("max-unroll must be >= 0")
        if self.bound_mode not in BOUND_MODES:
            raise ValueError(f"bound mode must be one of {', '.join(BOUND_MODES)}")


@dataclass(frozen=True)
class UnrollState:
    """Frontier, controls and ranges per catamorphism name.  ``phi`` keeps
    the catamorphism applications; the solver reads them as applications
    of the uninterpreted stand-ins.  After ``d`` steps the controls test
    the selector chains of length ``d - 1`` (the nodes unrolled last) and
    the frontier holds the chains of length ``d``."""

    phi: Term
    frontier: dict[str, tuple[Term, ...]]
    controls: tuple[Term, ...]
    ranges: tuple[Term, ...]
    depth: int = 0
    equations: tuple[tuple[str, Term], ...] = ()  # asserted by the latest step

    @property
    def frontier_terms(self) -> list[Term]:
        return [t for ts in self.frontier.values() for t in ts]


@dataclass(frozen=True)
class Round:
    depth: int
    controls: str  # sat | unsat | unknown; depth 0 is unsat without a query
    ranges: str | None
    elapsed_ms: float


@dataclass
class Verdict:
    outcome: str  # sat | unsat | unknown | sat-by-bound
    depth: int
    rounds: list[Round] = field(default_factory=list)
    model: str | None = None
    reason: str | None = None
    bound: int | None = None
    time_ms: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @property
    def backend_failed(self) -> bool:
        return self.outcome == "unknown" and bool(self.reason) and self.reason.startswith("backend")


# --- state ---------------------------------------------------------------------------

def _cata_args(term: Term) -> list[CataApp]:
    return [s for s in iter_subterms(term) if isinstance(s, CataApp)]


def _initial_frontier(script: Script) -> dict[str, tuple[Term, ...]]:
    frontier: dict[str, list[Term]] = {}
    sources = list(script.assertions)
    for f in script.signature.functions.values():
        if f.is_defined:
            for app in _cata_args(f.body):
                if free_vars(app.arg) & set(f.params):
                    raise EngineError(
                        f"function {f.name} applies {app.cata} to its parameter; "
                        "only closed catamorphism arguments can be unrolled")
            sources.append(f.body)
    for t in sources:
        for app in _cata_args(t):
            frontier.setdefault(app.cata, [])
            if app.arg not in frontier[app.cata]:
                frontier[app.cata].append(app.arg)
    for name in frontier:
        cata = script.catas[name]
        for case in cata.cases:
            for s in iter_subterms(case.body):
                if isinstance(s, CataApp):
                    raise EngineError(f"{name} mentions catamorphism {s.cata} in its definition")
    return {k: tuple(v) for k, v in frontier.items()}


def _range_terms(script: Script, frontier: dict[str, tuple[Term, ...]]) -> tuple[Term, ...]:
    out = []
    for name, terms in frontier.items():
        pred = script.catas[name].range_pred
        if pred is None or pred.is_trivial:
            continue
        cata = script.catas[name]
        out.extend(pred.apply(CataApp(name, t, cata.result)) for t in terms)
    return tuple(out)


def _base_test(cata: CataDef, t: Term) -> Term:
    return mk_or(*(Test(c.name, t) for c in cata.input.base_constructors))


def init(script: Script, config: EngineConfig | None = None) -> UnrollState:
    config = config or EngineConfig()
    if not script.assertions:
        raise EngineError("script has no assertions")
    frontier = _initial_frontier(script)
    if config.bound_mode == "strict":
        missing = [n for n in frontier if script.catas[n].range_pred is None]
        if missing:
            raise MissingRange(f"no range predicate for {', '.join(missing)} (strict bound mode)")
    return UnrollState(script.formula, frontier, (FALSE,), _range_terms(script, frontier), 0)


def unroll_step(state: UnrollState, script: Script) -> UnrollState:
    """Assert the defining equation at every frontier node and control
    those same nodes with base-constructor testers (so the equation
    collapses to the empty case); the new frontier, which carries the
    range restrictions, is their recursive children."""
    new_frontier: dict[str, tuple[Term, ...]] = {}
    equations = []
    controls = []
    for name, terms in state.frontier.items():
        cata = script.catas[name]
        kids = []
        for t in terms:
            equations.append((name, t))
            controls.append(_base_test(cata, t))
            for ctor in cata.input.constructors:
                for i in sorted(cata.input.recursive_positions(ctor.name)):
                    sel, fsort = ctor.fields[i]
                    child = Sel(sel, t, fsort)
                    if child not in kids:
                        kids.append(child)
        new_frontier[name] = tuple(kids)
    return replace(state, frontier=new_frontier, controls=tuple(controls),
                   ranges=_range_terms(script, new_frontier), depth=state.depth + 1,
                   equations=tuple(equations))


# --- session ---------------------------------------------------------------------------

def preamble(script: Script, catas: list[str], dialect: str, logic_set: bool = False) -> list[str]:
    """Declarations, stand-ins, user declarations, assertions, then the
    generated definitions, in that order."""
    decls, user, asserts = [], [], []
    for cmd in script.commands:
        if isinstance(cmd, (DeclareSort, DeclareDatatypes)):
            decls.append(print_command(cmd, dialect))
        elif isinstance(cmd, (DeclareFun, DefineFun)):
            user.append(print_command(cmd, dialect))
        elif isinstance(cmd, Assert):
            asserts.append(print_command(cmd, dialect))
        elif isinstance(cmd, Passthrough) and cmd.text.startswith("(set-logic") and not logic_set:
            decls.insert(0, cmd.text)
    stand_ins = [cata_declaration(script.catas[n], dialect) for n in catas]
    defs = [line for n in catas for line in cata_define_funs(script.catas[n], dialect)]
    return decls + stand_ins + user + asserts + defs


def _bound(script: Script, state: UnrollState, config: EngineConfig, warnings: list[str]) -> int | None:
    if config.bound_mode == "off" or not state.frontier:
        return None
    catas = [script.catas[n] for n in state.frontier]
    if any(c.declared_class.kind == "unclassified" or c.range_pred is None for c in catas):
        return None
    if len(catas) > 1 and not all(c.is_associative for c in catas):
        warnings.append("several catamorphisms that are not all associative: no bound claimed")
        return None
    try:
        p = max_disequalities(script.formula, script.signature)
    except NormalizeError as err:
        warnings.append(f"no bound: {err}")
        return None
    try:
        depth = max(unroll_bound(c.declared_class, p).depth for c in catas)
    except NoBound:
        return None
    return depth + nesting_allowance(script)


def nesting_allowance(script: Script) -> int:
    """Levels between the engine's frontier and the tree variables of the
    standard form.  The bound counts unrollings below those variables, but
    the engine unrolls the original arguments: each constructor occurrence
    and each tree (dis)equality can push the variables one level deeper.
    Over-estimating only delays early termination."""
    sig = script.signature
    k = 0
    for t in iter_subterms(script.formula):
        if isinstance(t, Ctor) and sig.is_tree_sort(t.sort):
            decl = sig.datatypes[t.sort.name]
            if decl.recursive_positions(t.name):
                k += 1
        elif (isinstance(t, TheoryApp) and t.op in ("=", "distinct") and t.args
              and sig.is_tree_sort(t.args[0].sort)):
            k += len(t.args) - 1
    return k


def decide(script: Script, solver: be.SolverConfig | be.Session | None = None,
           config: EngineConfig | None = None) -> Verdict:
    """Run the loop.  ``solver`` is a config (a session is started and
    closed here) or an already started session."""
    config = config or EngineConfig()
    start = time.monotonic()
    warnings: list[str] = []
    state = init(script, config)
    for name in state.frontier:
        if script.catas[name].range_pred is None:
            warnings.append(f"{name} has no range predicate; using true, so an unsatisfiable "
                            "input may not terminate")
    for w in warnings:
        log.warning(w)
    bound = _bound(script, state, config, warnings)

    own = not isinstance(solver, be.Session)
    session = None
    try:
        session = be.start(solver or be.SolverConfig()) if own else solver
        verdict = _loop(script, state, session, config, bound)
    except be.BackendError as err:
        verdict = Verdict("unknown", 0, reason=f"backend: {err}")
    finally:
        if own and session is not None:
            session.close()
    verdict.bound = bound
    verdict.warnings = warnings
    verdict.time_ms = (time.monotonic() - start) * 1000
    return verdict


def _loop(script: Script, state: UnrollState, session: be.Session, config: EngineConfig,
          bound: int | None) -> Verdict:
    dialect = session.config.printer_dialect
    catas = list(state.frontier)
    for line in preamble(script, catas, dialect, logic_set=bool(session.config.logic)):
        session.command(line)
    rounds: list[Round] = []
    deadline = time.monotonic() + config.deadline_s if config.deadline_s else None

    if not catas:
        t0 = time.monotonic()
        r = session.check_sat(None, model=True)
        rounds.append(Round(0, r.verdict, None, _ms(t0)))
        if r.verdict == "unknown":
            return Verdict("unknown", 0, rounds, reason="solver returned unknown")
        return Verdict(r.verdict, 0, rounds, model=r.model_text)

    while True:
        t0 = time.monotonic()
        depth = state.depth
        try:
            if depth == 0:
                controls = "unsat"
            else:
                res = session.check_sat([print_term(b, dialect) for b in state.controls], model=True)
                controls = res.verdict
                if controls == "sat":
                    rounds.append(Round(depth, "sat", None, _ms(t0)))
                    return Verdict("sat", depth, rounds, model=res.model_text)
            frame = [print_term(r, dialect) for r in state.ranges]
            ranges = session.check_sat(frame if frame else None).verdict
        except be.BackendError as err:
            rounds.append(Round(depth, "unknown", None, _ms(t0)))
            return Verdict("unknown", depth, rounds, reason=f"backend: {err}")
        rounds.append(Round(depth, controls, ranges, _ms(t0)))
        if ranges == "unsat":
            return Verdict("unsat", depth, rounds)
        if bound is not None and depth >= bound and ranges == "sat":
            return Verdict("sat-by-bound", depth, rounds, reason=f"unrolling bound {bound} reached")
        if depth >= config.max_unroll:
            return Verdict("unknown", depth, rounds, reason=f"max-unroll {config.max_unroll} reached")
        if deadline is not None and time.monotonic() > deadline:
            return Verdict("unknown", depth, rounds, reason="time budget exhausted")
        state = unroll_step(state, script)
        for name, t in state.equations:
            session.command(unroll_assertion(script.catas[name], t, dialect))


def _ms(t0: float) -> float:
    return (time.monotonic() - t0) * 1000
