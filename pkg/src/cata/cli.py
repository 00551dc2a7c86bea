"""``cata`` command line: solve, analyze, normalize, combine, oracle, bench."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import analysis, backend as be, engine
from .frontend import FrontendError, lower_script, parse_script, print_command, print_term
from .normalizer import NormalizeError, to_standard_form
from .oracle import OracleError, brute_force_sat
from .script import DeclareDatatypes, DefineCata, Script
from .terms import SortError

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_UNKNOWN = 30
EXIT_USAGE = 1
EXIT_BACKEND = 2

log = logging.getLogger("cata")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    input: str
    verdict: str
    depth: int
    time_ms: float
    backend: str
    bound: int | None = None
    round_ms: list[float] = field(default_factory=list)
    reason: str | None = None

    def header(self) -> str:
        return f"{self.verdict} {self.depth} {self.time_ms:.1f}"

    def to_json(self) -> str:
        record = {
            "verdict": self.verdict,
            "depth": self.depth,
            "time_ms": round(self.time_ms, 3),
            "backend": self.backend,
            "bound": self.bound,
            "input": self.input,
            "round_ms": [round(x, 3) for x in self.round_ms],
            "reason": self.reason,
        }
        return json.dumps(record, sort_keys=True)


def exit_code(v: engine.Verdict) -> int:
    if v.outcome == "sat":
        return EXIT_SAT
    if v.outcome == "unsat":
        return EXIT_UNSAT
    if v.backend_failed:
        return EXIT_BACKEND
    return EXIT_UNKNOWN


def _load(path: str) -> Script:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    except UnicodeDecodeError:
        raise UsageError(f"{path} is not UTF-8") from None
    try:
        return parse_script(text)
    except FrontendError as err:
        raise UsageError(f"{path}:{err}") from None


def _solver(args) -> be.SolverConfig:
    try:
        return be.SolverConfig.from_spec(args.solver, timeout_ms=args.timeout_ms,
                                         logic=getattr(args, "logic", None))
    except ValueError as err:
        raise UsageError(str(err)) from None


# --- solve ---------------------------------------------------------------------------

def solve_file(path: str, solver: be.SolverConfig, config: engine.EngineConfig,
               trace_path: str | None = None) -> tuple[engine.Verdict, RunReport]:
    script = _load(path)
    session = None
    try:
        try:
            session = be.start(solver)
        except be.BackendError as err:
            v = engine.Verdict("unknown", 0, reason=f"backend: {err}")
        else:
            v = engine.decide(script, session, config)
    except engine.EngineError as err:
        raise UsageError(str(err)) from None
    finally:
        if session is not None:
            session.close()
            if trace_path:
                Path(trace_path).write_text(session.trace_text(), encoding="utf-8")
    report = RunReport(path, v.outcome, v.depth, v.time_ms, solver.identity(), v.bound,
                       [r.elapsed_ms for r in v.rounds], v.reason)
    return v, report


def cmd_solve(args) -> int:
    script_only = args.emit_core_smt2
    if script_only:
        script = _load(args.file)
        sys.stdout.write(lower_script(script, args.dialect))
        return 0
    config = engine.EngineConfig(args.max_unroll, args.bound_mode)
    v, report = solve_file(args.file, _solver(args), config, args.emit_trace)
    for w in v.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.json:
        print(report.to_json())
    else:
        print(report.header())
        if v.reason:
            print(f"; {v.reason}")
        if v.model and not args.no_model:
            print(v.model)
    return exit_code(v)


# --- analyze ---------------------------------------------------------------------------

def _pick_catas(script: Script, name: str | None):
    if name:
        if name not in script.catas:
            raise UsageError(f"no catamorphism named {name}")
        return [script.catas[name]]
    if not script.catas:
        raise UsageError("the script defines no catamorphism")
    return list(script.catas.values())


def cmd_analyze(args) -> int:
    script = _load_lenient(args.file)
    catas = _pick_catas(script, args.cata)
    failed = False
    if args.check == "bound":
        if args.p is not None:
            p = args.p
        else:
            try:
                p = max((c.p for c in to_standard_form(script.formula, script.signature)), default=0)
            except NormalizeError as err:
                raise UsageError(f"cannot compute p: {err}") from None
        for c in catas:
            try:
                r = analysis.unroll_bound(c.declared_class, p)
            except analysis.NoBound as err:
                print(f"{c.name} BOUND NONE ({err})")
                failed = True
                continue
            print(f"{c.name} BOUND {r.depth} mode={r.mode} p={r.p} class={r.justification}")
        return 1 if failed else 0
    solver = _solver(args)
    for c in catas:
        if args.check == "assoc":
            results = [analysis.detect_associative_syntactic(c, solver, script.signature),
                       analysis.detect_associative_semantic(c, solver, script.signature)]
        else:
            if c.range_pred is None:
                print(f"{c.name} RANGE-OVERAPPROX UNKNOWN (no range predicate)")
                failed = True
                continue
            results = [analysis.check_range_overapprox(c, solver, script.signature)]
        for r in results:
            print(f"{c.name} {r.line()}")
            failed |= not r.holds
    return 3 if failed else 0


def _load_lenient(path: str) -> Script:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    try:
        return parse_script(text, require_check_sat=False)
    except FrontendError as err:
        raise UsageError(f"{path}:{err}") from None


# --- normalize ----------------------------------------------------------------------

def cmd_normalize(args) -> int:
    script = _load_lenient(args.file)
    if not script.assertions:
        raise UsageError("the script has no assertions")
    try:
        clauses = to_standard_form(script.formula, script.signature, args.cap)
    except NormalizeError as err:
        raise UsageError(str(err)) from None
    print(f"; {len(clauses)} clause(s), p = {max((c.p for c in clauses), default=0)}")
    for i, c in enumerate(clauses, 1):
        if args.emit:
            print(f"(assert {print_term(c.formula)})" if len(clauses) == 1 else print_term(c.formula))
        else:
            print(f"; clause {i}: p = {c.p}")
            print(print_term(c.formula))
    return 0


# --- combine ------------------------------------------------------------------------------

def cmd_combine(args) -> int:
    script = _load_lenient(args.file)
    names = [n.strip() for n in args.catas.split(",") if n.strip()]
    if not names:
        raise UsageError("--catas needs at least one name")
    missing = [n for n in names if n not in script.catas]
    if missing:
        raise UsageError(f"unknown catamorphism(s): {', '.join(missing)}")
    try:
        product, tup = analysis.combine_catas([script.catas[n] for n in names], args.name)
    except analysis.AnalysisError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    print(print_command(DeclareDatatypes((tup,))))
    print(print_command(DefineCata(product)))
    print(f"(set-cata-class {product.name} associative)")
    return 0


# --- oracle -----------------------------------------------------------------------------------

def parse_value(text: str):
    text = text.strip()
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        if any(ch.isdigit() for ch in text):
            return Fraction(text)
    except ValueError:
        pass
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    return text


def _true_on(specs) -> dict:
    funcs = {}
    for spec in specs or ():
        if "=" not in spec:
            raise UsageError(f"--true-on expects NAME=v1,v2 (got {spec})")
        name, values = spec.split("=", 1)
        table = frozenset(parse_value(v) for v in values.split(",") if v)
        funcs[name] = lambda x, table=table: x in table
    return funcs


def cmd_oracle(args) -> int:
    script = _load_lenient(args.file)
    domain = [parse_value(v) for v in args.domain.split(",") if v.strip()]
    if not domain:
        raise UsageError("--domain needs at least one value")
    try:
        r = brute_force_sat(script.formula, script.signature, args.max_size, domain,
                            selector_mode=args.selectors, funcs=_true_on(args.true_on))
    except (OracleError, ValueError) as err:
        raise UsageError(str(err)) from None
    print(r)
    return 0


# --- bench ----------------------------------------------------------------------------------

@dataclass
class BenchRow:
    name: str
    expected: str | None
    verdict: str
    time_ms: float

    @property
    def status(self) -> str:
        if self.expected is None:
            return "skipped"
        got = "sat" if self.verdict == "sat-by-bound" else self.verdict
        return "ok" if got == self.expected else "MISMATCH"


def run_bench(directory: str, solver: be.SolverConfig, config: engine.EngineConfig,
              jobs: int = 1) -> list[BenchRow]:
    files = sorted(Path(directory).glob("*.smt2"))

    def one(path: Path) -> BenchRow:
        expect_file = path.with_suffix(".expect")
        expected = None
        if expect_file.exists():
            expected = expect_file.read_text(encoding="utf-8").strip()
            if expected not in ("sat", "unsat"):
                raise UsageError(f"{expect_file}: expected 'sat' or 'unsat'")
        if expected is None:
            return BenchRow(path.stem, None, "-", 0.0)
        try:
            v, _ = solve_file(str(path), solver, config)
            return BenchRow(path.stem, expected, v.outcome, v.time_ms)
        except UsageError as err:
            return BenchRow(path.stem, expected, f"error: {err}", 0.0)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(one, files))


def cmd_bench(args) -> int:
    config = engine.EngineConfig(args.max_unroll, args.bound_mode, deadline_s=args.file_timeout)
    rows = run_bench(args.dir, _solver(args), config, args.jobs)
    if not rows:
        print("0 benchmarks")
        return 0
    width = max(len(r.name) for r in rows)
    print(f"{'benchmark':<{width}}  {'expected':<8}  {'result':<12}  {'time(s)':>8}  status")
    for r in rows:
        print(f"{r.name:<{width}}  {r.expected or '-':<8}  {r.verdict:<12}  "
              f"{r.time_ms / 1000:>8.3f}  {r.status}")
    bad = [r for r in rows if r.status == "MISMATCH"]
    ran = sum(r.status != "skipped" for r in rows)
    print(f"{ran} benchmarks, {len(bad)} mismatches, {len(rows) - ran} skipped")
    for r in bad:
        print(f"mismatch: {r.name}.smt2", file=sys.stderr)
    return 1 if bad else 0


# --- argument parsing ----------------------------------------------------------------------

def _solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--solver", default="z3", help="z3, cvc, path:<exe> or replay:<trace>")
    p.add_argument("--timeout-ms", type=int, default=10_000, help="per-check solver timeout")
    p.add_argument("--logic", default=None, help="SMT-LIB logic to set (default: none)")


def _engine_flags(p: argparse.ArgumentParser):
    p.add_argument("--max-unroll", type=int, default=64)
    p.add_argument("--bound-mode", choices=engine.BOUND_MODES, default="auto")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cata", description=(
        "Satisfiability of formulas over algebraic data types with catamorphisms."))
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide a script by incremental unrolling")
    p.add_argument("file")
    _solver_flags(p)
    _engine_flags(p)
    p.add_argument("--emit-trace", metavar="FILE", help="write the solver dialogue to FILE")
    p.add_argument("--emit-core-smt2", action="store_true",
                   help="print the script lowered to plain SMT-LIB and exit")
    p.add_argument("--dialect", choices=("smtlib", "z3"), default="smtlib",
                   help="printer dialect for --emit-core-smt2")
    p.add_argument("--json", action="store_true", help="one-line machine-readable report")
    p.add_argument("--no-model", action="store_true")
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("analyze", help="associativity, range and bound checks")
    p.add_argument("file")
    p.add_argument("--check", choices=("assoc", "range", "bound"), required=True)
    p.add_argument("--cata", help="only this catamorphism")
    p.add_argument("--p", type=int, help="disequality count for --check bound")
    _solver_flags(p)
    p.set_defaults(run=cmd_analyze)

    p = sub.add_parser("normalize", help="print the standard-form clauses")
    p.add_argument("file")
    p.add_argument("--emit", action="store_true", help="print clauses only, as SMT-LIB terms")
    p.add_argument("--cap", type=int, default=100_000, help="clause explosion cap")
    p.set_defaults(run=cmd_normalize)

    p = sub.add_parser("combine", help="product of associative catamorphisms")
    p.add_argument("file")
    p.add_argument("--catas", required=True, help="comma-separated names")
    p.add_argument("--name", help="name of the product catamorphism")
    p.set_defaults(run=cmd_combine)

    p = sub.add_parser("oracle", help="bounded brute-force satisfiability")
    p.add_argument("file")
    p.add_argument("--max-size", type=int, default=5)
    p.add_argument("--domain", default="0,1,2", help="element values, comma-separated")
    p.add_argument("--selectors", choices=("total", "strict"), default="total")
    p.add_argument("--true-on", action="append", metavar="NAME=v1,v2",
                   help="interpret a unary Bool function as true exactly on these values")
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("bench", help="run a directory of .smt2 files against .expect files")
    p.add_argument("dir")
    _solver_flags(p)
    _engine_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--file-timeout", type=float, default=10.0, help="seconds per file")
    p.set_defaults(run=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.run(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (SortError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except be.BackendError as err:
        print(f"backend error: {err}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
