"""Decide the SumTree script and print what each round of unrolling saw.

    python demos/unroll_walkthrough.py            # live z3
    python demos/unroll_walkthrough.py --replay   # recorded session, no solver needed
"""
import sys
from pathlib import Path

from cata import SolverConfig, decide, parse_script

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"


def main():
    script = parse_script((FIXTURES / "sumtree.smt2").read_text())
    solver = SolverConfig.from_spec(f"replay:{FIXTURES / 'sumtree.trace'}") if "--replay" in sys.argv else SolverConfig()
    v = decide(script, solver)
    print(f"{'depth':>5}  {'controls':<8}  ranges")
    for r in v.rounds:
        print(f"{r.depth:>5}  {r.controls:<8}  {r.ranges or '-'}")
    print(f"verdict: {v.outcome} at depth {v.depth}")
    if v.model:
        print(v.model)


if __name__ == "__main__":
    main()
