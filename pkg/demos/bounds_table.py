"""Unrolling bounds for associative catamorphisms against the number of
tree disequalities in the normalized formula."""
from cata import analysis
from cata.script import ASSOCIATIVE, monotonic

print(f"{'p':>8}  {'associative':>11}  {'monotonic(2)':>12}")
for p in (0, 1, 4, 14, 100, 10_000, 50_000, 1_000_000):
    a = analysis.unroll_bound(ASSOCIATIVE, p).depth
    m = analysis.unroll_bound(monotonic(2), p).depth
    print(f"{p:>8}  {a:>11}  {m:>12}")
