"""Per-sample cost of the sparsified walk vs the exact sampler as n grows.

Uses a reduced grid so it finishes in a few seconds; the CLI ``bench``
command runs the full 2^10..2^14 grid.
"""
from sr_sampler.bench import BenchRow, run_bench

grid = [256, 1024, 4096]
print(BenchRow.header())
for exact in (False, True):
    for row in run_bench(grid, k=8, samples=5, exact=exact):
        print(row.csv())
