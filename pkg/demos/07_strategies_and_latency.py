"""
Per-limb matching vs the exact joint optimum, and parse latency
===============================================================

Small instances are solved exactly to see how much the per-limb shortcut
gives up; the benchmark then times the shortcut alone on larger crowds.
"""
from pafparse.evaluate import COMPARE_SPEC, bench_parse, compare_strategies

report = compare_strategies(COMPARE_SPEC, n_instances=50, timing_instances=5)
print(report.to_text())
print(f"exhaustive is {report.timings['speed_ratio']:.0f}x slower\n")

print(f"{'people':>6} {'mean ms':>8} {'p95 ms':>8}")
for n in (1, 3, 6, 9, 12):
    r = bench_parse(n, 100)
    print(f"{n:>6} {r['mean_ms']:>8.3f} {r['p95_ms']:>8.3f}")
