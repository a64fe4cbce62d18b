"""Compare the compiled kernel against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

from haltren import _backend, _pykernel
from haltren.machine import BudgetPolicy, enumerate_programs, parse_program

QUADRATIC = parse_program(
    "DEC 1; JZ 1 4; DEC 1; INC 2; JMP -3; JZ 2 8; DEC 2; JZ 2 4; DEC 2; INC 1; JMP -3; JZ 1 2; JMP -12"
)


def _timed(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _run_workload(kernel):
    policy = BudgetPolicy(2_000, 4_096)
    lowered = [p.lowered for p in enumerate_programs(3, 2, 2)]

    def work():
        for ops, regs, targets, nregs in lowered:
            for x in (1, 5, 20):
                kernel.run_compiled(ops, regs, targets, nregs, x, policy.step_budget,
                                    policy.space_budget)
        ops, regs, targets, nregs = QUADRATIC.lowered
        for x in range(1, 60):
            kernel.run_compiled(ops, regs, targets, nregs, x, 10 * x * x, 1 << 16)

    return work


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scan-size", type=int, default=5)
    args = ap.parse_args()

    compiled = _backend._compiled
    if compiled is None:
        print("compiled kernel unavailable; only the Python timings are shown")

    rows = []
    py = _timed(_run_workload(_pykernel), args.repeat)
    c = _timed(_run_workload(compiled), args.repeat) if compiled else None
    rows.append(("run_compiled (size<=3 x 3 inputs + quadratic)", py, c))

    py = _timed(lambda: _pykernel.scan_skeletons(args.scan_size, 2, 2), args.repeat)
    c = (_timed(lambda: compiled.scan_skeletons(args.scan_size, 2, 2), args.repeat)
         if compiled else None)
    rows.append((f"scan_skeletons (size<={args.scan_size})", py, c))

    print(f"{'kernel':50s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for name, py, c in rows:
        if c is None:
            print(f"{name:50s} {py:10.3f} {'-':>11s} {'-':>8s}")
        else:
            print(f"{name:50s} {py:10.3f} {c:11.3f} {py / c:7.1f}x")


if __name__ == "__main__":
    main()
