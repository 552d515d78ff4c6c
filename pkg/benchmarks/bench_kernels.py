"""Compare the compiled and pure-Python objective kernels.

Run with ``python3 benchmarks/bench_kernels.py``. Reports objective
throughput (batch evaluation) and the time for a full local refinement per
start, for one two-qubit set and one 3x3 set.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from entrosep import observables as obs
from entrosep.kernels import KIND_ANGLES, KIND_PRODUCT, EntropyPlan, available_backends
from entrosep.sepmin import start_points


def timed(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_case(opset, kind, n_eval, n_refine):
    plan = EntropyPlan.from_set(opset)
    xs = start_points(kind, plan.n_params(kind), n_eval, seed=0)
    rows = []
    ref_vals = None
    for backend in available_backends():
        t_eval, vals = timed(lambda: plan.batch(xs, kind, backend))
        t_ref, res = timed(lambda: [plan.refine(x, kind, backend) for x in xs[:n_refine]], repeat=1)
        if ref_vals is None:
            ref_vals = vals
        rows.append(
            (
                backend,
                n_eval / t_eval,
                1e3 * t_ref / n_refine,
                min(r[1] for r in res),
                float(np.max(np.abs(vals - ref_vals))),
            )
        )
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--evals", type=int, default=20_000)
    ap.add_argument("--refines", type=int, default=32)
    args = ap.parse_args(argv)
    cases = [
        (obs.set_1_1_2(), KIND_ANGLES),
        (obs.bell_set_one_rest(3), KIND_PRODUCT),
    ]
    print(f"{'set':<14}{'backend':<9}{'evals/s':>14}{'ms/refine':>12}{'best f':>16}{'max |diff|':>12}")
    for opset, kind in cases:
        rows = bench_case(opset, kind, args.evals, args.refines)
        for backend, rate, ms, best, diff in rows:
            print(f"{opset.name:<14}{backend:<9}{rate:>14.0f}{ms:>12.2f}{best:>16.10f}{diff:>12.1e}")
        if len(rows) == 2:
            print(f"{'':<14}speedup  eval x{rows[1][1] / rows[0][1]:.1f}  refine x{rows[0][2] / rows[1][2]:.1f}")


if __name__ == "__main__":
    main()
