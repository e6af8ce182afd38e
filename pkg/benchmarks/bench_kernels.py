"""Compare the compiled and numpy Euler-Maclaurin Hurwitz kernels.

Usage: python3 benchmarks/bench_kernels.py [--points 400] [--t-max 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from dirichlet_xray import kernels
from dirichlet_xray.evaluator import EMParams, _bernoulli_coeffs


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--t-max", type=float, default=200.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    s = rng.uniform(0.0, 1.0, args.points) + 1j * rng.uniform(10.0, args.t_max, args.points)
    params = EMParams()
    n = params.cutoffs(s)
    bern = _bernoulli_coeffs(params.order)
    terms = int(n.sum())
    print(f"points={args.points} t_max={args.t_max:g} total_terms={terms}")

    rows = []
    for label, f in (("numpy", kernels.hurwitz_em_numpy), ("cython", kernels.hurwitz_em_compiled)):
        if f is None:
            print(f"{label:>7}: not built")
            continue
        dt, (vals, _) = _time(lambda: f(s, 0.2, n, bern), args.repeat)
        rows.append((label, dt, vals))
        print(f"{label:>7}: {dt * 1e3:9.2f} ms  {terms / dt / 1e6:8.2f} Mterm/s")
    for label, fd in (("numpy d", kernels.hurwitz_em_d_numpy), ("cython d", kernels.hurwitz_em_d_compiled)):
        if fd is None:
            continue
        dt, _ = _time(lambda: fd(s, 0.2, n, bern), args.repeat)
        print(f"{label:>8}: {dt * 1e3:8.2f} ms")
    # curve tracing evaluates one point at a time
    one = s[:200]
    for label, fd in (("numpy 1pt", kernels.hurwitz_em_d_numpy), ("cython 1pt", kernels.hurwitz_em_d_compiled)):
        if fd is None:
            continue
        dt, _ = _time(lambda: [fd(one[k:k + 1], 0.2, n[k:k + 1], bern) for k in range(len(one))], args.repeat)
        print(f"{label:>10}: {dt / len(one) * 1e6:8.1f} us/call")
    if len(rows) == 2:
        (_, t_np, v_np), (_, t_cy, v_cy) = rows
        rel = float(np.max(np.abs(v_np - v_cy) / np.abs(v_cy)))
        print(f"speedup={t_np / t_cy:.1f}x  max_rel_diff={rel:.2e}")


if __name__ == "__main__":
    main()
