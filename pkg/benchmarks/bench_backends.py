#!/usr/bin/env python3
"""Benchmark the compiled propagation kernel against the pure-Python twin.

Runs the stabilized invariant-imbedding integration for the three reference
devices and a synthetic high-velocity case on both backends, checks that the
results agree, and reports wall times and the speedup.

    python3 benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time


from asymscat import _imbed_py
from asymscat.imbedding import ScatterJob
from asymscat.profiles import make_preset, preset_profile

try:
    from asymscat import _imbed
except ImportError:
    _imbed = None


def cases():
    for name in ("ta", "ra", "tra-half"):
        profile, v0 = preset_profile(name)
        yield name, ScatterJob.from_profile(profile, v0)
    fast = make_preset("VIII", a_tau=6000.0, x0_over_d=0.15, w_over_d=0.14,
                       tau_delta=3000.0)
    yield "synthetic v/v_d=800", ScatterJob.from_profile(fast, 800.0)


def run(mod, job, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = mod.propagate_stabilized(
            job.kbar, job.kappa2, job.amps, job.centers, job.widths, 1e-9, 1e-12
        )
        best = min(best, time.perf_counter() - t0)
    return out, best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _imbed is None:
        print("compiled kernel not built; showing pure-Python timings only\n")

    header = f"{'case':24s} {'steps':>8s} {'python':>10s}"
    if _imbed is not None:
        header += f" {'cython':>10s} {'speedup':>8s} {'max |diff|':>11s}"
    print(header)
    print("-" * len(header))

    for name, job in cases():
        out_py, t_py = run(_imbed_py, job, args.repeats)
        line = f"{name:24s} {out_py[2]['n_steps']:8d} {t_py*1e3:9.1f}ms"
        if _imbed is not None:
            out_cy, t_cy = run(_imbed, job, args.repeats)
            diff = max(
                abs(a - b) for a, b in zip(out_py[0] + out_py[1], out_cy[0] + out_cy[1])
            )
            assert out_py[2]["n_steps"] == out_cy[2]["n_steps"], "step counts diverged"
            line += f" {t_cy*1e3:9.1f}ms {t_py/t_cy:7.1f}x {diff:11.2e}"
        print(line)


if __name__ == "__main__":
    main()
