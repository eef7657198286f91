#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot paths on the canonical all-pass stage: batched complex
solves of the AC system (one per sweep frequency) and full transient
runs, linear and tanh-saturated. Also cross-checks that both backends
produce the same numbers.

Run from the repository root:

    python benchmarks/bench_backends.py [--sweep-points N] [--cycles N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from fdccsim import SaturationSpec, Sin, build_allpass_netlist
from fdccsim._kernels import pykernels
from fdccsim.mna import assemble_ac
from fdccsim.transient import _assemble_transient

try:
    from fdccsim._kernels import _native
except ImportError:
    _native = None

R = 1e3
C = 1e-9
F0 = 1.0 / (2.0 * math.pi * R * C)


def time_solves(impl, systems, repeat):
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        for matrix, rhs in systems:
            x, status = impl.solve_z(matrix, rhs)
            assert status == -1
        best = min(best, time.perf_counter() - start)
    return best, x


def time_transient(impl, system, h, nsteps, repeat):
    args = (
        system.a_base, system.cap_n1, system.cap_n2, system.cap_geq,
        system.src_row, system.src_offset, system.src_amp,
        system.src_omega, system.src_phase,
        system.sat_row, system.sat_xcol, system.sat_vsat,
        system.sat_ptr, system.sat_col, system.sat_coef,
        h, nsteps,
    )
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        traces, status, *_ = impl.run_transient(*args)
        assert status == 0
        best = min(best, time.perf_counter() - start)
    return best, traces


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sweep-points", type=int, default=2000,
                        help="complex solves per timing run (default 2000)")
    parser.add_argument("--cycles", type=int, default=30,
                        help="transient cycles at 200 steps each (default 30)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions, best is kept (default 3)")
    args = parser.parse_args()

    if _native is None:
        print("native kernels not built; nothing to compare")
        return

    netlist = build_allpass_netlist(R, C)
    freqs = np.logspace(0, 8, args.sweep_points)
    systems = []
    for f in freqs:
        sys_ = assemble_ac(netlist, 2.0 * math.pi * f)
        systems.append((sys_.matrix, sys_.rhs))

    h = 1.0 / (F0 * 200)
    nsteps = args.cycles * 200
    linear = _assemble_transient(
        build_allpass_netlist(R, C, waveform=Sin(0.0, 1.0, F0)), h
    )
    saturated = _assemble_transient(
        build_allpass_netlist(
            R, C, saturation=SaturationSpec(1.5), waveform=Sin(0.0, 3.0, F0)
        ),
        h,
    )

    rows = []
    t_py, x_py = time_solves(pykernels, systems, args.repeat)
    t_nat, x_nat = time_solves(_native, systems, args.repeat)
    assert np.allclose(x_py, x_nat, rtol=1e-12, atol=0)
    rows.append((f"{args.sweep_points} complex solves (dim 7)", t_py, t_nat))

    for label, system in (("linear transient", linear), ("saturated transient", saturated)):
        t_py, tr_py = time_transient(pykernels, system, h, nsteps, args.repeat)
        t_nat, tr_nat = time_transient(_native, system, h, nsteps, args.repeat)
        scale = np.max(np.abs(tr_py)) or 1.0
        assert np.max(np.abs(tr_py - tr_nat)) <= 1e-11 * scale
        rows.append((f"{label} ({nsteps} steps)", t_py, t_nat))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'python':>10}  {'native':>10}  {'speedup':>8}")
    for label, t_py, t_nat in rows:
        print(f"{label:<{width}}  {t_py * 1e3:>8.1f}ms  {t_nat * 1e3:>8.1f}ms  "
              f"{t_py / t_nat:>7.1f}x")
    print("results agree across backends")


if __name__ == "__main__":
    main()
