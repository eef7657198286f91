"""Command-line front end.

Subcommands: ``gen fig2`` (emit the canonical all-pass netlist), ``ac``,
``tran``, ``poles``, ``sens``, ``verify`` and ``thd``. Data goes to the
output file (or stdout); diagnostics go to stderr. CSV is emitted with a
header row and 15-significant-digit values, so identical inputs give
byte-identical output.

Exit codes: 0 success / verification pass, 1 verification failure,
2 usage or I/O error, 3 netlist parse error, 4 numerical failure
(singular system, Newton non-convergence, missing phase crossing or
fundamental).
"""

from __future__ import annotations

import argparse
import math
import sys

from .analysis import (
    SweepGrid,
    ac_sweep,
    closed_form_sensitivities,
    estimate_pole_from_phase,
    pole_frequency,
    reference_params,
    sensitivities,
    verify_allpass,
)
from .errors import CircuitError
from .netlist import (
    Capacitor,
    Netlist,
    Resistor,
    SaturationSpec,
    FdcciiParams,
    build_allpass_netlist,
)
from .parser import parse, parse_value, serialize
from .transient import simulate, thd_sweep


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def _value_flag(text: str) -> float:
    try:
        return parse_value(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _amps_flag(text: str) -> list[float]:
    try:
        return [parse_value(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fmt(value: float) -> str:
    return format(value, ".15g")


def _load_netlist(path: str) -> Netlist:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _Fail(2, f"cannot read {path}: {exc}") from None
    result = parse(text)
    if isinstance(result, list):
        lines = "\n".join(f"{path}:{err}" for err in result)
        raise _Fail(3, lines)
    return result


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Fail(2, f"cannot write {path}: {exc}") from None


def _single_stage(netlist: Netlist) -> tuple[float, float, FdcciiParams]:
    r = next((e.ohms for e in netlist.elements if isinstance(e, Resistor)), None)
    c = next((e.farads for e in netlist.elements if isinstance(e, Capacitor)), None)
    if r is None or c is None:
        raise _Fail(2, "netlist needs one resistor and one capacitor for closed-form results")
    try:
        params = reference_params(netlist)
    except ValueError as exc:
        raise _Fail(2, str(exc)) from None
    return r, c, params


def _cmd_gen(args: argparse.Namespace) -> int:
    params = FdcciiParams(
        alpha1=args.a1,
        alpha2=args.a2,
        beta1=args.b1,
        beta2=args.b2,
        beta3=args.b3,
        beta4=args.b4,
        beta5=args.b5,
        beta6=args.b6,
    )
    saturation = SaturationSpec(args.sat) if args.sat is not None else None
    netlist = build_allpass_netlist(args.r, args.c, params, saturation)
    _write_lines(args.output, serialize(netlist).splitlines())
    return 0


def _cmd_ac(args: argparse.Namespace) -> int:
    netlist = _load_netlist(args.netlist)
    if not netlist.probes:
        raise _Fail(2, "netlist declares no probes")
    grid = SweepGrid(args.fstart, args.fstop, args.ppd)
    table = ac_sweep(netlist, None, grid)
    labels = [p.label for p in netlist.probes]
    header = "freq_hz"
    for label in labels:
        header += f",{label}_mag,{label}_db,{label}_phase_deg"
    lines = [header]
    for i, f in enumerate(table.freqs):
        row = [_fmt(f)]
        for label in labels:
            gain = table.gains[label][i]
            mag = abs(gain)
            db = 20.0 * math.log10(mag) if mag > 0.0 else float("-inf")
            row += [_fmt(mag), _fmt(db), _fmt(math.degrees(math.atan2(gain.imag, gain.real)))]
        lines.append(",".join(row))
    _write_lines(args.output, lines)
    return 0


def _cmd_tran(args: argparse.Namespace) -> int:
    netlist = _load_netlist(args.netlist)
    if not netlist.probes:
        raise _Fail(2, "netlist declares no probes")
    result = simulate(netlist, args.h, args.tstop)
    labels = [p.label for p in netlist.probes]
    lines = ["time_s," + ",".join(labels)]
    for i, t in enumerate(result.times):
        row = [_fmt(t)] + [_fmt(result.traces[label][i]) for label in labels]
        lines.append(",".join(row))
    _write_lines(args.output, lines)
    return 0


def _cmd_poles(args: argparse.Namespace) -> int:
    netlist = _load_netlist(args.netlist)
    probe = args.probe
    if probe is None:
        labels = [p.label for p in netlist.probes]
        if "VOUT1" in labels:
            probe = "VOUT1"
        elif labels:
            probe = labels[0]
        else:
            raise _Fail(2, "netlist declares no probes")
    measured = estimate_pole_from_phase(netlist, probe)
    r, c, params = _single_stage(netlist)
    closed = pole_frequency(r, c, params) / (2.0 * math.pi)
    print(f"probe {probe}: measured pole {measured:.6g} Hz, closed-form {closed:.6g} Hz")
    return 0


def _cmd_sens(args: argparse.Namespace) -> int:
    netlist = _load_netlist(args.netlist)
    r, c, params = _single_stage(netlist)
    report = sensitivities(r, c, params, rel_step=args.step)
    targets = closed_form_sensitivities()
    print(f"{'parameter':<10} {'measured':>14} {'closed-form':>12}")
    for name, value in report.values.items():
        print(f"{name:<10} {value:>14.8f} {targets[name]:>12.1f}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    netlist = _load_netlist(args.netlist)
    grid = SweepGrid(1.0, 1e8, 50)
    report = verify_allpass(netlist, grid, args.mag_tol, args.phase_tol)
    verdict = "PASS" if report.passed else "FAIL"
    print(
        f"{verdict}: {report.n_points} frequencies,"
        f" worst |mag-1| = {report.worst_mag_error:.3e}"
        f" (probe {report.worst_mag_probe} at {report.worst_mag_freq} Hz),"
        f" worst phase dev = {report.worst_phase_error_rad:.3e} rad"
        f" (probe {report.worst_phase_probe} at {report.worst_phase_freq} Hz)"
    )
    return 0 if report.passed else 1


def _cmd_thd(args: argparse.Namespace) -> int:
    netlist = _load_netlist(args.netlist)
    rows = thd_sweep(netlist, args.amps, args.freq)
    lines = ["amplitude_v,thd_pct"]
    for row in rows:
        lines.append(f"{_fmt(row.input_amplitude)},{_fmt(row.thd)}")
    _write_lines(args.output, lines)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdccsim",
        description="Behavioral simulator for FDCCII-based first-order all-pass stages.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="emit a generated netlist")
    gen_sub = gen.add_subparsers(dest="topology", required=True)
    fig2 = gen_sub.add_parser("fig2", help="single-conveyor all-pass stage")
    fig2.add_argument("--r", type=_value_flag, required=True, help="resistance (ohms)")
    fig2.add_argument("--c", type=_value_flag, required=True, help="capacitance (farads)")
    for flag in ("a1", "a2", "b1", "b2", "b3", "b4", "b5", "b6"):
        fig2.add_argument(f"--{flag}", type=_value_flag, default=1.0, help=f"gain {flag} (default 1)")
    fig2.add_argument("--sat", type=_value_flag, default=None, help="X-stage clip level (volts)")
    fig2.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    fig2.set_defaults(func=_cmd_gen)

    ac = sub.add_parser("ac", help="log-frequency sweep to CSV")
    ac.add_argument("-n", "--netlist", required=True)
    ac.add_argument("--fstart", type=_value_flag, required=True, help="start frequency (Hz)")
    ac.add_argument("--fstop", type=_value_flag, required=True, help="stop frequency (Hz)")
    ac.add_argument("--ppd", type=int, required=True, help="points per decade")
    ac.add_argument("-o", "--output", default=None)
    ac.set_defaults(func=_cmd_ac)

    tran = sub.add_parser("tran", help="transient run to CSV")
    tran.add_argument("-n", "--netlist", required=True)
    tran.add_argument("--h", type=_value_flag, required=True, help="time step (s)")
    tran.add_argument("--tstop", type=_value_flag, required=True, help="stop time (s)")
    tran.add_argument("-o", "--output", default=None)
    tran.set_defaults(func=_cmd_tran)

    poles = sub.add_parser("poles", help="measured vs closed-form pole frequency")
    poles.add_argument("-n", "--netlist", required=True)
    poles.add_argument("--probe", default=None, help="probe label (default VOUT1 when present)")
    poles.set_defaults(func=_cmd_poles)

    sens = sub.add_parser("sens", help="normalized pole sensitivities")
    sens.add_argument("-n", "--netlist", required=True)
    sens.add_argument("--step", type=_value_flag, default=1e-6, help="relative step (default 1e-6)")
    sens.set_defaults(func=_cmd_sens)

    verify = sub.add_parser("verify", help="all-pass verification (exit 0 iff pass)")
    verify.add_argument("-n", "--netlist", required=True)
    verify.add_argument("--mag-tol", type=_value_flag, default=1e-9, dest="mag_tol")
    verify.add_argument("--phase-tol", type=_value_flag, default=1e-9, dest="phase_tol")
    verify.set_defaults(func=_cmd_verify)

    thd = sub.add_parser("thd", help="THD vs drive amplitude to CSV")
    thd.add_argument("-n", "--netlist", required=True)
    thd.add_argument("--freq", type=_value_flag, required=True, help="fundamental (Hz)")
    thd.add_argument("--amps", type=_amps_flag, required=True, help="comma-separated amplitudes")
    thd.add_argument("-o", "--output", default=None)
    thd.set_defaults(func=_cmd_thd)

    return parser


def run(argv: list[str]) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except _Fail as exc:
        print(exc.message, file=sys.stderr)
        return exc.code
    except CircuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
