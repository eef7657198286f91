"""Time-domain simulation with the trapezoidal rule.

Capacitors become 2C/h companion conductances with a history current
I_hist = -(2C/h) v_prev - i_prev, sources are evaluated at each step,
and the conveyor stamps real-valued (it is memoryless). All node
voltages start at zero. When a conveyor carries a saturation spec, its
X constraint rows turn into v_X = vsat tanh(u/vsat) with u the linear
combination of Y voltages, solved per step by damped Newton.

Steady-state measurements (phasor and THD) use single-bin Fourier
projections over an integer number of periods after a settling stretch;
phases are referenced to sin(2 pi f t) at the time origin.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CircuitError, NoFundamentalError, NonConvergenceError, SingularSystemError
from .mna import stamp_conductance, stamp_fdccii, stamp_vsource, unknown_labels
from .netlist import (
    Capacitor,
    Fdccii,
    Netlist,
    Resistor,
    Sin,
    VSource,
    replace_source_waveform,
    validate,
)


@dataclass(frozen=True)
class TransientResult:
    """Uniform time grid plus one voltage trace per probe."""

    times: np.ndarray
    traces: dict[str, np.ndarray]


@dataclass(frozen=True)
class PhasorMeasurement:
    """Amplitude and phase (degrees, relative to sin(2 pi f t)) at one frequency."""

    amplitude: float
    phase_deg: float
    freq_hz: float


@dataclass(frozen=True)
class ThdRow:
    input_amplitude: float
    thd: float  # percent


@dataclass
class _TransientSystem:
    a_base: np.ndarray
    cap_n1: np.ndarray
    cap_n2: np.ndarray
    cap_geq: np.ndarray
    src_row: np.ndarray
    src_offset: np.ndarray
    src_amp: np.ndarray
    src_omega: np.ndarray
    src_phase: np.ndarray
    sat_row: np.ndarray
    sat_xcol: np.ndarray
    sat_vsat: np.ndarray
    sat_ptr: np.ndarray
    sat_col: np.ndarray
    sat_coef: np.ndarray
    labels: tuple[str, ...]


def _assemble_transient(netlist: Netlist, h: float) -> _TransientSystem:
    labels, aux = unknown_labels(netlist)
    dim = len(labels)
    a = np.zeros((dim, dim))
    idx = netlist.node_index

    caps: list[tuple[int, int, float]] = []
    srcs: list[tuple[int, float, float, float, float]] = []
    sat_rows: list[tuple[int, int, float, list[tuple[int, float]]]] = []

    for element in netlist.elements:
        if isinstance(element, Resistor):
            stamp_conductance(a, idx(element.n1), idx(element.n2), 1.0 / element.ohms)
        elif isinstance(element, Capacitor):
            geq = 2.0 * element.farads / h
            stamp_conductance(a, idx(element.n1), idx(element.n2), geq)
            caps.append((idx(element.n1), idx(element.n2), geq))
        elif isinstance(element, VSource):
            k = aux[f"I({element.name})"]
            stamp_vsource(a, k, idx(element.np), idx(element.nm))
            w = element.waveform
            if not isinstance(w, Sin):
                raise ValueError(
                    f"transient analysis needs SIN waveforms; source {element.name} has"
                    f" {type(w).__name__}"
                )
            srcs.append(
                (k, w.offset, w.amplitude, 2.0 * math.pi * w.freq_hz, math.radians(w.phase_deg))
            )
        elif isinstance(element, Fdccii):
            kp = aux[f"I({element.name}.xp)"]
            km = aux[f"I({element.name}.xm)"]
            stamp_fdccii(a, element, idx, kp, km)
            if element.saturation is not None:
                p = element.params
                vsat = element.saturation.vsat
                # u terms: coefficients of the Y voltages feeding each X stage.
                up = [(idx(element.y1), p.beta1), (idx(element.y2), -p.beta2), (idx(element.y3), p.beta3)]
                um = [(idx(element.y1), -p.beta4), (idx(element.y2), p.beta5), (idx(element.y4), p.beta6)]
                sat_rows.append((kp, idx(element.xp), vsat, [t for t in up if t[0] >= 0]))
                sat_rows.append((km, idx(element.xm), vsat, [t for t in um if t[0] >= 0]))

    ptr = [0]
    cols: list[int] = []
    coefs: list[float] = []
    for _, _, _, terms in sat_rows:
        for col, coef in terms:
            cols.append(col)
            coefs.append(coef)
        ptr.append(len(cols))

    return _TransientSystem(
        a_base=a,
        cap_n1=np.array([c[0] for c in caps], dtype=np.intc),
        cap_n2=np.array([c[1] for c in caps], dtype=np.intc),
        cap_geq=np.array([c[2] for c in caps], dtype=np.float64),
        src_row=np.array([s[0] for s in srcs], dtype=np.intc),
        src_offset=np.array([s[1] for s in srcs], dtype=np.float64),
        src_amp=np.array([s[2] for s in srcs], dtype=np.float64),
        src_omega=np.array([s[3] for s in srcs], dtype=np.float64),
        src_phase=np.array([s[4] for s in srcs], dtype=np.float64),
        sat_row=np.array([s[0] for s in sat_rows], dtype=np.intc),
        sat_xcol=np.array([s[1] for s in sat_rows], dtype=np.intc),
        sat_vsat=np.array([s[2] for s in sat_rows], dtype=np.float64),
        sat_ptr=np.array(ptr, dtype=np.intc),
        sat_col=np.array(cols, dtype=np.intc),
        sat_coef=np.array(coefs, dtype=np.float64),
        labels=labels,
    )


def simulate(netlist: Netlist, h: float, tstop: float) -> TransientResult:
    """Run a fixed-step transient from rest (all node voltages zero at t=0)."""
    if not (math.isfinite(h) and h > 0.0):
        raise ValueError(f"step must be > 0, got {h!r}")
    if not (math.isfinite(tstop) and tstop >= 10.0 * h):
        raise ValueError(f"tstop must be at least 10 steps, got {tstop!r} with h={h!r}")
    report = validate(netlist)
    if not report.ok:
        detail = "; ".join(v.message for v in report.violations)
        raise CircuitError(f"netlist failed validation: {detail}")
    if not any(
        isinstance(e, VSource) and isinstance(e.waveform, Sin) for e in netlist.elements
    ):
        raise ValueError("transient analysis needs at least one SIN source")

    system = _assemble_transient(netlist, h)
    nsteps = int(round(tstop / h))
    traces, status, aux1, aux2 = _kernels.run_transient(
        system.a_base,
        system.cap_n1,
        system.cap_n2,
        system.cap_geq,
        system.src_row,
        system.src_offset,
        system.src_amp,
        system.src_omega,
        system.src_phase,
        system.sat_row,
        system.sat_xcol,
        system.sat_vsat,
        system.sat_ptr,
        system.sat_col,
        system.sat_coef,
        h,
        nsteps,
    )
    if status == 1:
        raise SingularSystemError(system.labels[aux2], f"during transient at step {aux1}")
    if status == 2:
        raise NonConvergenceError(aux1 * h, aux2)

    times = np.arange(nsteps + 1) * h
    probe_traces: dict[str, np.ndarray] = {}
    for probe in netlist.probes:
        col = netlist.node_index(probe.node)
        probe_traces[probe.label] = (
            np.zeros(nsteps + 1) if col < 0 else traces[:, col].copy()
        )
    return TransientResult(times, probe_traces)


def _window(result: TransientResult, probe: str, freq: float, settle_cycles: int, window_cycles: int):
    if probe not in result.traces:
        raise ValueError(f"no trace for probe {probe!r}")
    times = result.times
    h = times[1] - times[0]
    samples_per_cycle = 1.0 / (freq * h)
    i0 = int(round(settle_cycles * samples_per_cycle))
    n = int(round(window_cycles * samples_per_cycle))
    if n < 2:
        raise ValueError("window too short for the requested frequency")
    if i0 + n > len(times):
        raise ValueError(
            f"window exceeds available samples: need {i0 + n}, have {len(times)}"
        )
    return result.traces[probe][i0 : i0 + n], times[i0 : i0 + n]


def _single_bin(trace: np.ndarray, times: np.ndarray, freq: float) -> complex:
    return 2.0 * np.mean(trace * np.exp(-2j * math.pi * freq * times))


def measure_phasor(
    result: TransientResult,
    probe: str,
    freq: float,
    settle_cycles: int = 20,
    window_cycles: int = 10,
) -> PhasorMeasurement:
    """Steady-state amplitude/phase of a trace by single-bin projection.

    The window starts after ``settle_cycles`` periods and must cover an
    integer number of periods (the step should divide the period). Phase
    is reported relative to sin(2 pi f t).
    """
    trace, times = _window(result, probe, freq, settle_cycles, window_cycles)
    proj = _single_bin(trace, times, freq)
    phase = math.degrees(cmath.phase(proj)) + 90.0
    if phase > 180.0:
        phase -= 360.0
    if phase <= -180.0:
        phase += 360.0
    return PhasorMeasurement(abs(proj), phase, freq)


def thd(
    result: TransientResult,
    probe: str,
    fundamental: float,
    n_harmonics: int = 9,
    settle_cycles: int = 20,
    window_cycles: int = 10,
) -> float:
    """Total harmonic distortion in percent from single-bin projections.

    Uses harmonics 2..n_harmonics+1; the highest one must stay below the
    sampling Nyquist rate.
    """
    trace, times = _window(result, probe, fundamental, settle_cycles, window_cycles)
    h = result.times[1] - result.times[0]
    if (n_harmonics + 1) * fundamental >= 0.5 / h:
        raise ValueError("harmonic range exceeds the Nyquist rate of the time grid")
    a1 = abs(_single_bin(trace, times, fundamental))
    if a1 < 1e-12:
        raise NoFundamentalError(
            f"fundamental amplitude {a1:.3e} V at {fundamental:g} Hz is below 1e-12 V"
        )
    power = 0.0
    for k in range(2, n_harmonics + 2):
        power += abs(_single_bin(trace, times, k * fundamental)) ** 2
    return 100.0 * math.sqrt(power) / a1


def thd_sweep(
    netlist_template: Netlist,
    amplitudes: list[float],
    freq: float,
    probe: str | None = None,
    steps_per_cycle: int = 200,
    settle_cycles: int = 20,
    window_cycles: int = 10,
    n_harmonics: int = 9,
) -> list[ThdRow]:
    """THD versus drive amplitude at a fixed frequency.

    The template's single source is re-driven with SIN(0, amplitude, freq)
    for each row; the probe defaults to the first declared one.
    """
    if any(a <= 0.0 for a in amplitudes):
        raise ValueError("amplitudes must be positive")
    if list(amplitudes) != sorted(amplitudes):
        raise ValueError("amplitudes must be ascending")
    if not amplitudes:
        return []
    if probe is None:
        if not netlist_template.probes:
            raise ValueError("netlist declares no probes")
        probe = netlist_template.probes[0].label
    h = 1.0 / (freq * steps_per_cycle)
    tstop = (settle_cycles + window_cycles) / freq
    rows = []
    for amplitude in amplitudes:
        netlist = replace_source_waveform(netlist_template, Sin(0.0, amplitude, freq))
        result = simulate(netlist, h, tstop)
        rows.append(
            ThdRow(
                amplitude,
                thd(result, probe, freq, n_harmonics, settle_cycles, window_cycles),
            )
        )
    return rows
