"""Frequency-domain analyses built on the MNA engine.

Closed-form first-order transfer functions serve as independent oracles
for the numerical solver; on top of those sit log sweeps, pole
extraction (from the +-90 degree phase crossing and from a rational
fit), normalized pole sensitivities, and all-pass verification.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import NotAllPassLikeError
from .mna import ac_gain
from .netlist import (
    Capacitor,
    Fdccii,
    FdcciiParams,
    Netlist,
    Resistor,
    build_allpass_netlist,
)

Output = Literal["OUT1", "OUT2"]
ZeroForm = Literal["mna", "mirror"]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FirstOrderTF:
    """k * (s - zero) / (s - pole) with real coefficients (rad/s)."""

    k: float
    zero: float
    pole: float

    def eval(self, s: complex) -> complex:
        return self.k * (s - self.zero) / (s - self.pole)

    def response(self, freq_hz: float) -> complex:
        return self.eval(1j * TWO_PI * freq_hz)


def _check_rc(r: float, c: float) -> None:
    if not (math.isfinite(r) and r > 0.0):
        raise ValueError(f"resistance must be > 0, got {r!r}")
    if not (math.isfinite(c) and c > 0.0):
        raise ValueError(f"capacitance must be > 0, got {c!r}")


def ideal_transfer(r: float, c: float, output: Output) -> FirstOrderTF:
    """Unity-gain all-pass responses of the ideal stage.

    OUT1 (inverting output, X-): -(s - 1/RC)/(s + 1/RC), phase runs from
    0 to -180 degrees. OUT2 (X+): +(s - 1/RC)/(s + 1/RC), phase runs
    from 180 to 0 degrees. Both are -90/+90 degrees at omega = 1/RC.
    """
    _check_rc(r, c)
    a = 1.0 / (r * c)
    if output == "OUT1":
        return FirstOrderTF(-1.0, a, -a)
    if output == "OUT2":
        return FirstOrderTF(1.0, a, -a)
    raise ValueError(f"output must be 'OUT1' or 'OUT2', got {output!r}")


def nonideal_transfer(
    r: float,
    c: float,
    params: FdcciiParams,
    output: Output,
    form: ZeroForm = "mna",
) -> FirstOrderTF:
    """Closed-form responses with tracking gains folded in.

    OUT2: beta1 * (s + alpha2(beta1 beta5 - beta2 - beta2 beta4)/(beta1 RC))
    over (s + beta5 alpha2/RC); a single form, exact.

    OUT1 carries a ``form`` switch because two zero locations are in
    circulation: ``mirror`` places the zero at beta5 alpha2/RC, the exact
    mirror image of the pole, while ``mna`` places it at
    beta5 alpha2/(beta4 RC), which is where the full nodal solution puts
    it. The forms coincide when beta4 = 1; the nodal solve is the ground
    truth here, so ``mna`` is the default.
    """
    _check_rc(r, c)
    rc = r * c
    pole = -params.beta5 * params.alpha2 / rc
    if output == "OUT2":
        num_const = (
            params.alpha2
            * (params.beta1 * params.beta5 - params.beta2 - params.beta2 * params.beta4)
            / (params.beta1 * rc)
        )
        return FirstOrderTF(params.beta1, -num_const, pole)
    if output == "OUT1":
        if form == "mirror":
            zero = params.beta5 * params.alpha2 / rc
        elif form == "mna":
            zero = params.beta5 * params.alpha2 / (params.beta4 * rc)
        else:
            raise ValueError(f"form must be 'mna' or 'mirror', got {form!r}")
        return FirstOrderTF(-params.beta4, zero, pole)
    raise ValueError(f"output must be 'OUT1' or 'OUT2', got {output!r}")


def pole_frequency(r: float, c: float, params: FdcciiParams | None = None) -> float:
    """Closed-form pole magnitude beta5*alpha2/(RC) in rad/s."""
    _check_rc(r, c)
    if params is None:
        params = FdcciiParams.ideal()
    return params.beta5 * params.alpha2 / (r * c)


@dataclass(frozen=True)
class SweepGrid:
    """Log frequency grid: fstart, fstop in Hz plus points per decade."""

    fstart: float
    fstop: float
    points_per_decade: int

    def frequencies(self) -> np.ndarray:
        if not (self.fstart > 0.0 and self.fstop > 0.0):
            raise ValueError("sweep frequencies must be > 0")
        if self.fstop < self.fstart:
            raise ValueError("fstop must be >= fstart")
        if self.points_per_decade < 1:
            raise ValueError("points_per_decade must be >= 1")
        if self.fstop == self.fstart:
            return np.array([self.fstart])
        span = math.log10(self.fstop / self.fstart)
        n = int(math.floor(span * self.points_per_decade + 1e-9))
        freqs = [self.fstart * 10.0 ** (k / self.points_per_decade) for k in range(n + 1)]
        if freqs[-1] < self.fstop * (1.0 - 1e-12):
            freqs.append(self.fstop)
        return np.array(freqs)


@dataclass(frozen=True)
class SweepTable:
    """Per-frequency complex gains, one column of values per probe."""

    freqs: np.ndarray
    gains: dict[str, np.ndarray]
    grid: SweepGrid


def ac_sweep(
    netlist: Netlist, probes: Sequence[str] | None, grid: SweepGrid
) -> SweepTable:
    """Solve the netlist at every grid frequency; probes default to all declared."""
    labels = list(probes) if probes is not None else [p.label for p in netlist.probes]
    if not labels:
        raise ValueError("no probes to sweep")
    freqs = grid.frequencies()
    gains = {label: np.empty(len(freqs), dtype=np.complex128) for label in labels}
    for i, f in enumerate(freqs):
        for label in labels:
            gains[label][i] = ac_gain(netlist, label, TWO_PI * f)
    return SweepTable(freqs, gains, grid)


def _chain_unwrap(phases: Iterable[float]) -> list[float]:
    out: list[float] = []
    prev = None
    for p in phases:
        if prev is not None:
            p += TWO_PI * round((prev - p) / TWO_PI)
        out.append(p)
        prev = p
    return out


def estimate_pole_from_phase(
    netlist: Netlist,
    probe: str,
    rel_tol: float = 1e-6,
    fmin: float = 1.0,
    fmax: float = 1e9,
) -> float:
    """Frequency (Hz) where the probed phase crosses its +-90 degree target.

    The probe type is classified from its low-frequency phase: near 0
    degrees the target is -90 (inverting-output branch), near +-180 the
    branch is anchored at +180 and the target is +90. The crossing is
    bracketed by a decade scan over [fmin, fmax] and bisected until
    bracket width / midpoint < rel_tol. Responses whose phase never
    reaches the target raise :class:`NotAllPassLikeError`.
    """
    n_decades = int(math.ceil(math.log10(fmax / fmin)))
    scan = [fmin * 10.0**k for k in range(n_decades + 1)]
    raw = [cmath.phase(ac_gain(netlist, probe, TWO_PI * f)) for f in scan]
    out2_like = abs(raw[0]) > math.pi / 2
    phases = _chain_unwrap(raw)
    if out2_like and phases[0] < 0.0:
        phases = [p + TWO_PI for p in phases]
    target = math.pi / 2 if out2_like else -math.pi / 2

    g = [p - target for p in phases]
    bracket = None
    for i in range(len(scan) - 1):
        if g[i] == 0.0:
            return scan[i]
        if g[i] * g[i + 1] < 0.0:
            bracket = i
            break
    if bracket is None:
        if g[-1] == 0.0:
            return scan[-1]
        raise NotAllPassLikeError(
            f"phase of {probe!r} never crosses {math.degrees(target):+.0f} degrees "
            f"in [{fmin:g}, {fmax:g}] Hz"
        )

    flo, fhi = scan[bracket], scan[bracket + 1]
    plo = phases[bracket]
    glo = g[bracket]
    for _ in range(200):
        fmid = 0.5 * (flo + fhi)
        if (fhi - flo) < rel_tol * fmid:
            return fmid
        pmid = cmath.phase(ac_gain(netlist, probe, TWO_PI * fmid))
        pmid += TWO_PI * round((plo - pmid) / TWO_PI)
        gmid = pmid - target
        if gmid == 0.0:
            return fmid
        if (gmid > 0.0) == (glo > 0.0):
            flo, plo, glo = fmid, pmid, gmid
        else:
            fhi = fmid
    return 0.5 * (flo + fhi)


def estimate_pole_from_fit(
    netlist: Netlist, probe: str, freqs_hz: Sequence[float]
) -> float:
    """Denominator root (Hz) of a first-order response, from sampled gains.

    Fits H(jw) = (c0 + c1 jw)/(jw + d0) with real coefficients by least
    squares on the linearized relation. Unlike the phase-crossing
    estimate this recovers the true pole even when the numerator is not
    the mirror image of the denominator, at the cost of assuming a
    strictly first-order response.
    """
    freqs = np.asarray(list(freqs_hz), dtype=float)
    if freqs.size < 2:
        raise ValueError("need at least two frequencies to fit")
    gains = np.array([ac_gain(netlist, probe, TWO_PI * f) for f in freqs])
    wref = TWO_PI * math.exp(float(np.mean(np.log(freqs))))
    w = TWO_PI * freqs / wref
    a = np.zeros((2 * freqs.size, 3))
    rhs = np.zeros(2 * freqs.size)
    a[0::2, 0] = 1.0
    a[0::2, 2] = -gains.real
    rhs[0::2] = -w * gains.imag
    a[1::2, 1] = w
    a[1::2, 2] = -gains.imag
    rhs[1::2] = w * gains.real
    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    d0 = sol[2] * wref
    if not d0 > 0.0:
        raise ValueError(f"fitted response is not a damped first-order section (d0={d0!r})")
    return d0 / TWO_PI


SENSITIVITY_PARAMETERS = (
    "R",
    "C",
    "alpha1",
    "alpha2",
    "beta1",
    "beta2",
    "beta3",
    "beta4",
    "beta5",
    "beta6",
)


@dataclass(frozen=True)
class SensitivityReport:
    """Normalized pole sensitivities S = (x/w0) dw0/dx for all ten parameters."""

    values: dict[str, float]


def closed_form_sensitivities() -> dict[str, float]:
    """Analytic sensitivities of the pole beta5*alpha2/(RC): -1 for R and C,
    +1 for beta5 and alpha2, 0 for every other gain."""
    values = {name: 0.0 for name in SENSITIVITY_PARAMETERS}
    values["R"] = -1.0
    values["C"] = -1.0
    values["beta5"] = 1.0
    values["alpha2"] = 1.0
    return values


def sensitivities(
    r: float,
    c: float,
    params: FdcciiParams | None = None,
    rel_step: float = 1e-6,
) -> SensitivityReport:
    """Central-difference pole sensitivities measured from simulation.

    Each parameter is perturbed by a relative step, the stage netlist is
    rebuilt and its pole re-measured, and S = (w0(x(1+h)) - w0(x(1-h)))
    / (2 h w0). The pole is recovered by the rational fit rather than the
    phase crossing: a gain perturbation that breaks the numerator/
    denominator mirror symmetry drags the +-90 degree crossing away from
    the pole (for the inverting output it moves as beta4**-0.5), which
    would corrupt the beta4 entry. The fit stays on the true denominator
    root for every parameter while still going through the full
    netlist -> sweep -> pole pipeline.
    """
    _check_rc(r, c)
    if params is None:
        params = FdcciiParams.ideal()
    if not (1e-10 < rel_step < 1e-2):
        raise ValueError(f"rel_step must lie in (1e-10, 1e-2), got {rel_step!r}")

    f_coarse = estimate_pole_from_phase(build_allpass_netlist(r, c, params), "VOUT1")
    fit_freqs = [f_coarse * k for k in (0.32, 0.75, 1.8, 3.1)]

    def measured(r_: float, c_: float, p_: FdcciiParams) -> float:
        return estimate_pole_from_fit(build_allpass_netlist(r_, c_, p_), "VOUT1", fit_freqs)

    w0 = measured(r, c, params)
    values: dict[str, float] = {}
    for name in SENSITIVITY_PARAMETERS:
        if name == "R":
            up = measured(r * (1.0 + rel_step), c, params)
            dn = measured(r * (1.0 - rel_step), c, params)
        elif name == "C":
            up = measured(r, c * (1.0 + rel_step), params)
            dn = measured(r, c * (1.0 - rel_step), params)
        else:
            base = getattr(params, name)
            up = measured(r, c, replace(params, **{name: base * (1.0 + rel_step)}))
            dn = measured(r, c, replace(params, **{name: base * (1.0 - rel_step)}))
        values[name] = (up - dn) / (2.0 * rel_step * w0)
    return SensitivityReport(values)


def _wrap_pi(angle: float) -> float:
    wrapped = math.fmod(angle + math.pi, TWO_PI)
    if wrapped <= 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


@dataclass(frozen=True)
class VerificationReport:
    """Worst-case all-pass deviations over a grid, plus the pass verdict."""

    passed: bool
    n_points: int
    worst_mag_error: float
    worst_mag_freq: float | None
    worst_mag_probe: str | None
    worst_phase_error_rad: float
    worst_phase_freq: float | None
    worst_phase_probe: str | None


def reference_rc(netlist: Netlist) -> float:
    """R*C of the first resistor and first capacitor in the netlist."""
    r = next((e.ohms for e in netlist.elements if isinstance(e, Resistor)), None)
    c = next((e.farads for e in netlist.elements if isinstance(e, Capacitor)), None)
    if r is None or c is None:
        raise ValueError("netlist needs at least one resistor and one capacitor")
    return r * c


def reference_params(netlist: Netlist) -> FdcciiParams:
    """Gains of the first conveyor in the netlist."""
    for element in netlist.elements:
        if isinstance(element, Fdccii):
            return element.params
    raise ValueError("netlist contains no FDCCII element")


def verify_allpass(
    netlist: Netlist,
    grid: SweepGrid | Sequence[float],
    mag_tol: float,
    phase_tol_rad: float,
) -> VerificationReport:
    """Check unity magnitude and the two phase laws on every probe.

    Per frequency f (w = 2 pi f, rc from the first R and C): the gain
    magnitude must sit within mag_tol of 1, and the phase within
    phase_tol_rad of -2 atan(w rc) for probes whose low-frequency phase
    starts near 0, or of 180 - 2 atan(w rc) for probes starting near
    +-180 (comparison modulo 360). Grids should start below the pole so
    the branch classification anchors correctly. An empty frequency list
    passes vacuously.
    """
    freqs = grid.frequencies() if isinstance(grid, SweepGrid) else np.asarray(list(grid), float)
    labels = [p.label for p in netlist.probes]
    if freqs.size == 0 or not labels:
        return VerificationReport(True, 0, 0.0, None, None, 0.0, None, None)
    rc = reference_rc(netlist)

    worst_mag = (0.0, None, None)
    worst_phase = (0.0, None, None)
    inverted: dict[str, bool] = {}
    for label in labels:
        first = ac_gain(netlist, label, TWO_PI * freqs[0])
        inverted[label] = abs(cmath.phase(first)) > math.pi / 2

    for f in freqs:
        w = TWO_PI * f
        for label in labels:
            gain = ac_gain(netlist, label, w)
            mag_err = abs(abs(gain) - 1.0)
            expected = -2.0 * math.atan(w * rc)
            if inverted[label]:
                expected += math.pi
            phase_err = abs(_wrap_pi(cmath.phase(gain) - expected))
            if mag_err > worst_mag[0]:
                worst_mag = (mag_err, f, label)
            if phase_err > worst_phase[0]:
                worst_phase = (phase_err, f, label)

    passed = worst_mag[0] <= mag_tol and worst_phase[0] <= phase_tol_rad
    return VerificationReport(
        passed,
        int(freqs.size),
        worst_mag[0],
        worst_mag[1],
        worst_mag[2],
        worst_phase[0],
        worst_phase[1],
        worst_phase[2],
    )
