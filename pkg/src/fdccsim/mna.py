"""Modified nodal analysis: assembly and solve of the complex AC system.

Unknown vector layout: one voltage per non-ground node (netlist order),
then one branch current per voltage source, then two branch currents
(I_X+, I_X-) per FDCCII. KCL rows read "sum of currents leaving the node
equals zero" and all device terminal currents are taken flowing into the
device; with that convention the conveyor stamp is:

* Y terminals draw no current (no KCL entries).
* Constraint row X+:  V(xp) - b1 V(y1) + b2 V(y2) - b3 V(y3) = 0
* Constraint row X-:  V(xm) + b4 V(y1) - b5 V(y2) - b6 V(y4) = 0
* KCL: I_X+ leaves node xp into the device, I_X- leaves xm.
* The Z outputs replicate the X currents into their nodes: Z+ sources
  a1 I_X+ into zp (-a1 in the zp row), Z- sources a2 I_X- into zm.

Grounded terminals simply drop their entries.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CircuitError, SingularSystemError
from .netlist import (
    Capacitor,
    Fdccii,
    FdcciiParams,
    Netlist,
    Resistor,
    VSource,
    validate,
)


@dataclass
class ComplexSystem:
    """Dense MNA system at one frequency: matrix, right-hand side, labels."""

    matrix: np.ndarray
    rhs: np.ndarray
    labels: tuple[str, ...]
    index_map: dict[str, int]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class Solution:
    """Solved node voltages (ground is identically 0) and branch currents."""

    voltages: dict[str, complex]
    branch_currents: dict[str, complex]


def unknown_labels(netlist: Netlist) -> tuple[tuple[str, ...], dict[str, int]]:
    """Labels for the unknown vector and aux-current indices keyed by label."""
    labels = [f"V({n.name})" for n in netlist.nodes]
    aux: dict[str, int] = {}
    for element in netlist.elements:
        if isinstance(element, VSource):
            aux[f"I({element.name})"] = len(labels)
            labels.append(f"I({element.name})")
        elif isinstance(element, Fdccii):
            for suffix in ("xp", "xm"):
                label = f"I({element.name}.{suffix})"
                aux[label] = len(labels)
                labels.append(label)
    return tuple(labels), aux


def _require_valid(netlist: Netlist) -> None:
    report = validate(netlist)
    if not report.ok:
        detail = "; ".join(v.message for v in report.violations)
        raise CircuitError(f"netlist failed validation: {detail}")


def stamp_conductance(matrix: np.ndarray, i: int, j: int, y) -> None:
    """Two-terminal admittance stamp; index -1 means ground."""
    if i >= 0:
        matrix[i, i] += y
    if j >= 0:
        matrix[j, j] += y
    if i >= 0 and j >= 0:
        matrix[i, j] -= y
        matrix[j, i] -= y


def stamp_vsource(matrix: np.ndarray, k: int, ip: int, im: int) -> None:
    """Branch-current column and constraint row of an independent source."""
    if ip >= 0:
        matrix[ip, k] += 1.0
        matrix[k, ip] += 1.0
    if im >= 0:
        matrix[im, k] -= 1.0
        matrix[k, im] -= 1.0


def stamp_fdccii(matrix: np.ndarray, element: Fdccii, idx, kp: int, km: int) -> None:
    """Conveyor stamp; ``idx`` maps a node name to its column (-1 = ground)."""
    p: FdcciiParams = element.params
    y1, y2, y3, y4 = idx(element.y1), idx(element.y2), idx(element.y3), idx(element.y4)
    xp, xm, zp, zm = idx(element.xp), idx(element.xm), idx(element.zp), idx(element.zm)

    if xp >= 0:
        matrix[kp, xp] += 1.0
        matrix[xp, kp] += 1.0
    if y1 >= 0:
        matrix[kp, y1] -= p.beta1
    if y2 >= 0:
        matrix[kp, y2] += p.beta2
    if y3 >= 0:
        matrix[kp, y3] -= p.beta3

    if xm >= 0:
        matrix[km, xm] += 1.0
        matrix[xm, km] += 1.0
    if y1 >= 0:
        matrix[km, y1] += p.beta4
    if y2 >= 0:
        matrix[km, y2] -= p.beta5
    if y4 >= 0:
        matrix[km, y4] -= p.beta6

    if zp >= 0:
        matrix[zp, kp] -= p.alpha1
    if zm >= 0:
        matrix[zm, km] -= p.alpha2


def source_phasor(waveform) -> complex:
    """Phasor of a source in the sine reference convention.

    Both waveform kinds expose amplitude and phase; a SIN source used in
    the frequency domain contributes them the same way an AC one does
    (its offset and frequency fields are ignored, the analysis supplies
    the frequency).
    """
    return waveform.amplitude * cmath.exp(1j * math.radians(waveform.phase_deg))


def assemble_ac(netlist: Netlist, omega: float) -> ComplexSystem:
    """Stamp the complex system at angular frequency ``omega`` (rad/s, >= 0)."""
    if not (math.isfinite(omega) and omega >= 0.0):
        raise ValueError(f"omega must be finite and >= 0, got {omega!r}")
    _require_valid(netlist)
    labels, aux = unknown_labels(netlist)
    dim = len(labels)
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    rhs = np.zeros(dim, dtype=np.complex128)
    idx = netlist.node_index

    for element in netlist.elements:
        if isinstance(element, Resistor):
            stamp_conductance(matrix, idx(element.n1), idx(element.n2), 1.0 / element.ohms)
        elif isinstance(element, Capacitor):
            stamp_conductance(matrix, idx(element.n1), idx(element.n2), 1j * omega * element.farads)
        elif isinstance(element, VSource):
            k = aux[f"I({element.name})"]
            stamp_vsource(matrix, k, idx(element.np), idx(element.nm))
            rhs[k] = source_phasor(element.waveform)
        elif isinstance(element, Fdccii):
            kp = aux[f"I({element.name}.xp)"]
            km = aux[f"I({element.name}.xm)"]
            stamp_fdccii(matrix, element, idx, kp, km)

    index_map = {label: i for i, label in enumerate(labels)}
    return ComplexSystem(matrix, rhs, labels, index_map)


def solve(system: ComplexSystem) -> Solution:
    """Dense LU solve of an assembled system."""
    x, status = _kernels.solve_z(system.matrix, system.rhs)
    if status >= 0:
        raise SingularSystemError(system.labels[status])
    voltages: dict[str, complex] = {}
    currents: dict[str, complex] = {}
    for label, i in system.index_map.items():
        if label.startswith("V("):
            voltages[label[2:-1]] = complex(x[i])
        else:
            currents[label] = complex(x[i])
    return Solution(voltages, currents)


def ac_gain(netlist: Netlist, probe_label: str, omega: float) -> complex:
    """Probe voltage divided by the source phasor at one frequency.

    The netlist must declare exactly one voltage source with non-zero
    amplitude and the named probe.
    """
    sources = [e for e in netlist.elements if isinstance(e, VSource)]
    if len(sources) != 1:
        raise CircuitError(f"ac_gain needs exactly one voltage source, found {len(sources)}")
    phasor = source_phasor(sources[0].waveform)
    if phasor == 0:
        raise CircuitError(f"source {sources[0].name} has zero amplitude")
    try:
        node = netlist.probe_node(probe_label)
    except KeyError:
        raise CircuitError(f"no probe named {probe_label!r}") from None
    solution = solve(assemble_ac(netlist, omega))
    voltage = 0.0 + 0.0j if node == "0" else solution.voltages[node]
    return voltage / phasor
