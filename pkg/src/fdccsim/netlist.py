"""Circuit domain types and the canonical all-pass demo topology.

Everything here is a frozen value type: netlists are built once and then
shared freely between analyses and threads. The FDCCII element is the
eight-terminal conveyor (four voltage inputs Y1-Y4, two voltage outputs
X+/X-, two current outputs Z+/Z-) modeled by its transfer gains only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Union

GROUND = "0"


class NodeId(NamedTuple):
    """A non-ground node: its label and its dense index in the unknown vector."""

    name: str
    index: int


@dataclass(frozen=True)
class FdcciiParams:
    """Transfer gains of the conveyor.

    alpha1/alpha2 are the current gains X+ -> Z+ and X- -> Z-; beta1..beta6
    are the voltage gains Y1/Y2/Y3 -> X+ (beta1..beta3) and Y1/Y2/Y4 -> X-
    (beta4..beta6). The sign structure of the element is fixed; these are
    magnitudes and must be finite and strictly positive. Unity everywhere
    is the ideal element.
    """

    alpha1: float = 1.0
    alpha2: float = 1.0
    beta1: float = 1.0
    beta2: float = 1.0
    beta3: float = 1.0
    beta4: float = 1.0
    beta5: float = 1.0
    beta6: float = 1.0

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"gain {name} must be finite and > 0, got {value!r}")

    @classmethod
    def ideal(cls) -> "FdcciiParams":
        return cls()

    def as_dict(self) -> dict[str, float]:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "beta3": self.beta3,
            "beta4": self.beta4,
            "beta5": self.beta5,
            "beta6": self.beta6,
        }


def params_from_tracking_errors(
    delta1: float = 0.0,
    delta2: float = 0.0,
    eps1: float = 0.0,
    eps2: float = 0.0,
    eps3: float = 0.0,
    eps4: float = 0.0,
    eps5: float = 0.0,
    eps6: float = 0.0,
) -> FdcciiParams:
    """Build gains from tracking errors: alpha_i = 1 - delta_i, beta_i = 1 - eps_i.

    Every error magnitude must be below 1, otherwise the corresponding gain
    would vanish or flip sign.
    """
    errors = {
        "delta1": delta1,
        "delta2": delta2,
        "eps1": eps1,
        "eps2": eps2,
        "eps3": eps3,
        "eps4": eps4,
        "eps5": eps5,
        "eps6": eps6,
    }
    for name, value in errors.items():
        if not math.isfinite(value) or abs(value) >= 1.0:
            raise ValueError(f"tracking error {name} must satisfy |{name}| < 1, got {value!r}")
    return FdcciiParams(
        alpha1=1.0 - delta1,
        alpha2=1.0 - delta2,
        beta1=1.0 - eps1,
        beta2=1.0 - eps2,
        beta3=1.0 - eps3,
        beta4=1.0 - eps4,
        beta5=1.0 - eps5,
        beta6=1.0 - eps6,
    )


@dataclass(frozen=True)
class Ac:
    """Small-signal source: amplitude/phase phasor; frequency comes from the analysis."""

    amplitude: float
    phase_deg: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.amplitude) or self.amplitude < 0.0:
            raise ValueError(f"AC amplitude must be >= 0, got {self.amplitude!r}")


@dataclass(frozen=True)
class Sin:
    """Time-domain source v(t) = offset + amplitude * sin(2*pi*freq*t + phase)."""

    offset: float
    amplitude: float
    freq_hz: float
    phase_deg: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.amplitude) or self.amplitude < 0.0:
            raise ValueError(f"SIN amplitude must be >= 0, got {self.amplitude!r}")
        if not math.isfinite(self.freq_hz) or self.freq_hz <= 0.0:
            raise ValueError(f"SIN frequency must be > 0, got {self.freq_hz!r}")


Waveform = Union[Ac, Sin]


@dataclass(frozen=True)
class SaturationSpec:
    """Symmetric soft clip of the X-stage outputs: v = vsat * tanh(u / vsat)."""

    vsat: float = 3.0

    def __post_init__(self):
        if not math.isfinite(self.vsat) or self.vsat <= 0.0:
            raise ValueError(f"vsat must be > 0, got {self.vsat!r}")


@dataclass(frozen=True)
class Resistor:
    name: str
    n1: str
    n2: str
    ohms: float


@dataclass(frozen=True)
class Capacitor:
    name: str
    n1: str
    n2: str
    farads: float


@dataclass(frozen=True)
class VSource:
    name: str
    np: str
    nm: str
    waveform: Waveform


@dataclass(frozen=True)
class Fdccii:
    name: str
    y1: str
    y2: str
    y3: str
    y4: str
    xp: str
    xm: str
    zp: str
    zm: str
    params: FdcciiParams = FdcciiParams()
    saturation: SaturationSpec | None = None


Element = Union[Resistor, Capacitor, VSource, Fdccii]


def terminals(element: Element) -> tuple[str, ...]:
    """All node names an element touches, in declaration order."""
    if isinstance(element, (Resistor, Capacitor)):
        return (element.n1, element.n2)
    if isinstance(element, VSource):
        return (element.np, element.nm)
    if isinstance(element, Fdccii):
        return (
            element.y1,
            element.y2,
            element.y3,
            element.y4,
            element.xp,
            element.xm,
            element.zp,
            element.zm,
        )
    raise TypeError(f"unknown element type {type(element).__name__}")


@dataclass(frozen=True)
class Probe:
    label: str
    node: str


@dataclass(frozen=True)
class Netlist:
    """An ordered element list plus probe declarations.

    The node table is derived from the elements: every non-ground node gets
    a dense index in first-appearance order. Ground is the literal node
    name "0" and is excluded from the unknown vector. The title is
    cosmetic and ignored by equality.
    """

    title: str = field(compare=False)
    elements: tuple[Element, ...] = ()
    probes: tuple[Probe, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "probes", tuple(self.probes))

    @cached_property
    def nodes(self) -> tuple[NodeId, ...]:
        seen: dict[str, int] = {}
        for element in self.elements:
            for node in terminals(element):
                if node != GROUND and node not in seen:
                    seen[node] = len(seen)
        return tuple(NodeId(name, idx) for name, idx in seen.items())

    @cached_property
    def _node_index(self) -> dict[str, int]:
        return {n.name: n.index for n in self.nodes}

    def node_index(self, name: str) -> int:
        """Dense index of a node; ground maps to -1."""
        if name == GROUND:
            return -1
        return self._node_index[name]

    @cached_property
    def _probe_map(self) -> dict[str, str]:
        return {p.label: p.node for p in self.probes}

    def probe_node(self, label: str) -> str:
        return self._probe_map[label]


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(netlist: Netlist) -> ValidationReport:
    """Check a netlist for analysis admissibility.

    Reported violations: non-positive R/C values, no ground reference,
    nodes unreachable from ground through element terminals, and probes
    that name unknown nodes. An empty report means the netlist can be
    assembled and solved.
    """
    violations: list[Violation] = []

    for element in netlist.elements:
        if isinstance(element, Resistor) and not (
            math.isfinite(element.ohms) and element.ohms > 0.0
        ):
            violations.append(
                Violation(
                    "non-positive-value",
                    f"resistor {element.name} has non-positive value {element.ohms!r}",
                )
            )
        if isinstance(element, Capacitor) and not (
            math.isfinite(element.farads) and element.farads > 0.0
        ):
            violations.append(
                Violation(
                    "non-positive-value",
                    f"capacitor {element.name} has non-positive value {element.farads!r}",
                )
            )

    touches_ground = any(
        GROUND in terminals(element) for element in netlist.elements
    )
    if not touches_ground:
        violations.append(Violation("missing-ground", 'no element is tied to ground node "0"'))

    # Flood fill from ground, treating each element as connecting all its terminals.
    reached = {GROUND}
    frontier = True
    while frontier:
        frontier = False
        for element in netlist.elements:
            terms = terminals(element)
            if reached.intersection(terms) and not reached.issuperset(terms):
                reached.update(terms)
                frontier = True
    for node in netlist.nodes:
        if node.name not in reached:
            violations.append(
                Violation("floating-subcircuit", f"node {node.name!r} has no path to ground")
            )

    known = {n.name for n in netlist.nodes} | {GROUND}
    for probe in netlist.probes:
        if probe.node not in known:
            violations.append(
                Violation(
                    "unknown-probe-node",
                    f"probe {probe.label} references unknown node {probe.node!r}",
                )
            )

    return ValidationReport(tuple(violations))


def build_allpass_netlist(
    r: float,
    c: float,
    params: FdcciiParams | None = None,
    saturation: SaturationSpec | None = None,
    waveform: Waveform | None = None,
) -> Netlist:
    """Build the single-conveyor first-order all-pass stage.

    Wiring: the source drives Y1; R runs from the source node to X-;
    the grounded capacitor node ties to both Y2 and Z-; Y3, Y4 and Z+
    are grounded. The inverting output is taken at X- (probe VOUT1) and
    the non-inverting output at X+ (probe VOUT2).

    The source defaults to a unit AC waveform; pass a Sin waveform for
    time-domain runs.
    """
    if not (math.isfinite(r) and r > 0.0):
        raise ValueError(f"resistance must be > 0, got {r!r}")
    if not (math.isfinite(c) and c > 0.0):
        raise ValueError(f"capacitance must be > 0, got {c!r}")
    if params is None:
        params = FdcciiParams.ideal()
    if waveform is None:
        waveform = Ac(1.0)
    elements = (
        VSource("V1", "in", GROUND, waveform),
        Resistor("R1", "in", "out1", r),
        Capacitor("C1", "a", GROUND, c),
        Fdccii(
            "X1",
            y1="in",
            y2="a",
            y3=GROUND,
            y4=GROUND,
            xp="out2",
            xm="out1",
            zp=GROUND,
            zm="a",
            params=params,
            saturation=saturation,
        ),
    )
    probes = (Probe("VOUT1", "out1"), Probe("VOUT2", "out2"))
    return Netlist("first-order all-pass stage (FDCCII, grounded C)", elements, probes)


def replace_source_waveform(netlist: Netlist, waveform: Waveform) -> Netlist:
    """Return a copy of the netlist with its single voltage source re-driven."""
    sources = [e for e in netlist.elements if isinstance(e, VSource)]
    if len(sources) != 1:
        raise ValueError(f"expected exactly one voltage source, found {len(sources)}")
    elements = tuple(
        replace(e, waveform=waveform) if isinstance(e, VSource) else e
        for e in netlist.elements
    )
    return Netlist(netlist.title, elements, netlist.probes)
