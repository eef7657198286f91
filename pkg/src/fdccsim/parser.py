"""SPICE-flavored netlist text format: parser and serializer.

Grammar (one card per line, ``*`` starts a comment, keywords are
case-insensitive, node names and labels are case-sensitive identifiers
matching ``[A-Za-z0-9_]+`` with ``0`` reserved for ground)::

    R<name> n1 n2 <value>
    C<name> n1 n2 <value>
    V<name> np nm AC <amp> [PHASE <deg>]
    V<name> np nm SIN <offset> <amp> <freq> [<phase_deg>]
    X<name> FDCCII y1 y2 y3 y4 xp xm zp zm [A1=<v> A2=<v> B1=<v> .. B6=<v>] [SAT=<vsat>]
    .PROBE <label> <node>
    .END

Values accept engineering suffixes (f p n u m k meg g, case-insensitive,
``meg`` matched before ``m``). Parsing is total: every malformed card
yields one :class:`ParseError` and parsing continues, so a single pass
reports all problems. ``parse`` returns either a netlist or a non-empty
error list, never both. Text after ``.END`` is ignored.

Error kinds:

* ``UnknownCard``  - unrecognized card letter, dot-card, or device model
* ``BadValue``     - malformed or non-positive numeric value, wrong token count
* ``BadNodeRef``   - malformed node name, or a probe naming an unknown node
* ``DuplicateName``- element name or probe label declared twice
* ``MissingEnd``   - the ``.END`` card is absent
* ``BadParam``     - unknown/duplicate/invalid X-card parameter or source keyword
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from .netlist import (
    GROUND,
    Ac,
    Capacitor,
    Element,
    Fdccii,
    FdcciiParams,
    Netlist,
    Probe,
    Resistor,
    SaturationSpec,
    Sin,
    VSource,
    terminals,
)


class ErrorKind(str, Enum):
    UNKNOWN_CARD = "UnknownCard"
    BAD_VALUE = "BadValue"
    BAD_NODE_REF = "BadNodeRef"
    DUPLICATE_NAME = "DuplicateName"
    MISSING_END = "MissingEnd"
    BAD_PARAM = "BadParam"


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    kind: ErrorKind

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.kind.value}: {self.message}"


_SUFFIXES = {
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "m": 1e-3,
    "k": 1e3,
    "meg": 1e6,
    "g": 1e9,
}

# "meg" before "m" so the longest suffix wins.
_VALUE_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(meg|[fpnumkg])?$", re.IGNORECASE
)
_NODE_RE = re.compile(r"^[A-Za-z0-9_]+$")


def parse_value(token: str) -> float:
    """Parse a number with an optional engineering suffix ("1k" -> 1000.0)."""
    m = _VALUE_RE.match(token)
    if not m:
        raise ValueError(f"malformed value {token!r}")
    mantissa, suffix = m.groups()
    scale = _SUFFIXES[suffix.lower()] if suffix else 1.0
    value = float(mantissa) * scale
    if not math.isfinite(value):
        raise ValueError(f"value {token!r} overflows")
    return value


@dataclass(frozen=True)
class _Token:
    text: str
    column: int  # 1-based


_TOKEN_RE = re.compile(r"\S+")


def _tokenize(line: str) -> list[_Token]:
    comment = line.find("*")
    if comment >= 0:
        line = line[:comment]
    return [_Token(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(line)]


class _CardError(Exception):
    def __init__(self, token: _Token, message: str, kind: ErrorKind):
        self.token = token
        self.message = message
        self.kind = kind


def _arity(tokens: list[_Token], expected: int, usage: str) -> None:
    if len(tokens) < expected:
        raise _CardError(tokens[-1], f"missing fields, expected: {usage}", ErrorKind.BAD_VALUE)
    if len(tokens) > expected:
        raise _CardError(tokens[expected], f"unexpected token, expected: {usage}", ErrorKind.BAD_VALUE)


def _node(token: _Token) -> str:
    if not _NODE_RE.match(token.text):
        raise _CardError(token, f"invalid node name {token.text!r}", ErrorKind.BAD_NODE_REF)
    return token.text


def _value(token: _Token, positive: bool = False) -> float:
    try:
        value = parse_value(token.text)
    except ValueError as exc:
        raise _CardError(token, str(exc), ErrorKind.BAD_VALUE) from None
    if positive and not value > 0.0:
        raise _CardError(token, f"value must be > 0, got {token.text!r}", ErrorKind.BAD_VALUE)
    return value


def _parse_resistor(tokens: list[_Token]) -> Resistor:
    _arity(tokens, 4, "R<name> n1 n2 <value>")
    return Resistor(
        tokens[0].text, _node(tokens[1]), _node(tokens[2]), _value(tokens[3], positive=True)
    )


def _parse_capacitor(tokens: list[_Token]) -> Capacitor:
    _arity(tokens, 4, "C<name> n1 n2 <value>")
    return Capacitor(
        tokens[0].text, _node(tokens[1]), _node(tokens[2]), _value(tokens[3], positive=True)
    )


def _parse_vsource(tokens: list[_Token]) -> VSource:
    if len(tokens) < 4:
        raise _CardError(
            tokens[-1], "missing fields, expected: V<name> np nm AC|SIN ...", ErrorKind.BAD_VALUE
        )
    np_, nm = _node(tokens[1]), _node(tokens[2])
    kind = tokens[3].text.upper()
    if kind == "AC":
        if len(tokens) == 5:
            waveform = Ac(_amplitude(tokens[4]))
        elif len(tokens) == 7 and tokens[5].text.upper() == "PHASE":
            waveform = Ac(_amplitude(tokens[4]), _value(tokens[6]))
        else:
            usage = "V<name> np nm AC <amp> [PHASE <deg>]"
            _arity(tokens, 5 if len(tokens) < 6 else 7, usage)
            raise _CardError(tokens[5], f"expected PHASE, got {tokens[5].text!r}", ErrorKind.BAD_PARAM)
    elif kind == "SIN":
        if len(tokens) not in (7, 8):
            _arity(tokens, 7, "V<name> np nm SIN <offset> <amp> <freq> [<phase_deg>]")
        offset = _value(tokens[4])
        amp = _amplitude(tokens[5])
        freq = _value(tokens[6], positive=True)
        phase = _value(tokens[7]) if len(tokens) == 8 else 0.0
        waveform = Sin(offset, amp, freq, phase)
    else:
        raise _CardError(
            tokens[3], f"unknown source kind {tokens[3].text!r} (expected AC or SIN)", ErrorKind.BAD_PARAM
        )
    return VSource(tokens[0].text, np_, nm, waveform)


def _amplitude(token: _Token) -> float:
    value = _value(token)
    if value < 0.0:
        raise _CardError(token, f"amplitude must be >= 0, got {token.text!r}", ErrorKind.BAD_VALUE)
    return value


_GAIN_KEYS = {
    "A1": "alpha1",
    "A2": "alpha2",
    "B1": "beta1",
    "B2": "beta2",
    "B3": "beta3",
    "B4": "beta4",
    "B5": "beta5",
    "B6": "beta6",
}


def _parse_fdccii(tokens: list[_Token]) -> Fdccii:
    if len(tokens) < 2 or tokens[1].text.upper() != "FDCCII":
        bad = tokens[1] if len(tokens) > 1 else tokens[0]
        raise _CardError(bad, f"unknown device model on X card: {bad.text!r}", ErrorKind.UNKNOWN_CARD)
    if len(tokens) < 10:
        raise _CardError(
            tokens[-1],
            "missing fields, expected: X<name> FDCCII y1 y2 y3 y4 xp xm zp zm [params]",
            ErrorKind.BAD_VALUE,
        )
    nodes = [_node(t) for t in tokens[2:10]]
    gains: dict[str, float] = {}
    saturation = None
    for token in tokens[10:]:
        key, sep, raw = token.text.partition("=")
        if not sep or not raw:
            raise _CardError(
                token, f"expected KEY=value parameter, got {token.text!r}", ErrorKind.BAD_PARAM
            )
        key = key.upper()
        value_token = _Token(raw, token.column + len(key) + 1)
        if key in _GAIN_KEYS:
            field_name = _GAIN_KEYS[key]
            if field_name in gains:
                raise _CardError(token, f"duplicate parameter {key}", ErrorKind.BAD_PARAM)
            value = _value(value_token)
            if not value > 0.0:
                raise _CardError(value_token, f"gain {key} must be > 0", ErrorKind.BAD_PARAM)
            gains[field_name] = value
        elif key == "SAT":
            if saturation is not None:
                raise _CardError(token, "duplicate parameter SAT", ErrorKind.BAD_PARAM)
            vsat = _value(value_token)
            if not vsat > 0.0:
                raise _CardError(value_token, "SAT must be > 0", ErrorKind.BAD_PARAM)
            saturation = SaturationSpec(vsat)
        else:
            raise _CardError(token, f"unknown parameter {key!r}", ErrorKind.BAD_PARAM)
    return Fdccii(tokens[0].text, *nodes, params=FdcciiParams(**gains), saturation=saturation)


def parse(text: str) -> Netlist | list[ParseError]:
    """Parse netlist text into a structurally valid netlist.

    Returns the netlist on success, otherwise the full list of parse
    errors. Never raises on malformed input.
    """
    errors: list[ParseError] = []
    elements: list[Element] = []
    probe_decls: list[tuple[Probe, int, int]] = []
    names: set[str] = set()
    labels: set[str] = set()
    end_seen = False

    lines = text.split("\n")
    for lineno, raw in enumerate(lines, 1):
        tokens = _tokenize(raw)
        if not tokens:
            continue
        head = tokens[0]
        try:
            if head.text.startswith("."):
                card = head.text.upper()
                if card == ".END":
                    end_seen = True
                    break
                if card == ".PROBE":
                    _arity(tokens, 3, ".PROBE <label> <node>")
                    label = tokens[1].text
                    if not _NODE_RE.match(label):
                        raise _CardError(
                            tokens[1], f"invalid probe label {label!r}", ErrorKind.BAD_PARAM
                        )
                    if label in labels:
                        raise _CardError(
                            tokens[1], f"duplicate probe label {label!r}", ErrorKind.DUPLICATE_NAME
                        )
                    labels.add(label)
                    probe_decls.append((Probe(label, _node(tokens[2])), lineno, tokens[2].column))
                    continue
                raise _CardError(head, f"unknown card {head.text!r}", ErrorKind.UNKNOWN_CARD)

            letter = head.text[0].upper()
            if letter == "R":
                element: Element = _parse_resistor(tokens)
            elif letter == "C":
                element = _parse_capacitor(tokens)
            elif letter == "V":
                element = _parse_vsource(tokens)
            elif letter == "X":
                element = _parse_fdccii(tokens)
            else:
                raise _CardError(head, f"unknown card {head.text!r}", ErrorKind.UNKNOWN_CARD)
            if element.name in names:
                raise _CardError(
                    head, f"duplicate element name {element.name!r}", ErrorKind.DUPLICATE_NAME
                )
            names.add(element.name)
            elements.append(element)
        except _CardError as exc:
            errors.append(ParseError(lineno, exc.token.column, exc.message, exc.kind))
        except ValueError as exc:  # invariant violations from the value types
            errors.append(ParseError(lineno, head.column, str(exc), ErrorKind.BAD_PARAM))

    if not end_seen:
        last = max(1, len(lines))
        errors.append(
            ParseError(last, max(1, len(lines[last - 1])), "missing .END card", ErrorKind.MISSING_END)
        )

    known = {GROUND}
    for element in elements:
        known.update(terminals(element))
    probes = []
    for probe, lineno, column in probe_decls:
        if probe.node not in known:
            errors.append(
                ParseError(
                    lineno,
                    column,
                    f"probe {probe.label} references unknown node {probe.node!r}",
                    ErrorKind.BAD_NODE_REF,
                )
            )
        else:
            probes.append(probe)

    if errors:
        return errors
    return Netlist("", tuple(elements), tuple(probes))


def _fmt(value: float) -> str:
    return format(value, ".15g")


_CARD_LETTER = {Resistor: "R", Capacitor: "C", VSource: "V", Fdccii: "X"}


def serialize(netlist: Netlist) -> str:
    """Emit canonical netlist text.

    Element order is preserved, values are printed at 15 significant
    digits and conveyor gains only when they differ from 1, so
    ``parse(serialize(n))`` reproduces ``n`` (titles are emitted as a
    comment and not recovered).
    """
    out: list[str] = []
    if netlist.title:
        out.append(f"* {netlist.title}")
    for element in netlist.elements:
        letter = _CARD_LETTER[type(element)]
        if not element.name.upper().startswith(letter):
            raise ValueError(
                f"element name {element.name!r} must start with {letter!r} to be serializable"
            )
        if isinstance(element, Resistor):
            out.append(f"{element.name} {element.n1} {element.n2} {_fmt(element.ohms)}")
        elif isinstance(element, Capacitor):
            out.append(f"{element.name} {element.n1} {element.n2} {_fmt(element.farads)}")
        elif isinstance(element, VSource):
            w = element.waveform
            if isinstance(w, Ac):
                card = f"{element.name} {element.np} {element.nm} AC {_fmt(w.amplitude)}"
                if w.phase_deg != 0.0:
                    card += f" PHASE {_fmt(w.phase_deg)}"
            else:
                card = (
                    f"{element.name} {element.np} {element.nm} SIN"
                    f" {_fmt(w.offset)} {_fmt(w.amplitude)} {_fmt(w.freq_hz)}"
                )
                if w.phase_deg != 0.0:
                    card += f" {_fmt(w.phase_deg)}"
            out.append(card)
        else:
            card = (
                f"{element.name} FDCCII {element.y1} {element.y2} {element.y3} {element.y4}"
                f" {element.xp} {element.xm} {element.zp} {element.zm}"
            )
            for key, field_name in _GAIN_KEYS.items():
                value = getattr(element.params, field_name)
                if value != 1.0:
                    card += f" {key}={_fmt(value)}"
            if element.saturation is not None:
                card += f" SAT={_fmt(element.saturation.vsat)}"
            out.append(card)
    for probe in netlist.probes:
        out.append(f".PROBE {probe.label} {probe.node}")
    out.append(".END")
    return "\n".join(out) + "\n"
