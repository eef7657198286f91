import pytest
from hypothesis import given, settings, strategies as st

from fdccsim import (
    Ac,
    Capacitor,
    ErrorKind,
    Fdccii,
    FdcciiParams,
    Netlist,
    Probe,
    Resistor,
    SaturationSpec,
    Sin,
    VSource,
    build_allpass_netlist,
    parse,
    parse_value,
    serialize,
    terminals,
)


class TestParseValue:
    @pytest.mark.parametrize(
        "token,expected",
        [
            ("1k", 1000.0),
            ("1n", 1e-9),
            ("2.5meg", 2.5e6),
            ("1", 1.0),
            ("-3.5", -3.5),
            ("4.7u", 4.7e-6),
            ("10p", 10e-12),
            ("2f", 2e-15),
            ("1.5G", 1.5e9),
            ("100m", 0.1),
            ("1e3", 1000.0),
            ("2E-6", 2e-6),
            (".5k", 500.0),
            ("1e-3k", 1.0),
            ("3MEG", 3e6),
        ],
    )
    def test_suffixes(self, token, expected):
        assert parse_value(token) == pytest.approx(expected, rel=1e-15)

    @pytest.mark.parametrize("token", ["1x", "", "k", "1kk", "1.2.3", "1 k", "1e999", "nan"])
    def test_rejects_malformed(self, token):
        with pytest.raises(ValueError):
            parse_value(token)


class TestParseCards:
    def test_resistor_card(self):
        n = parse("R1 in out1 1k\n.END")
        assert isinstance(n, Netlist)
        assert n.elements == (Resistor("R1", "in", "out1", 1000.0),)

    def test_fdccii_card_with_gain(self):
        n = parse("XA FDCCII in a 0 0 out2 out1 0 a A2=0.95\n.END")
        assert isinstance(n, Netlist)
        (x,) = n.elements
        assert isinstance(x, Fdccii)
        assert x.params == FdcciiParams(alpha2=0.95)
        assert x.saturation is None

    def test_fdccii_card_with_sat(self):
        n = parse("XA FDCCII in a 0 0 o2 o1 0 a SAT=3\n.END")
        assert isinstance(n, Netlist)
        assert n.elements[0].saturation == SaturationSpec(3.0)

    def test_vsource_variants(self):
        n = parse(
            "V1 in 0 AC 1\n"
            "V2 b 0 AC 2 PHASE 45\n"
            "V3 c 0 SIN 0 1 155.6k\n"
            "V4 d 0 SIN 0.5 2 1k -30\n"
            ".END"
        )
        assert isinstance(n, Netlist)
        w = [e.waveform for e in n.elements]
        assert w[0] == Ac(1.0)
        assert w[1] == Ac(2.0, 45.0)
        assert w[2] == Sin(0.0, 1.0, 155600.0)
        assert w[3] == Sin(0.5, 2.0, 1000.0, -30.0)

    def test_comments_and_case(self):
        n = parse("* a comment\nr1 A 0 1K * trailing comment\n.probe P A\n.end")
        assert isinstance(n, Netlist)
        assert n.elements == (Resistor("r1", "A", "0", 1000.0),)
        assert n.probes == (Probe("P", "A"),)

    def test_text_after_end_ignored(self):
        n = parse("R1 a 0 1k\n.END\ntotal garbage ???")
        assert isinstance(n, Netlist)

    def test_matches_builder(self, stage):
        text = serialize(stage)
        parsed = parse(text)
        assert isinstance(parsed, Netlist)
        assert parsed == stage  # titles are cosmetic and excluded


MALFORMED = [
    # (text, expected kind, expected 1-based line)
    ("L1 a 0 5\n.END", ErrorKind.UNKNOWN_CARD, 1),
    (".FOO x\n.END", ErrorKind.UNKNOWN_CARD, 1),
    ("X1 NOTFDCCII a b 0 0 c d 0 e\n.END", ErrorKind.UNKNOWN_CARD, 1),
    ("C1 a 0 1x\n.END", ErrorKind.BAD_VALUE, 1),
    ("R1 a 0 -5\n.END", ErrorKind.BAD_VALUE, 1),
    ("R1 in 1k\n.END", ErrorKind.BAD_VALUE, 1),
    ("R1 a 0 1k extra\n.END", ErrorKind.BAD_VALUE, 1),
    ("V1 in 0 AC 1 PHASE abc\n.END", ErrorKind.BAD_VALUE, 1),
    ("V1 in 0 DC 5\n.END", ErrorKind.BAD_PARAM, 1),
    ("R1 a 0 1k\nX1 FDCCII a 0 0 0 b c 0 0 A9=1\n.END", ErrorKind.BAD_PARAM, 2),
    ("* pad\nX1 FDCCII a 0 0 0 b c 0 0 A2=0\n.END", ErrorKind.BAD_PARAM, 2),
    ("R1 a 0 1k\nR1 a 0 2k\n.END", ErrorKind.DUPLICATE_NAME, 2),
    ("R1 a 0 1k\n.PROBE P x\n.END", ErrorKind.BAD_NODE_REF, 2),
    ("R1 a+ 0 1k\n.END", ErrorKind.BAD_NODE_REF, 1),
    ("R1 a 0 1k", ErrorKind.MISSING_END, 1),
    ("R1 a 0 1k\n.PROBE P a\n.PROBE P a\n.END", ErrorKind.DUPLICATE_NAME, 3),
]


class TestParseErrors:
    @pytest.mark.parametrize("text,kind,line", MALFORMED)
    def test_malformed_corpus(self, text, kind, line):
        result = parse(text)
        assert isinstance(result, list) and result, f"expected errors for {text!r}"
        err = result[0]
        assert err.kind == kind
        assert err.line == line
        lines = text.split("\n")
        assert 1 <= err.line <= len(lines)
        assert 1 <= err.column <= max(1, len(lines[err.line - 1]))

    def test_all_errors_collected(self):
        result = parse("L1 a 0 5\nC1 a 0 1x\nR1 a 0 1k\n.END")
        assert isinstance(result, list)
        assert [e.kind for e in result] == [ErrorKind.UNKNOWN_CARD, ErrorKind.BAD_VALUE]
        assert [e.line for e in result] == [1, 2]

    def test_empty_text(self):
        result = parse("")
        assert isinstance(result, list)
        assert result[0].kind == ErrorKind.MISSING_END
        assert (result[0].line, result[0].column) == (1, 1)


class TestSerialize:
    def test_stage_inventory(self, stage):
        text = serialize(stage)
        cards = [line.split()[0] for line in text.splitlines() if line and not line.startswith("*")]
        assert cards.count("V1") == 1
        assert cards.count("R1") == 1
        assert cards.count("C1") == 1
        assert cards.count("X1") == 1
        assert cards.count(".PROBE") == 2
        assert cards.count(".END") == 1

    def test_nonideal_gain_emitted(self):
        n = build_allpass_netlist(1e3, 1e-9, FdcciiParams(alpha2=0.95))
        assert "A2=0.95" in serialize(n)

    def test_ideal_gains_not_emitted(self, stage):
        text = serialize(stage)
        assert "A1=" not in text and "B1=" not in text

    def test_rejects_misnamed_element(self):
        n = Netlist("t", (Resistor("Q1", "a", "0", 1e3),))
        with pytest.raises(ValueError):
            serialize(n)


def _canon(x: float) -> float:
    return float(format(x, ".15g"))


_name_suffix = st.integers(min_value=0, max_value=999)
_node = st.sampled_from(["0", "in", "out1", "out2", "a", "b", "n1", "N2", "x_9"])
_pos_value = st.floats(min_value=1e-12, max_value=1e12, allow_nan=False).map(_canon)
_any_value = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).map(_canon)
_gain = st.floats(min_value=0.5, max_value=1.5, allow_nan=False).map(_canon)


@st.composite
def _netlists(draw):
    elements = []
    n_r = draw(st.integers(0, 3))
    n_c = draw(st.integers(0, 2))
    n_v = draw(st.integers(0, 2))
    n_x = draw(st.integers(0, 2))
    for i in range(n_r):
        elements.append(Resistor(f"R{i}", draw(_node), draw(_node), draw(_pos_value)))
    for i in range(n_c):
        elements.append(Capacitor(f"C{i}", draw(_node), draw(_node), draw(_pos_value)))
    for i in range(n_v):
        if draw(st.booleans()):
            wf = Ac(draw(_pos_value), draw(_any_value))
        else:
            wf = Sin(draw(_any_value), draw(_pos_value), draw(_pos_value), draw(_any_value))
        elements.append(VSource(f"V{i}", draw(_node), draw(_node), wf))
    for i in range(n_x):
        gains = {k: draw(_gain) for k in ("alpha1", "alpha2", "beta1", "beta4")}
        sat = SaturationSpec(draw(_pos_value)) if draw(st.booleans()) else None
        elements.append(
            Fdccii(
                f"X{i}",
                *(draw(_node) for _ in range(8)),
                params=FdcciiParams(**gains),
                saturation=sat,
            )
        )
    used = sorted({t for e in elements for t in terminals(e)})
    probes = []
    if used:
        for i in range(draw(st.integers(0, 2))):
            probes.append(Probe(f"P{i}", draw(st.sampled_from(used))))
    return Netlist("", tuple(elements), tuple(probes))


class TestRoundTrip:
    @given(_netlists())
    @settings(max_examples=120, deadline=None)
    def test_parse_serialize_identity(self, netlist):
        result = parse(serialize(netlist))
        assert isinstance(result, Netlist), f"parse failed: {result}"
        assert result == netlist

    @given(st.text(max_size=400))
    @settings(max_examples=200, deadline=None)
    def test_parse_is_total(self, text):
        result = parse(text)
        if isinstance(result, Netlist):
            return
        assert result, "error list must be non-empty"
        lines = text.split("\n")
        for err in result:
            assert 1 <= err.line <= len(lines)
            assert 1 <= err.column <= max(1, len(lines[err.line - 1]) + 1)
