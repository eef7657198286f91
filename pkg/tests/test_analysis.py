import cmath
import math

import numpy as np
import pytest

from fdccsim import (
    Ac,
    Capacitor,
    FdcciiParams,
    Netlist,
    NotAllPassLikeError,
    Probe,
    Resistor,
    SweepGrid,
    VSource,
    ac_sweep,
    build_allpass_netlist,
    closed_form_sensitivities,
    estimate_pole_from_fit,
    estimate_pole_from_phase,
    ideal_transfer,
    nonideal_transfer,
    pole_frequency,
    sensitivities,
    verify_allpass,
)

from conftest import C, F0, R, W0


class TestIdealTransfer:
    def test_out2_coefficients(self):
        tf = ideal_transfer(R, C, "OUT2")
        assert tf.k == 1.0
        assert tf.zero == pytest.approx(1e6, rel=1e-12)
        assert tf.pole == pytest.approx(-1e6, rel=1e-12)

    def test_out1_phase_at_pole(self):
        # -(j-1)/(j+1) = -j
        h = ideal_transfer(R, C, "OUT1").eval(1j * W0)
        assert h == pytest.approx(-1j, abs=1e-15)

    def test_out2_dc_phase(self):
        h = ideal_transfer(2e3, 5e-8, "OUT2").eval(1j * 1e-6)
        assert math.degrees(cmath.phase(h)) == pytest.approx(180.0, abs=1e-3)

    def test_unity_magnitude_everywhere(self):
        tf = ideal_transfer(R, C, "OUT1")
        for omega in np.logspace(0, 12, 25):
            assert abs(abs(tf.eval(1j * omega)) - 1.0) < 1e-12

    def test_phase_laws(self):
        tf1 = ideal_transfer(R, C, "OUT1")
        tf2 = ideal_transfer(R, C, "OUT2")
        for omega in np.logspace(2, 9, 15):
            expect1 = -2.0 * math.atan(omega * R * C)
            got1 = cmath.phase(tf1.eval(1j * omega))
            assert abs(got1 - expect1) < 1e-12
            expect2 = math.pi - 2.0 * math.atan(omega * R * C)
            got2 = cmath.phase(tf2.eval(1j * omega))
            assert abs(got2 - expect2) < 1e-12

    def test_rejects_bad_rc(self):
        with pytest.raises(ValueError):
            ideal_transfer(-1.0, C, "OUT1")


class TestNonidealTransfer:
    def test_reduces_to_ideal_at_unity(self):
        p = FdcciiParams.ideal()
        assert nonideal_transfer(R, C, p, "OUT2") == ideal_transfer(R, C, "OUT2")
        assert nonideal_transfer(R, C, p, "OUT1", "mna") == nonideal_transfer(
            R, C, p, "OUT1", "mirror"
        )

    def test_alpha2_only_out2(self):
        # betas 1, alpha2 = 0.9: zero at +0.9/(RC), pole at -0.9/(RC)
        tf = nonideal_transfer(R, C, FdcciiParams(alpha2=0.9), "OUT2")
        assert tf.k == 1.0
        assert tf.zero == pytest.approx(0.9e6, rel=1e-12)
        assert tf.pole == pytest.approx(-0.9e6, rel=1e-12)

    def test_out1_forms_differ_by_beta4(self):
        p = FdcciiParams(beta4=0.8)
        mirror = nonideal_transfer(R, C, p, "OUT1", "mirror")
        mna = nonideal_transfer(R, C, p, "OUT1", "mna")
        assert mirror.zero == pytest.approx(1e6, rel=1e-12)
        assert mna.zero == pytest.approx(1e6 / 0.8, rel=1e-12)
        assert mirror.pole == mna.pole

    def test_mirror_mna_gap_scales_with_beta4(self):
        # sup over frequency of |H_mna - H_mirror| is |1 - beta4|, reached at DC
        for beta4 in (0.9, 1.05):
            p = FdcciiParams(beta4=beta4)
            mirror = nonideal_transfer(R, C, p, "OUT1", "mirror")
            mna = nonideal_transfer(R, C, p, "OUT1", "mna")
            gap_dc = abs(mna.eval(1j * 1.0) - mirror.eval(1j * 1.0))
            assert gap_dc == pytest.approx(abs(1 - beta4), rel=1e-6)
            for omega in np.logspace(1, 9, 9):
                gap = abs(mna.eval(1j * omega) - mirror.eval(1j * omega))
                assert gap <= abs(1 - beta4) * (1 + 1e-9)


class TestPoleFrequency:
    def test_ideal_value(self):
        assert pole_frequency(R, C) == pytest.approx(1e6, rel=1e-12)
        assert pole_frequency(R, C) / (2 * math.pi) == pytest.approx(159154.94, abs=0.01)

    def test_nonideal_value(self):
        w0 = pole_frequency(R, C, FdcciiParams(alpha2=0.95, beta5=0.9))
        assert w0 == pytest.approx(8.55e5, rel=1e-12)
        assert w0 / (2 * math.pi) == pytest.approx(136077.5, abs=0.1)

    def test_scaling_invariance(self):
        assert pole_frequency(R * 7, C / 7) == pytest.approx(pole_frequency(R, C), rel=1e-12)


class TestSweep:
    def test_grid_single_point_per_decade(self):
        freqs = SweepGrid(10.0, 1000.0, 1).frequencies()
        assert freqs.tolist() == [10.0, 100.0, 1000.0]

    def test_grid_degenerate(self):
        assert SweepGrid(50.0, 50.0, 5).frequencies().tolist() == [50.0]

    def test_grid_strictly_increasing(self):
        freqs = SweepGrid(1.0, 3.7e4, 7).frequencies()
        assert np.all(np.diff(freqs) > 0)
        assert freqs[-1] == pytest.approx(3.7e4, rel=1e-12)

    def test_grid_rejects_bad_args(self):
        with pytest.raises(ValueError):
            SweepGrid(10.0, 1.0, 5).frequencies()
        with pytest.raises(ValueError):
            SweepGrid(0.0, 1.0, 5).frequencies()
        with pytest.raises(ValueError):
            SweepGrid(1.0, 10.0, 0).frequencies()

    def test_stage_magnitudes_and_phases(self, stage):
        table = ac_sweep(stage, None, SweepGrid(1.0, 1e8, 50))
        assert len(table.freqs) == 401
        for label in ("VOUT1", "VOUT2"):
            mags = np.abs(table.gains[label])
            assert np.max(np.abs(mags - 1.0)) < 1e-9
        # VOUT1 unwrapped phase decreases monotonically 0 -> -180
        phases = np.unwrap(np.angle(table.gains["VOUT1"]))
        assert np.all(np.diff(phases) < 0)
        assert math.degrees(phases[0]) == pytest.approx(0.0, abs=0.01)
        # at 100 MHz the phase sits 2*atan(1/(w rc)) short of -180
        assert math.degrees(phases[-1]) == pytest.approx(-180.0, abs=0.5)


class TestPoleFromPhase:
    def test_ideal_stage(self, stage):
        f = estimate_pole_from_phase(stage, "VOUT1")
        assert f == pytest.approx(F0, abs=0.16)

    def test_out2_branch(self, stage):
        f = estimate_pole_from_phase(stage, "VOUT2")
        assert f == pytest.approx(F0, abs=0.16)

    def test_mirror_preserving_perturbation(self):
        n = build_allpass_netlist(R, C, FdcciiParams(alpha2=0.95, beta5=0.9))
        f = estimate_pole_from_phase(n, "VOUT1")
        assert f == pytest.approx(0.855 * F0, rel=1e-5)

    def test_beta4_shifts_the_crossing(self):
        # Perturbing beta4 breaks the mirror symmetry: the -90 degree
        # crossing sits at the geometric mean of zero and pole and moves
        # as beta4**-0.5 even though the true pole does not move.
        n = build_allpass_netlist(R, C, FdcciiParams(beta4=0.8))
        f = estimate_pole_from_phase(n, "VOUT1", rel_tol=1e-9)
        assert f == pytest.approx(F0 / math.sqrt(0.8), rel=1e-6)

    def test_lowpass_is_not_allpass_like(self):
        n = Netlist(
            "lp",
            (
                VSource("V1", "in", "0", Ac(1.0)),
                Resistor("R1", "in", "out", 1e3),
                Capacitor("C1", "out", "0", 1e-9),
            ),
            (Probe("VOUT", "out"),),
        )
        with pytest.raises(NotAllPassLikeError):
            estimate_pole_from_phase(n, "VOUT")


class TestPoleFromFit:
    def test_exact_on_ideal_stage(self, stage):
        f = estimate_pole_from_fit(stage, "VOUT1", [0.3 * F0, 0.8 * F0, 2 * F0, 4 * F0])
        assert f == pytest.approx(F0, rel=1e-12)

    def test_immune_to_beta4(self):
        n = build_allpass_netlist(R, C, FdcciiParams(beta4=0.8))
        f = estimate_pole_from_fit(n, "VOUT1", [0.3 * F0, 0.8 * F0, 2 * F0])
        assert f == pytest.approx(F0, rel=1e-10)

    def test_any_probe_recovers_denominator(self):
        p = FdcciiParams(beta1=1.07, beta2=0.93, beta4=1.02, beta5=0.96, alpha2=1.04)
        n = build_allpass_netlist(R, C, p)
        expected = pole_frequency(R, C, p) / (2 * math.pi)
        for probe in ("VOUT1", "VOUT2"):
            f = estimate_pole_from_fit(n, probe, [0.2 * F0, 0.9 * F0, 3 * F0])
            assert f == pytest.approx(expected, rel=1e-9)


class TestSensitivities:
    def test_ideal_targets(self):
        report = sensitivities(R, C)
        targets = closed_form_sensitivities()
        assert set(report.values) == set(targets)
        for name, target in targets.items():
            assert report.values[name] == pytest.approx(target, abs=1e-6), name

    def test_nonideal_base_point(self):
        report = sensitivities(R, C, FdcciiParams(alpha2=0.95, beta5=0.9))
        for name, target in closed_form_sensitivities().items():
            assert report.values[name] == pytest.approx(target, abs=1e-6), name

    def test_second_order_convergence(self):
        # S_R truncation error is h^2/(1-h^2); halving h shrinks it ~4x.
        err = {}
        for h in (8e-3, 4e-3):
            s_r = sensitivities(R, C, rel_step=h).values["R"]
            err[h] = abs(s_r - (-1.0))
        ratio = err[8e-3] / err[4e-3]
        assert 3.0 <= ratio <= 5.0

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            sensitivities(R, C, rel_step=0.5)


class TestVerifyAllpass:
    def test_ideal_passes_tight(self, stage):
        report = verify_allpass(stage, SweepGrid(1.0, 1e8, 20), 1e-9, 1e-9)
        assert report.passed
        assert report.n_points == 161

    def test_beta4_fails_magnitude(self):
        from fdccsim import ac_gain

        n = build_allpass_netlist(R, C, FdcciiParams(beta4=0.9))
        report = verify_allpass(n, SweepGrid(1.0, 1e8, 20), 1e-9, 1.0)
        assert not report.passed
        assert report.worst_mag_error == pytest.approx(0.1, abs=0.01)
        # |H_OUT1| itself approaches beta4 = 0.9 at high frequency
        high = abs(ac_gain(n, "VOUT1", 2 * math.pi * 1e8))
        assert abs(high - 1.0) == pytest.approx(0.1, abs=0.01)

    def test_empty_grid_vacuous_pass(self, stage):
        report = verify_allpass(stage, [], 0.0, 0.0)
        assert report.passed
        assert report.n_points == 0
