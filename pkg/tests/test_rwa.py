"""Rotating-frame predictions against frozen high-precision references and
against direct numerical propagation."""

import math

import numpy as np
import pytest

from lzs_search import (
    DriveParams,
    StepControl,
    add_sigma_z_error,
    basis_state,
    cdt_design_omega,
    effective_h_noisy_algB,
    effective_h_three_level,
    h_driven_projected,
    h_lzs,
    measure_rabi_frequency,
    propagate,
    rabi_frequency_algB,
    rabi_frequency_lzs,
    rabi_frequency_noisy_half,
)
from lzs_search.bessel import bessel_j

# 20+-digit reference values for the Bessel factors used below
J0_1 = 0.7651976865579665514497175
FIRST_J0_ROOT = 2.404825557695772768621632
J0_0P02 = 0.9999000024999722224


class TestRabiRates:
    def test_swept_rate_value(self):
        delta = 2.0**-5
        xi = math.sqrt(1.0 - delta * delta)
        want = delta * abs(bessel_j(0, xi))
        assert rabi_frequency_lzs(delta, 1.0, 1.0) == pytest.approx(want, rel=1e-15)
        # xi -> 1 limit pins the value near delta * J0(1)
        assert rabi_frequency_lzs(delta, 1.0, 1.0) == pytest.approx(delta * J0_1, rel=1e-3)

    def test_swept_rate_undriven(self):
        assert rabi_frequency_lzs(0.25, 0.0, 3.0) == 0.25

    def test_epsilon_scaling(self):
        delta = 2.0**-5
        slow = rabi_frequency_lzs(delta, 0.0, 1.0, eps=1.0)
        fast = rabi_frequency_lzs(delta, 0.0, 1.0, eps=2.5)
        assert fast == pytest.approx(2.5 * slow, rel=1e-15)

    def test_modulated_rate_value(self):
        want = 2.0**-5 * abs(bessel_j(0, 10.12 / 4.0))
        assert rabi_frequency_algB(2.0**-5, 1.0, 9.12, 4.0) == pytest.approx(want, rel=1e-15)

    def test_noisy_half_value(self):
        # A1/omega1 = 0.05/2.5 = 0.02
        assert rabi_frequency_noisy_half(0.125, 0.05, 2.5) == pytest.approx(
            0.125 * J0_0P02, rel=1e-13
        )
        assert rabi_frequency_noisy_half(0.125, 0.0, 0.0) == 0.125

    @pytest.mark.parametrize(
        "fn,args",
        [
            (rabi_frequency_lzs, (0.0, 1.0, 1.0)),
            (rabi_frequency_lzs, (0.5, 1.0, 0.0)),
            (rabi_frequency_algB, (1.5, 1.0, 9.0, 4.0)),
            (rabi_frequency_noisy_half, (0.5, 0.1, -2.0)),
        ],
    )
    def test_validation(self, fn, args):
        with pytest.raises(ValueError):
            fn(*args)


class TestDesignFrequency:
    def test_first_root_placement(self):
        a, b = 1.0, 9.1193
        omega = cdt_design_omega(a, b)
        assert (b + 0.5 * a) / omega == pytest.approx(FIRST_J0_ROOT, rel=1e-12)
        assert omega == pytest.approx(3.9999990723721794, rel=1e-12)

    def test_higher_roots_are_lower_frequencies(self):
        a, b = 1.0, 9.1193
        w1 = cdt_design_omega(a, b, 1)
        w2 = cdt_design_omega(a, b, 2)
        w3 = cdt_design_omega(a, b, 3)
        assert w1 > w2 > w3
        assert w2 == pytest.approx((b + 0.5 * a) / 5.520078110286311, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            cdt_design_omega(1.0, 9.0, 0)
        with pytest.raises(ValueError):
            cdt_design_omega(1.0, 9.0, 1.5)


class TestSweptRateAgainstPropagation:
    @pytest.mark.parametrize("omega", [0.625, 2.5])
    def test_within_three_percent(self, omega):
        delta = 2.0**-5
        params = DriveParams(delta=delta, a=1.0, omega=omega)
        predicted = rabi_frequency_lzs(delta, 1.0, omega)
        span = 2.6 * 2.0 * math.pi / predicted
        traj = propagate(h_lzs(params), basis_state(2, 0, "computational"), 0.0, span)
        measured = measure_rabi_frequency(traj, 1)
        assert abs(measured - predicted) / predicted < 0.03


class TestSuppressionAtRoot:
    def test_population_frozen_at_first_root(self):
        """Driving with A/omega on the first J0 root freezes the transfer."""
        delta = 2.0**-5
        omega = 1.0 / FIRST_J0_ROOT
        params = DriveParams(delta=delta, a=1.0, omega=omega)
        traj = propagate(h_lzs(params), basis_state(2, 0, "computational"), 0.0, 20.0 / delta)
        assert float(traj.populations[:, 1].max()) < 0.05


class TestEffectiveNoisyModel:
    def test_clean_limit_static_part(self):
        """With no error tone the B sidebands cancel (J_-1 = -J_1) and the
        DC coupling is exactly -(Delta/2) J0((A+B)/omega)."""
        params = DriveParams(delta=2.0**-5, a=1.0, b=9.12, omega=4.0)
        eff = effective_h_noisy_algB(params)
        off = eff.static_part()[0, 1]
        want = -0.5 * 2.0**-5 * bessel_j(0, 10.12 / 4.0)
        assert off == pytest.approx(want, rel=1e-9)
        assert eff.resonances == ()

    def test_static_part_magnitude_matches_design_rate(self):
        """2 x |static coupling| equals the predicted search Rabi rate."""
        params = DriveParams(delta=2.0**-5, a=1.0, b=9.1193, omega=cdt_design_omega(1.0, 9.1193))
        eff = effective_h_noisy_algB(params)
        want = rabi_frequency_algB(2.0**-5, 1.0, 9.1193, params.omega)
        assert 2.0 * abs(eff.static_part()[0, 1]) == pytest.approx(want, rel=1e-9)

    def test_resonance_detection(self):
        params = DriveParams(delta=2.0**-5, a=1.0, b=9.12, omega=4.0, a1=0.05, omega1=4.0)
        eff = effective_h_noisy_algB(params)
        assert eff.resonances  # commensurate tones must be flagged
        k, k1, det = eff.resonances[0]
        assert (k, k1) in ((1, 1), (-1, -1))
        assert det == pytest.approx(0.0, abs=1e-12)

    def test_incommensurate_has_no_resonances(self):
        params = DriveParams(
            delta=2.0**-5, a=1.0, b=9.12, omega=4.0, a1=0.05, omega1=4.0 * math.sqrt(2.0)
        )
        assert effective_h_noisy_algB(params).resonances == ()

    def test_entries_hermitian_and_periodic_structure(self):
        params = DriveParams(delta=2.0**-5, a=1.0, b=9.12, omega=4.0, a1=0.05, omega1=2.5)
        eff = effective_h_noisy_algB(params)
        for t in (0.0, 0.41, 2.0):
            m = eff.entries(t)
            assert m.shape == (2, 2)
            assert np.allclose(m, m.conj().T, atol=1e-15)
            assert m[0, 0] == 0.0

    def test_truncation_override(self):
        params = DriveParams(delta=2.0**-5, a=1.0, b=9.12, omega=4.0)
        a = effective_h_noisy_algB(params, truncation=8)
        b = effective_h_noisy_algB(params, truncation=14)
        assert a.truncation == 8 and b.truncation == 14
        assert abs(a.static_part()[0, 1] - b.static_part()[0, 1]) < 1e-8


class TestEffectiveThreeLevel:
    def test_matrix_form(self):
        params = DriveParams(delta=2.0**-5, a=1.0, b=9.12, omega=4.0, eta=0.01)
        m = effective_h_three_level(params).static_part()
        z_full = 10.12 / 4.0
        z_half = 9.62 / 4.0
        assert m[0, 1] == pytest.approx(-0.5 * 2.0**-5 * bessel_j(0, z_full), rel=1e-12)
        assert m[0, 2] == pytest.approx(0.01 * bessel_j(0, z_half), rel=1e-12)
        assert m[1, 2] == 0.0
        assert m[2, 2] == 0.5
        assert np.allclose(m, m.conj().T)

    def test_leakage_channel_closes_at_design_frequency(self):
        params = DriveParams(
            delta=2.0**-5, a=1.0, b=9.1193, omega=cdt_design_omega(1.0, 9.1193), eta=0.01
        )
        m = effective_h_three_level(params).static_part()
        assert abs(m[0, 2]) < 3e-9  # eta * J0(root) ~ 0
        assert abs(m[0, 1]) > 1e-3 * 2.0**-5  # search coupling survives


class TestNoisyHalfFreeze:
    def test_constant_detuning_blocks_transfer(self):
        """A static diagonal offset of size Delta keeps the flop below 1/2."""
        from lzs_search import h_grover_projected

        delta = 0.125
        base = h_grover_projected(0.5, delta)
        noisy = add_sigma_z_error(base, a1=delta, omega1=0.0)
        traj = propagate(noisy, basis_state(2, 0, "bar"), 0.0, 10.0 / delta)
        top = float(traj.populations[:, 1].max())
        # two-level formula: max P1 = Omega^2/(Omega^2 + 4 a1^2) = 1/5
        assert top == pytest.approx(0.2, abs=0.01)
        assert top < 0.5

    def test_fast_error_only_renormalizes(self):
        from lzs_search import h_grover_projected

        delta = 0.125
        base = h_grover_projected(0.5, delta)
        noisy = add_sigma_z_error(base, a1=0.05, omega1=2.5)
        predicted = rabi_frequency_noisy_half(delta, 0.05, 2.5)
        span = 2.6 * 2.0 * math.pi / predicted
        traj = propagate(noisy, basis_state(2, 0, "bar"), 0.0, span)
        measured = measure_rabi_frequency(traj, 1)
        assert abs(measured - predicted) / predicted < 0.03
