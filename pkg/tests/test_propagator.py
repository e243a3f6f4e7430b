"""Integrator tests: unitarity, convergence, path cross-validation, observables."""

import math

import numpy as np
import pytest

from lzs_search import (
    DriveParams,
    InsufficientDataError,
    StateVector,
    StepControl,
    Trajectory,
    basis_state,
    bar_basis,
    gap,
    h_driven_projected,
    h_grover_full,
    h_grover_projected,
    h_lzs,
    max_population,
    measure_rabi_frequency,
    population,
    propagate,
    steps_per_period,
)


def final_amps(traj: Trajectory) -> np.ndarray:
    return np.asarray(traj.final_state.amplitudes)


class TestStaticPath:
    def test_matches_analytic_rabi(self):
        """At the midpoint the pair Hamiltonian drives P1(t) = sin^2(delta t / 2)."""
        delta = 0.25
        op = h_grover_projected(0.5, delta)
        traj = propagate(op, basis_state(2, 0, "bar"), 0.0, 80.0)
        want = np.sin(0.5 * delta * traj.times) ** 2
        assert np.max(np.abs(traj.populations[:, 1] - want)) < 1e-9

    def test_epsilon_scales_time(self):
        delta, eps = 0.25, 3.0
        op = h_grover_projected(0.5, delta, eps=eps)
        traj = propagate(op, basis_state(2, 0, "bar"), 0.0, 30.0)
        want = np.sin(0.5 * eps * delta * traj.times) ** 2
        assert np.max(np.abs(traj.populations[:, 1] - want)) < 1e-9


class TestUnitarity:
    @pytest.mark.parametrize("order", [2, 4])
    def test_norm_conserved_driven(self, order):
        op = h_lzs(DriveParams(delta=2.0**-4, a=1.0, omega=0.5))
        ctl = StepControl(order=order)
        traj = propagate(op, basis_state(2, 0, "computational"), 0.0, 40.0 * math.pi, ctl)
        sums = traj.populations.sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-12
        assert abs(traj.final_state.norm - 1.0) < 1e-12

    def test_norm_conserved_three_level(self):
        from lzs_search import h_three_level

        op = h_three_level(DriveParams(delta=2.0**-5, a=1.0, b=9.12, omega=4.0, eta=0.01))
        traj = propagate(op, basis_state(3, 0, "three-level"), 0.0, 50.0)
        # dim-3 steps go through eigh, whose roundoff constant is a bit larger
        assert np.max(np.abs(traj.populations.sum(axis=1) - 1.0)) < 1e-10


class TestPathConsistency:
    def test_periodic_vs_generic_grid(self):
        """The period-reusing path must reproduce the plain stepping path."""
        params = DriveParams(delta=2.0**-4, a=1.0, omega=0.5)
        tper = 2.0 * math.pi / 0.5
        span = 4.0 * tper
        psi = basis_state(2, 0, "computational")
        periodic = propagate(h_lzs(params), psi, 0.0, span)
        generic_op = h_lzs(params)
        generic_op.period = None  # force the non-reusing path
        generic = propagate(generic_op, psi, 0.0, span)
        assert np.array_equal(periodic.times, generic.times)
        assert np.max(np.abs(periodic.populations - generic.populations)) < 1e-9

    def test_full_model_matches_projected_pair(self):
        """2^n propagation agrees with the two-level reduction to roundoff."""
        n = 2
        delta = gap(n)
        params = DriveParams(n=n, a=1.0, omega=4.0 * delta)
        span = 20.0 / delta
        ctl = StepControl(record_stride=1)

        full = h_grover_full(n, params=params)
        full.period = full.step_period = None
        full.norm_bound = 1.0
        N = 2**n
        u = np.full(N, 1.0 / math.sqrt(N), dtype=complex)
        tf = propagate(full, StateVector(u, "computational"), 0.0, span, ctl)
        p_marked_full = tf.populations[:, 0]

        proj = h_driven_projected(params, exact=True)
        proj.period = proj.step_period = None
        proj.norm_bound = 1.0
        bb = bar_basis(delta)
        tp = propagate(
            proj, StateVector(bb.image_of_u().astype(complex), "bar"), 0.0, span, ctl
        )
        p_marked_proj = np.abs(tp.amplitudes @ bb.image_of_y().astype(complex).conj()) ** 2

        assert np.array_equal(tf.times, tp.times)
        assert np.max(np.abs(p_marked_full - p_marked_proj)) < 1e-9

    def test_window_composition(self):
        op = h_lzs(DriveParams(delta=0.2, a=0.9, omega=0.7))
        op.period = None
        psi = basis_state(2, 0, "computational")
        ctl = StepControl(steps_per_drive_period=2048)
        whole = propagate(op, psi, 0.0, 7.0, ctl)
        first = propagate(op, psi, 0.0, 3.5, ctl)
        second = propagate(op, first.final_state, 3.5, 7.0, ctl)
        assert np.linalg.norm(final_amps(whole) - final_amps(second)) < 1e-8


class TestConvergence:
    @staticmethod
    def _final_error(op, span, order, spp, ref):
        ctl = StepControl(steps_per_drive_period=spp, order=order)
        out = propagate(op, basis_state(2, 0, "computational"), 0.0, span, ctl)
        return float(np.linalg.norm(final_amps(out) - ref))

    def test_second_order_refinement(self):
        op = h_lzs(DriveParams(delta=0.25, a=1.0, omega=0.5))
        span = 3.0 * 2.0 * math.pi / 0.5
        ref = final_amps(
            propagate(
                op,
                basis_state(2, 0, "computational"),
                0.0,
                span,
                StepControl(steps_per_drive_period=8192),
            )
        )
        e1 = self._final_error(op, span, 2, 256, ref)
        e2 = self._final_error(op, span, 2, 512, ref)
        assert e2 < e1
        assert e1 / e2 >= 3.5  # doubling the density gains ~2 bits at order 2

    def test_fourth_order_refinement(self):
        op = h_lzs(DriveParams(delta=0.25, a=1.0, omega=0.5))
        span = 3.0 * 2.0 * math.pi / 0.5
        ref = final_amps(
            propagate(
                op,
                basis_state(2, 0, "computational"),
                0.0,
                span,
                StepControl(steps_per_drive_period=4096, order=4),
            )
        )
        e1 = self._final_error(op, span, 4, 128, ref)
        e2 = self._final_error(op, span, 4, 256, ref)
        assert e2 < e1
        assert e1 / e2 >= 8.0
        # order 4 beats order 2 on the same grid
        e2nd = self._final_error(op, span, 2, 128, ref)
        assert e1 < 0.01 * e2nd


class TestGridBookkeeping:
    def test_endpoints_exact(self):
        op = h_lzs(DriveParams(delta=0.125, a=1.0, omega=0.8))
        tper = 2.0 * math.pi / 0.8
        traj = propagate(op, basis_state(2, 0, "computational"), 0.0, 2.5 * tper)
        assert traj.times[0] == 0.0
        assert traj.times[-1] == 2.5 * tper
        assert np.all(np.diff(traj.times) > 0.0)
        assert abs(traj.final_state.norm - 1.0) < 1e-12

    def test_record_stride(self):
        op = h_lzs(DriveParams(delta=0.125, a=1.0, omega=0.8))
        dense = propagate(op, basis_state(2, 0, "computational"), 0.0, 60.0)
        strided = propagate(
            op,
            basis_state(2, 0, "computational"),
            0.0,
            60.0,
            StepControl(record_stride=64),
        )
        assert len(strided.times) < len(dense.times) / 8
        # strided samples must sit on the dense result
        for i in (1, len(strided.times) // 2, -2):
            j = int(np.argmin(np.abs(dense.times - strided.times[i])))
            assert np.allclose(strided.populations[i], dense.populations[j], atol=1e-12)

    def test_snapshots_thinned_and_normalized(self):
        op = h_lzs(DriveParams(delta=0.125, a=1.0, omega=0.8))
        traj = propagate(
            op,
            basis_state(2, 0, "computational"),
            0.0,
            400.0,
            StepControl(snapshot_stride=64),
        )
        assert len(traj.snapshot_times) <= 2049
        if len(traj.snapshot_times):
            norms = np.linalg.norm(traj.snapshot_states, axis=1)
            assert np.max(np.abs(norms - 1.0)) < 1e-12

    def test_amplitudes_consistent_with_populations(self):
        op = h_lzs(DriveParams(delta=0.125, a=1.0, omega=0.8))
        traj = propagate(op, basis_state(2, 0, "computational"), 0.0, 100.0)
        assert traj.amplitudes is not None
        assert np.max(np.abs(np.abs(traj.amplitudes) ** 2 - traj.populations)) < 1e-14


class TestValidation:
    def setup_method(self):
        self.op = h_lzs(DriveParams(delta=0.5, a=1.0, omega=1.0))

    def test_basis_mismatch(self):
        with pytest.raises(ValueError, match="basis mismatch"):
            propagate(self.op, basis_state(2, 0, "bar"), 0.0, 1.0)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            propagate(self.op, basis_state(3, 0, "computational"), 0.0, 1.0)

    def test_not_normalized(self):
        bad = StateVector(np.array([0.6, 0.6]), "computational")
        with pytest.raises(ValueError, match="not normalized"):
            propagate(self.op, bad, 0.0, 1.0)

    def test_reversed_window(self):
        with pytest.raises(ValueError, match="t1 > t0"):
            propagate(self.op, basis_state(2, 0, "computational"), 1.0, 1.0)

    def test_basis_state_bounds(self):
        with pytest.raises(ValueError):
            basis_state(2, 2, "bar")

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(steps_per_drive_period=32),
            dict(order=3),
            dict(tolerance=0.0),
            dict(record_stride=0),
            dict(snapshot_stride=0),
        ],
    )
    def test_step_control_validation(self, kwargs):
        with pytest.raises(ValueError):
            StepControl(**kwargs)


class TestStepsPerPeriod:
    def test_default_density(self):
        op = h_lzs(DriveParams(delta=0.125, a=1.0, omega=0.8))
        assert steps_per_period(op) == 512

    def test_tolerance_raises_density(self):
        op = h_lzs(DriveParams(delta=0.125, a=1.0, omega=0.8))
        tight = steps_per_period(op, StepControl(tolerance=1e-12))
        assert tight > 512

    def test_static_has_no_period(self):
        with pytest.raises(ValueError, match="step period"):
            steps_per_period(h_grover_projected(0.5, 0.5))


class TestObservables:
    @staticmethod
    def _synthetic(rabi: float, span: float, points: int = 4000) -> Trajectory:
        times = np.linspace(0.0, span, points)
        p1 = np.sin(0.5 * rabi * times) ** 2
        pops = np.stack([1.0 - p1, p1], axis=1)
        amps = np.stack([np.cos(0.5 * rabi * times), -1j * np.sin(0.5 * rabi * times)], axis=1)
        return Trajectory(
            times=times,
            populations=pops,
            basis_label="bar",
            final_state=StateVector(amps[-1], "bar"),
            amplitudes=amps,
        )

    def test_measure_rabi_synthetic(self):
        rabi = 0.37
        traj = self._synthetic(rabi, span=6.0 * 2.0 * math.pi / rabi)
        assert measure_rabi_frequency(traj, 1) == pytest.approx(rabi, rel=1e-5)

    def test_measure_rabi_requires_oscillations(self):
        traj = self._synthetic(0.37, span=0.5 * 2.0 * math.pi / 0.37)
        with pytest.raises(InsufficientDataError):
            measure_rabi_frequency(traj, 1)

    def test_measure_rabi_on_propagated_static(self):
        delta = 0.125
        op = h_grover_projected(0.5, delta)
        span = 3.5 * 2.0 * math.pi / delta
        traj = propagate(op, basis_state(2, 0, "bar"), 0.0, span)
        assert measure_rabi_frequency(traj, 1) == pytest.approx(delta, rel=1e-6)

    def test_population_interpolates(self):
        traj = self._synthetic(0.5, span=50.0)
        t = 13.777
        assert population(traj, 1, t) == pytest.approx(math.sin(0.25 * t) ** 2, abs=1e-4)
        with pytest.raises(ValueError, match="outside"):
            population(traj, 1, 51.0)

    def test_max_population(self):
        traj = self._synthetic(0.5, span=50.0)
        top, t_top = max_population(traj, 1)
        assert top == pytest.approx(1.0, abs=1e-5)
        # all peaks tie at 1; whichever sample wins must sit on one of them
        assert math.cos(0.25 * t_top) ** 2 < 1e-5
