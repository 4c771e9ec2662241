import math
import unittest

import numpy as np
import pytest

from fsi import presets
from fsi.errors import DomainError, StepFailureError
from fsi.integrator import (
    Trajectory,
    energy_residual,
    integrate,
    locate_events,
    self_convergence,
    trajectory_distance,
)
from schema import EventKind, IntegratorSettings, ModelConfig, State, TerminationReason

EXPLICIT = IntegratorSettings(method="dopri54")


def decoupled_config(mu: float = 1e-12, h0: float = 0.3, hdot0: float = 0.0, xi0: float = 0.01) -> ModelConfig:
    """Reference shell released with a stretched spring, viscosity negligible"""
    return ModelConfig(
        spring=presets.reference_spring(),
        drag=presets.coupled_drag(20.0),
        mu=mu,
        initial=State(t=0.0, h=h0, h_dot=hdot0, xi=xi0, xi_dot=0.0),
    )


class TestDecoupledLimit(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cfg = decoupled_config()
        cls.traj = integrate(cls.cfg, 0.2)
        spring = cls.cfg.spring
        cls.omega = math.sqrt((1.0 + spring.a) * spring.k / spring.M)

    def test_spring_oscillates_as_cosine(self):
        """mu -> 0 leaves xi = xi0 cos(omega t) with omega^2 = (1 + a) k / M"""
        grid = np.linspace(0.0, 0.2, 2001)
        xi = self.traj.evaluate(grid)[:, 2]
        self.assertLessEqual(np.max(np.abs(xi - 0.01 * np.cos(self.omega * grid))), 1e-6)
        self.assertEqual(self.traj.termination, TerminationReason.TIME_END)
        self.assertEqual(self.traj.method, "dopri54")

    def test_zero_velocity_events(self):
        """xi_dot vanishes at multiples of pi / omega"""
        events = locate_events(self.traj, [EventKind.ZERO_VELOCITY], component="xi_dot")
        times = [event.t for event in events if event.t > 0]
        self.assertGreaterEqual(len(times), 3)
        for k, t in enumerate(times[:3], start=1):
            self.assertAlmostEqual(t, k * math.pi / self.omega, delta=1e-8)

    def test_samples_are_time_ordered(self):
        self.assertTrue(np.all(np.diff(self.traj.t) > 0))
        self.assertEqual(self.traj.t_start, 0.0)
        self.assertEqual(self.traj.t_end, 0.2)


class TestIntegrate(unittest.TestCase):

    def test_inviscid_energy_conserved(self):
        """mu = 0: F is conserved up to the tolerance"""
        cfg = decoupled_config(mu=0.0, hdot0=-0.1)
        traj = integrate(cfg, 0.2)
        report = energy_residual(traj)
        self.assertLessEqual(report.max_abs, 10 * traj.settings.rel_tol * report.f0)
        self.assertTrue(np.all(traj.ledger == 0.0))

    def test_zero_length_run(self):
        """t_end = t0 returns the initial state only"""
        cfg = presets.deformable_config()
        traj = integrate(cfg, 0.0)
        self.assertEqual(len(traj), 1)
        self.assertEqual(traj.final_state, cfg.initial)
        np.testing.assert_array_equal(traj.evaluate([0.0, 0.0])[:, 0], [0.3, 0.3])

    def test_backwards_run_refused(self):
        cfg = decoupled_config().model_copy(update={"initial": State(t=1.0, h=0.3, xi=0.01)})
        with self.assertRaises(DomainError):
            integrate(cfg, 0.5)

    def test_stop_below(self):
        """stop_below ends the run where h reaches the level"""
        traj = integrate(presets.rigid_body_config(), 2.0, stop_below=0.1)
        self.assertEqual(traj.termination, TerminationReason.EVENT)
        self.assertAlmostEqual(traj.final_state.h, 0.1, places=9)
        self.assertLess(traj.t_end, 2.0)
        self.assertTrue(np.all(traj.h[:-1] > 0.1))

    def test_rigid_body_stays_off_the_wall(self):
        """A body whose drag integral diverges stops short of the wall"""
        traj = integrate(presets.rigid_body_config(alpha=3.0), 2.0)
        grid = np.linspace(0.0, 2.0, 4001)
        h = traj.evaluate(grid)[:, 0]
        self.assertTrue(np.all(h > 0))
        self.assertTrue(np.all(np.diff(h) <= 1e-8))

    def test_ledger_never_decreases(self):
        """The dissipation ledger is non-decreasing step by step"""
        traj = integrate(presets.deformable_config(1.0), 1.0, EXPLICIT)
        self.assertTrue(np.all(np.diff(traj.ledger) >= 0.0))
        self.assertGreater(traj.ledger[-1], 0.0)

    def test_interpolated_ledger_never_decreases(self):
        """Inside every step the dense ledger is non-decreasing at the quarter points"""
        traj = integrate(presets.deformable_config(1.0), 1.0, EXPLICIT)
        x = np.array([0.0, 0.25, 0.5, 0.75])
        times = (traj.t[:-1, None] + x * np.diff(traj.t)[:, None]).ravel()
        times = np.append(times, traj.t_end)
        ledger = traj.evaluate(times)[:, 4]
        self.assertGreaterEqual(float(np.min(np.diff(ledger))), -1e-13)

    def test_levelled_off_minimum_is_last(self):
        """A flat tail puts the minimum distance at the end of the run"""
        y = np.array([[0.3, -1.0, 0, 0, 0], [0.1, 0.0, 0, 0, 0], [0.1, 0.0, 0, 0, 0], [0.1, 0.0, 0, 0, 0]])
        traj = Trajectory.from_samples(presets.rigid_body_config(), [0.0, 0.2, 0.5, 1.0], y)
        [event] = locate_events(traj, [EventKind.MIN_DISTANCE])
        self.assertEqual(event.t, 1.0)

    def test_rejection_budget(self):
        """A step that cannot be accepted raises with the partial trajectory"""
        settings = IntegratorSettings(max_step=0.1, initial_step=0.1, max_rejections=1)
        with self.assertRaises(StepFailureError) as ctx:
            integrate(decoupled_config(), 1.0, settings)
        partial = ctx.exception.trajectory
        self.assertEqual(partial.termination, TerminationReason.FAILURE)
        self.assertEqual(len(partial), 1)
        self.assertEqual(ctx.exception.t, 0.0)


class TestSelfConvergence(unittest.TestCase):

    def test_tighter_tolerances_agree(self):
        """Runs 100x apart in tolerance agree to well within the looser one's error"""
        cfg = presets.deformable_config(1.0)
        coarse = integrate(cfg, 1.0, EXPLICIT)
        fine = integrate(cfg, 1.0, EXPLICIT.tightened(100.0))
        self.assertLess(trajectory_distance(coarse, fine, grid_size=2000), 1e-4)

    def test_residual_shrinks_with_tolerance(self):
        cfg = presets.deformable_config(1.0)
        coarse = energy_residual(integrate(cfg, 1.0, EXPLICIT)).max_abs
        fine = energy_residual(integrate(cfg, 1.0, EXPLICIT.tightened(10.0))).max_abs
        self.assertGreater(coarse, fine)


class TestImplicitFallback(unittest.TestCase):

    def test_radau_run(self):
        """method="radau" integrates log h and agrees with the explicit pair"""
        cfg = presets.rigid_body_config()
        implicit = integrate(cfg, 0.5, IntegratorSettings(method="radau"))
        explicit = integrate(cfg, 0.5, EXPLICIT)
        self.assertEqual(implicit.method, "radau")
        self.assertTrue(implicit.log_distance)
        np.testing.assert_allclose(implicit.evaluate(implicit.t), implicit.y, rtol=1e-12, atol=1e-14)
        self.assertLess(trajectory_distance(implicit, explicit, grid_size=1000), 1e-5)
        self.assertTrue(np.all(implicit.h > 0))

    def test_auto_switches_when_budget_spent(self):
        """A spent explicit budget reruns the whole span with Radau and says so"""
        with self.assertLogs("fsi.integrator", level="WARNING") as logs:
            traj = integrate(presets.rigid_body_config(), 0.5, IntegratorSettings(max_steps=5))
        self.assertEqual(traj.method, "radau")
        self.assertEqual(traj.t_end, 0.5)
        self.assertTrue(any("STIFFNESS_WARNING" in warning for warning in traj.warnings))
        self.assertTrue(any("Radau" in line for line in logs.output))

    def test_explicit_only_does_not_switch(self):
        traj = integrate(presets.rigid_body_config(), 0.5, IntegratorSettings(method="dopri54", max_steps=5))
        self.assertEqual(traj.method, "dopri54")

    def test_radau_stop_below(self):
        traj = integrate(presets.rigid_body_config(), 2.0, IntegratorSettings(method="radau"), stop_below=0.1)
        self.assertEqual(traj.termination, TerminationReason.EVENT)
        self.assertAlmostEqual(traj.final_state.h, 0.1, places=8)


class TestTrajectory(unittest.TestCase):

    def setUp(self):
        self.cfg = presets.rigid_shell_config()
        y = np.array([[0.3, -0.5, 0.0, 0.0, 0.0], [0.2, -0.4, 0.001, 0.1, 0.01]])
        self.traj = Trajectory.from_samples(self.cfg, [0.0, 0.2], y)

    def test_linear_interpolation(self):
        np.testing.assert_allclose(self.traj.evaluate(0.1)[0], [0.25, -0.45, 0.0005, 0.05, 0.005])
        self.assertAlmostEqual(self.traj.value_at(0.05, "h_dot"), -0.475)

    def test_outside_range(self):
        with self.assertRaises(DomainError):
            self.traj.evaluate(0.3)

    def test_read_only(self):
        with self.assertRaises(ValueError):
            self.traj.y[0, 0] = 1.0

    def test_threshold_needs_level(self):
        with self.assertRaises(DomainError):
            locate_events(self.traj, [EventKind.THRESHOLD_CROSSING])

    def test_threshold_crossing(self):
        events = locate_events(self.traj, [EventKind.THRESHOLD_CROSSING], level=0.25)
        self.assertEqual(len(events), 1)
        self.assertAlmostEqual(events[0].t, 0.1, delta=1e-11)


@pytest.mark.slow
def test_reference_rigid_shell_hits_without_contact():
    """The rigid shell at mu = 0.01 gets very close to the wall but never touches it"""
    traj = integrate(presets.rigid_shell_config(0.01), 2.0)
    assert traj.termination is TerminationReason.TIME_END
    assert np.all(traj.h > 0)
    h_min = locate_events(traj, [EventKind.MIN_DISTANCE])[0].state.h
    assert 0 < h_min < 1e-3


@pytest.mark.slow
def test_reference_deformable_self_convergence():
    """Ten times tighter tolerances bring the run 8x closer to a tight reference, order >= 4"""
    study = self_convergence(presets.deformable_config(0.1), 2.0, EXPLICIT)
    assert study.ratio >= 8.0, study
    assert study.order >= 4.0, study
    assert study.fine_steps > study.coarse_steps
