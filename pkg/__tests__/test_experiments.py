import asyncio
import math
import unittest

import numpy as np
import pytest

from fsi import presets
from fsi.errors import DomainError, StepFailureError, UndefinedT0Error
from fsi.experiments import (
    LimitProfiles,
    SweepEntry,
    SweepResult,
    detect_rebound,
    energy_partition,
    limit_deviation,
    oscillation_period,
    physical_rebound_verdict,
    rigid_rest_height,
    run_sweep,
    run_sweep_async,
    summary_intervals,
    summary_row,
    sweep_summary,
    turning_points,
    verdict_from_heights,
    xi_envelope,
    xi_limit_solve,
    xi_sup,
)
from fsi.integrator import Trajectory, integrate
from schema import IntegratorSettings, ModelConfig, SpringParams, State, Verdict

HALF_PERIOD = math.pi * math.sqrt(8.2 / 10000.0)


def synthetic_rebound(cfg: ModelConfig) -> Trajectory:
    """h falls from 0.3 to 0.1 and climbs back to 0.2"""
    t = [0.0, 0.2, 0.3]
    y = np.array([[0.3, -1.0, 0.0, 0.0, 0.0], [0.1, 0.0, 0.0, 0.0, 0.0], [0.2, 1.0, 0.0, 0.0, 0.0]])
    return Trajectory.from_samples(cfg, t, y)


class TestTurningPoints(unittest.TestCase):

    def setUp(self):
        self.spring = presets.reference_spring()

    def test_reference_amplitude_and_times(self):
        """y+- = +-|hdot0| / sqrt(a k / M); both travel times equal pi sqrt(m/k)"""
        points = turning_points(self.spring, -0.5, h0=0.3)
        self.assertAlmostEqual(points.y_plus, 0.014318, places=6)
        self.assertEqual(points.y_minus, -points.y_plus)
        self.assertAlmostEqual(points.t_plus / HALF_PERIOD, 1.0, places=9)
        self.assertAlmostEqual(points.t_minus / HALF_PERIOD, 1.0, places=9)
        self.assertAlmostEqual(points.t1, 0.6 + points.t_plus)
        self.assertAlmostEqual(points.t2, 0.6 + points.t_plus + points.t_minus)

    def test_no_collision_time_without_approach(self):
        points = turning_points(self.spring, 0.5, h0=0.3)
        self.assertIsNone(points.t1)

    def test_domain(self):
        with self.assertRaises(DomainError):
            turning_points(SpringParams(M=1.0, m=8.2, k=0.0), -0.5)
        with self.assertRaises(DomainError):
            turning_points(self.spring, 0.0)

    def test_envelope_takes_larger_bound(self):
        """The turning amplitude exceeds 1/200 for the reference data"""
        envelope = xi_envelope(self.spring, -0.5)
        self.assertAlmostEqual(envelope, turning_points(self.spring, -0.5).y_plus + 1e-4)
        self.assertAlmostEqual(xi_envelope(self.spring, -0.01), 1.0 / 200.0 + 1e-4)


class TestLimitProfiles(unittest.TestCase):

    def setUp(self):
        self.profiles = LimitProfiles.for_config(presets.deformable_config())

    def test_collision_time(self):
        self.assertAlmostEqual(self.profiles.t0, 0.6)

    def test_hit_and_stick_distance(self):
        """H(t) = max(0, h0 + hdot0 t)"""
        np.testing.assert_allclose(self.profiles.H([0.0, 0.3, 0.6, 1.5]), [0.3, 0.15, 0.0, 0.0], atol=1e-15)

    def test_free_oscillation_after_contact(self):
        """xi = 0 before t0, then (|hdot0| / omega) sin(omega (t - t0)) with omega = sqrt(k/m)"""
        omega = math.sqrt(10000.0 / 8.2)
        t = np.array([0.3, 0.6 + HALF_PERIOD / 2])
        np.testing.assert_allclose(self.profiles.xi_limit(t), [0.0, 0.5 / omega], rtol=1e-12)

    def test_undefined_collision_time(self):
        with self.assertRaises(UndefinedT0Error) as ctx:
            xi_limit_solve(presets.reference_spring(), 0.3, 0.0, [0.0, 1.0])
        self.assertEqual(ctx.exception.code, "UNDEFINED_T0")
        self.assertIsNone(LimitProfiles(presets.reference_spring(), 0.3, 0.5).t0)

    def test_deviation_interval_checked(self):
        traj = synthetic_rebound(presets.rigid_shell_config())
        with self.assertRaises(DomainError):
            limit_deviation(traj, self.profiles, (0.0, 1.0))
        deviation = limit_deviation(traj, self.profiles, (0.0, 0.2), grid_size=201)
        self.assertAlmostEqual(deviation.dev_h, 0.1, places=12)
        self.assertAlmostEqual(deviation.t_dev_h, 0.2)

    def test_summary_intervals(self):
        traj = Trajectory.from_samples(
            presets.rigid_shell_config(), [0.0, 2.0], np.array([[0.3, -0.5, 0, 0, 0], [0.01, 0, 0, 0, 0.1]])
        )
        (h_start, h_stop), (xi_start, xi_stop) = summary_intervals(traj)
        self.assertEqual((h_start, xi_stop), (0.0, 2.0))
        self.assertAlmostEqual(h_stop, 0.6)
        self.assertAlmostEqual(xi_start, 0.65)

    def test_summary_row_windows(self):
        """xi is compared with 0 before t0 and its sup is taken over the whole run"""
        y = np.array([[0.3, -0.5, 0, 0, 0], [0.02, -0.01, 0.002, 0, 0.1], [0.01, 0, -0.003, 0, 0.2]])
        traj = Trajectory.from_samples(presets.rigid_shell_config(), [0.0, 0.6, 2.0], y)
        row = summary_row(0.1, traj, grid_size=2001)
        self.assertAlmostEqual(row.dev_xi_approach, 0.002, places=12)
        self.assertAlmostEqual(row.xi_sup, 0.003, places=12)
        self.assertEqual(xi_sup(traj, grid_size=11), row.xi_sup)


class TestRebound(unittest.TestCase):

    def test_synthetic_rebound(self):
        report = detect_rebound(synthetic_rebound(presets.rigid_shell_config()))
        self.assertTrue(report.rebounded)
        self.assertAlmostEqual(report.t_min, 0.2, places=10)
        self.assertAlmostEqual(report.h_min, 0.1, places=10)
        self.assertAlmostEqual(report.rebound_height, 0.1, places=10)
        self.assertEqual(report.t_of_max, 0.3)

    def test_rigid_body_never_rebounds(self):
        traj = integrate(presets.rigid_body_config(), 1.0)
        report = detect_rebound(traj)
        self.assertFalse(report.rebounded)
        self.assertAlmostEqual(report.t_min, 1.0)

    def test_verdict_from_heights(self):
        """Persistent heights are physical, vanishing ones are not"""
        mus = [0.1, 0.01, 0.001]
        physical = verdict_from_heights(mus, [0.1, 0.1, 0.1], 0.3, 0.1, 0.01)
        self.assertIs(physical.verdict, Verdict.PHYSICAL)
        self.assertTrue(physical.physical)
        vanishing = verdict_from_heights(mus, [0.05, 0.01, 1e-4], 0.3, 0.1, 0.01)
        self.assertIs(vanishing.verdict, Verdict.NOT_PHYSICAL)
        self.assertGreater(vanishing.trend_slope, 0)
        mixed = verdict_from_heights(mus, [0.01, 0.02, 0.01], 0.3, 0.1, 0.01)
        self.assertIs(mixed.verdict, Verdict.INCONCLUSIVE)
        with self.assertRaises(DomainError):
            verdict_from_heights(mus[:2], [0.1, 0.1], 0.3, 0.1, 0.01)

    def test_failed_member_makes_verdict_inconclusive(self):
        cfg = presets.rigid_shell_sweep((0.1, 0.05, 0.01))
        traj = synthetic_rebound(cfg.base)
        entries = (
            SweepEntry(0.1, traj),
            SweepEntry(0.05, traj),
            SweepEntry(0.01, None, StepFailureError("stuck", t=0.5, state=None)),
        )
        verdict = physical_rebound_verdict(SweepResult(config=cfg, entries=entries))
        self.assertIs(verdict.verdict, Verdict.INCONCLUSIVE)
        self.assertIn("failed", verdict.note)


class TestDiagnostics(unittest.TestCase):

    def test_rest_height_matches_closed_form(self):
        """(mu/m) C (h^-2 - h0^-2) / 2 = |hdot0| for alpha = 3"""
        cfg = presets.rigid_body_config(alpha=3.0)
        expected = (2 * 0.5 * 8.2 / 0.1 + 0.3**-2) ** -0.5
        self.assertAlmostEqual(rigid_rest_height(cfg) / expected, 1.0, places=9)
        traj = integrate(cfg, 2.0)
        self.assertAlmostEqual(traj.final_state.h, expected, delta=1e-6)

    def test_rest_height_domain(self):
        self.assertIsNone(rigid_rest_height(presets.rigid_body_config(mu=0.001, alpha=1.0)))
        receding = presets.rigid_body_config().model_copy(update={"initial": State(h=0.3, h_dot=0.5)})
        self.assertIsNone(rigid_rest_height(receding))
        with self.assertRaises(DomainError):
            rigid_rest_height(presets.deformable_config())

    def test_energy_partition_share(self):
        """Prediction is the internal-mass share m / (M + m)"""
        partition = energy_partition(synthetic_rebound(presets.rigid_shell_config()), t_from=0.25)
        self.assertAlmostEqual(partition.predicted, 8.2 / 9.2)
        self.assertEqual(partition.t_from, 0.25)

    def test_oscillation_period_of_free_spring(self):
        cfg = ModelConfig(
            spring=presets.reference_spring(), drag=presets.coupled_drag(0.0), mu=1e-12,
            initial=State(h=0.3, xi=0.01),
        )
        traj = integrate(cfg, 0.2)
        omega = math.sqrt((1 + cfg.spring.a) * cfg.spring.k / cfg.spring.M)
        self.assertAlmostEqual(oscillation_period(traj), 2 * math.pi / omega, delta=1e-7)
        self.assertTrue(math.isnan(oscillation_period(traj, t_from=0.19)))


class TestSweeps(unittest.TestCase):

    def setUp(self):
        self.cfg = presets.sweep_of(presets.rigid_body_config(), (0.2, 0.1, 0.05), t_end=0.5)

    def test_run_sweep(self):
        sweep = run_sweep(self.cfg)
        self.assertEqual(sweep.mu_values, (0.2, 0.1, 0.05))
        self.assertEqual(sweep.failures, ())
        self.assertEqual(sweep.trajectory(0.1).config.mu, 0.1)
        with self.assertRaises(KeyError):
            sweep.trajectory(0.3)
        rows = sweep_summary(sweep)
        self.assertEqual([row.mu for row in rows], [0.2, 0.1, 0.05])
        self.assertTrue(all(row.rebound_height == 0.0 for row in rows))

    def test_async_sweep_matches_serial(self):
        serial = run_sweep(self.cfg)
        threaded = asyncio.run(run_sweep_async(self.cfg))
        for mu in self.cfg.mu_values:
            np.testing.assert_array_equal(serial.trajectory(mu).y, threaded.trajectory(mu).y)

    def test_failed_member_is_recorded(self):
        """A step failure becomes an entry with the partial trajectory and nan summary"""
        base = ModelConfig(
            spring=presets.reference_spring(), drag=presets.coupled_drag(20.0), mu=1e-6,
            initial=State(h=0.3, xi=0.01),
        )
        cfg = presets.sweep_of(base, (1e-6, 1e-7), t_end=1.0)
        settings = IntegratorSettings(max_step=0.1, initial_step=0.1, max_rejections=1)
        sweep = run_sweep(cfg, settings)
        self.assertEqual(len(sweep.failures), 2)
        self.assertIsInstance(sweep.failures[0].error, StepFailureError)
        self.assertIsNotNone(sweep.failures[0].trajectory)
        self.assertTrue(math.isnan(sweep_summary(sweep)[0].dev_h))


@pytest.mark.slow
def test_rigid_shell_sweep_sticks():
    """Rigid-shell rebound heights vanish as mu decreases"""
    sweep = run_sweep(presets.rigid_shell_sweep((0.1, 0.05, 0.01)))
    assert not sweep.failures
    verdict = physical_rebound_verdict(sweep)
    assert verdict.verdict is Verdict.NOT_PHYSICAL
    approach = [row.dev_xi_approach for row in sweep_summary(sweep)]
    assert all(later <= 1.05 * earlier for earlier, later in zip(approach, approach[1:])), approach


@pytest.mark.slow
def test_deformable_sweep_rebounds():
    """The deformable shell rebounds at every viscosity of the quick list"""
    sweep = run_sweep(presets.deformable_sweep((0.1, 0.05, 0.01)))
    assert not sweep.failures
    assert all(detect_rebound(entry.trajectory).rebounded for entry in sweep.entries)


@pytest.mark.slow
@pytest.mark.parametrize("build", [presets.rigid_shell_sweep, presets.deformable_sweep])
def test_xi_stays_inside_envelope(build):
    """sup |xi| <= max(|y+|, 1/200) + 1e-4 for every member of the sweep"""
    sweep = run_sweep(build((0.1, 0.05, 0.01)))
    assert not sweep.failures
    bound = xi_envelope(sweep.config.base.spring, sweep.config.base.initial.h_dot)
    for row in sweep_summary(sweep):
        assert row.xi_sup <= bound, f"mu={row.mu}: sup|xi| = {row.xi_sup}"
