import math
import unittest
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import integrate

from fsi import drag
from fsi.errors import DivergentIntegralError, DomainError, DragOverflowError, NonpositiveDistanceError
from schema import (
    AnalyticBall,
    BodyGeometry,
    CheckStatus,
    ExponentRegime,
    LubricationQuadrature,
    PowerLawCoupled,
    PrototypeD1,
    PrototypeD2,
    RigidPower,
)

REFERENCE = PowerLawCoupled(c1=0.1, c2=20.0, c3=7.4, M=1.0)


class TestDragLaws(unittest.TestCase):

    def test_coupled_power_law_examples(self):
        """D(1, xi) = 7.5 for any xi; D(0.01, 0) = 0.1 * 1000 + 7.4"""
        self.assertAlmostEqual(drag.evaluate(REFERENCE, 1.0, 0.0), 7.5)
        self.assertAlmostEqual(drag.evaluate(REFERENCE, 1.0, 0.004), 7.5)
        self.assertAlmostEqual(drag.evaluate(REFERENCE, 0.01, 0.0), 107.4, places=9)

    def test_elongation_strengthens_drag(self):
        """Below h = 1 the coupled drag does not decrease as xi grows"""
        self.assertGreater(drag.evaluate(REFERENCE, 0.01, 0.01), drag.evaluate(REFERENCE, 0.01, 0.0))
        for h in (1e-4, 0.01, 0.5):
            values = [drag.evaluate(REFERENCE, h, float(xi)) for xi in np.linspace(-0.05, 0.05, 21)]
            self.assertTrue(np.all(np.diff(values) >= 0.0), msg=f"h={h}")

    def test_prototypes(self):
        """D2(0.25, -1) = 0.25^-1 = 4 and D1 follows h^(-c xi - 3/2)"""
        self.assertAlmostEqual(drag.evaluate(PrototypeD2(), 0.25, -1.0), 4.0)
        self.assertAlmostEqual(drag.evaluate(PrototypeD2(), 0.25, 0.5), 0.25**-1.5)
        self.assertAlmostEqual(drag.evaluate(PrototypeD1(c=2.0), 0.5, 0.25), 0.5**-2.0)

    def test_rigid_shell_equals_rigid_power_plus_constant(self):
        """c2 = 0 gives (c1/M) h^(-3/2) + c3/M independent of xi"""
        rigid_shell = PowerLawCoupled(c1=0.1, c2=0.0, c3=7.4, M=1.0)
        for h in (1e-4, 0.1, 2.0):
            expected = drag.evaluate(RigidPower(C=0.1, alpha=1.5), h, 0.0) + 7.4
            self.assertAlmostEqual(drag.evaluate(rigid_shell, h, 0.3) / expected, 1.0, places=12)
        self.assertFalse(drag.depends_on_xi(rigid_shell))
        self.assertTrue(drag.depends_on_xi(REFERENCE))

    def test_nonpositive_distance(self):
        """Every law refuses h <= 0"""
        laws = [REFERENCE, PrototypeD1(c=1.0), PrototypeD2(), RigidPower(C=1.0, alpha=2.0),
                AnalyticBall(R=0.2, dim=3)]
        for law in laws:
            with self.subTest(law=drag.law_name(law)):
                with self.assertRaises(NonpositiveDistanceError):
                    drag.evaluate(law, 0.0, 0.0)

    def test_overflow_is_reported(self):
        """A power beyond the double range raises instead of returning inf"""
        with self.assertRaises(DragOverflowError):
            drag.evaluate(PrototypeD1(c=20.0), 1e-300, 20.0)
        for dim in (2, 3):
            with self.subTest(dim=dim):
                with self.assertRaises(DragOverflowError):
                    drag.evaluate(AnalyticBall(R=0.2, dim=dim), 1e-310, 0.0)

    def test_positive_on_operating_box(self):
        """Drag stays positive and finite for h in (0, 1], |xi| <= 0.05"""
        for h in np.geomspace(1e-8, 1.0, 9):
            for xi in np.linspace(-0.05, 0.05, 5):
                value = drag.evaluate(REFERENCE, float(h), float(xi))
                self.assertTrue(math.isfinite(value) and value > 0)

    def test_unknown_law(self):
        with self.assertRaises(DomainError):
            drag.compile_law(object())


class TestLubrication(unittest.TestCase):

    def test_reduced_integral_against_direct_quadrature(self):
        """Cached reduced integral matches a direct quad of the integrand"""
        geom = BodyGeometry(alpha=1.0, gamma=2.5, dim=2)
        direct, _ = integrate.quad(lambda u: u**2 / (1 + 2.5 * u**2) ** 3, 0, math.inf)
        self.assertAlmostEqual(drag.reduced_integral(geom) / direct, 1.0, places=7)

    def test_closed_form_disk_and_sphere(self):
        """alpha = 1 with R = 1/(2 gamma) reproduces the ball formulas"""
        for dim in (2, 3):
            geom = BodyGeometry(alpha=1.0, gamma=2.5, dim=dim)
            for h in (1e-3, 0.05, 0.1):
                quadrature = drag.lubrication_shape_factor(geom, h)
                exact = drag.analytic_ball(0.2, h, dim)
                self.assertLess(abs(quadrature - exact) / exact, 1e-6)

    def test_reference_values(self):
        """N=2 at h=0.05 is 3 sqrt(2) pi 4^1.5; N=3 at h=0.1 is 6 pi 0.04 / 0.1"""
        disk = BodyGeometry(alpha=1.0, gamma=2.5, dim=2)
        sphere = BodyGeometry(alpha=1.0, gamma=2.5, dim=3)
        self.assertAlmostEqual(drag.lubrication_shape_factor(disk, 0.05), 106.629, places=2)
        self.assertAlmostEqual(drag.lubrication_shape_factor(sphere, 0.1), 7.5398, places=3)

    def test_analytic_ball(self):
        """Sphere of radius 1 at h = 1 gives 6 pi; disk gives 3 sqrt(2) pi"""
        self.assertAlmostEqual(drag.analytic_ball(1.0, 1.0, 3), 6 * math.pi)
        self.assertAlmostEqual(drag.analytic_ball(1.0, 1.0, 2), 13.3286, delta=1e-4)
        with self.assertRaises(DomainError):
            drag.analytic_ball(-1.0, 1.0, 3)
        with self.assertRaises(DomainError):
            drag.analytic_ball(1.0, 1.0, 4)

    def test_disk_scaling(self):
        """A 16-fold larger h divides the N=2, alpha=1 drag by 64"""
        geom = BodyGeometry(alpha=1.0, gamma=1.0, dim=2)
        ratio = drag.lubrication_shape_factor(geom, 0.16) / drag.lubrication_shape_factor(geom, 0.01)
        self.assertAlmostEqual(ratio, 1.0 / 64.0, places=12)

    def test_law_wrapper_matches_shape_factor(self):
        geom = BodyGeometry(alpha=2.0, gamma=1.0, dim=3)
        law = LubricationQuadrature(geom=geom)
        self.assertEqual(drag.evaluate(law, 0.02, 0.5), drag.lubrication_shape_factor(geom, 0.02))

    def test_divergent_integral(self):
        """N=3 with alpha <= 1/3 has no finite drag"""
        for alpha in (1.0 / 3.0, 0.2):
            with self.assertRaises(DivergentIntegralError):
                drag.reduced_integral(BodyGeometry(alpha=alpha, gamma=1.0, dim=3))

    def test_concurrent_first_use(self):
        """Threads computing the same geometry all see one cached value"""
        geom = BodyGeometry(alpha=0.7, gamma=1.3, dim=3)
        with ThreadPoolExecutor(max_workers=8) as pool:
            values = list(pool.map(lambda _: drag.reduced_integral(geom), range(16)))
        self.assertEqual(len(set(values)), 1)


class TestAsymptoticExponent(unittest.TestCase):

    def test_power_regimes(self):
        """N=2, alpha=1: -3/2; N=3, alpha=1: -1"""
        disk = drag.asymptotic_exponent(1.0, 2)
        self.assertIs(disk.regime, ExponentRegime.POWER)
        self.assertAlmostEqual(disk.exponent, -1.5)
        self.assertAlmostEqual(drag.asymptotic_exponent(1.0, 3).exponent, -1.0)

    def test_log_and_bounded(self):
        self.assertIs(drag.asymptotic_exponent(1.0 / 3.0, 3).regime, ExponentRegime.LOG)
        self.assertEqual(drag.asymptotic_exponent(1.0 / 3.0, 3).label(), "log")
        self.assertIs(drag.asymptotic_exponent(0.2, 3).regime, ExponentRegime.BOUNDED)

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            drag.asymptotic_exponent(0.0, 2)
        with self.assertRaises(DomainError):
            drag.asymptotic_exponent(1.0, 4)

    def test_fitted_slope(self):
        """Log-log slope of the quadrature drag matches the exponent"""
        heights = np.geomspace(1e-6, 1e-4, 5)
        for dim, alpha in ((2, 0.5), (3, 2.0)):
            geom = BodyGeometry(alpha=alpha, gamma=1.0, dim=dim)
            values = [drag.lubrication_shape_factor(geom, float(h)) for h in heights]
            slope = np.polyfit(np.log(heights), np.log(values), 1)[0]
            self.assertAlmostEqual(slope, drag.asymptotic_exponent(alpha, dim).exponent, places=6)


class TestAudit(unittest.TestCase):

    def test_prototype_d2_monotone_below_one(self):
        report = drag.assumption_audit(PrototypeD2())
        self.assertIs(report.check("D.4").status, CheckStatus.PASS)

    def test_prototype_d1_not_monotone_above_one(self):
        """At h = 2 the drag h^(-c xi - 3/2) decreases in xi; the witness says where"""
        check = drag.assumption_audit(PrototypeD1(c=20.0), h_grid=[2.0]).check("D.4")
        self.assertIs(check.status, CheckStatus.FAIL)
        self.assertEqual(check.witness["h"], 2.0)
        self.assertLess(check.witness["xi1"], check.witness["xi2"])
        self.assertGreater(check.witness["D1"], check.witness["D2"])

    def test_rigid_power_lower_bound(self):
        """D.2 holds at equality for C h^-alpha with c = C"""
        report = drag.assumption_audit(RigidPower(C=1.0, alpha=1.5))
        self.assertIs(report.check("D.2").status, CheckStatus.PASS)
        self.assertIs(report.check("D.3").status, CheckStatus.PASS)

    def test_overflow_fails_d1(self):
        """A grid where the drag overflows fails D.1 and skips the rest"""
        report = drag.assumption_audit(PrototypeD1(c=20.0), h_grid=[1e-300], xi_grid=[20.0])
        self.assertIs(report.check("D.1").status, CheckStatus.FAIL)
        self.assertIs(report.check("D.4").status, CheckStatus.SKIPPED)
        self.assertFalse(report.passed)

    def test_invalid_grid(self):
        with self.assertRaises(NonpositiveDistanceError):
            drag.assumption_audit(PrototypeD2(), h_grid=[0.0, 0.5])
        with self.assertRaises(DomainError):
            drag.assumption_audit(PrototypeD2(), h_grid=[])

    def test_flatness_margin(self):
        """1/(2 c2) - sup|xi| for the coupled law, inf without coupling"""
        self.assertAlmostEqual(drag.flatness_margin(REFERENCE, 0.01), 0.015)
        self.assertEqual(drag.flatness_margin(RigidPower(C=1.0, alpha=1.5), 0.01), math.inf)


class TestDragTable(unittest.TestCase):

    def test_rows(self):
        """Log-spaced rows with the closed form alongside for alpha = 1"""
        geom = BodyGeometry(alpha=1.0, gamma=2.5, dim=3)
        rows = drag.drag_table(geom, 1e-3, 1e-1, 3)
        self.assertEqual([row["h"] for row in rows], list(np.geomspace(1e-3, 1e-1, 3)))
        for row in rows:
            self.assertLess(abs(row["D_lub"] - row["D_analytic"]) / row["D_analytic"], 1e-6)
            self.assertEqual(row["exponent"], "-1.0")

    def test_no_closed_form(self):
        rows = drag.drag_table(BodyGeometry(alpha=2.0, gamma=1.0, dim=2), 0.01, 0.01, 1)
        self.assertEqual(len(rows), 1)
        self.assertTrue(math.isnan(rows[0]["D_analytic"]))

    def test_bad_range(self):
        geom = BodyGeometry(alpha=1.0, gamma=1.0, dim=2)
        with self.assertRaises(DomainError):
            drag.drag_table(geom, 0.1, 0.01, 3)
        with self.assertRaises(DomainError):
            drag.drag_table(geom, 0.01, 0.1, 0)


if __name__ == "__main__":
    unittest.main()
