"""Tests for volasym module functionality."""

import math
import unittest
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate


def _spec(terms, chi, lead=0):
    from satake.rootlat import Weight
    from satake.volasym import ExpMapSpec

    return ExpMapSpec(
        tuple((Weight(tuple(w)), tuple(v)) for w, v in terms), lead, Weight(tuple(chi))
    )


def _rank_one():
    """phi(t) = e^t, chi(t) = 2t."""
    return _spec([((1,), (1.0,))], (2,))


def _rank_two():
    """Lead t_1 + t_2 with a second term e^(t_1); chi = 2 t_1 + t_2."""
    return _spec([((1, 1), (1.0, 0.0)), ((1, 0), (0.0, 1.0))], (2, 1))


def _rank_two_flat():
    """Single term e^(t_1 + t_2) with chi equal to the lead weight."""
    return _spec([((1, 1), (1.0,))], (1, 1))


def _indicator(inner, outer):
    from satake.volasym import TestFunction

    def func(w):
        rho = np.linalg.norm(w, axis=-1)
        return ((rho >= inner) & (rho < outer)).astype(float)

    return TestFunction(func, outer, inner)


def _precise(rel_tol=1e-10):
    from satake.quadrature import AdaptiveCubature

    return AdaptiveCubature(rel_tol=rel_tol, budget=50_000_000)


@pytest.mark.unit
class TestExpMapSpec(unittest.TestCase):
    """Test cases for ExpMapSpec validation."""

    def test_properties(self):
        """Test rank, dimension, gaps and the norm bounds."""
        spec = _rank_two()
        self.assertEqual(spec.rank, 2)
        self.assertEqual(spec.dim, 2)
        self.assertEqual([g.coords for g in spec.gaps], [(0, 0), (0, 1)])
        self.assertAlmostEqual(spec.sigma_min, 1.0)
        self.assertAlmostEqual(spec.spread, 2.0)

    def test_lead_needs_positive_coordinates(self):
        """Test a lead weight with a zero coordinate is refused."""
        from satake.errors import ValidationError

        with self.assertRaises(ValidationError):
            _spec([((1, 0), (1.0,))], (1, 1))

    def test_terms_must_sit_below_lead(self):
        """Test lam_lead - lam_i must be nonnegative."""
        from satake.errors import ValidationError

        with self.assertRaises(ValidationError):
            _spec([((1, 1), (1.0, 0.0)), ((2, 0), (0.0, 1.0))], (1, 1))

    def test_vectors_must_be_independent(self):
        """Test parallel w_i are refused."""
        from satake.errors import ValidationError

        with self.assertRaises(ValidationError):
            _spec([((1, 1), (1.0, 0.0)), ((1, 0), (2.0, 0.0))], (1, 1))

    def test_vector_dimensions_must_agree(self):
        """Test mixed vector dimensions are refused."""
        from satake.errors import ValidationError

        with self.assertRaises(ValidationError):
            _spec([((1, 1), (1.0, 0.0)), ((1, 0), (1.0,))], (1, 1))

    def test_lead_index_range(self):
        """Test the lead index must point at a term."""
        from satake.errors import ValidationError

        with self.assertRaises(ValidationError):
            _spec([((1,), (1.0,))], (1,), lead=1)

    def test_json_round_trip(self):
        """Test the JSON form rebuilds the same map."""
        from satake.volasym import ExpMapSpec

        spec = _rank_two()
        self.assertEqual(ExpMapSpec.from_json_dict(spec.to_json_dict()), spec)

    def test_malformed_json(self):
        """Test missing keys become validation errors."""
        from satake.errors import ValidationError
        from satake.volasym import ExpMapSpec

        with self.assertRaises(ValidationError):
            ExpMapSpec.from_json_dict({"terms": []})


@pytest.mark.unit
class TestTestFunctions(unittest.TestCase):
    """Test cases for the radial test functions."""

    def test_radial_bump_shape(self):
        """Test the bump peaks at 1 mid-shell and vanishes outside."""
        from satake.volasym import radial_bump

        f = radial_bump(0.5, 2.0)
        values = f(np.array([[1.25, 0.0], [0.0, 0.4], [2.0, 0.0], [0.0, 3.0]]))
        self.assertAlmostEqual(values[0], 1.0)
        self.assertEqual(list(values[1:]), [0.0, 0.0, 0.0])
        self.assertEqual((f.inner_radius, f.support_radius), (0.5, 2.0))

    def test_log_radial_bump(self):
        """Test the log-scale bump peaks at its center."""
        from satake.volasym import log_radial_bump

        f = log_radial_bump(1.0, 0.5)
        self.assertAlmostEqual(float(f(np.array([[1.0]]))[0]), 1.0)
        self.assertAlmostEqual(f.support_radius, math.exp(0.5))
        self.assertEqual(float(f(np.array([[0.0]]))[0]), 0.0)

    def test_scaling_and_sums(self):
        """Test scaled and added test functions."""
        from satake.volasym import radial_bump

        f = radial_bump(0.5, 2.0)
        g = radial_bump(1.0, 4.0)
        point = np.array([[1.5]])
        self.assertAlmostEqual(float(f.scaled(3.0)(point)[0]), 3 * float(f(point)[0]))
        total = f + g
        self.assertAlmostEqual(
            float(total(point)[0]), float(f(point)[0]) + float(g(point)[0])
        )
        self.assertEqual((total.inner_radius, total.support_radius), (0.5, 4.0))

    def test_invalid_support(self):
        """Test empty shells are refused."""
        from satake.errors import ValidationError
        from satake.volasym import log_radial_bump, radial_bump

        with self.assertRaises(ValidationError):
            radial_bump(2.0, 1.0)
        with self.assertRaises(ValidationError):
            log_radial_bump(0.0, 1.0)


@pytest.mark.unit
class TestChiExponents(unittest.TestCase):
    """Test cases for chi_exponents and kappa."""

    def test_rank_two_example(self):
        """Test m = (1,1), chi = (2,1) gives a = 2, I = {alpha_2}, b = 1."""
        from satake.strata import StratumIndex
        from satake.volasym import chi_exponents

        triple = chi_exponents(_rank_two())
        self.assertEqual((triple.a, triple.b), (2, 1))
        self.assertEqual(triple.I, StratumIndex.of([1]))

    def test_chi_equal_to_lead(self):
        """Test chi = lam_lead gives a = 1 and b = rank."""
        from satake.strata import StratumIndex
        from satake.volasym import chi_exponents

        triple = chi_exponents(_rank_two_flat())
        self.assertEqual((triple.a, triple.b), (1, 2))
        self.assertEqual(triple.I, StratumIndex.of([]))

    def test_matches_strata_exponents(self):
        """Test chi = 2rho with the 3x3 determinant weight reproduces a = 6."""
        from satake.rootlat import build_root_system, two_rho, weight_from_fundamental
        from satake.strata import exponents_global
        from satake.volasym import ExpMapSpec, chi_exponents

        rs = build_root_system("A", 2, (1, 1))
        lam = weight_from_fundamental(rs, [2, 0])
        spec = ExpMapSpec(((lam, (1.0,)),), 0, two_rho(rs))
        self.assertEqual(chi_exponents(spec), exponents_global(rs, lam))

    def test_kappa_single_point(self):
        """Test one-point slices have kappa = 1/m."""
        from satake.volasym import kappa_chi, kappa_chi_exact

        self.assertEqual(kappa_chi_exact(_rank_one()), 1)
        self.assertEqual(kappa_chi_exact(_rank_two()), 1)
        self.assertEqual(kappa_chi(_rank_two()), 1.0)

    def test_kappa_segment(self):
        """Test the slice t_1 + t_2 = 1 of the quadrant."""
        from satake.volasym import kappa_chi_exact

        self.assertEqual(kappa_chi_exact(_rank_two_flat()), 1)

    def test_kappa_matches_slab_volume(self):
        """Test kappa against d/du of the simplex volume u^2 / (2 m_1 m_2)."""
        from satake.volasym import kappa_chi_exact

        spec = _spec([((2, 1), (1.0,))], (2, 1))
        self.assertEqual(kappa_chi_exact(spec), Fraction(1, 2))

    def test_kappa_monte_carlo_oracle(self):
        """Test kappa against a sampled slab Vol{1 <= lam <= 1 + eps} / eps."""
        from satake.volasym import kappa_chi

        spec = _spec([((3, 2), (1.0,))], (3, 2))
        rng = np.random.default_rng(7)
        eps = 0.02
        box = np.array([0.4, 0.6])
        pts = rng.uniform(0.0, 1.0, size=(1_000_000, 2)) * box
        lam = pts @ np.array([3.0, 2.0])
        hits = np.mean((lam >= 1) & (lam <= 1 + eps))
        estimate = hits * np.prod(box) / eps
        self.assertAlmostEqual(kappa_chi(spec), estimate, delta=0.01)


@pytest.mark.unit
class TestLimitFunctional(unittest.TestCase):
    """Test cases for l_chi."""

    def test_zero_function(self):
        """Test L(0) = 0."""
        from satake.volasym import TestFunction, l_chi

        zero = TestFunction(lambda w: np.zeros(len(w)), 2.0, 0.5)
        self.assertEqual(l_chi(_rank_two(), zero, _precise()), 0.0)

    def test_rank_one_against_quad(self):
        """Test L(f) = int f(r) r dr for phi = e^t, chi = 2t."""
        from satake.volasym import l_chi, radial_bump

        f = radial_bump(0.5, 2.0)
        expected, _ = integrate.quad(
            lambda r: float(f(np.array([[r]]))[0]) * r, 0.5, 2.0, epsabs=1e-13
        )
        self.assertAlmostEqual(l_chi(_rank_one(), f, _precise()) / expected, 1.0, 6)

    def test_rank_two_against_quad(self):
        """Test the face integral with one decaying direction."""
        from satake.volasym import l_chi, radial_bump

        f = radial_bump(0.5, 2.0)

        def inner(v):
            return integrate.quad(
                lambda x: float(f(np.array([[math.exp(v), math.exp(v) * x]]))[0]),
                0.0,
                1.0,
                epsabs=1e-12,
            )[0] * math.exp(2 * v)

        expected, _ = integrate.quad(inner, math.log(0.5 / 2.0), math.log(2.0))
        value = l_chi(_rank_two(), f, _precise(1e-9))
        self.assertAlmostEqual(value / expected, 1.0, 5)

    def test_linearity(self):
        """Test L(c f) = c L(f)."""
        from satake.volasym import l_chi, radial_bump

        f = radial_bump(0.5, 2.0)
        base = l_chi(_rank_one(), f, _precise())
        scaled = l_chi(_rank_one(), f.scaled(2.5), _precise())
        self.assertAlmostEqual(scaled, 2.5 * base)

    def test_nonpositive_growth_rejected(self):
        """Test characters with a <= 0 are refused."""
        from satake.errors import ValidationError
        from satake.volasym import l_chi, radial_bump

        spec = _spec([((1,), (1.0,))], (-1,))
        with self.assertRaises(ValidationError):
            l_chi(spec, radial_bump(0.5, 2.0))


@pytest.mark.unit
@pytest.mark.usefixtures("isolated_config")
class TestFiniteIntegrals(unittest.TestCase):
    """Test cases for finite_t_integral, normalized_ratio and chamber_integral."""

    def test_zero_function(self):
        """Test the integral of f = 0 vanishes."""
        from satake.volasym import TestFunction, finite_t_integral

        zero = TestFunction(lambda w: np.zeros(len(w)), 2.0, 0.5)
        self.assertEqual(finite_t_integral(_rank_one(), zero, 100.0), 0.0)

    def test_rank_one_closed_form(self):
        """Test int_{T <= e^t < 2T} e^(2t) dt = 3 T^2 / 2."""
        from satake.volasym import finite_t_integral

        value = finite_t_integral(_rank_one(), _indicator(1.0, 2.0), 10.0, _precise())
        self.assertAlmostEqual(value / 150.0, 1.0, places=8)

    def test_rank_one_ratio_is_exact(self):
        """Test the rank-one ratio equals kappa L once the window is inside t >= 0."""
        from satake.volasym import kappa_chi, l_chi, normalized_ratio, radial_bump

        spec = _rank_one()
        f = radial_bump(0.5, 2.0)
        target = kappa_chi(spec) * l_chi(spec, f, _precise())
        ratio = normalized_ratio(spec, f, 100.0, _precise())
        self.assertAlmostEqual(ratio / target, 1.0, places=6)

    def test_rank_two_ratio_converges(self):
        """Test the b = 1 ratio reaches kappa L up to O(1/T)."""
        from satake.volasym import kappa_chi, l_chi, normalized_ratio, radial_bump

        spec = _rank_two()
        f = radial_bump(0.5, 2.0)
        cub = _precise(1e-8)
        target = kappa_chi(spec) * l_chi(spec, f, cub)
        ratio = normalized_ratio(spec, f, 1e5, cub)
        self.assertLess(abs(ratio - target) / target, 1e-3)

    def test_chamber_integral_rank_one(self):
        """Test int_0^(log T) e^(2t) dt = (T^2 - 1)/2."""
        from satake.volasym import chamber_integral

        self.assertAlmostEqual(
            chamber_integral(_rank_one(), 10.0, _precise()) / 49.5, 1.0, places=8
        )

    def test_chamber_integral_rank_two(self):
        """Test int over t_1 + t_2 <= L of e^(t_1 + t_2) = (L - 1) e^L + 1."""
        from satake.volasym import chamber_integral

        value = chamber_integral(_rank_two_flat(), math.exp(2.0), _precise())
        self.assertAlmostEqual(value / (math.exp(2.0) + 1), 1.0, places=7)

    def test_T_validation(self):
        """Test T < 1 and the log-normalization at T = 1 are refused."""
        from satake.errors import ValidationError
        from satake.volasym import finite_t_integral, normalized_ratio, radial_bump

        f = radial_bump(0.5, 2.0)
        with self.assertRaises(ValidationError):
            finite_t_integral(_rank_one(), f, 0.5)
        with self.assertRaises(ValidationError):
            normalized_ratio(_rank_one(), f, 1.0)

    def test_nonpositive_growth_rejected(self):
        """Test the finite integral needs a > 0."""
        from satake.errors import ValidationError
        from satake.volasym import finite_t_integral, radial_bump

        spec = _spec([((1,), (1.0,))], (0,))
        with self.assertRaises(ValidationError):
            finite_t_integral(spec, radial_bump(0.5, 2.0), 10.0)

    @pytest.mark.slow
    def test_log_power_ladder(self):
        """Test the b = 2 ratio approaches kappa L along 10^2 .. 10^5."""
        from satake.volasym import kappa_chi, l_chi, normalized_ratio, radial_bump

        spec = _rank_two_flat()
        f = radial_bump(0.5, 2.0)
        cub = _precise()
        target = kappa_chi(spec) * l_chi(spec, f, cub)
        gaps = [
            abs(normalized_ratio(spec, f, T, cub) - target) / target
            for T in (1e2, 1e3, 1e4, 1e5)
        ]
        self.assertTrue(all(b < a for a, b in zip(gaps, gaps[1:])))
        self.assertLess(gaps[-1], 0.05)


@pytest.mark.unit
class TestDensities(unittest.TestCase):
    """Test cases for chamber densities."""

    def setUp(self):
        """Set up test fixtures."""
        from satake.rootlat import build_root_system

        self.rank_one = build_root_system("A", 1, (2, 0))
        self.a2 = build_root_system("A", 2, (1, 0))

    def test_xi_at_origin(self):
        """Test sinh(0) kills xi and cosh(0) = 1 does not."""
        from satake.rootlat import build_root_system
        from satake.volasym import ChamberDensity, density_eval

        self.assertEqual(density_eval(ChamberDensity(self.rank_one), [0.0]), 0.0)
        cosh_only = build_root_system("A", 1, (0, 1))
        self.assertAlmostEqual(density_eval(ChamberDensity(cosh_only), [0.0]), 1.0)

    def test_xi_rank_one(self):
        """Test xi = sinh(1)^2 for l+ = 2 at alpha(a) = 1."""
        from satake.volasym import ChamberDensity, density_eval

        value = density_eval(ChamberDensity(self.rank_one), [1.0])
        self.assertAlmostEqual(value, math.sinh(1.0) ** 2)
        self.assertAlmostEqual(value, 1.3811, places=4)

    def test_delta_empty_is_one(self):
        """Test delta of the empty stratum is the empty product."""
        from satake.volasym import ChamberDensity, density_eval

        d = ChamberDensity(self.a2, "delta_I")
        self.assertEqual(density_eval(d, [0.3, 2.0]), 1.0)

    def test_xi_I(self):
        """Test xi_I keeps sinh on <I> and exponentials elsewhere."""
        from satake.strata import StratumIndex
        from satake.volasym import ChamberDensity, density_eval

        d = ChamberDensity(self.a2, "xi_I", StratumIndex.of([0]))
        expected = math.sinh(1.0) * math.exp(2.0 + 3.0)
        self.assertAlmostEqual(density_eval(d, [1.0, 2.0]) / expected, 1.0)

    def test_vectorized(self):
        """Test stacks of points return arrays."""
        from satake.volasym import ChamberDensity, density_eval

        values = density_eval(ChamberDensity(self.rank_one), np.array([[1.0], [2.0]]))
        self.assertEqual(values.shape, (2,))
        self.assertAlmostEqual(values[1], math.sinh(2.0) ** 2)

    def test_leading_density(self):
        """Test xi approaches 2^(-sum l) e^(2rho) deep in the chamber."""
        from satake.volasym import ChamberDensity, density_eval, leading_density

        xi = density_eval(ChamberDensity(self.rank_one), [10.0])
        self.assertAlmostEqual(xi / leading_density(self.rank_one, [10.0]), 1.0, 7)

    def test_log_space_survives_large_arguments(self):
        """Test log sinh and log cosh do not overflow."""
        from satake.volasym import log_cosh, log_sinh

        self.assertAlmostEqual(float(log_sinh(np.array(1000.0))), 1000 - math.log(2))
        self.assertAlmostEqual(float(log_cosh(np.array(0.0))), 0.0)

    def test_outside_chamber(self):
        """Test negative chamber coordinates are refused."""
        from satake.errors import ValidationError
        from satake.volasym import ChamberDensity, density_eval

        with self.assertRaises(ValidationError):
            density_eval(ChamberDensity(self.rank_one), [-1.0])

    def test_unknown_kind(self):
        """Test density kinds are validated."""
        from satake.errors import ValidationError
        from satake.volasym import ChamberDensity

        with self.assertRaises(ValidationError):
            ChamberDensity(self.a2, "haar")


@pytest.mark.unit
class TestBallVolume(unittest.TestCase):
    """Test cases for ball_volume."""

    def test_quadric_22_closed_form(self):
        """Test V(T) = pi^2 (T^2 - 1) / 2 for x1^2 + x2^2 - x3^2 - x4^2 = 1."""
        from satake.families import PointFamily
        from satake.volasym import ball_volume

        fam = PointFamily("quadric", (2, 2, 1))
        self.assertAlmostEqual(
            ball_volume(fam, 10.0) / (math.pi**2 * 99 / 2), 1.0, places=7
        )

    def test_quadric_growth(self):
        """Test V(T)/T^2 converges and doubling T multiplies V by 2^a."""
        from satake.families import PointFamily
        from satake.volasym import ball_volume

        fam = PointFamily("quadric", (2, 2, 1))
        ratios = [ball_volume(fam, T) / T**2 for T in (100.0, 1000.0)]
        self.assertAlmostEqual(ratios[1], math.pi**2 / 2, places=4)
        doubled = ball_volume(fam, 2000.0) / ball_volume(fam, 1000.0)
        self.assertAlmostEqual(doubled, 4.0, places=4)

    def test_two_sheeted_hyperboloid(self):
        """Test k < 0 against 2 pi (sqrt((T^2 + 1)/2) - 1)."""
        from satake.families import PointFamily
        from satake.volasym import ball_volume

        fam = PointFamily("quadric", (2, 1, -1))
        expected = 2 * math.pi * (math.sqrt(13.0) - 1)
        self.assertAlmostEqual(ball_volume(fam, 5.0) / expected, 1.0, places=7)

    def test_empty_ball(self):
        """Test balls that miss the variety have volume 0."""
        from satake.families import PointFamily
        from satake.volasym import ball_volume

        self.assertEqual(ball_volume(PointFamily("quadric", (2, 2, 4)), 1.5), 0.0)

    def test_det_surface_2x2(self):
        """Test SL_2 reduces to the (2,2) quadric: V(T) = pi^2 (T^2 - 2)."""
        from satake.families import PointFamily
        from satake.volasym import ball_volume

        fam = PointFamily("detsurface", (2, 1))
        self.assertAlmostEqual(
            ball_volume(fam, 10.0) / (98 * math.pi**2), 1.0, places=7
        )

    def test_unsupported(self):
        """Test families without a K-reduction are refused."""
        from satake.errors import UnsupportedOperation
        from satake.families import PointFamily
        from satake.volasym import ball_volume

        for fam in (
            PointFamily("quadric", (2, 2, 1), "sup"),
            PointFamily("detsurface", (3, 1)),
            PointFamily("symmat", (2, 1)),
        ):
            with self.subTest(family=fam.name, norm=fam.norm):
                with self.assertRaises(UnsupportedOperation):
                    ball_volume(fam, 10.0)

    def test_sphere_area(self):
        """Test |S^1| = 2 pi and |S^2| = 4 pi."""
        from satake.volasym import sphere_area

        self.assertAlmostEqual(sphere_area(2), 2 * math.pi)
        self.assertAlmostEqual(sphere_area(3), 4 * math.pi)


if __name__ == "__main__":
    unittest.main()
