"""States: constructors, mass, pairing, sampling, integration strategies."""

import json
import math

import numpy as np
import pytest

from logcon.concepts import affine_concept, gauss_fuzz, scalar_concept
from logcon.geometry import (
    Ball,
    Box,
    Hull,
    Point,
    Product,
    Space,
    Whole,
    unit_box,
    whole_space,
)
from logcon.measures import (
    Density1dState,
    DiracState,
    GaussianState,
    Integrator,
    MeasureError,
    SampleCloudState,
    SamplingError,
    ScaledState,
    UniformState,
    cloud_to_csv,
    density1d,
    dirac,
    gaussian,
    mass,
    mass_with_error,
    pair,
    pair_with_error,
    sample,
    sample_cloud,
    scaled,
    state_from_json,
    tensor_states,
    translate_state,
    uniform,
)


def gauss_ball_mass_oracle(nodes=100_000):
    """Independent oracle: trapezoid rule for the standard normal mass of
    [-1, 1] at 1e5 nodes."""
    xs = np.linspace(-1.0, 1.0, nodes)
    pdf = np.exp(-0.5 * xs**2) / math.sqrt(2 * math.pi)
    return float(np.trapezoid(pdf, xs))


class TestConstructors:
    def test_uniform_box_total_mass(self):
        assert uniform(unit_box(1)).total_mass() == 1.0

    def test_gaussian_density_at_mean(self):
        # kappa = sqrt((2 pi)^n det Sigma) so the peak is (2 pi)^(-n/2) at Sigma=I.
        for n in (1, 2, 3):
            g = gaussian(np.zeros(n), np.eye(n))
            assert g.density(np.zeros(n)) == pytest.approx(
                (2 * math.pi) ** (-n / 2), rel=1e-12
            )

    def test_dirac_measures_membership(self):
        d = dirac([0.25, 0.25])
        assert mass(d, Ball([0.0, 0.0], 1.0)) == 1.0
        assert mass(d, Ball([5.0, 5.0], 1.0)) == 0.0

    def test_non_psd_sigma_rejected(self):
        with pytest.raises(MeasureError):
            gaussian([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_unbounded_uniform_rejected(self):
        with pytest.raises(MeasureError):
            uniform(Whole(2))

    def test_degenerate_uniform_rejected(self):
        with pytest.raises(MeasureError):
            uniform(Hull([(0.0, 0.0), (1.0, 1.0)]))  # a segment has no area

    def test_unknown_density_kind_rejected(self):
        with pytest.raises(MeasureError):
            density1d("cauchy", 0.0, 1.0)  # not log-concave, not provided


class TestMass:
    def test_uniform_half_box(self):
        assert mass(uniform(unit_box(1)), Box([0.0], [0.5])) == pytest.approx(0.5)

    def test_uniform_box_overlap_2d(self):
        st = uniform(Box([0.0, 0.0], [2.0, 1.0]))
        got = mass_with_error(st, Box([1.0, 0.5], [3.0, 2.0]))
        assert got.strategy == "closed-form"
        assert got.value == pytest.approx(0.25)

    def test_gaussian_ball_matches_quadrature_oracle(self):
        """mass(N(0,1), Ball(0,1)) frozen to erf(1/sqrt(2)) ~ 0.6827."""
        oracle = gauss_ball_mass_oracle()
        assert oracle == pytest.approx(0.6826894921370859, abs=1e-9)
        got = mass_with_error(gaussian([0.0], 1.0), Ball([0.0], 1.0))
        assert got.stderr == 0.0
        assert got.value == pytest.approx(oracle, abs=1e-9)
        assert got.value == pytest.approx(0.6827, abs=1e-4)

    def test_gaussian_ball_ncx2_matches_mc(self):
        g = gaussian([0.5, -0.25], 0.49 * np.eye(2))
        B = Ball([0.0, 0.0], 1.0)
        closed = mass_with_error(g, B)
        assert closed.strategy == "closed-form"
        pts = g.sample(200_000, seed=7)
        est = float(B.contains(pts).mean())
        assert closed.value == pytest.approx(est, abs=4 * math.sqrt(0.25 / 200_000))

    def test_gaussian_box_erf_product(self):
        g = gaussian([0.0, 1.0], [1.0, 4.0])
        B = Box([-1.0, -1.0], [1.0, 3.0])
        got = mass_with_error(g, B)
        assert got.strategy == "closed-form"
        from scipy.special import ndtr

        want = (ndtr(1.0) - ndtr(-1.0)) ** 2  # second axis also spans +-1 sd
        assert got.value == pytest.approx(want, rel=1e-12)

    def test_scaled_dirac(self):
        st = scaled(0.3, dirac([0.5]))
        assert mass(st, Box([0.0], [1.0])) == pytest.approx(0.3)

    def test_correlated_gaussian_box_quadrature(self):
        g = gaussian([0.0, 0.0], [[1.0, 0.6], [0.6, 1.0]])
        B = Box([-1.0, -1.0], [1.0, 1.0])
        got = mass_with_error(g, B)
        assert got.strategy == "quadrature"
        pts = g.sample(400_000, seed=3)
        est = float(B.contains(pts).mean())
        assert got.value == pytest.approx(est, abs=5 * math.sqrt(0.25 / 400_000))
        assert got.stderr < 1e-8

    def test_monte_carlo_fallback_reports_stderr(self):
        st = uniform(Ball([0.0, 0.0], 1.0))
        got = mass_with_error(st, Box([0.0, 0.0], [1.0, 1.0]))
        assert got.strategy == "monte-carlo"
        assert got.stderr > 0.0
        assert got.value == pytest.approx(0.25, abs=5 * got.stderr)

    def test_density1d_interval(self):
        st = density1d("laplace", 1.0, 2.0)
        got = mass_with_error(st, Box([-1.0], [3.0]))
        assert got.strategy == "closed-form"
        # laplace cdf: mass of loc +- 2 scale wait -- [-1, 3] is loc +- 1 scale
        want = 1.0 - math.exp(-1.0)
        assert got.value == pytest.approx(want, rel=1e-12)

    def test_segment_has_no_gaussian_mass_in_2d(self):
        g = gaussian([0.0, 0.0], np.eye(2))
        seg = Hull([(0.0, 0.0), (1.0, 1.0)])
        got = mass_with_error(g, seg)
        assert got.strategy == "closed-form"
        assert got.value == 0.0


class TestNormalization:
    def test_constructors_normalize(self):
        big = Box([-60.0], [60.0])
        states = [
            dirac([0.2]),
            uniform(Box([0.0], [1.0])),
            gaussian([0.0], 1.0),
            density1d("laplace", 0.0, 1.0),
            density1d("logistic", 0.5, 1.2),
        ]
        for st in states:
            assert mass(st, big) == pytest.approx(1.0, abs=1e-3)


class TestPair:
    def test_dirac_closed_form(self):
        C = gauss_fuzz(Point([0.0, 0.0]), 0.5)
        x = [0.3, -0.2]
        got = pair_with_error(dirac(x), C)
        assert got.strategy == "closed-form"
        assert got.value == C.evaluate(x)

    def test_uniform_linear_integrand(self):
        X = Space(1, Box([0.0], [1.0]))
        C = affine_concept([1.0], 0.0, X)
        got = pair_with_error(uniform(Box([0.0], [1.0])), C)
        assert got.strategy == "quadrature"
        assert got.value == pytest.approx(0.5, abs=1e-12)

    def test_gaussian_gaussfuzz_product_integral(self):
        """pair(N(0,1), exp(-x^2/2)) = 1/sqrt(2), frozen against an MC oracle."""
        C = gauss_fuzz(Point([0.0]), 1.0)
        got = pair_with_error(gaussian([0.0], 1.0), C)
        assert got.value == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)
        rng = np.random.default_rng(123)
        xs = rng.normal(size=1_000_000)
        oracle = float(np.exp(-0.5 * xs**2).mean())
        assert got.value == pytest.approx(oracle, abs=4e-3)
        assert got.value == pytest.approx(0.7071, abs=1e-3)

    def test_pair_monotone(self):
        X = whole_space(1)
        C = gauss_fuzz(Point([0.0]), 0.5, X)
        D = gauss_fuzz(Point([0.0]), 1.5, X)  # pointwise >= C
        for st in [gaussian([0.3], 0.8), density1d("logistic", 0.0, 1.0)]:
            assert pair(st, C) <= pair(st, D) + 1e-9

    def test_pair_unit_scalar_is_mass(self):
        X = whole_space(2)
        one = scalar_concept(1.0, X)
        st = scaled(0.7, gaussian([0.0, 0.0], np.eye(2)))
        assert pair(st, one) == pytest.approx(st.total_mass(), abs=1e-6)

    def test_cloud_pairing_weights(self):
        cloud = sample_cloud([[0.0], [1.0]], [0.25, 0.5])
        X = Space(1, Box([0.0], [1.0]))
        C = affine_concept([1.0], 0.0, X)
        assert pair(cloud, C) == pytest.approx(0.5 * 1.0 + 0.25 * 0.0)


class TestSampling:
    def test_dirac_repeats(self):
        got = sample(dirac([1.0, 2.0]), 3, seed=5)
        np.testing.assert_array_equal(got, np.tile([1.0, 2.0], (3, 1)))

    def test_reproducible_given_seed(self):
        st = gaussian([0.0, 0.0], [[1.0, 0.3], [0.3, 0.5]])
        a = st.sample(100, seed=42)
        b = st.sample(100, seed=42)
        c = st.sample(100, seed=43)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_gaussian_mean_law_of_large_numbers(self):
        mu = np.array([1.0, -2.0])
        st = gaussian(mu, 2.0 * np.eye(2))
        pts = st.sample(100_000, seed=11)
        sd = math.sqrt(2.0)
        assert np.all(np.abs(pts.mean(axis=0) - mu) <= 4 * sd / math.sqrt(100_000))

    def test_uniform_box_empirical_mass_binomial_oracle(self):
        n = 100_000
        st = uniform(unit_box(1))
        pts = st.sample(n, seed=3)
        p_hat = float((pts[:, 0] <= 0.5).mean())
        assert abs(p_hat - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_hull_rejection_sampling(self):
        H = Hull([(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0), (1.0, 2.0)])
        st = uniform(H)
        pts = st.sample(500, seed=9)
        assert np.all(H.contains(pts, tol=1e-7))

    def test_density1d_inverse_cdf(self):
        st = density1d("logistic", 2.0, 0.5)
        pts = st.sample(50_000, seed=21)
        # logistic median = loc
        assert float(np.median(pts)) == pytest.approx(2.0, abs=0.02)

    def test_zero_state_cannot_sample(self):
        with pytest.raises(SamplingError):
            scaled(0.0, dirac([0.0])).sample(5, seed=0)


class TestStateArithmetic:
    def test_translate_gaussian(self):
        st = translate_state(gaussian([0.0, 0.0], np.eye(2)), [1.0, -1.0])
        np.testing.assert_array_equal(st.mu, [1.0, -1.0])

    def test_translate_uniform_support(self):
        st = translate_state(uniform(Box([0.0], [1.0])), [2.0])
        assert mass(st, Box([2.0], [3.0])) == pytest.approx(1.0)

    def test_tensor_dirac_gaussian_is_degenerate_gaussian(self):
        t = tensor_states(dirac([1.0]), gaussian([0.0], 2.0))
        assert isinstance(t, GaussianState)
        np.testing.assert_array_equal(t.mu, [1.0, 0.0])
        np.testing.assert_array_equal(t.variances(), [0.0, 2.0])

    def test_tensor_uniforms_is_uniform_product(self):
        t = tensor_states(uniform(Box([0.0], [1.0])), uniform(Ball([0.0, 0.0], 1.0)))
        assert isinstance(t, UniformState)
        assert t.dim == 3

    def test_tensor_mass_multiplies(self):
        a = scaled(0.5, dirac([0.0]))
        b = scaled(0.4, gaussian([1.0], 1.0))
        t = tensor_states(a, b)
        assert t.total_mass() == pytest.approx(0.2)

    def test_tensor_fallback_cloud(self):
        t = tensor_states(density1d("laplace", 0.0, 1.0), uniform(Box([0.0], [1.0])), seed=3)
        assert isinstance(t, SampleCloudState)
        assert t.total_mass() == pytest.approx(1.0, abs=1e-9)


class TestSerialization:
    @pytest.mark.parametrize(
        "st",
        [
            dirac([0.5, 0.5]),
            uniform(Box([0.0], [2.0])),
            gaussian([1.0], [[0.25]]),
            density1d("logistic", 0.0, 1.0),
            scaled(0.5, dirac([0.0])),
            sample_cloud([[0.0], [1.0]], [0.5, 0.25]),
        ],
    )
    def test_round_trip(self, st):
        back = state_from_json(json.loads(json.dumps(st.to_json())))
        assert back == st
        assert back.total_mass() == st.total_mass()

    def test_cloud_csv_export(self, tmp_path):
        cloud = sample_cloud([[0.0, 1.0], [2.0, 3.0]], [0.5, 0.25])
        path = tmp_path / "cloud.csv"
        cloud_to_csv(cloud, path)
        rows = [line.split(",") for line in path.read_text().strip().splitlines()]
        assert len(rows) == 2
        assert [float(v) for v in rows[0]] == [0.0, 1.0, 0.5]
        assert [float(v) for v in rows[1]] == [2.0, 3.0, 0.25]


class TestMeasureLogConcavity:
    def test_interval_inequality_closed_forms(self):
        """omega(pA + (1-p)B) >= omega(A)^p omega(B)^(1-p) on 1-D intervals."""
        rng = np.random.default_rng(77)
        states = [
            gaussian([0.3], 1.7),
            uniform(Box([-1.0], [2.0])),
            density1d("laplace", 0.0, 1.0),
            density1d("logistic", -0.5, 0.7),
        ]
        for st in states:
            for _ in range(300):
                a, b = sorted(rng.uniform(-3, 3, size=2))
                c, d = sorted(rng.uniform(-3, 3, size=2))
                p = rng.uniform()
                A, B = Box([a], [b]), Box([c], [d])
                M = Box([p * a + (1 - p) * c], [p * b + (1 - p) * d])
                lhs = mass(st, M)
                rhs = mass(st, A) ** p * mass(st, B) ** (1 - p)
                assert lhs >= rhs - 1e-9
