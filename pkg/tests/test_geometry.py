"""Convex geometry: mixes, membership, projection, Minkowski arithmetic."""

import json

import numpy as np
import pytest

from logcon.geometry import (
    Ball,
    Box,
    ConvergenceError,
    DimensionMismatchError,
    Hull,
    Point,
    Product,
    RepresentationError,
    Simplex,
    Space,
    UNIT,
    Whole,
    contains,
    distance,
    hull_of,
    minkowski_mix,
    mix,
    product_space,
    project,
    set_from_json,
    space_from_json,
    standard_simplex,
    unit_box,
)

TRIANGLE = Hull([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])


def brute_force_hull_projection(vertices, x, resolution=1e-3):
    """Independent oracle: grid scan over simplex weights for a 3-vertex hull."""
    V = np.asarray(vertices, dtype=float)
    assert V.shape[0] == 3
    w1 = np.arange(0.0, 1.0 + resolution, resolution)
    best = None
    best_d = np.inf
    for a in w1:
        b = np.arange(0.0, 1.0 - a + resolution, resolution)
        b = b[b <= 1.0 - a + 1e-12]
        w = np.stack([np.full_like(b, a), b, 1.0 - a - b], axis=1)
        pts = w @ V
        d = np.linalg.norm(pts - np.asarray(x), axis=1)
        i = np.argmin(d)
        if d[i] < best_d:
            best_d = d[i]
            best = pts[i]
    return best, best_d


class TestMix:
    def test_midpoint(self):
        assert mix([0.0], [1.0], 0.5) == pytest.approx([0.5])

    def test_identity_weight(self):
        x, y = np.array([0.3, -2.0]), np.array([5.0, 1.0])
        assert np.array_equal(mix(x, y, 1.0), x)
        assert np.array_equal(mix(x, y, 0.0), y)

    def test_componentwise(self):
        np.testing.assert_allclose(
            mix([0, 1, 0], [1, 1, 0], 0.25), [0.75, 1.0, 0.0]
        )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mix([0.0], [1.0, 2.0], 0.5)

    def test_weight_range(self):
        with pytest.raises(ValueError):
            mix([0.0], [1.0], 1.5)


class TestContains:
    def test_box_interior(self):
        assert contains(Box([0, 0], [1, 1]), [0.5, 0.5])

    def test_triangle_interior(self):
        assert contains(TRIANGLE, [0.3, 0.3])  # 0.3 + 0.3 <= 1

    def test_green_ball_excludes_yellow(self):
        # radius 0.1 around pure green; pure yellow sits at distance 1.
        green = Ball([0.0, 1.0, 0.0], 0.1)
        assert not contains(green, [1.0, 1.0, 0.0])
        assert contains(green, [0.0, 1.0, 0.0])

    def test_product_membership_is_conjunction(self):
        A = Box([0.0], [1.0])
        B = Ball([0.0], 1.0)
        P = Product(A, B)
        rng = np.random.default_rng(7)
        pts = rng.uniform(-2, 2, size=(200, 2))
        got = P.contains(pts)
        want = A.contains(pts[:, :1]) & B.contains(pts[:, 1:])
        assert np.array_equal(got, want)


class TestProject:
    def test_ball_radial(self):
        np.testing.assert_allclose(project(Ball([0, 0], 1.0), [2.0, 0.0]), [1.0, 0.0])

    def test_box_clamp(self):
        np.testing.assert_allclose(
            project(Box([0, 0], [1, 1]), [2.0, -1.0]), [1.0, 0.0]
        )

    def test_hull_matches_grid_oracle(self):
        """project(triangle, (1,1)) frozen to (0.5, 0.5) via the weight-grid scan."""
        oracle_pt, oracle_d = brute_force_hull_projection(TRIANGLE.vertices, [1.0, 1.0])
        np.testing.assert_allclose(oracle_pt, [0.5, 0.5], atol=2e-3)
        got = project(TRIANGLE, [1.0, 1.0])
        np.testing.assert_allclose(got, [0.5, 0.5], atol=1e-10)
        assert distance(TRIANGLE, [1.0, 1.0]) <= oracle_d + 1e-9

    def test_projection_optimality(self):
        """No sampled member of A beats the projection, for every variant."""
        rng = np.random.default_rng(42)
        sets = [
            Ball([0.5, -1.0], 0.7),
            Box([-1.0, 0.0], [2.0, 0.5]),
            Hull(rng.normal(size=(5, 3))),
            Simplex([(0, 0), (2, 0), (0, 2)]),
            Product(Ball([0.0], 1.0), Box([0.0], [1.0])),
            Point([0.3, 0.4]),
        ]
        for A in sets:
            for _ in range(200):
                x = rng.normal(scale=2.0, size=A.dim)
                px = A.project(x)
                d = np.linalg.norm(x - px)
                for _ in range(5):
                    a = A.sample_point(rng)
                    assert d <= np.linalg.norm(x - a) + 1e-9

    def test_large_hull_uses_projected_gradient(self):
        rng = np.random.default_rng(3)
        big = Hull(rng.normal(size=(20, 4)))  # above the exact-enumeration cap
        x = rng.normal(scale=3.0, size=4)
        px = big.project(x)
        d = np.linalg.norm(x - px)
        for _ in range(2000):
            a = big.sample_point(rng)
            assert d <= np.linalg.norm(x - a) + 1e-9


class TestDistance:
    def test_point(self):
        assert distance(Point([0.0]), [1.0]) == pytest.approx(1.0)

    def test_interior_zero(self):
        assert distance(Box([0, 0], [1, 1]), [0.5, 0.5]) == 0.0

    def test_triangle_corner(self):
        """distance(triangle, (1,1)) frozen to sqrt(2)/2 from the projection oracle."""
        _, oracle_d = brute_force_hull_projection(TRIANGLE.vertices, [1.0, 1.0])
        assert oracle_d == pytest.approx(np.sqrt(2) / 2, abs=2e-3)
        assert distance(TRIANGLE, [1.0, 1.0]) == pytest.approx(np.sqrt(2) / 2, abs=1e-12)

    def test_zero_iff_contains(self):
        rng = np.random.default_rng(11)
        sets = [
            Ball([0.0, 0.0], 1.0),
            Box([-1.0], [1.0]),
            Hull(rng.normal(size=(4, 2))),
            Product(Box([0.0], [1.0]), Ball([0.0], 0.5)),
        ]
        for A in sets:
            pts = rng.normal(scale=1.5, size=(300, A.dim))
            d = A.distance(pts)
            inside = A.contains(pts)
            assert np.all((d <= 1e-9) == inside)


class TestMinkowskiMix:
    def test_points(self):
        got = minkowski_mix(Point([0.0]), Point([1.0]), 0.5)
        assert isinstance(got, Point)
        np.testing.assert_allclose(got.p, [0.5])

    def test_balls_brute_force(self):
        """Ball(0,1) mixed with Ball(4,1) at p=0.5 is Ball(2,1).

        Oracle: 1e4 sampled pairs all land inside the result, and the samples
        come within 1e-2 of the result's boundary (the hull of mixes fills it).
        """
        A, B = Ball([0.0], 1.0), Ball([4.0], 1.0)
        got = minkowski_mix(A, B, 0.5)
        assert isinstance(got, Ball)
        np.testing.assert_allclose(got.center, [2.0])
        assert got.radius == pytest.approx(1.0)

        rng = np.random.default_rng(0)
        mixes = np.array(
            [
                mix(A.sample_point(rng), B.sample_point(rng), 0.5)
                for _ in range(10_000)
            ]
        )
        assert np.all(got.contains(mixes))
        # Boundary pairs fill the result out to its boundary exactly.
        edge_mixes = [
            mix([a], [b], 0.5) for a in (-1.0, 1.0) for b in (3.0, 5.0)
        ]
        assert min(m[0] for m in edge_mixes) == got.center[0] - got.radius
        assert max(m[0] for m in edge_mixes) == got.center[0] + got.radius

    def test_box_idempotent(self):
        A = Box([0.0, -1.0], [2.0, 3.0])
        for p in (0.0, 0.25, 0.7, 1.0):
            got = minkowski_mix(A, A, p)
            assert isinstance(got, Box)
            np.testing.assert_allclose(got.lo, A.lo)
            np.testing.assert_allclose(got.hi, A.hi)

    def test_membership_property(self):
        """contains(A +_p B, mix(a, b, p)) for sampled members, all pairs."""
        rng = np.random.default_rng(5)
        candidates = [
            Ball([0.5, 0.5], 0.5),
            Box([0.0, 0.0], [1.0, 2.0]),
            Hull(rng.normal(size=(4, 2))),
            Point([1.0, -1.0]),
        ]
        for A in candidates:
            for B in candidates:
                S = minkowski_mix(A, B, 0.3)
                # Sampled fallback hulls are inner approximations; allow the
                # documented sampling slack there, exactness elsewhere.
                tol = 1e-2 if getattr(S, "approximate", False) else 1e-7
                mixes = np.array(
                    [
                        mix(A.sample_point(rng), B.sample_point(rng), 0.3)
                        for _ in range(100)
                    ]
                )
                assert np.all(S.contains(mixes, tol=tol))

    def test_product_with_non_product_rejected(self):
        P = Product(Box([0.0], [1.0]), Box([0.0], [1.0]))
        with pytest.raises(RepresentationError):
            minkowski_mix(P, Box([0.0, 0.0], [1.0, 1.0]), 0.5)

    def test_ball_hull_fallback_is_flagged(self):
        got = minkowski_mix(Ball([0.0, 0.0], 1.0), TRIANGLE, 0.5)
        assert isinstance(got, Hull)
        assert got.approximate

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            minkowski_mix(Ball([0.0], 1.0), Ball([0.0, 0.0], 1.0), 0.5)


class TestHullOf:
    def test_singleton_collapses(self):
        got = hull_of([(1.0, 2.0)])
        assert isinstance(got, Point)

    def test_contains_midpoint(self):
        H = hull_of([(0.0,), (1.0,)])
        assert H.contains([0.5])

    def test_banana_region(self):
        """Convex closure of the yellow-sweet and green-bitter exemplars in R^7."""
        yellow_sweet = [1, 1, 0, 1, 0, 0, 0]
        green_bitter = [0, 1, 0, 0, 1, 0, 0]
        banana = hull_of([yellow_sweet, green_bitter])
        assert banana.contains(yellow_sweet)
        assert banana.contains(green_bitter)
        assert banana.contains(mix(yellow_sweet, green_bitter, 0.5))
        assert not banana.contains([0, 0, 1, 0, 0, 0, 1])


class TestConvexityInvariant:
    @pytest.mark.parametrize(
        "A",
        [
            Ball([0.2, -0.3], 1.3),
            Box([-1.0, 0.0, 0.5], [1.0, 2.0, 0.6]),
            Simplex([(0, 0), (1, 0), (0, 1)]),
            Hull(np.random.default_rng(1).normal(size=(6, 3))),
            Product(Ball([0.0], 1.0), Box([0.0, 0.0], [1.0, 1.0])),
            Point([4.0]),
            standard_simplex(4),
        ],
        ids=["ball", "box", "simplex2", "hull6", "product", "point", "simplex4"],
    )
    def test_mix_stays_inside(self, A):
        rng = np.random.default_rng(2024)
        n = 10_000
        xs = np.array([A.sample_point(rng) for _ in range(64)])
        idx = rng.integers(0, len(xs), size=(n, 2))
        ps = rng.uniform(size=n)
        mixes = ps[:, None] * xs[idx[:, 0]] + (1 - ps[:, None]) * xs[idx[:, 1]]
        assert np.all(A.contains(mixes, tol=1e-7))


class TestSpaces:
    def test_product_dims_add(self):
        X = Space(1, Box([0.0], [1.0]))
        Y = Space(1, Box([0.0], [1.0]))
        assert product_space(X, Y).dim == 2

    def test_food_space_dim(self):
        colour = Space(3, unit_box(3))
        taste = Space(4, standard_simplex(4))
        food = product_space(colour, taste)
        assert food.dim == 7

    def test_unit_is_strict(self):
        X = Space(2, unit_box(2))
        assert product_space(UNIT, X) is X
        assert product_space(X, UNIT) is X

    def test_carrier_dim_checked(self):
        with pytest.raises(DimensionMismatchError):
            Space(3, unit_box(2))


class TestJsonRoundTrip:
    @pytest.mark.parametrize(
        "A",
        [
            Ball([0.1, 0.2], 0.37),
            Box([-1.5], [2.25]),
            Simplex([(0, 0), (1, 0), (0, 1)]),
            Hull([(0.1, 0.9), (1 / 3, 2 / 7)]),
            Point([np.pi]),
            Product(Ball([0.0], 1.0), Box([0.0], [1.0])),
            Whole(3),
        ],
    )
    def test_set_round_trip(self, A):
        blob = json.dumps(A.to_json())
        back = set_from_json(json.loads(blob))
        assert back == A
        assert type(back) is type(A)

    def test_space_round_trip(self):
        X = Space(7, Product(unit_box(3), standard_simplex(4)))
        back = space_from_json(json.loads(json.dumps(X.to_json())))
        assert back == X


class TestConvergenceSignalling:
    def test_cap_carries_best_iterate(self):
        from logcon.geometry import _project_hull_pg

        rng = np.random.default_rng(9)
        V = rng.normal(size=(12, 3))
        X = rng.normal(size=(4, 3))
        with pytest.raises(ConvergenceError) as exc:
            _project_hull_pg(V, X, max_iter=1, improve_tol=1e-300, polish=False)
        assert exc.value.best is not None
        assert exc.value.best.shape == (4, 12)
