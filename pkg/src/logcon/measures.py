"""Sub-probability states on convex spaces, sampling, and integration.

States are sub-probability measures whose mass function is log-concave on
convex sets: omega(A +_p B) >= omega(A)^p omega(B)^(1-p).  The constructors
here all produce such measures:

    Dirac(x)                     point mass
    Uniform(A)                   normalized Lebesgue measure on a bounded
                                 full-dimensional convex set
    Gaussian(mu, Sigma)          density exp(-(x-mu)' Sigma^-1 (x-mu)/2) / kappa
                                 with kappa = sqrt((2 pi)^n det Sigma)
    Density1d(kind, loc, scale)  laplace or logistic on R (the log-concave
                                 1-D family; extreme-value and chi left out
                                 deliberately, these two exercise the path)
    Scaled(s, inner)             sub-probability rescaling, s in [0, 1]
    SampleCloud(points, weights) weighted empirical measure, the universal
                                 fallback produced by channel application

Mass and pairing queries auto-select a strategy: closed form where one
exists (interval CDFs, erf products for diagonal covariances, noncentral
chi-square for isotropic covariances over balls, box-overlap volumes),
tensor-product Gauss-Legendre quadrature for smooth integrands in dim <= 3,
and seeded Monte Carlo otherwise.  Detailed results carry (value, stderr,
strategy); Monte Carlo draws are reproducible from (n, seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from logcon.geometry import (
    Ball,
    Box,
    ConvexSet,
    DimensionMismatchError,
    GeometryError,
    Hull,
    Point,
    Product,
    Space,
    Whole,
    set_from_json,
    space_from_json,
    whole_space,
)
from logcon.rng import ensure_rng, make_rng

#: Default node count per axis for tensor-product Gauss-Legendre quadrature.
QUAD_NODES = 64
#: Default Monte Carlo sample count for mass/pairing estimates.
MC_SAMPLES = 100_000
#: Quadrature is used only up to this dimension.
QUAD_MAX_DIM = 3
#: Gaussian supports are truncated at this many standard deviations.
GAUSS_TAIL_SIGMAS = 8.0
#: 1-D density supports are truncated at this many scales.
DENSITY1D_TAIL_SCALES = 45.0
#: Rejection sampling gives up after this many batches.
REJECTION_CAP = 1000


class MeasureError(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class NumericResult:
    """A numeric estimate with its error scale and the strategy that made it."""

    value: float
    stderr: float
    strategy: str

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class Integrator:
    """Integration configuration: node counts, sample counts, seed."""

    quad_nodes: int = QUAD_NODES
    mc_samples: int = MC_SAMPLES
    seed: int = 0


DEFAULT_INTEGRATOR = Integrator()


def _interval_of(A: ConvexSet):
    """(lo, hi) when the set is an interval of R, else None."""
    if A.dim != 1:
        return None
    bb = A.bounding_box()
    if bb is None:
        return None
    if isinstance(A, (Ball, Box, Hull, Point)):
        return float(bb[0][0]), float(bb[1][0])
    return None


def _quad_grid(lo, hi, nodes):
    """Tensor-product Gauss-Legendre nodes and weights over a box."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x1, w1 = special.roots_legendre(nodes)
    axes, wts = [], []
    for a, b in zip(lo, hi):
        axes.append(0.5 * (b - a) * x1 + 0.5 * (a + b))
        wts.append(0.5 * (b - a) * w1)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = wts[0]
    for ww in wts[1:]:
        w = np.multiply.outer(w, ww)
    return pts, w.ravel()


def _quadrature(f, lo, hi, nodes):
    """Integral of f over the box, with an embedded half-node error estimate."""
    pts, w = _quad_grid(lo, hi, nodes)
    full = float(f(pts) @ w)
    pts_h, w_h = _quad_grid(lo, hi, max(2, nodes // 2))
    half = float(f(pts_h) @ w_h)
    return NumericResult(full, abs(full - half), "quadrature")


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


class State:
    """Abstract sub-probability measure on a convex space."""

    space: Space

    @property
    def dim(self) -> int:
        return self.space.dim

    def total_mass(self) -> float:
        raise NotImplementedError

    def is_zero(self) -> bool:
        return self.total_mass() == 0.0

    def sample(self, n: int, seed=0) -> np.ndarray:
        """n i.i.d. draws from the normalized measure, reproducible per seed."""
        if self.total_mass() <= 0.0:
            raise SamplingError("cannot sample from a zero-mass state")
        return self._sample(n, ensure_rng(seed))

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()


class DiracState(State):
    def __init__(self, x, space: Space | None = None):
        self.x = np.asarray(x, dtype=float).reshape(-1)
        self.space = space if space is not None else whole_space(self.x.shape[0])
        if self.x.shape[0] != self.space.dim:
            raise DimensionMismatchError("dirac point dim != space dim")
        self.x.setflags(write=False)

    def __repr__(self):
        return f"DiracState({self.x.tolist()})"

    def total_mass(self):
        return 1.0

    def _sample(self, n, rng):
        return np.tile(self.x, (n, 1))

    def to_json(self):
        return {"body": "dirac", "x": self.x.tolist(), "space": self.space.to_json()}


class UniformState(State):
    """Normalized Lebesgue measure over a bounded full-dimensional convex set."""

    def __init__(self, support: ConvexSet, space: Space | None = None):
        if not support.is_bounded():
            raise MeasureError("uniform state needs a bounded support")
        if _positive_volume_proxy(support) <= 0.0:
            raise MeasureError("uniform state needs positive volume")
        self.support = support
        self.space = space if space is not None else whole_space(support.dim)
        if support.dim != self.space.dim:
            raise DimensionMismatchError("support dim != space dim")

    def __repr__(self):
        return f"UniformState({self.support!r})"

    def total_mass(self):
        return 1.0

    def _sample(self, n, rng):
        return _sample_uniform_in(self.support, n, rng)

    def to_json(self):
        return {
            "body": "uniform",
            "support": self.support.to_json(),
            "space": self.space.to_json(),
        }


def _positive_volume_proxy(A: ConvexSet) -> float:
    """> 0 iff the set is full-dimensional in its ambient R^dim."""
    if isinstance(A, Ball):
        return A.radius
    if isinstance(A, Box):
        return float(np.min(A.hi - A.lo))
    if isinstance(A, Hull):
        return 1.0 if A.affine_rank() == A.dim else 0.0
    if isinstance(A, Point):
        return 1.0 if A.dim == 0 else 0.0
    if isinstance(A, Product):
        return min(_positive_volume_proxy(A.left), _positive_volume_proxy(A.right))
    return 0.0


def _sample_uniform_in(A: ConvexSet, n, rng):
    if isinstance(A, Box):
        return rng.uniform(A.lo, A.hi, size=(n, A.dim))
    if isinstance(A, Ball):
        d = rng.normal(size=(n, A.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = A.radius * rng.uniform(size=(n, 1)) ** (1.0 / A.dim)
        return A.center + r * d
    if isinstance(A, Product):
        return np.concatenate(
            [_sample_uniform_in(A.left, n, rng), _sample_uniform_in(A.right, n, rng)],
            axis=1,
        )
    if isinstance(A, Hull):
        k = A.vertices.shape[0]
        if k == A.dim + 1 and A.affine_rank() == A.dim:
            # Simplex: Dirichlet(1,...,1) weights are exactly uniform.
            w = rng.dirichlet(np.ones(k), size=n)
            return w @ A.vertices
        # General hull: rejection from the bounding box.
        lo, hi = A.bounding_box()
        out = np.empty((0, A.dim))
        for _ in range(REJECTION_CAP):
            cand = rng.uniform(lo, hi, size=(max(n, 256), A.dim))
            hits = cand[A.contains(cand)]
            out = np.vstack([out, hits])
            if out.shape[0] >= n:
                return out[:n]
        raise SamplingError(
            f"rejection sampling cap ({REJECTION_CAP} batches) exceeded for {A!r}"
        )
    if isinstance(A, Point):
        return np.tile(A.p, (n, 1))
    raise MeasureError(f"cannot sample uniformly from {A!r}")


class GaussianState(State):
    """Multivariate Gaussian, possibly degenerate (PSD covariance)."""

    def __init__(self, mu, Sigma, space: Space | None = None):
        self.mu = np.asarray(mu, dtype=float).reshape(-1)
        n = self.mu.shape[0]
        S = np.asarray(Sigma, dtype=float)
        if S.ndim == 0:
            S = float(S) * np.eye(n)
        elif S.ndim == 1:
            S = np.diag(S)
        if S.shape != (n, n):
            raise DimensionMismatchError(f"covariance shape {S.shape} != ({n},{n})")
        if not np.allclose(S, S.T, atol=1e-12):
            raise MeasureError("covariance must be symmetric")
        evals = np.linalg.eigvalsh(S)
        if evals.min() < -1e-10 * max(1.0, evals.max()):
            raise MeasureError(f"covariance must be PSD, min eigenvalue {evals.min()}")
        self.Sigma = S
        self.space = space if space is not None else whole_space(n)
        if self.space.dim != n:
            raise DimensionMismatchError("mean dim != space dim")
        self.mu.setflags(write=False)
        self.Sigma.setflags(write=False)

    def __repr__(self):
        return f"GaussianState(mu={self.mu.tolist()}, Sigma={self.Sigma.tolist()})"

    def total_mass(self):
        return 1.0

    def variances(self):
        return np.diag(self.Sigma)

    def is_diagonal(self) -> bool:
        return bool(np.all(self.Sigma == np.diag(np.diag(self.Sigma))))

    def density(self, x):
        """Gaussian density with normalization sqrt((2 pi)^n det Sigma)."""
        n = self.dim
        det = float(np.linalg.det(self.Sigma))
        if det <= 0:
            raise MeasureError("density undefined for singular covariance")
        inv = np.linalg.inv(self.Sigma)
        pts = np.asarray(x, dtype=float).reshape(-1, n)
        d = pts - self.mu
        q = np.einsum("ij,jk,ik->i", d, inv, d)
        kappa = math.sqrt((2.0 * math.pi) ** n * det)
        out = np.exp(-0.5 * q) / kappa
        return float(out[0]) if np.asarray(x).ndim == 1 else out

    def _sample(self, n, rng):
        evals, evecs = np.linalg.eigh(self.Sigma)
        L = evecs @ np.diag(np.sqrt(np.clip(evals, 0.0, None)))
        z = rng.normal(size=(n, self.dim))
        return self.mu + z @ L.T

    def to_json(self):
        return {
            "body": "gaussian",
            "mu": self.mu.tolist(),
            "Sigma": self.Sigma.tolist(),
            "space": self.space.to_json(),
        }


_DENSITY1D_KINDS = {"laplace": stats.laplace, "logistic": stats.logistic}


class Density1dState(State):
    """Named 1-D log-concave density: laplace or logistic."""

    def __init__(self, kind: str, loc: float, scale: float, space: Space | None = None):
        if kind not in _DENSITY1D_KINDS:
            raise MeasureError(
                f"unknown 1-D density {kind!r}; available: {sorted(_DENSITY1D_KINDS)}"
            )
        if scale <= 0:
            raise MeasureError("scale must be positive")
        self.kind = kind
        self.loc = float(loc)
        self.scale = float(scale)
        self.space = space if space is not None else whole_space(1)
        if self.space.dim != 1:
            raise DimensionMismatchError("1-D density needs a 1-D space")

    def __repr__(self):
        return f"Density1dState({self.kind!r}, loc={self.loc}, scale={self.scale})"

    @property
    def _dist(self):
        return _DENSITY1D_KINDS[self.kind](loc=self.loc, scale=self.scale)

    def total_mass(self):
        return 1.0

    def cdf(self, x):
        return self._dist.cdf(x)

    def density(self, x):
        pts = np.asarray(x, dtype=float).reshape(-1, 1)
        out = self._dist.pdf(pts[:, 0])
        return float(out[0]) if np.asarray(x).ndim == 1 else out

    def _sample(self, n, rng):
        # Inverse-CDF transform of uniforms.
        u = rng.uniform(size=n)
        return self._dist.ppf(u).reshape(n, 1)

    def to_json(self):
        return {
            "body": "density1d",
            "kind": self.kind,
            "loc": self.loc,
            "scale": self.scale,
            "space": self.space.to_json(),
        }


class ScaledState(State):
    def __init__(self, s: float, inner: State):
        if not 0.0 <= s <= 1.0 + 1e-12:
            raise MeasureError(f"scale must lie in [0,1], got {s}")
        self.s = min(float(s), 1.0)
        self.inner = inner
        self.space = inner.space

    def __repr__(self):
        return f"ScaledState({self.s}, {self.inner!r})"

    def total_mass(self):
        return self.s * self.inner.total_mass()

    def _sample(self, n, rng):
        return self.inner._sample(n, rng)

    def to_json(self):
        return {"body": "scaled", "s": self.s, "inner": self.inner.to_json()}


class SampleCloudState(State):
    """Weighted empirical measure; the universal channel-application fallback."""

    def __init__(self, points, weights, space: Space | None = None):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points.reshape(-1, 1)
        self.weights = np.asarray(weights, dtype=float).reshape(-1)
        if self.points.shape[0] != self.weights.shape[0]:
            raise MeasureError("points and weights disagree in length")
        if np.any(self.weights < -1e-15):
            raise MeasureError("weights must be nonnegative")
        self.weights = np.clip(self.weights, 0.0, None)
        total = self.weights.sum()
        if total > 1.0 + 1e-12:
            raise MeasureError(f"weights sum to {total} > 1")
        self.space = space if space is not None else whole_space(self.points.shape[1])
        if self.points.shape[1] != self.space.dim:
            raise DimensionMismatchError("cloud dim != space dim")
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __repr__(self):
        return f"SampleCloudState(n={self.points.shape[0]}, mass={self.total_mass():.4g})"

    def total_mass(self):
        return float(self.weights.sum())

    def _sample(self, n, rng):
        p = self.weights / self.weights.sum()
        idx = rng.choice(self.points.shape[0], size=n, p=p)
        return self.points[idx]

    def to_json(self):
        return {
            "body": "cloud",
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "space": self.space.to_json(),
        }


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def dirac(x, space: Space | None = None) -> DiracState:
    return DiracState(x, space)


def uniform(A: ConvexSet, space: Space | None = None) -> UniformState:
    return UniformState(A, space)


def gaussian(mu, Sigma, space: Space | None = None) -> GaussianState:
    return GaussianState(mu, Sigma, space)


def density1d(kind: str, loc: float, scale: float, space: Space | None = None) -> Density1dState:
    return Density1dState(kind, loc, scale, space)


def scaled(s: float, inner: State) -> State:
    return ScaledState(s, inner)


def sample_cloud(points, weights, space: Space | None = None) -> SampleCloudState:
    return SampleCloudState(points, weights, space)


# ---------------------------------------------------------------------------
# Mass
# ---------------------------------------------------------------------------


def _gaussian_interval_mass(mu, var, lo, hi):
    """1-D Gaussian mass of [lo, hi]; indicator when the variance is zero."""
    if var <= 0.0:
        return 1.0 if lo - 1e-12 <= mu <= hi + 1e-12 else 0.0
    sd = math.sqrt(var)
    return float(special.ndtr((hi - mu) / sd) - special.ndtr((lo - mu) / sd))


def _gaussian_box_mass(state: GaussianState, B: Box):
    if not state.is_diagonal():
        return None
    v = state.variances()
    total = 1.0
    for i in range(state.dim):
        total *= _gaussian_interval_mass(state.mu[i], v[i], B.lo[i], B.hi[i])
    return total


def _gaussian_ball_mass(state: GaussianState, B: Ball):
    """Isotropic (after removing zero-variance axes) Gaussian mass of a ball
    via the noncentral chi-square CDF."""
    if not state.is_diagonal():
        return None
    v = state.variances()
    fixed = v <= 0.0
    free = ~fixed
    r2 = B.radius**2 - float(np.sum((state.mu[fixed] - B.center[fixed]) ** 2))
    if r2 < 0.0:
        return 0.0
    if not np.any(free):
        return 1.0
    vf = v[free]
    if not np.allclose(vf, vf[0], rtol=1e-12, atol=0.0):
        return None
    s2 = vf[0]
    df = int(free.sum())
    nc = float(np.sum((B.center[free] - state.mu[free]) ** 2)) / s2
    return float(stats.ncx2.cdf(r2 / s2, df=df, nc=nc))


def _box_overlap_volume(A: Box, B: Box):
    lo = np.maximum(A.lo, B.lo)
    hi = np.minimum(A.hi, B.hi)
    if np.any(hi <= lo):
        return 0.0
    return float(np.prod(hi - lo))


def _closed_form_mass(state: State, A: ConvexSet):
    """Exact mass when a closed form exists, else None."""
    if isinstance(A, Whole):
        return state.total_mass()
    if isinstance(state, DiracState):
        return 1.0 if A.contains(state.x) else 0.0
    if isinstance(state, ScaledState):
        inner = _closed_form_mass(state.inner, A)
        return None if inner is None else state.s * inner
    if isinstance(state, SampleCloudState):
        return float(state.weights[A.contains(state.points)].sum())

    if state.dim == 1:
        iv = _interval_of(A)
        if iv is not None:
            lo, hi = iv
            if isinstance(state, GaussianState):
                return _gaussian_interval_mass(state.mu[0], state.variances()[0], lo, hi)
            if isinstance(state, Density1dState):
                return float(state.cdf(hi) - state.cdf(lo))
            if isinstance(state, UniformState):
                s_iv = _interval_of(state.support)
                if s_iv is not None:
                    w = min(hi, s_iv[1]) - max(lo, s_iv[0])
                    return max(0.0, w) / (s_iv[1] - s_iv[0])

    if isinstance(state, GaussianState):
        if isinstance(A, Hull) and A.affine_rank() < state.dim and np.all(
            state.variances() > 0.0
        ):
            return 0.0
        if isinstance(A, Box):
            return _gaussian_box_mass(state, A)
        if isinstance(A, Ball):
            return _gaussian_ball_mass(state, A)
        if isinstance(A, Point) and state.is_diagonal():
            v = state.variances()
            if np.any(v > 0.0):
                return 0.0
            return 1.0 if np.all(np.abs(state.mu - A.p) <= 1e-12) else 0.0
        if isinstance(A, Product) and state.is_diagonal():
            total = 1.0
            offset = 0
            for factor in [A.left, A.right]:
                idx = slice(offset, offset + factor.dim)
                sub = GaussianState(state.mu[idx], state.Sigma[idx, idx])
                m = _closed_form_mass(sub, factor)
                if m is None:
                    return None
                total *= m
                offset += factor.dim
            return total

    if isinstance(state, UniformState):
        S = state.support
        if isinstance(A, Hull) and A.affine_rank() < state.dim:
            return 0.0
        if isinstance(S, Box) and isinstance(A, Box):
            return _box_overlap_volume(S, A) / S.volume()
        if isinstance(S, Product) and isinstance(A, Box):
            total = 1.0
            offset = 0
            for factor in [S.left, S.right]:
                idx = slice(offset, offset + factor.dim)
                sub_box = Box(A.lo[idx], A.hi[idx])
                m = _closed_form_mass(UniformState(factor), sub_box)
                if m is None:
                    return None
                total *= m
                offset += factor.dim
            return total

    return None


def mass_with_error(
    state: State, A: ConvexSet, integrator: Integrator = DEFAULT_INTEGRATOR
) -> NumericResult:
    """omega(A) with stderr and strategy; closed form > quadrature > MC."""
    if state.dim != A.dim:
        raise DimensionMismatchError(f"state dim {state.dim} != set dim {A.dim}")
    if state.total_mass() == 0.0:
        return NumericResult(0.0, 0.0, "closed-form")
    closed = _closed_form_mass(state, A)
    if closed is not None:
        return NumericResult(float(np.clip(closed, 0.0, 1.0)), 0.0, "closed-form")

    # Quadrature of the density over a box target, for smooth integrands only.
    if (
        isinstance(A, Box)
        and state.dim <= QUAD_MAX_DIM
        and isinstance(state, GaussianState)
        and float(np.linalg.det(state.Sigma)) > 0.0
    ):
        sd = np.sqrt(state.variances())
        lo = np.maximum(A.lo, state.mu - GAUSS_TAIL_SIGMAS * sd)
        hi = np.minimum(A.hi, state.mu + GAUSS_TAIL_SIGMAS * sd)
        if np.any(hi <= lo):
            return NumericResult(0.0, 0.0, "closed-form")
        return _quadrature(state.density, lo, hi, integrator.quad_nodes)

    # Monte Carlo fallback: fraction of normalized draws landing in A.
    n = integrator.mc_samples
    pts = state.sample(n, make_rng(integrator.seed, 0xA55))
    hits = A.contains(pts)
    m = state.total_mass()
    p = float(hits.mean())
    value = m * p
    stderr = m * math.sqrt(max(p * (1.0 - p), 1e-300) / n)
    return NumericResult(value, stderr, "monte-carlo")


def mass(state: State, A: ConvexSet, integrator: Integrator = DEFAULT_INTEGRATOR) -> float:
    return mass_with_error(state, A, integrator).value


# ---------------------------------------------------------------------------
# State-effect pairing
# ---------------------------------------------------------------------------


def _evaluate_fn(C):
    if hasattr(C, "evaluate"):
        return lambda pts: np.asarray(C.evaluate(pts), dtype=float)
    return lambda pts: np.asarray(C(pts), dtype=float)


def _is_continuous(C):
    probe = getattr(C, "is_continuous", None)
    return bool(probe()) if callable(probe) else False


def _support_box(state: State):
    """A box carrying all but a negligible tail of the state's mass."""
    if isinstance(state, UniformState):
        return state.support.bounding_box()
    if isinstance(state, GaussianState):
        sd = np.sqrt(state.variances())
        return (
            state.mu - GAUSS_TAIL_SIGMAS * sd,
            state.mu + GAUSS_TAIL_SIGMAS * sd,
        )
    if isinstance(state, Density1dState):
        w = DENSITY1D_TAIL_SCALES * state.scale
        return (np.array([state.loc - w]), np.array([state.loc + w]))
    if isinstance(state, ScaledState):
        return _support_box(state.inner)
    return None


def _density_fn(state: State):
    if isinstance(state, GaussianState):
        if float(np.linalg.det(state.Sigma)) > 0.0:
            return state.density
        return None
    if isinstance(state, Density1dState):
        return state.density
    if isinstance(state, UniformState):
        S = state.support
        if isinstance(S, Box):
            vol = S.volume()
            return lambda pts: S.contains(pts).astype(float) / vol
        return None
    if isinstance(state, ScaledState):
        inner = _density_fn(state.inner)
        if inner is None:
            return None
        return lambda pts, s=state.s: s * inner(pts)
    return None


def pair_with_error(
    state: State, C, integrator: Integrator = DEFAULT_INTEGRATOR
) -> NumericResult:
    """The scalar integral of the concept C against the state.

    This is the extent to which the concept holds over the distribution of
    inputs; Dirac states evaluate in closed form, smooth low-dimensional
    cases by quadrature, everything else by seeded Monte Carlo.
    """
    cdim = getattr(C, "dim", state.dim)
    if cdim != state.dim:
        raise DimensionMismatchError(f"state dim {state.dim} != concept dim {cdim}")
    f = _evaluate_fn(C)

    if state.total_mass() == 0.0:
        return NumericResult(0.0, 0.0, "closed-form")
    if isinstance(state, DiracState):
        return NumericResult(float(f(state.x.reshape(1, -1))[0]), 0.0, "closed-form")
    if isinstance(state, ScaledState):
        inner = pair_with_error(state.inner, C, integrator)
        return NumericResult(state.s * inner.value, state.s * inner.stderr, inner.strategy)
    if isinstance(state, SampleCloudState):
        vals = f(state.points)
        value = float(state.weights @ vals)
        w2 = float(np.sum((state.weights * (vals - vals.mean())) ** 2))
        return NumericResult(value, math.sqrt(w2), "closed-form")

    # Quadrature path: continuous concept, smooth density, low dimension.
    # Uniform states over boxes integrate the concept directly (flat density),
    # which also tolerates discontinuous concepts well enough to stay exact
    # for polynomial integrands.
    density = _density_fn(state)
    box = _support_box(state)
    if (
        state.dim <= QUAD_MAX_DIM
        and density is not None
        and box is not None
        and (_is_continuous(C) or isinstance(state, UniformState))
    ):
        return _quadrature(
            lambda pts: f(pts) * density(pts), box[0], box[1], integrator.quad_nodes
        )

    n = integrator.mc_samples
    pts = state.sample(n, make_rng(integrator.seed, 0xE44))
    vals = f(pts)
    m = state.total_mass()
    value = m * float(vals.mean())
    stderr = m * float(vals.std(ddof=1)) / math.sqrt(n)
    return NumericResult(value, stderr, "monte-carlo")


def pair(state: State, C, integrator: Integrator = DEFAULT_INTEGRATOR) -> float:
    return pair_with_error(state, C, integrator).value


def sample(state: State, n: int, seed=0) -> np.ndarray:
    return state.sample(n, seed)


# ---------------------------------------------------------------------------
# State arithmetic used by channels
# ---------------------------------------------------------------------------


def translate_state(state: State, t) -> State:
    """The pushforward of the state under x -> x + t."""
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape[0] != state.dim:
        raise DimensionMismatchError("translation dim != state dim")
    if isinstance(state, DiracState):
        return DiracState(state.x + t, state.space)
    if isinstance(state, GaussianState):
        return GaussianState(state.mu + t, state.Sigma, state.space)
    if isinstance(state, Density1dState):
        return Density1dState(state.kind, state.loc + t[0], state.scale, state.space)
    if isinstance(state, UniformState):
        return UniformState(_translate_set(state.support, t), state.space)
    if isinstance(state, ScaledState):
        return ScaledState(state.s, translate_state(state.inner, t))
    if isinstance(state, SampleCloudState):
        return SampleCloudState(state.points + t, state.weights, state.space)
    raise MeasureError(f"cannot translate {state!r}")


def _translate_set(A: ConvexSet, t) -> ConvexSet:
    if isinstance(A, Ball):
        return Ball(A.center + t, A.radius)
    if isinstance(A, Box):
        return Box(A.lo + t, A.hi + t)
    if isinstance(A, Hull):
        return type(A)(A.vertices + t)
    if isinstance(A, Point):
        return Point(A.p + t)
    if isinstance(A, Whole):
        return A
    if isinstance(A, Product):
        return Product(
            _translate_set(A.left, t[: A.left.dim]),
            _translate_set(A.right, t[A.left.dim :]),
        )
    raise MeasureError(f"cannot translate {A!r}")


def tensor_states(left: State, right: State, seed=0, n: int = 10_000) -> State:
    """Product measure of two states; closed forms where available, paired
    sampling with independent child streams otherwise."""
    if left.dim == 0:
        return ScaledState(left.total_mass(), right) if left.total_mass() != 1.0 else right
    if right.dim == 0:
        return ScaledState(right.total_mass(), left) if right.total_mass() != 1.0 else left

    s = 1.0
    while isinstance(left, ScaledState):
        s *= left.s
        left = left.inner
    while isinstance(right, ScaledState):
        s *= right.s
        right = right.inner

    out = None
    if isinstance(left, DiracState) and isinstance(right, DiracState):
        out = DiracState(np.concatenate([left.x, right.x]))
    elif isinstance(left, (DiracState, GaussianState)) and isinstance(
        right, (DiracState, GaussianState)
    ):
        mu = np.concatenate([_gauss_mu(left), _gauss_mu(right)])
        S = np.zeros((left.dim + right.dim, left.dim + right.dim))
        S[: left.dim, : left.dim] = _gauss_sigma(left)
        S[left.dim :, left.dim :] = _gauss_sigma(right)
        out = GaussianState(mu, S)
    elif isinstance(left, UniformState) and isinstance(right, UniformState):
        out = UniformState(Product(left.support, right.support))
    if out is None:
        lp = left.sample(n, make_rng(seed, 1))
        rp = right.sample(n, make_rng(seed, 2))
        pts = np.concatenate([lp, rp], axis=1)
        w = np.full(n, left.total_mass() * right.total_mass() / n)
        out = SampleCloudState(pts, w)
    return out if s == 1.0 else ScaledState(s, out)


def _gauss_mu(state):
    return state.x if isinstance(state, DiracState) else state.mu


def _gauss_sigma(state):
    if isinstance(state, DiracState):
        return np.zeros((state.dim, state.dim))
    return state.Sigma


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def state_from_json(data: dict) -> State:
    body = data["body"]
    if body == "dirac":
        return DiracState(data["x"], space_from_json(data["space"]))
    if body == "uniform":
        return UniformState(set_from_json(data["support"]), space_from_json(data["space"]))
    if body == "gaussian":
        return GaussianState(data["mu"], data["Sigma"], space_from_json(data["space"]))
    if body == "density1d":
        return Density1dState(
            data["kind"], data["loc"], data["scale"], space_from_json(data["space"])
        )
    if body == "scaled":
        return ScaledState(data["s"], state_from_json(data["inner"]))
    if body == "cloud":
        return SampleCloudState(
            data["points"], data["weights"], space_from_json(data["space"])
        )
    raise MeasureError(f"unknown state body {body!r}")


def cloud_to_csv(state: SampleCloudState, path) -> None:
    """One point per row; the trailing column is the point's weight."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for pt, w in zip(state.points, state.weights):
            writer.writerow([repr(float(v)) for v in pt] + [repr(float(w))])
