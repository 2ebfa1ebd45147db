"""Convex subsets of R^n: membership, projection, Minkowski mixes, products.

A conceptual space is a convex measurable subset of R^n together with its
Borel sigma-algebra.  This module provides the symbolic family of convex
regions used everywhere else in the package:

    Ball(center, radius)    closed Euclidean ball
    Box(lo, hi)             axis-aligned box
    Simplex(vertices)       hull of affinely independent vertices
    Hull(vertices)          convex closure of a finite exemplar set
    Product(left, right)    cartesian product (coordinates concatenated)
    Point(p)                singleton
    Whole(dim)              all of R^dim (unbounded ambient carrier)

The binary convex combination of points is ``mix(x, y, p) = p*x + (1-p)*y``
and the corresponding operation on sets is the Minkowski p-mix
``A +_p B = {mix(a, b, p) | a in A, b in B}``, computed symbolically per
variant pair where a closed form exists.

All values are immutable after construction and all operations are pure, so
concurrent use from multiple threads is safe.
"""

from __future__ import annotations

import itertools
import json
import math

import numpy as np

# Membership tolerance: distance(A, x) == 0 and contains(A, x) agree up to
# this slack.
DEFAULT_TOL = 1e-9

# Seed for the sampled-hull fallback of minkowski_mix, fixed so mixed-variant
# results are deterministic.
_MINKOWSKI_SAMPLE_SEED = 0x6C636F6E
_MINKOWSKI_SAMPLE_COUNT = 256

# Hulls with at most this many vertices are projected by exact face
# enumeration; larger ones use accelerated projected gradient.
_EXACT_HULL_MAX_VERTICES = 8


class GeometryError(ValueError):
    """Base class for geometry contract violations."""


class DimensionMismatchError(GeometryError):
    pass


class RepresentationError(GeometryError):
    """Requested operation has no representation in the symbolic set family."""


class ConvergenceError(RuntimeError):
    """Iterative solver hit its cap; `.best` carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def as_point(x) -> np.ndarray:
    """Coerce to a finite 1-D float64 coordinate vector."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise GeometryError(f"a point must be one-dimensional, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise GeometryError(f"point has non-finite entries: {p}")
    return p


def _as_batch(x, dim):
    """Return (points as (N, dim) array, leading shape or None if single)."""
    arr = np.asarray(x, dtype=float)
    if dim == 0:
        # Points of the unit space are empty vectors; only the count matters.
        if arr.ndim <= 1:
            return np.zeros((1, 0)), None
        n = int(np.prod(arr.shape[:-1]))
        return np.zeros((n, 0)), arr.shape[:-1]
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 1:
        if arr.shape[0] != dim:
            raise DimensionMismatchError(
                f"point has dim {arr.shape[0]}, set has dim {dim}"
            )
        return arr.reshape(1, dim), None
    if arr.shape[-1] != dim:
        raise DimensionMismatchError(
            f"points have dim {arr.shape[-1]}, set has dim {dim}"
        )
    return arr.reshape(-1, dim), arr.shape[:-1]


def mix(x, y, p: float) -> np.ndarray:
    """Convex combination p*x + (1-p)*y of two points of equal dimension."""
    x = as_point(x)
    y = as_point(y)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"mix of dims {x.shape[0]} and {y.shape[0]}")
    if not 0.0 <= p <= 1.0:
        raise GeometryError(f"mix weight must lie in [0, 1], got {p}")
    return p * x + (1.0 - p) * y


class ConvexSet:
    """Abstract convex region of R^dim."""

    dim: int

    def contains(self, x, tol: float = DEFAULT_TOL):
        pts, lead = _as_batch(x, self.dim)
        out = self._contains(pts, tol)
        return bool(out[0]) if lead is None else out.reshape(lead)

    def project(self, x):
        pts, lead = _as_batch(x, self.dim)
        out = self._project(pts)
        return out[0] if lead is None else out.reshape(lead + (self.dim,))

    def distance(self, x):
        pts, lead = _as_batch(x, self.dim)
        out = np.linalg.norm(pts - self._project(pts), axis=-1)
        return float(out[0]) if lead is None else out.reshape(lead)

    def bounding_box(self):
        """(lo, hi) of an enclosing axis box, or None if unbounded."""
        raise NotImplementedError

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        """A random point of the set (supported in it, not necessarily uniform)."""
        raise NotImplementedError

    def is_bounded(self) -> bool:
        return self.bounding_box() is not None

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(json.dumps(self.to_json(), sort_keys=True))


class Ball(ConvexSet):
    def __init__(self, center, radius: float):
        self.center = as_point(center)
        self.radius = float(radius)
        if self.radius < 0:
            raise GeometryError(f"ball radius must be >= 0, got {radius}")
        self.dim = self.center.shape[0]
        self.center.setflags(write=False)

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"

    def _contains(self, pts, tol):
        return np.linalg.norm(pts - self.center, axis=-1) <= self.radius + tol

    def _project(self, pts):
        d = pts - self.center
        n = np.linalg.norm(d, axis=-1, keepdims=True)
        scale = np.where(n > self.radius, self.radius / np.maximum(n, 1e-300), 1.0)
        return self.center + d * scale

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def sample_point(self, rng):
        d = rng.normal(size=self.dim)
        norm = np.linalg.norm(d)
        if norm == 0.0:
            return self.center.copy()
        r = self.radius * rng.uniform() ** (1.0 / self.dim)
        return self.center + d * (r / norm)

    def to_json(self):
        return {"variant": "ball", "center": self.center.tolist(), "radius": self.radius}


class Box(ConvexSet):
    def __init__(self, lo, hi):
        self.lo = as_point(lo)
        self.hi = as_point(hi)
        if self.lo.shape != self.hi.shape:
            raise DimensionMismatchError("box corners differ in dimension")
        if np.any(self.lo > self.hi):
            raise GeometryError(f"box needs lo <= hi componentwise: {lo} vs {hi}")
        self.dim = self.lo.shape[0]
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"

    def _contains(self, pts, tol):
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=-1)

    def _project(self, pts):
        return np.clip(pts, self.lo, self.hi)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def sample_point(self, rng):
        return rng.uniform(self.lo, self.hi)

    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def corners(self) -> np.ndarray:
        if self.dim > 16:
            raise RepresentationError("corner enumeration capped at dim 16")
        cs = np.array(list(itertools.product(*zip(self.lo, self.hi))))
        return cs.reshape(-1, self.dim)

    def to_json(self):
        return {"variant": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


def unit_box(dim: int) -> Box:
    return Box(np.zeros(dim), np.ones(dim))


class Hull(ConvexSet):
    """Convex closure of a finite vertex set (no redundancy pruning)."""

    variant_name = "hull"

    def __init__(self, vertices, approximate: bool = False):
        V = np.asarray(vertices, dtype=float)
        if V.ndim == 1:
            V = V.reshape(1, -1)
        if V.ndim != 2 or V.shape[0] < 1:
            raise GeometryError("hull needs at least one vertex")
        if not np.all(np.isfinite(V)):
            raise GeometryError("hull vertices must be finite")
        self.vertices = V
        self.dim = V.shape[1]
        self.approximate = bool(approximate)
        self.vertices.setflags(write=False)

    def __repr__(self):
        return f"{type(self).__name__}({self.vertices.tolist()})"

    def _contains(self, pts, tol):
        return np.linalg.norm(pts - self._project(pts), axis=-1) <= tol

    def _project(self, pts):
        w = hull_projection_weights(self.vertices, pts)
        return w @ self.vertices

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def sample_point(self, rng):
        w = rng.dirichlet(np.ones(self.vertices.shape[0]))
        return w @ self.vertices

    def affine_rank(self) -> int:
        if self.vertices.shape[0] == 1:
            return 0
        d = self.vertices[1:] - self.vertices[0]
        return int(np.linalg.matrix_rank(d, tol=1e-12))

    def to_json(self):
        out = {"variant": self.variant_name, "vertices": self.vertices.tolist()}
        if self.approximate:
            out["approximate"] = True
        return out


class Simplex(Hull):
    """Hull whose vertices are affinely independent."""

    variant_name = "simplex"

    def __init__(self, vertices):
        super().__init__(vertices)
        k = self.vertices.shape[0]
        if k > 1 and self.affine_rank() != k - 1:
            raise GeometryError("simplex vertices must be affinely independent")

    def sample_point(self, rng):
        # Dirichlet(1, ..., 1) weights give the uniform law on a simplex.
        return super().sample_point(rng)


def standard_simplex(dim: int) -> Simplex:
    """{t >= 0, sum t_i = 1} in R^dim, the simplex on the unit basis vectors."""
    return Simplex(np.eye(dim))


class Point(ConvexSet):
    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim == 0:
            p = p.reshape(1)
        if p.ndim != 1:
            raise GeometryError("point must be one-dimensional")
        if not np.all(np.isfinite(p)):
            raise GeometryError("point must be finite")
        self.p = p
        self.dim = p.shape[0]
        self.p.setflags(write=False)

    def __repr__(self):
        return f"Point({self.p.tolist()})"

    def _contains(self, pts, tol):
        return np.linalg.norm(pts - self.p, axis=-1) <= tol

    def _project(self, pts):
        return np.broadcast_to(self.p, pts.shape).copy()

    def bounding_box(self):
        return self.p.copy(), self.p.copy()

    def sample_point(self, rng):
        return self.p.copy()

    def to_json(self):
        return {"variant": "point", "p": self.p.tolist()}


class Product(ConvexSet):
    def __init__(self, left: ConvexSet, right: ConvexSet):
        self.left = left
        self.right = right
        self.dim = left.dim + right.dim

    def __repr__(self):
        return f"Product({self.left!r}, {self.right!r})"

    def _split(self, pts):
        return pts[..., : self.left.dim], pts[..., self.left.dim :]

    def _contains(self, pts, tol):
        a, b = self._split(pts)
        return self.left._contains(a, tol) & self.right._contains(b, tol)

    def _project(self, pts):
        # Squared distance separates over the factors, so projection does too.
        a, b = self._split(pts)
        return np.concatenate([self.left._project(a), self.right._project(b)], axis=-1)

    def bounding_box(self):
        bl, br = self.left.bounding_box(), self.right.bounding_box()
        if bl is None or br is None:
            return None
        return (np.concatenate([bl[0], br[0]]), np.concatenate([bl[1], br[1]]))

    def sample_point(self, rng):
        return np.concatenate([self.left.sample_point(rng), self.right.sample_point(rng)])

    def factors(self):
        """Flatten nested products into a list of non-product factors."""
        out = []
        for side in (self.left, self.right):
            if isinstance(side, Product):
                out.extend(side.factors())
            else:
                out.append(side)
        return out

    def to_json(self):
        return {
            "variant": "product",
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }


class Whole(ConvexSet):
    """All of R^dim.  Needed as the ambient carrier of unbounded states."""

    def __init__(self, dim: int):
        dim = int(dim)
        if dim < 0:
            raise GeometryError("dimension must be >= 0")
        self.dim = dim

    def __repr__(self):
        return f"Whole({self.dim})"

    def _contains(self, pts, tol):
        return np.ones(pts.shape[:-1], dtype=bool)

    def _project(self, pts):
        return pts.copy()

    def bounding_box(self):
        return None

    def sample_point(self, rng):
        return rng.normal(size=self.dim)

    def to_json(self):
        return {"variant": "whole", "dim": self.dim}


# ---------------------------------------------------------------------------
# Hull projection
# ---------------------------------------------------------------------------


def _face_projection_maps(V):
    """Affine maps x -> (weights, 1/valid) solving the equality-constrained
    least squares min ||x - w @ V||^2 s.t. sum w = 1 on each vertex subset.

    The optimum of the simplex-constrained problem is attained on some face,
    i.e. with an active vertex subset S and w_S solving the equality-only
    problem on S; enumerating all subsets and keeping the best feasible
    candidate is therefore exact.  Each subset's solution is affine in x, so
    the maps are precomputed once and applied to whole batches.
    """
    k, d = V.shape
    maps = []
    for bits in range(1, 2**k):
        idx = [i for i in range(k) if bits >> i & 1]
        Vs = V[idx]  # (m, d)
        m = len(idx)
        # KKT system: [2 Vs Vs^T, 1; 1^T, 0] [w; lam] = [2 Vs x; 1]
        K = np.zeros((m + 1, m + 1))
        K[:m, :m] = 2.0 * (Vs @ Vs.T)
        K[:m, m] = 1.0
        K[m, :m] = 1.0
        Kinv = np.linalg.pinv(K)
        # w(x) = Kinv[:m, :m] @ (2 Vs x) + Kinv[:m, m]
        A = Kinv[:m, :m] @ (2.0 * Vs)  # (m, d)
        b = Kinv[:m, m]  # (m,)
        maps.append((np.array(idx), Vs, A, b))
    return maps


def _project_hull_exact(V, X):
    """Exact batched projection onto conv(V) by face enumeration (small k)."""
    n = X.shape[0]
    k = V.shape[0]
    best_obj = np.full(n, np.inf)
    best_w = np.zeros((n, k))
    for idx, Vs, A, b in _face_projection_maps(V):
        W = X @ A.T + b  # (n, m)
        feasible = np.all(W >= -1e-12, axis=1)
        if not np.any(feasible):
            continue
        Wc = np.clip(W, 0.0, None)
        Wc /= Wc.sum(axis=1, keepdims=True)
        proj = Wc @ Vs
        obj = np.einsum("ij,ij->i", X - proj, X - proj)
        better = feasible & (obj < best_obj)
        if np.any(better):
            best_obj[better] = obj[better]
            best_w[better] = 0.0
            cols = idx[None, :].repeat(int(better.sum()), axis=0)
            best_w[np.where(better)[0][:, None], cols] = Wc[better]
    return best_w


def _project_simplex_weights(W):
    """Euclidean projection of each row of W onto the probability simplex."""
    n, k = W.shape
    U = np.sort(W, axis=1)[:, ::-1]
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, k + 1)
    cond = U - css / ind > 0
    rho = k - np.argmax(cond[:, ::-1], axis=1) - 1
    theta = css[np.arange(n), rho] / (rho + 1.0)
    return np.clip(W - theta[:, None], 0.0, None)


def _nnls_simplex_weights(V, x, rho=1e7):
    """Simplex-constrained least squares via NNLS with a penalty row.

    The penalty weight leaves a sum-constraint slack of order d^2/rho^2, far
    below membership tolerances; the returned weights are renormalized.
    """
    from scipy.optimize import nnls

    scale = max(1.0, float(np.abs(V).max()))
    A = np.vstack([V.T / scale, np.full(V.shape[0], rho)])
    b = np.concatenate([x / scale, [rho]])
    w, _ = nnls(A, b)
    s = w.sum()
    return w / s if s > 0 else np.full(V.shape[0], 1.0 / V.shape[0])


def _project_hull_pg(V, X, max_iter=500, improve_tol=1e-12, polish=True):
    """Accelerated projected gradient on the weight simplex, with adaptive
    restart and an active-face KKT/NNLS polish for near-machine-precision
    optima.

    Raises ConvergenceError (best iterate attached) if the iteration cap is
    hit before the objective improvement drops below `improve_tol`.
    """
    n = X.shape[0]
    k = V.shape[0]
    G = V @ V.T
    L = 2.0 * max(float(np.linalg.eigvalsh(G)[-1]), 1e-30)
    # Blend of the nearest single vertex and the centroid starts close to
    # boundary optima without losing interior coverage.
    d2 = ((X[:, None, :] - V[None, :, :]) ** 2).sum(axis=2)
    W = np.full((n, k), 0.5 / k)
    W[np.arange(n), np.argmin(d2, axis=1)] += 0.5
    Z = W.copy()
    t = 1.0
    VX = X @ V.T  # (n, k)

    def objective(Wm):
        R = X - Wm @ V
        return np.einsum("ij,ij->i", R, R)

    prev = objective(W)
    converged = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        grad = 2.0 * (Z @ G - VX)
        W_new = _project_simplex_weights(Z - grad / L)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        Z = W_new + ((t - 1.0) / t_new) * (W_new - W)
        cur = objective(W_new)
        # Adaptive restart: drop momentum whenever the objective backslides.
        if np.any(cur > prev):
            Z = W_new.copy()
            t_new = 1.0
        W, t = W_new, t_new
        converged |= np.abs(prev - cur) < improve_tol
        prev = np.minimum(prev, cur)
        if np.all(converged):
            break

    if not polish:
        if not np.all(converged):
            raise ConvergenceError(
                f"hull projection did not converge for {int((~converged).sum())} "
                f"point(s) within {max_iter} iterations",
                best=W,
            )
        return W

    # Polish pass 1: exact KKT re-solve on the (capped) support found.
    final = objective(W)
    polished = np.zeros(n, dtype=bool)
    for i in range(n):
        support = np.where(W[i] > 1e-10)[0]
        if len(support) > 64:
            support = support[np.argsort(W[i][support])[-64:]]
        if len(support) > 0:
            Vs = V[support]
            m = len(support)
            K = np.zeros((m + 1, m + 1))
            K[:m, :m] = 2.0 * (Vs @ Vs.T)
            K[:m, m] = 1.0
            K[m, :m] = 1.0
            rhs = np.concatenate([2.0 * Vs @ X[i], [1.0]])
            sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            w = sol[:m]
            if np.all(w >= -1e-12):
                w = np.clip(w, 0.0, None)
                w /= w.sum()
                cand = np.zeros(k)
                cand[support] = w
                r = X[i] - cand @ V
                if r @ r <= final[i] + 1e-15:
                    W[i] = cand
                    final[i] = r @ r
                    converged[i] = polished[i] = True

    # Polish pass 2: exact active-set NNLS (sum constraint as a stiff penalty
    # row) for rows the support solve could not certify.
    for i in np.where(~polished)[0]:
        w = _nnls_simplex_weights(V, X[i])
        r = X[i] - w @ V
        if r @ r <= final[i] + 1e-15:
            W[i] = w
            converged[i] = True

    if not np.all(converged):
        raise ConvergenceError(
            f"hull projection did not converge for {int((~converged).sum())} "
            f"point(s) within {max_iter} iterations",
            best=W,
        )
    return W


def hull_projection_weights(V, X) -> np.ndarray:
    """Simplex weights w (rows) with w @ V the nearest hull point to each x."""
    V = np.asarray(V, dtype=float)
    X = np.asarray(X, dtype=float).reshape(-1, V.shape[1])
    if V.shape[0] == 1:
        return np.ones((X.shape[0], 1))
    if V.shape[0] <= _EXACT_HULL_MAX_VERTICES:
        return _project_hull_exact(V, X)
    return _project_hull_pg(V, X)


# ---------------------------------------------------------------------------
# Module-level operation surface
# ---------------------------------------------------------------------------


def contains(A: ConvexSet, x, tol: float = DEFAULT_TOL):
    return A.contains(x, tol)


def project(A: ConvexSet, x):
    return A.project(x)


def distance(A: ConvexSet, x):
    return A.distance(x)


def hull_of(points) -> ConvexSet:
    """Convex closure of a nonempty exemplar set; a single point collapses."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1)
    if P.shape[0] == 0:
        raise GeometryError("hull_of needs at least one exemplar")
    if P.shape[0] == 1:
        return Point(P[0])
    return Hull(P)


def _vertices_of(A: ConvexSet):
    """Extreme points for polytope-like variants, None otherwise."""
    if isinstance(A, Point):
        return A.p.reshape(1, -1)
    if isinstance(A, Hull):
        return A.vertices
    if isinstance(A, Box):
        if A.dim <= 10:
            return A.corners()
        return None
    return None


def _boundary_samples(A: ConvexSet, count, rng):
    if isinstance(A, Ball):
        d = rng.normal(size=(count, A.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return A.center + A.radius * d
    verts = _vertices_of(A)
    if verts is not None:
        return verts
    raise RepresentationError(f"no Minkowski mix representation for {A!r}")


def minkowski_mix(A: ConvexSet, B: ConvexSet, p: float) -> ConvexSet:
    """The set {p*a + (1-p)*b | a in A, b in B}.

    Closed forms per variant pair: balls mix centers and radii, boxes mix
    corners, polytopes mix vertex sets pairwise, products mix factorwise.
    Mixes of a ball with a polytope have no closed form in this family and
    fall back to a pairwise-mix hull of 256 sampled extreme points, flagged
    `approximate`.
    """
    if A.dim != B.dim:
        raise DimensionMismatchError(f"minkowski_mix of dims {A.dim} and {B.dim}")
    if not 0.0 <= p <= 1.0:
        raise GeometryError(f"mix weight must lie in [0, 1], got {p}")
    if p == 0.0:
        return B
    if p == 1.0:
        return A
    q = 1.0 - p

    if isinstance(A, Whole) or isinstance(B, Whole):
        return Whole(A.dim)
    if isinstance(A, Product) or isinstance(B, Product):
        if not (isinstance(A, Product) and isinstance(B, Product)):
            raise RepresentationError("Minkowski mix of Product with non-Product")
        if A.left.dim != B.left.dim:
            raise RepresentationError("Minkowski mix of Products with unequal factor dims")
        return Product(
            minkowski_mix(A.left, B.left, p), minkowski_mix(A.right, B.right, p)
        )
    if isinstance(A, Point) and isinstance(B, Point):
        return Point(p * A.p + q * B.p)
    if isinstance(A, Ball) and isinstance(B, Ball):
        return Ball(p * A.center + q * B.center, p * A.radius + q * B.radius)
    if isinstance(A, Ball) and isinstance(B, Point):
        return Ball(p * A.center + q * B.p, p * A.radius)
    if isinstance(A, Point) and isinstance(B, Ball):
        return Ball(p * A.p + q * B.center, q * B.radius)
    if isinstance(A, Box) and isinstance(B, Box):
        return Box(p * A.lo + q * B.lo, p * A.hi + q * B.hi)
    if isinstance(A, Box) and isinstance(B, Point):
        return Box(p * A.lo + q * B.p, p * A.hi + q * B.p)
    if isinstance(A, Point) and isinstance(B, Box):
        return Box(p * A.p + q * B.lo, p * A.p + q * B.hi)

    VA, VB = _vertices_of(A), _vertices_of(B)
    if VA is not None and VB is not None:
        # Exact: the mix of two polytopes is the hull of pairwise vertex mixes.
        pairs = (p * VA[:, None, :] + q * VB[None, :, :]).reshape(-1, A.dim)
        if pairs.shape[0] == 1:
            return Point(pairs[0])
        return Hull(pairs)

    rng = np.random.Generator(np.random.Philox(_MINKOWSKI_SAMPLE_SEED))
    SA = _boundary_samples(A, _MINKOWSKI_SAMPLE_COUNT, rng)
    SB = _boundary_samples(B, _MINKOWSKI_SAMPLE_COUNT, rng)
    pairs = (p * SA[:, None, :] + q * SB[None, :, :]).reshape(-1, A.dim)
    if pairs.shape[0] > 4096:
        keep = rng.choice(pairs.shape[0], size=4096, replace=False)
        pairs = pairs[keep]
    return Hull(pairs, approximate=True)


def sample_batch(A: ConvexSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """n random points supported in A (not necessarily uniform), vectorized."""
    if isinstance(A, Box):
        return rng.uniform(A.lo, A.hi, size=(n, A.dim))
    if isinstance(A, Ball):
        d = rng.normal(size=(n, A.dim))
        norms = np.linalg.norm(d, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        r = A.radius * rng.uniform(size=(n, 1)) ** (1.0 / max(A.dim, 1))
        return A.center + r * d / norms
    if isinstance(A, Hull):
        w = rng.dirichlet(np.ones(A.vertices.shape[0]), size=n)
        return w @ A.vertices
    if isinstance(A, Point):
        return np.tile(A.p, (n, 1))
    if isinstance(A, Product):
        return np.concatenate(
            [sample_batch(A.left, n, rng), sample_batch(A.right, n, rng)], axis=1
        )
    if isinstance(A, Whole):
        return rng.normal(size=(n, A.dim))
    raise RepresentationError(f"cannot sample from {A!r}")


def affine_range(A: ConvexSet, a) -> tuple:
    """Exact (min, max) of x -> a.x over A, via support-function closed forms.

    Affine functions attain their extrema at extreme points: ball extrema lie
    at center +- radius * a/|a|, box extrema decompose per axis, polytope
    extrema sit on vertices, products split the coefficient vector.
    """
    a = as_point(a) if A.dim > 0 else np.zeros(0)
    if a.shape[0] != A.dim:
        raise DimensionMismatchError(f"coefficients dim {a.shape[0]} != set dim {A.dim}")
    if isinstance(A, Point):
        v = float(a @ A.p)
        return v, v
    if isinstance(A, Ball):
        c = float(a @ A.center)
        r = A.radius * float(np.linalg.norm(a))
        return c - r, c + r
    if isinstance(A, Box):
        lo = float(np.minimum(a * A.lo, a * A.hi).sum())
        hi = float(np.maximum(a * A.lo, a * A.hi).sum())
        return lo, hi
    if isinstance(A, Hull):
        vals = A.vertices @ a
        return float(vals.min()), float(vals.max())
    if isinstance(A, Product):
        l_lo, l_hi = affine_range(A.left, a[: A.left.dim])
        r_lo, r_hi = affine_range(A.right, a[A.left.dim :])
        return l_lo + r_lo, l_hi + r_hi
    if isinstance(A, Whole):
        if np.all(a == 0.0):
            return 0.0, 0.0
        return -math.inf, math.inf
    raise RepresentationError(f"affine_range not defined for {A!r}")


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------


class Space:
    """A convex space: a dimension plus its ambient convex carrier set."""

    def __init__(self, dim: int, carrier: ConvexSet):
        dim = int(dim)
        if dim < 0:
            raise GeometryError("space dimension must be >= 0")
        if carrier.dim != dim:
            raise DimensionMismatchError(
                f"carrier dim {carrier.dim} != space dim {dim}"
            )
        self.dim = dim
        self.carrier = carrier

    def __repr__(self):
        return f"Space(dim={self.dim}, carrier={self.carrier!r})"

    def __eq__(self, other):
        return (
            isinstance(other, Space)
            and self.dim == other.dim
            and self.carrier == other.carrier
        )

    def __hash__(self):
        return hash((self.dim, self.carrier))

    def is_unit(self) -> bool:
        return self.dim == 0

    def to_json(self):
        return {"dim": self.dim, "carrier": self.carrier.to_json()}


#: The monoidal unit I: the zero-dimensional singleton space.
UNIT = Space(0, Point(np.zeros(0)))
UNIT_POINT = np.zeros(0)


def space_of(carrier: ConvexSet) -> Space:
    return Space(carrier.dim, carrier)


def whole_space(dim: int) -> Space:
    return Space(dim, Whole(dim))


def product_space(X: Space, Y: Space) -> Space:
    """Product space: dimensions add, carriers pair.  I is a strict unit."""
    if X.is_unit():
        return Y
    if Y.is_unit():
        return X
    if isinstance(X.carrier, Whole) and isinstance(Y.carrier, Whole):
        return Space(X.dim + Y.dim, Whole(X.dim + Y.dim))
    return Space(X.dim + Y.dim, Product(X.carrier, Y.carrier))


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def set_from_json(data: dict) -> ConvexSet:
    v = data["variant"]
    if v == "ball":
        return Ball(data["center"], data["radius"])
    if v == "box":
        return Box(data["lo"], data["hi"])
    if v == "simplex":
        return Simplex(data["vertices"])
    if v == "hull":
        return Hull(data["vertices"], approximate=data.get("approximate", False))
    if v == "point":
        return Point(data["p"])
    if v == "product":
        return Product(set_from_json(data["left"]), set_from_json(data["right"]))
    if v == "whole":
        return Whole(data["dim"])
    raise GeometryError(f"unknown set variant {v!r}")


def space_from_json(data: dict) -> Space:
    return Space(data["dim"], set_from_json(data["carrier"]))
