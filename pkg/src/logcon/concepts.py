"""Fuzzy concepts: log-concave membership functions X -> [0, 1].

A fuzzy concept grades membership by a measurable log-concave function, so
that C(mix(x, y, p)) >= C(x)^p * C(y)^(1-p).  The closed representation
family here is log-concave by construction:

    Crisp(A)                indicator of a convex set
    GaussFuzz(P, sigma)     exp(-d(x, P)^2 / (2 sigma^2)), the Gaussian
                            fuzzification of a prototype region
    Affine(a, b)            x -> a.x + b, range-validated on the carrier
    Exponential(lam)        x -> lam^(-x) on the unit interval, lam >= 1
    Tensor(C, D)            (x, y) -> C(x) D(y) on the product space
    PointwiseProduct(C, D)  x -> C(x) D(x) on a shared space
    Scalar(s)               constant s in [0, 1]

Indicators of convex sets are log-concave; exp of a concave exponent is
log-concave (squared distance to a convex set is convex); affine [0,1]-valued
maps are concave hence log-concave; and log-concavity is preserved by tensors
and pointwise products.  Quasi-concavity follows, so every t-cut
{x | C(x) >= t} is convex.

Evaluation is defined by the same formula off the carrier as on it; the
[0, 1] range and log-concavity guarantees are stated on the carrier.
"""

from __future__ import annotations

import math

import numpy as np

from logcon.geometry import (
    Box,
    ConvexSet,
    DimensionMismatchError,
    GeometryError,
    Space,
    _as_batch,
    affine_range,
    as_point,
    product_space,
    set_from_json,
    space_from_json,
    whole_space,
)


class ConceptError(ValueError):
    pass


class Concept:
    """Abstract log-concave membership function on a convex space."""

    space: Space

    @property
    def dim(self) -> int:
        return self.space.dim

    def evaluate(self, x):
        """Membership grade(s); accepts a point or an (..., dim) batch."""
        pts, lead = _as_batch(x, self.dim)
        out = self._evaluate(pts)
        return float(out[0]) if lead is None else np.asarray(out).reshape(lead)

    def __call__(self, x):
        return self.evaluate(x)

    def is_continuous(self) -> bool:
        return True

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()


class CrispConcept(Concept):
    """Indicator of a convex region: 1 on it, 0 off it."""

    def __init__(self, region: ConvexSet, space: Space | None = None):
        self.region = region
        self.space = space if space is not None else whole_space(region.dim)
        if region.dim != self.space.dim:
            raise DimensionMismatchError("crisp region dim != space dim")

    def __repr__(self):
        return f"CrispConcept({self.region!r})"

    def _evaluate(self, pts):
        return self.region._contains(pts, 1e-12).astype(float)

    def is_continuous(self):
        return False

    def to_json(self):
        return {
            "body": "crisp",
            "region": self.region.to_json(),
            "space": self.space.to_json(),
        }


class GaussFuzzConcept(Concept):
    """Gaussian fuzzification of a prototype region.

    Peaks at 1 on the prototype and decays as exp(-d^2 / (2 sigma^2)) in the
    point-to-set distance d.  Use `gauss_fuzz` to construct: sigma = 0
    degenerates to the crisp indicator.
    """

    def __init__(self, prototype: ConvexSet, sigma: float, space: Space | None = None):
        if sigma <= 0:
            raise ConceptError("GaussFuzzConcept needs sigma > 0; use gauss_fuzz")
        self.prototype = prototype
        self.sigma = float(sigma)
        self.space = space if space is not None else whole_space(prototype.dim)
        if prototype.dim != self.space.dim:
            raise DimensionMismatchError("prototype dim != space dim")

    def __repr__(self):
        return f"GaussFuzzConcept({self.prototype!r}, sigma={self.sigma})"

    def _evaluate(self, pts):
        d = np.linalg.norm(pts - self.prototype._project(pts), axis=-1)
        return np.exp(-0.5 * (d / self.sigma) ** 2)

    def to_json(self):
        return {
            "body": "gauss_fuzz",
            "prototype": self.prototype.to_json(),
            "sigma": self.sigma,
            "space": self.space.to_json(),
        }


class AffineConcept(Concept):
    """x -> a.x + b, validated to stay within [0, 1] on the carrier."""

    def __init__(self, a, b: float, space: Space):
        self.a = as_point(a) if space.dim > 0 else np.zeros(0)
        self.b = float(b)
        self.space = space
        if self.a.shape[0] != space.dim:
            raise DimensionMismatchError("coefficient dim != space dim")
        lo, hi = affine_range(space.carrier, self.a)
        if lo + self.b < -1e-9 or hi + self.b > 1.0 + 1e-9:
            raise ConceptError(
                f"affine concept leaves [0,1] on the carrier: range "
                f"[{lo + self.b}, {hi + self.b}]"
            )
        self.a.setflags(write=False)

    def __repr__(self):
        return f"AffineConcept(a={self.a.tolist()}, b={self.b})"

    def _evaluate(self, pts):
        return pts @ self.a + self.b

    def to_json(self):
        return {
            "body": "affine",
            "a": self.a.tolist(),
            "b": self.b,
            "space": self.space.to_json(),
        }


class ExponentialConcept(Concept):
    """x -> lam^(-x) on the unit interval, lam >= 1."""

    def __init__(self, lam: float):
        if lam < 1.0:
            raise ConceptError(f"exponential concept needs lambda >= 1, got {lam}")
        self.lam = float(lam)
        self.space = Space(1, Box([0.0], [1.0]))

    def __repr__(self):
        return f"ExponentialConcept(lam={self.lam})"

    def _evaluate(self, pts):
        return np.power(self.lam, -pts[..., 0])

    def to_json(self):
        return {"body": "exponential", "lam": self.lam}


class TensorConcept(Concept):
    """(x, y) -> C(x) D(y) on the product space."""

    def __init__(self, left: Concept, right: Concept):
        self.left = left
        self.right = right
        self.space = product_space(left.space, right.space)

    def __repr__(self):
        return f"TensorConcept({self.left!r}, {self.right!r})"

    def _evaluate(self, pts):
        k = self.left.dim
        return self.left._evaluate(pts[..., :k]) * self.right._evaluate(pts[..., k:])

    def is_continuous(self):
        return self.left.is_continuous() and self.right.is_continuous()

    def to_json(self):
        return {
            "body": "tensor",
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }


class ProductConcept(Concept):
    """Pointwise product x -> C(x) D(x) of concepts on one space."""

    def __init__(self, left: Concept, right: Concept):
        if left.space != right.space:
            raise DimensionMismatchError("pointwise product needs a shared space")
        self.left = left
        self.right = right
        self.space = left.space

    def __repr__(self):
        return f"ProductConcept({self.left!r}, {self.right!r})"

    def _evaluate(self, pts):
        return self.left._evaluate(pts) * self.right._evaluate(pts)

    def is_continuous(self):
        return self.left.is_continuous() and self.right.is_continuous()

    def to_json(self):
        return {
            "body": "product",
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }


class ScalarConcept(Concept):
    def __init__(self, s: float, space: Space):
        if not 0.0 <= s <= 1.0:
            raise ConceptError(f"scalar concept must lie in [0,1], got {s}")
        self.s = float(s)
        self.space = space

    def __repr__(self):
        return f"ScalarConcept({self.s})"

    def _evaluate(self, pts):
        return np.full(pts.shape[:-1], self.s)

    def to_json(self):
        return {"body": "scalar", "s": self.s, "space": self.space.to_json()}


# ---------------------------------------------------------------------------
# Constructors and operations
# ---------------------------------------------------------------------------


def crisp(region: ConvexSet, space: Space | None = None) -> Concept:
    return CrispConcept(region, space)


def gauss_fuzz(prototype: ConvexSet, sigma: float, space: Space | None = None) -> Concept:
    """Gaussian fuzzification of a prototype; sigma = 0 is the crisp limit."""
    if sigma < 0:
        raise ConceptError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return CrispConcept(prototype, space)
    return GaussFuzzConcept(prototype, sigma, space)


def affine_concept(a, b: float, space: Space) -> Concept:
    return AffineConcept(a, b, space)


def exponential(lam: float) -> Concept:
    return ExponentialConcept(lam)


def scalar_concept(s: float, space: Space) -> Concept:
    return ScalarConcept(s, space)


def tensor(C: Concept, D: Concept) -> Concept:
    return TensorConcept(C, D)


def multiply(C: Concept, D: Concept) -> Concept:
    return ProductConcept(C, D)


def evaluate(C: Concept, x):
    return C.evaluate(x)


def t_cut_test(C: Concept, t: float, x) -> bool:
    """Whether x lies in the t-cut {y | C(y) >= t}; cuts of log-concave
    concepts are convex."""
    if not 0.0 < t <= 1.0:
        raise ConceptError(f"t must lie in (0, 1], got {t}")
    val = C.evaluate(x)
    if isinstance(val, float):
        return val >= t
    return val >= t


def concept_from_json(data: dict) -> Concept:
    body = data["body"]
    if body == "crisp":
        return CrispConcept(set_from_json(data["region"]), space_from_json(data["space"]))
    if body == "gauss_fuzz":
        return GaussFuzzConcept(
            set_from_json(data["prototype"]), data["sigma"], space_from_json(data["space"])
        )
    if body == "affine":
        return AffineConcept(data["a"], data["b"], space_from_json(data["space"]))
    if body == "exponential":
        return ExponentialConcept(data["lam"])
    if body == "tensor":
        return TensorConcept(concept_from_json(data["left"]), concept_from_json(data["right"]))
    if body == "product":
        return ProductConcept(concept_from_json(data["left"]), concept_from_json(data["right"]))
    if body == "scalar":
        return ScalarConcept(data["s"], space_from_json(data["space"]))
    raise ConceptError(f"unknown concept body {body!r}")
