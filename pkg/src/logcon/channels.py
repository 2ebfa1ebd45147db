"""Log-concave channels: the symmetric monoidal calculus of fuzzy processes.

A channel X ~> Y sends each point of X to a sub-probability measure on Y,
with kernel f(x, A) log-concave on convex sets:

    f(mix(x, y, p), minkowski_mix(A, B, p)) >= f(x, A)^p f(y, B)^(1-p)

Channels form lazy symbolic trees.  Leaves:

    CrispAffine(M, c, domain)    x -> Dirac(Mx + c) on a convex partial
                                 domain, zero outside (the crisp channels)
    NoisyAffine(M, c, domain, noise)
                                 x -> noise translated by Mx + c,
                                 (x, A) -> noise(A - Mx - c)
    DensityChannel(rho)          (x, A) -> integral of rho(x, .) over A for a
                                 jointly log-concave two-argument density
    Update(C)                    x -> C(x) * Dirac(x), Bayesian-style update
    Copy / Discard / Identity / Swap
                                 the comonoid and coherence structure
    StatePrep(omega) / Effect(C) states and effects as channels from/to I

plus Compose and Tensor nodes.  Evaluation simplifies before falling back to
Monte Carlo: Dirac-producing channels compose exactly, the Gaussian-affine
fragment (affine maps with Gaussian noise, including copy/discard/swap
wiring) composes and tensors in closed form, updates reweight sample clouds
exactly, and everything else pushes seeded samples.

Channel trees are immutable and evaluation is pure given seeds, so
concurrent evaluation is safe.
"""

from __future__ import annotations

import math

import numpy as np

from logcon import measures
from logcon.concepts import Concept, ScalarConcept
from logcon.geometry import (
    Box,
    ConvexSet,
    DimensionMismatchError,
    GeometryError,
    Product,
    Space,
    UNIT,
    UNIT_POINT,
    Whole,
    as_point,
    product_space,
    set_from_json,
    space_from_json,
    whole_space,
)
from logcon.measures import (
    DiracState,
    GaussianState,
    Integrator,
    NumericResult,
    SampleCloudState,
    ScaledState,
    State,
    UniformState,
    mass_with_error,
    pair_with_error,
    state_from_json,
    tensor_states,
    translate_state,
)
from logcon.rng import ensure_rng, make_rng

#: Default Monte Carlo sample count per channel application.
MC_APPLY_SAMPLES = 10_000


class ChannelError(ValueError):
    pass


def zero_state(space: Space) -> State:
    return ScaledState(0.0, DiracState(np.zeros(space.dim), space))


def _is_dirac_like(state: State):
    """(point, mass) when the state is zero or a scaled point mass."""
    s = 1.0
    while isinstance(state, ScaledState):
        s *= state.s
        state = state.inner
    if isinstance(state, DiracState):
        return state.x, s
    if isinstance(state, GaussianState) and np.all(state.Sigma == 0.0):
        return state.mu, s
    if s == 0.0:
        return np.zeros(state.dim), 0.0
    return None


class Channel:
    """Abstract channel between convex spaces."""

    dom: Space
    cod: Space

    def apply(self, x, seed=0, n_mc: int = MC_APPLY_SAMPLES) -> State:
        """The output state f(x); seeded when sampling is involved."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dom.dim:
            raise DimensionMismatchError(
                f"input dim {x.shape[0]} != channel dom dim {self.dom.dim}"
            )
        return self._apply(x, ensure_rng(seed), n_mc)

    def kernel(self, x, A: ConvexSet, seed=0, n_mc: int = MC_APPLY_SAMPLES) -> float:
        return self.kernel_with_error(x, A, seed, n_mc).value

    def kernel_with_error(
        self, x, A: ConvexSet, seed=0, n_mc: int = MC_APPLY_SAMPLES
    ) -> NumericResult:
        """f(x, A) = mass of apply(f, x) on A, with stderr and strategy."""
        return mass_with_error(self.apply(x, seed, n_mc), A)

    def __rshift__(self, other: "Channel") -> "Channel":
        """Diagrammatic composition: (f >> g) runs f first."""
        return compose(other, self)

    def __matmul__(self, other: "Channel") -> "Channel":
        return tensor(self, other)

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()


class IdentityChannel(Channel):
    def __init__(self, space: Space):
        self.dom = self.cod = space

    def __repr__(self):
        return f"IdentityChannel({self.dom!r})"

    def _apply(self, x, rng, n_mc):
        return DiracState(x, self.cod)

    def _push(self, state, rng, n_mc):
        return state

    def to_json(self):
        return {"body": "identity", "space": self.dom.to_json()}


class CopyChannel(Channel):
    """x -> Dirac((x, x)), the comonoid comultiplication."""

    def __init__(self, space: Space):
        self.dom = space
        self.cod = product_space(space, space)

    def __repr__(self):
        return f"CopyChannel({self.dom!r})"

    def _apply(self, x, rng, n_mc):
        return DiracState(np.concatenate([x, x]), self.cod)

    def to_json(self):
        return {"body": "copy", "space": self.dom.to_json()}


class DiscardChannel(Channel):
    """x -> 1, the comonoid counit; the unique effect with full mass."""

    def __init__(self, space: Space):
        self.dom = space
        self.cod = UNIT

    def __repr__(self):
        return f"DiscardChannel({self.dom!r})"

    def _apply(self, x, rng, n_mc):
        return DiracState(UNIT_POINT, UNIT)

    def to_json(self):
        return {"body": "discard", "space": self.dom.to_json()}


class SwapChannel(Channel):
    def __init__(self, left: Space, right: Space):
        self.left = left
        self.right = right
        self.dom = product_space(left, right)
        self.cod = product_space(right, left)

    def __repr__(self):
        return f"SwapChannel({self.left!r}, {self.right!r})"

    def _apply(self, x, rng, n_mc):
        k = self.left.dim
        return DiracState(np.concatenate([x[k:], x[:k]]), self.cod)

    def to_json(self):
        return {
            "body": "swap",
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }


class CrispAffineChannel(Channel):
    """Partial affine map as a channel: Dirac(Mx + c) on its domain, zero off."""

    def __init__(self, M, c, domain: ConvexSet | None = None,
                 dom: Space | None = None, cod: Space | None = None):
        self.M = np.atleast_2d(np.asarray(M, dtype=float))
        m, n = self.M.shape
        self.c = np.zeros(m) if c is None else np.asarray(c, dtype=float).reshape(-1)
        if self.c.shape[0] != m:
            raise DimensionMismatchError("offset dim != matrix rows")
        self.domain = domain if domain is not None else Whole(n)
        if self.domain.dim != n:
            raise DimensionMismatchError("domain dim != matrix columns")
        self.dom = dom if dom is not None else whole_space(n)
        self.cod = cod if cod is not None else whole_space(m)
        if self.dom.dim != n or self.cod.dim != m:
            raise DimensionMismatchError("matrix shape disagrees with spaces")
        self.M.setflags(write=False)
        self.c.setflags(write=False)

    def __repr__(self):
        return f"CrispAffineChannel(M={self.M.tolist()}, c={self.c.tolist()})"

    def _apply(self, x, rng, n_mc):
        if not self.domain.contains(x):
            return zero_state(self.cod)
        return DiracState(self.M @ x + self.c, self.cod)

    def to_json(self):
        return {
            "body": "crisp_affine",
            "M": self.M.tolist(),
            "c": self.c.tolist(),
            "domain": self.domain.to_json(),
            "dom": self.dom.to_json(),
            "cod": self.cod.to_json(),
        }


class NoisyAffineChannel(Channel):
    """Affine map plus independent additive noise: (x, A) -> noise(A - Mx - c)."""

    def __init__(self, M, c, noise: State, domain: ConvexSet | None = None,
                 dom: Space | None = None, cod: Space | None = None):
        self.M = np.atleast_2d(np.asarray(M, dtype=float))
        m, n = self.M.shape
        self.c = np.zeros(m) if c is None else np.asarray(c, dtype=float).reshape(-1)
        if noise.dim != m:
            raise DimensionMismatchError("noise dim != matrix rows")
        self.noise = noise
        self.domain = domain if domain is not None else Whole(n)
        if self.domain.dim != n:
            raise DimensionMismatchError("domain dim != matrix columns")
        self.dom = dom if dom is not None else whole_space(n)
        self.cod = cod if cod is not None else noise.space
        self.M.setflags(write=False)
        self.c.setflags(write=False)

    def __repr__(self):
        return (
            f"NoisyAffineChannel(M={self.M.tolist()}, c={self.c.tolist()}, "
            f"noise={self.noise!r})"
        )

    def _apply(self, x, rng, n_mc):
        if not self.domain.contains(x):
            return zero_state(self.cod)
        return translate_state(self.noise, self.M @ x + self.c)

    def to_json(self):
        return {
            "body": "noisy_affine",
            "M": self.M.tolist(),
            "c": self.c.tolist(),
            "noise": self.noise.to_json(),
            "domain": self.domain.to_json(),
            "dom": self.dom.to_json(),
            "cod": self.cod.to_json(),
        }


class DensityChannel(Channel):
    """Channel from a jointly log-concave density rho(x, y) with
    sub-probability slices: integral of rho(x, .) <= 1 for probed x.

    The codomain carrier must be bounded; applications produce importance
    clouds over it and kernels integrate rho(x, .) numerically.
    """

    def __init__(self, dom: Space, cod: Space, rho, description: str = "",
                 probe_count: int = 16, probe_seed: int = 0):
        if cod.carrier.bounding_box() is None:
            raise ChannelError("density channel needs a bounded codomain carrier")
        self.dom = dom
        self.cod = cod
        self.rho = rho
        self.description = description
        self._check_subprobability(probe_count, probe_seed)

    def _check_subprobability(self, probe_count, probe_seed):
        rng = make_rng(probe_seed, 0xD5)
        lo, hi = self.cod.carrier.bounding_box()
        ys = rng.uniform(lo, hi, size=(4096, self.cod.dim))
        inside = self.cod.carrier.contains(ys)
        vol = float(np.prod(hi - lo))
        for _ in range(probe_count):
            x = self.dom.carrier.sample_point(rng)
            vals = self.rho(np.tile(x, (len(ys), 1)), ys) * inside
            est = vol * float(vals.mean())
            if est > 1.0 + 1e-6 + 3.0 * vol * float(vals.std()) / math.sqrt(len(ys)):
                raise ChannelError(
                    f"density slice at x={x} integrates to ~{est:.4f} > 1"
                )

    def __repr__(self):
        return f"DensityChannel({self.description or 'rho'})"

    def _apply(self, x, rng, n_mc):
        lo, hi = self.cod.carrier.bounding_box()
        ys = rng.uniform(lo, hi, size=(n_mc, self.cod.dim))
        inside = self.cod.carrier.contains(ys)
        vol = float(np.prod(hi - lo))
        w = self.rho(np.tile(x, (n_mc, 1)), ys) * inside * (vol / n_mc)
        total = w.sum()
        if total > 1.0:
            w = w / total
        return SampleCloudState(ys, w, self.cod)

    def to_json(self):
        raise ChannelError("density channels hold opaque callables; not serializable")


class UpdateChannel(Channel):
    """'Update by C': x -> C(x) Dirac(x).  Output mass equals C(x)."""

    def __init__(self, concept: Concept):
        self.concept = concept
        self.dom = self.cod = concept.space

    def __repr__(self):
        return f"UpdateChannel({self.concept!r})"

    def _apply(self, x, rng, n_mc):
        return ScaledState(float(self.concept.evaluate(x)), DiracState(x, self.cod))

    def to_json(self):
        return {"body": "update", "concept": self.concept.to_json()}


class EffectChannel(Channel):
    """A fuzzy concept as a channel X ~> I."""

    def __init__(self, concept: Concept):
        self.concept = concept
        self.dom = concept.space
        self.cod = UNIT

    def __repr__(self):
        return f"EffectChannel({self.concept!r})"

    def _apply(self, x, rng, n_mc):
        return ScaledState(float(self.concept.evaluate(x)), DiracState(UNIT_POINT, UNIT))

    def to_json(self):
        return {"body": "effect", "concept": self.concept.to_json()}


class StatePrepChannel(Channel):
    """A state as a channel I ~> X."""

    def __init__(self, state: State):
        self.state = state
        self.dom = UNIT
        self.cod = state.space

    def __repr__(self):
        return f"StatePrepChannel({self.state!r})"

    def _apply(self, x, rng, n_mc):
        return self.state

    def to_json(self):
        return {"body": "state_prep", "state": self.state.to_json()}


class ComposeChannel(Channel):
    """g after f, evaluated by pushing f's output state through g."""

    def __init__(self, after: Channel, before: Channel):
        if before.cod != after.dom:
            raise DimensionMismatchError(
                f"compose mismatch: cod {before.cod!r} vs dom {after.dom!r}"
            )
        self.after = after
        self.before = before
        self.dom = before.dom
        self.cod = after.cod

    def __repr__(self):
        return f"ComposeChannel({self.after!r} o {self.before!r})"

    def _apply(self, x, rng, n_mc):
        mid = self.before._apply(x, rng, n_mc)
        return push(self.after, mid, rng, n_mc)

    def to_json(self):
        return {
            "body": "compose",
            "after": self.after.to_json(),
            "before": self.before.to_json(),
        }


class TensorChannel(Channel):
    def __init__(self, left: Channel, right: Channel):
        self.left = left
        self.right = right
        self.dom = product_space(left.dom, right.dom)
        self.cod = product_space(left.cod, right.cod)

    def __repr__(self):
        return f"TensorChannel({self.left!r}, {self.right!r})"

    def _apply(self, x, rng, n_mc):
        k = self.left.dom.dim
        ls = self.left._apply(x[:k], rng, n_mc)
        rs = self.right._apply(x[k:], rng, n_mc)
        return _tensor_with_rng(ls, rs, rng, n_mc)

    def to_json(self):
        return {
            "body": "tensor",
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }


def _tensor_with_rng(ls, rs, rng, n_mc):
    seed = int(rng.integers(2**62))
    return tensor_states(ls, rs, seed=seed, n=n_mc)


# ---------------------------------------------------------------------------
# The Gaussian-affine fragment: closed-form extraction
# ---------------------------------------------------------------------------


def _gauss_map(ch: Channel):
    """(M, c, Sigma, domain) when the channel acts as y = Mx + c + N(0, Sigma)
    on a convex domain (zero off it), else None.

    Covers the crisp/noisy affine leaves, the coherence wiring, Gaussian and
    Dirac state preparations, and composites/tensors thereof; this is the
    closed-form Gaussian-category fragment.
    """
    if isinstance(ch, IdentityChannel):
        n = ch.dom.dim
        return np.eye(n), np.zeros(n), np.zeros((n, n)), Whole(n)
    if isinstance(ch, CopyChannel):
        n = ch.dom.dim
        M = np.vstack([np.eye(n), np.eye(n)])
        return M, np.zeros(2 * n), np.zeros((2 * n, 2 * n)), Whole(n)
    if isinstance(ch, DiscardChannel):
        n = ch.dom.dim
        return np.zeros((0, n)), np.zeros(0), np.zeros((0, 0)), Whole(n)
    if isinstance(ch, SwapChannel):
        k, m = ch.left.dim, ch.right.dim
        M = np.zeros((k + m, k + m))
        M[:m, k:] = np.eye(m)
        M[m:, :k] = np.eye(k)
        return M, np.zeros(k + m), np.zeros((k + m, k + m)), Whole(k + m)
    if isinstance(ch, CrispAffineChannel):
        m = ch.M.shape[0]
        return ch.M, ch.c, np.zeros((m, m)), ch.domain
    if isinstance(ch, NoisyAffineChannel):
        if isinstance(ch.noise, GaussianState):
            return ch.M, ch.c + ch.noise.mu, ch.noise.Sigma, ch.domain
        if isinstance(ch.noise, DiracState):
            m = ch.M.shape[0]
            return ch.M, ch.c + ch.noise.x, np.zeros((m, m)), ch.domain
        return None
    if isinstance(ch, StatePrepChannel):
        st = ch.state
        if isinstance(st, DiracState):
            n = st.dim
            return np.zeros((n, 0)), st.x, np.zeros((n, n)), Whole(0)
        if isinstance(st, GaussianState):
            n = st.dim
            return np.zeros((n, 0)), st.mu, st.Sigma, Whole(0)
        return None
    if isinstance(ch, ComposeChannel):
        f = _gauss_map(ch.before)
        g = _gauss_map(ch.after)
        if f is None or g is None or not isinstance(g[3], Whole):
            return None
        Mf, cf, Sf, df = f
        Mg, cg, Sg, _ = g
        return Mg @ Mf, Mg @ cf + cg, Mg @ Sf @ Mg.T + Sg, df
    if isinstance(ch, TensorChannel):
        f = _gauss_map(ch.left)
        g = _gauss_map(ch.right)
        if f is None or g is None:
            return None
        Mf, cf, Sf, df = f
        Mg, cg, Sg, dg = g
        mf, nf = Mf.shape
        mg, ng = Mg.shape
        M = np.zeros((mf + mg, nf + ng))
        M[:mf, :nf] = Mf
        M[mf:, nf:] = Mg
        S = np.zeros((mf + mg, mf + mg))
        S[:mf, :mf] = Sf
        S[mf:, mf:] = Sg
        if isinstance(df, Whole) and isinstance(dg, Whole):
            domain = Whole(nf + ng)
        elif df.dim == 0:
            domain = dg
        elif dg.dim == 0:
            domain = df
        else:
            domain = Product(df, dg)
        return M, np.concatenate([cf, cg]), S, domain
    return None


def _gauss_state(state: State):
    """(mu, Sigma, scale) for Dirac/Gaussian states (scaled), else None."""
    s = 1.0
    while isinstance(state, ScaledState):
        s *= state.s
        state = state.inner
    if isinstance(state, DiracState):
        return state.x, np.zeros((state.dim, state.dim)), s
    if isinstance(state, GaussianState):
        return state.mu, state.Sigma, s
    return None


# ---------------------------------------------------------------------------
# State-level evaluation
# ---------------------------------------------------------------------------


def push(ch: Channel, state: State, rng=None, n_mc: int = MC_APPLY_SAMPLES) -> State:
    """Push a state through a channel (the composition integral, evaluated).

    Closed forms: Dirac inputs reduce to plain application; Gaussian inputs
    through the Gaussian-affine fragment stay Gaussian (valid when the
    channel's partial domain is the whole space); updates and effects
    reweight sample clouds exactly.  Anything else is sampled.
    """
    rng = ensure_rng(rng if rng is not None else 0)
    if state.dim != ch.dom.dim:
        raise DimensionMismatchError("state dim != channel dom dim")

    if state.total_mass() == 0.0:
        return zero_state(ch.cod)

    dl = _is_dirac_like(state)
    if dl is not None:
        x, s = dl
        out = ch._apply(x, rng, n_mc)
        return out if s == 1.0 else _scale(out, s)

    if isinstance(ch, IdentityChannel):
        return state
    if isinstance(ch, ComposeChannel):
        mid = push(ch.before, state, rng, n_mc)
        return push(ch.after, mid, rng, n_mc)
    if isinstance(ch, StatePrepChannel):
        return _scale(ch.state, state.total_mass())
    if isinstance(ch, DiscardChannel):
        return _scale(DiracState(UNIT_POINT, UNIT), state.total_mass())
    if isinstance(ch, EffectChannel):
        if isinstance(state, SampleCloudState):
            # Keep the empirical structure so the scalar carries a stderr.
            w = state.weights * np.asarray(
                ch.concept.evaluate(state.points), dtype=float
            )
            return SampleCloudState(np.zeros((len(w), 0)), w, UNIT)
        res = pair_with_error(state, ch.concept)
        return ScaledState(min(res.value, 1.0), DiracState(UNIT_POINT, UNIT))

    gm = _gauss_map(ch)
    gs = _gauss_state(state)
    if gm is not None and gs is not None and isinstance(gm[3], Whole):
        M, c, S, _ = gm
        mu, Sig, scale = gs
        out = GaussianState(M @ mu + c, M @ Sig @ M.T + S, ch.cod)
        return out if scale == 1.0 else ScaledState(scale, out)

    if isinstance(ch, UpdateChannel) and isinstance(state, SampleCloudState):
        w = state.weights * np.asarray(ch.concept.evaluate(state.points), dtype=float)
        return SampleCloudState(state.points, w, ch.cod)

    if isinstance(ch, TensorChannel) and isinstance(state, SampleCloudState):
        return _push_cloud_tensor(ch, state, rng, n_mc)

    if gm is not None and isinstance(state, SampleCloudState):
        return _push_cloud_gauss(ch.cod, gm, state, rng)

    if isinstance(state, SampleCloudState):
        return _push_cloud_generic(ch, state, rng)

    # General fallback: cloudify the input, then push the cloud.
    cloud = _cloudify(state, rng, n_mc)
    return push(ch, cloud, rng, n_mc)


def _scale(state: State, s: float) -> State:
    if s == 1.0:
        return state
    if isinstance(state, ScaledState):
        return ScaledState(s * state.s, state.inner)
    if isinstance(state, SampleCloudState):
        return SampleCloudState(state.points, s * state.weights, state.space)
    return ScaledState(s, state)


def _cloudify(state: State, rng, n_mc) -> SampleCloudState:
    if isinstance(state, SampleCloudState):
        return state
    m = state.total_mass()
    pts = state._sample(n_mc, rng)
    return SampleCloudState(pts, np.full(n_mc, m / n_mc), state.space)


def _push_cloud_gauss(cod, gm, cloud: SampleCloudState, rng) -> State:
    M, c, S, domain = gm
    inside = domain.contains(cloud.points)
    pts = cloud.points @ M.T + c
    if np.any(S):
        evals, evecs = np.linalg.eigh(S)
        L = evecs @ np.diag(np.sqrt(np.clip(evals, 0.0, None)))
        pts = pts + rng.normal(size=(pts.shape[0], S.shape[0])) @ L.T
    w = cloud.weights * inside
    return SampleCloudState(pts, w, cod)


def _push_cloud_generic(ch: Channel, cloud: SampleCloudState, rng) -> State:
    """One output draw per cloud point, weighted by the output mass."""
    out_pts = np.zeros((cloud.points.shape[0], ch.cod.dim))
    out_w = np.zeros(cloud.points.shape[0])
    for i, (pt, w) in enumerate(zip(cloud.points, cloud.weights)):
        if w == 0.0:
            continue
        st = ch._apply(pt, rng, 64)
        m = st.total_mass()
        out_w[i] = w * m
        if out_w[i] > 0.0:
            out_pts[i] = st._sample(1, rng)[0]
    return SampleCloudState(out_pts, out_w, ch.cod)


def _push_cloud_tensor(ch: TensorChannel, cloud: SampleCloudState, rng, n_mc) -> State:
    k = ch.left.dom.dim
    out_pts = np.zeros((cloud.points.shape[0], ch.cod.dim))
    out_w = np.zeros(cloud.points.shape[0])
    for i, (pt, w) in enumerate(zip(cloud.points, cloud.weights)):
        if w == 0.0:
            continue
        ls = ch.left._apply(pt[:k], rng, 64)
        rs = ch.right._apply(pt[k:], rng, 64)
        ml, mr = ls.total_mass(), rs.total_mass()
        out_w[i] = w * ml * mr
        if out_w[i] > 0.0:
            lx = ls._sample(1, rng)[0]
            rx = rs._sample(1, rng)[0]
            out_pts[i] = np.concatenate([lx, rx])
    return SampleCloudState(out_pts, out_w, ch.cod)


# ---------------------------------------------------------------------------
# Constructors and operations
# ---------------------------------------------------------------------------


def identity(space: Space) -> Channel:
    return IdentityChannel(space)


def copy_channel(space: Space) -> Channel:
    return CopyChannel(space)


def discard(space: Space) -> Channel:
    return DiscardChannel(space)


def swap(left: Space, right: Space) -> Channel:
    return SwapChannel(left, right)


def crisp_affine(M, c=None, domain=None, dom=None, cod=None) -> Channel:
    return CrispAffineChannel(M, c, domain, dom, cod)


def noisy_affine(M, c, noise: State, domain=None, dom=None, cod=None) -> Channel:
    return NoisyAffineChannel(M, c, noise, domain, dom, cod)


def update(concept: Concept) -> Channel:
    """The 'update by C' map x -> C(x) Dirac(x)."""
    return UpdateChannel(concept)


def effect(concept: Concept) -> Channel:
    return EffectChannel(concept)


def state_prep(state: State) -> Channel:
    return StatePrepChannel(state)


def compose(g: Channel, f: Channel) -> Channel:
    """g o f, with peephole simplification of unit laws and the
    Gaussian-affine closed forms (mean M2(M1 x + c1) + c2, covariance
    M2 S1 M2' + S2)."""
    if f.cod != g.dom:
        raise DimensionMismatchError(
            f"compose mismatch: cod {f.cod!r} vs dom {g.dom!r}"
        )
    if isinstance(f, IdentityChannel):
        return g
    if isinstance(g, IdentityChannel):
        return f

    gf = _gauss_map(g)
    ff = _gauss_map(f)
    if (
        gf is not None
        and ff is not None
        and isinstance(gf[3], Whole)
        and isinstance(f, (CrispAffineChannel, NoisyAffineChannel))
        and isinstance(g, (CrispAffineChannel, NoisyAffineChannel))
    ):
        Mf, cf, Sf, df = ff
        Mg, cg, Sg, _ = gf
        M = Mg @ Mf
        c = Mg @ cf + cg
        S = Mg @ Sf @ Mg.T + Sg
        if np.any(S):
            noise = GaussianState(np.zeros(M.shape[0]), S, g.cod)
            return NoisyAffineChannel(M, c, noise, df, f.dom, g.cod)
        return CrispAffineChannel(M, c, df, f.dom, g.cod)

    return ComposeChannel(g, f)


def tensor(f: Channel, g: Channel) -> Channel:
    """f (x) g with product-measure semantics: kernel values multiply."""
    return TensorChannel(f, g)


def convolve(f: Channel, g: Channel, seed=0) -> Channel:
    """The convolution f * g: pointwise sum of independent outputs,
    assembled as (+) o (f (x) g) o copy.  Output carriers must be all of
    R^m so that addition stays inside the space."""
    if f.dom != g.dom:
        raise DimensionMismatchError("convolution needs a shared domain")
    if f.cod != g.cod:
        raise DimensionMismatchError("convolution needs a shared codomain")
    if not isinstance(f.cod.carrier, Whole):
        raise ChannelError("convolution needs codomain carrier = R^m")
    m = f.cod.dim
    add = CrispAffineChannel(
        np.hstack([np.eye(m), np.eye(m)]),
        np.zeros(m),
        dom=product_space(f.cod, g.cod),
        cod=f.cod,
    )
    return compose(add, compose(TensorChannel(f, g), CopyChannel(f.dom)))


def pushforward(f: Channel, state: State, seed=0, n_mc: int = MC_APPLY_SAMPLES) -> State:
    """The output state f_*(omega): compose(f, state_prep(omega)) at the
    unit point."""
    return push(f, state, ensure_rng(seed), n_mc)


class PullbackEffect:
    """An effect x -> pair(f(x), C): a concept pulled back along a channel.

    Log-concave by the closure of log-concave channels under composition,
    but certified only by sampling, not by construction; it is a raw
    evaluable, not a symbolic Concept.
    """

    def __init__(self, channel: Channel, concept, seed=0, n_mc: int = MC_APPLY_SAMPLES):
        self.channel = channel
        self.concept = concept
        self.space = channel.dom
        self.seed = seed
        self.n_mc = n_mc

    @property
    def dim(self):
        return self.space.dim

    def __repr__(self):
        return f"PullbackEffect({self.channel!r}, {self.concept!r})"

    def evaluate_with_error(self, x) -> NumericResult:
        st = self.channel.apply(x, seed=self.seed, n_mc=self.n_mc)
        return pair_with_error(st, self.concept)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.evaluate_with_error(x).value
        flat = x.reshape(-1, x.shape[-1])
        out = np.array([self.evaluate_with_error(p).value for p in flat])
        return out.reshape(x.shape[:-1])

    def __call__(self, x):
        return self.evaluate(x)


def pullback_effect(f: Channel, concept, seed=0, n_mc: int = MC_APPLY_SAMPLES) -> PullbackEffect:
    """Transform a concept on the codomain into an effect on the domain by
    precomposition with the channel."""
    return PullbackEffect(f, concept, seed, n_mc)


def scalar_with_error(state: State) -> NumericResult:
    """The scalar carried by a state on the unit space, with an error bar
    when the state is an empirical cloud."""
    if state.dim != 0:
        raise ChannelError("scalar extraction needs a state on the unit space")
    if isinstance(state, SampleCloudState):
        w = state.weights
        n = max(len(w), 2)
        stderr = math.sqrt(n / (n - 1) * float(((w - w.mean()) ** 2).sum()))
        return NumericResult(state.total_mass(), stderr, "monte-carlo")
    return NumericResult(state.total_mass(), 0.0, "closed-form")


def is_crisp(f: Channel, probes, seed=0) -> bool:
    """Whether the channel is crisp: every output zero or a point measure.

    Structurally true for the affine-Dirac fragment; otherwise decided on
    the probe points.  Crisp log-concave channels are exactly the partial
    affine maps.
    """
    if isinstance(f, (CrispAffineChannel, IdentityChannel, CopyChannel,
                      SwapChannel, DiscardChannel)):
        return True
    gm = _gauss_map(f)
    if gm is not None and not np.any(gm[2]):
        return True
    for x in probes:
        st = f.apply(x, seed=seed)
        if st.total_mass() <= 1e-12:
            continue
        dl = _is_dirac_like(st)
        if dl is None:
            return False
        if not math.isclose(dl[1], 1.0, abs_tol=1e-9):
            return False
    return True


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def channel_from_json(data: dict) -> Channel:
    from logcon.concepts import concept_from_json

    body = data["body"]
    if body == "identity":
        return IdentityChannel(space_from_json(data["space"]))
    if body == "copy":
        return CopyChannel(space_from_json(data["space"]))
    if body == "discard":
        return DiscardChannel(space_from_json(data["space"]))
    if body == "swap":
        return SwapChannel(space_from_json(data["left"]), space_from_json(data["right"]))
    if body == "crisp_affine":
        return CrispAffineChannel(
            data["M"], data["c"], set_from_json(data["domain"]),
            space_from_json(data["dom"]), space_from_json(data["cod"]),
        )
    if body == "noisy_affine":
        return NoisyAffineChannel(
            data["M"], data["c"], state_from_json(data["noise"]),
            set_from_json(data["domain"]),
            space_from_json(data["dom"]), space_from_json(data["cod"]),
        )
    if body == "update":
        return UpdateChannel(concept_from_json(data["concept"]))
    if body == "effect":
        return EffectChannel(concept_from_json(data["concept"]))
    if body == "state_prep":
        return StatePrepChannel(state_from_json(data["state"]))
    if body == "compose":
        return ComposeChannel(channel_from_json(data["after"]), channel_from_json(data["before"]))
    if body == "tensor":
        return TensorChannel(channel_from_json(data["left"]), channel_from_json(data["right"]))
    raise ChannelError(f"unknown channel body {body!r}")
