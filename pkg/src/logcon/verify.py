"""Randomized and oracle-based verification of the log-concavity claims.

Checkers sample the defining inequalities and report worst violations with
witnesses:

  * check_log_concave / check_quasi_concave   pointwise function inequalities
  * counterexample_remark                     the exact dyadic witness that
                                              quasi-concavity fails to
                                              compose under tensors
  * check_prekopa_leindler                    the integral inequality, with
                                              the minimal admissible middle
                                              function built by grid sup-mix
  * check_extended_pl                         the three-measure extension
  * check_state_log_concave                   mass inequality on convex pairs
  * check_channel_log_concave                 kernel inequality on convex
                                              pairs of sets
  * check_markov_laws                         comonoid + determinism laws,
                                              exact on Dirac probes

Every report is reproducible from (name, seed, trials).  Values below 1e-300
are floored to exact zero before forming products, so the multiplicative
inequalities are never judged on denormal noise.  Monte Carlo kernel values
carry standard errors, and the channel/state checkers subtract three
combined standard errors before comparing against the absolute tolerance.

Functions that are deliberately *not* log-concave (counterexamples) enter
through RawFunction / RawDeterministicChannel wrappers here, never through
the concept/channel constructors, which stay log-concave by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from logcon import channels as ch
from logcon import measures as ms
from logcon.concepts import (
    Concept,
    affine_concept,
    crisp,
    exponential,
    gauss_fuzz,
    multiply,
    scalar_concept,
    tensor,
)
from logcon.geometry import (
    Ball,
    Box,
    ConvexSet,
    Hull,
    Point,
    Space,
    Whole,
    hull_of,
    minkowski_mix,
    mix,
    sample_batch,
    space_of,
    unit_box,
    whole_space,
)
from logcon.measures import State, mass_with_error
from logcon.rng import make_rng

#: Values below this are treated as exact zero in multiplicative inequalities.
ZERO_FLOOR = 1e-300

#: Absolute slack for exact-arithmetic inequalities.
ABS_TOL = 1e-9


@dataclass
class RawFunction:
    """A bare nonnegative function for checks; not a Concept.

    `fn` must accept an (n, dim) array and return (n,) values.  `support`
    bounds where the function lives (required by the Prekopa-Leindler
    checker, which integrates over it).
    """

    dim: int
    fn: object
    description: str = ""
    support: Box | None = None

    def evaluate(self, x):
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        out = np.asarray(self.fn(pts.reshape(-1, self.dim)), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"raw function {self.description!r} produced non-finite values")
        return float(out[0]) if single else out.reshape(pts.shape[:-1])


class RawDeterministicChannel:
    """x -> Dirac(fn(x)): a deterministic test channel, possibly non-affine.

    Only crisp channels arising from partial *affine* maps are log-concave;
    this wrapper exists so the checker can exhibit failures for anything
    else.
    """

    def __init__(self, fn, dom: Space, cod: Space, description: str = ""):
        self.fn = fn
        self.dom = dom
        self.cod = cod
        self.description = description

    def __repr__(self):
        return f"RawDeterministicChannel({self.description or self.fn!r})"

    def apply(self, x, seed=0, n_mc=0):
        y = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float).reshape(-1)
        return ms.DiracState(y, self.cod)

    def kernel_with_error(self, x, A, seed=0, n_mc=0):
        return mass_with_error(self.apply(x), A)


@dataclass
class CheckReport:
    """Outcome of one randomized check; fail iff worst_violation > tolerance."""

    name: str
    trials: int
    worst_violation: float
    witnesses: list = field(default_factory=list)
    verdict: str = "pass"
    seed: int = 0
    tolerance: float = ABS_TOL
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "worst_violation": self.worst_violation,
            "witnesses": self.witnesses,
            "verdict": self.verdict,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "meta": self.meta,
        }

    def render(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        line = (
            f"[{mark}] {self.name}: trials={self.trials} "
            f"worst={self.worst_violation:.3e} tol={self.tolerance:.3e}"
        )
        if self.verdict == "premise-unmet":
            line = f"[SKIP] {self.name}: premise unmet on probe sets"
        if self.witnesses and not self.passed:
            w = self.witnesses[0]
            line += f"\n       witness: {json.dumps(w)}"
        return line


def _finalize(name, trials, violations, witnesses, seed, tol, meta=None) -> CheckReport:
    worst = float(max(violations)) if len(violations) else 0.0
    verdict = "fail" if worst > tol else "pass"
    witnesses = sorted(witnesses, key=lambda w: -w["violation"])[:10]
    return CheckReport(
        name=name,
        trials=trials,
        worst_violation=worst,
        witnesses=witnesses,
        verdict=verdict,
        seed=seed,
        tolerance=tol,
        meta=meta or {},
    )


def _evaluate(f, pts):
    if hasattr(f, "evaluate"):
        return np.asarray(f.evaluate(pts), dtype=float)
    return np.asarray(f(pts), dtype=float)


def _pointwise_check(kind, f, region, trials, seed, tol, probes):
    rng = make_rng(seed, 0x10C)
    X = sample_batch(region, trials, rng)
    Y = sample_batch(region, trials, rng)
    P = rng.uniform(size=trials)
    if probes:
        px = np.array([np.asarray(p[0], dtype=float).reshape(-1) for p in probes])
        py = np.array([np.asarray(p[1], dtype=float).reshape(-1) for p in probes])
        pp = np.array([float(p[2]) for p in probes])
        X = np.vstack([px, X])
        Y = np.vstack([py, Y])
        P = np.concatenate([pp, P])
    vx = _evaluate(f, X)
    vy = _evaluate(f, Y)
    vx = np.where(vx < ZERO_FLOOR, 0.0, vx)
    vy = np.where(vy < ZERO_FLOOR, 0.0, vy)
    mixes = P[:, None] * X + (1.0 - P[:, None]) * Y
    vm = _evaluate(f, mixes)

    if kind == "log":
        rhs = np.power(vx, P) * np.power(vy, 1.0 - P)
        name = "log_concavity"
    else:
        rhs = np.minimum(vx, vy)
        name = "quasi_concavity"
    violations = np.clip(rhs - vm, 0.0, None)

    witnesses = []
    for i in np.argsort(-violations)[:10]:
        if violations[i] > tol:
            witnesses.append(
                {
                    "x": X[i].tolist(),
                    "y": Y[i].tolist(),
                    "p": float(P[i]),
                    "lhs": float(vm[i]),
                    "rhs": float(rhs[i]),
                    "violation": float(violations[i]),
                }
            )
    desc = getattr(f, "description", "") or type(f).__name__
    return _finalize(f"{name}({desc})", len(P), violations, witnesses, seed, tol)


def check_log_concave(f, region: ConvexSet, trials: int = 10_000, seed: int = 0,
                      tol: float = ABS_TOL, probes=None) -> CheckReport:
    """Sample f(mix(x,y,p)) >= f(x)^p f(y)^(1-p) over the region.

    `probes` are explicit (x, y, p) triples evaluated ahead of the random
    draws, so canonical witnesses land in the report deterministically.
    """
    return _pointwise_check("log", f, region, trials, seed, tol, probes)


def check_quasi_concave(f, region: ConvexSet, trials: int = 10_000, seed: int = 0,
                        tol: float = ABS_TOL, probes=None) -> CheckReport:
    """Sample f(mix(x,y,p)) >= min(f(x), f(y)) over the region."""
    return _pointwise_check("quasi", f, region, trials, seed, tol, probes)


# ---------------------------------------------------------------------------
# The Remark counterexample: quasi-concavity is not compositional
# ---------------------------------------------------------------------------


def remark_factors():
    """The two quasi-concave factors whose tensor is not quasi-concave:
    C(x) = 1 - x/2 (affine, log-concave) and D(y) = (y^2 + 1)/2 (convex,
    quasi-concave on [0,1] but not log-concave)."""
    C = RawFunction(1, lambda pts: 1.0 - pts[:, 0] / 2.0, "C(x)=1-x/2",
                    support=Box([0.0], [1.0]))
    D = RawFunction(1, lambda pts: (pts[:, 0] ** 2 + 1.0) / 2.0, "D(y)=(y^2+1)/2",
                    support=Box([0.0], [1.0]))
    return C, D


def remark_tensor() -> RawFunction:
    C, D = remark_factors()
    return RawFunction(
        2,
        lambda pts: (1.0 - pts[:, 0] / 2.0) * ((pts[:, 1] ** 2 + 1.0) / 2.0),
        "C(x)D(y), the non-quasi-concave tensor",
        support=Box([0.0, 0.0], [1.0, 1.0]),
    )


def counterexample_remark():
    """((0,0), (1,1), midpoint) values of the tensor: exactly
    (1/2, 1/2, 0.46875), all dyadic, so the 0.03125 defect is exact."""
    T = remark_tensor()
    v00 = T.evaluate([0.0, 0.0])
    v11 = T.evaluate([1.0, 1.0])
    vmid = T.evaluate([0.5, 0.5])
    return v00, v11, vmid


# ---------------------------------------------------------------------------
# Prekopa-Leindler
# ---------------------------------------------------------------------------


def check_prekopa_leindler(g: RawFunction, h: RawFunction, p: float,
                           grid_resolution: float = 1e-3) -> CheckReport:
    """Verify the integral inequality by constructing the minimal admissible
    middle function on a grid.

    With f(z) = sup over mix(x,y,p)=z of g(x)^p h(y)^(1-p) (the smallest f
    satisfying the pointwise hypothesis), the inequality states
    int f >= (int g)^p (int h)^(1-p).  The sup is taken over grid pairs, so
    the computed f underestimates the true one; the grid-error allowance
    accounts for that and for the Riemann sums.  One-dimensional only: the
    pair grid at this resolution is infeasible in higher dimension, and the
    extension theorem reduces to the 1-D form.
    """
    if g.dim != 1 or h.dim != 1:
        raise ValueError("the Prekopa-Leindler grid oracle is one-dimensional")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
    if g.support is None or h.support is None:
        raise ValueError("both functions need declared support boxes")

    a1, b1 = float(g.support.lo[0]), float(g.support.hi[0])
    a2, b2 = float(h.support.lo[0]), float(h.support.hi[0])
    n1 = max(int(round((b1 - a1) / grid_resolution)) + 1, 2)
    n2 = max(int(round((b2 - a2) / grid_resolution)) + 1, 2)
    xs = np.linspace(a1, b1, n1)
    ys = np.linspace(a2, b2, n2)
    G = np.clip(_evaluate(g, xs[:, None]), 0.0, None)
    H = np.clip(_evaluate(h, ys[:, None]), 0.0, None)

    int_g = float(np.trapezoid(G, xs))
    int_h = float(np.trapezoid(H, ys))

    z0 = p * a1 + (1 - p) * a2
    z1 = p * b1 + (1 - p) * b2
    nz = max(n1, n2)
    dz = (z1 - z0) / (nz - 1)
    f_hat = np.zeros(nz)
    Hq = np.power(H, 1.0 - p)
    for i in range(n1):
        z = p * xs[i] + (1 - p) * ys
        idx = np.clip(np.round((z - z0) / dz).astype(int), 0, nz - 1)
        np.maximum.at(f_hat, idx, (G[i] ** p) * Hq)
    int_f = float(np.trapezoid(f_hat, dx=dz))

    rhs = int_g**p * int_h ** (1.0 - p)
    margin = int_f - rhs
    peak = float(f_hat.max()) if f_hat.size else 0.0
    allowance = 8.0 * dz * max(peak, 1e-12)
    coarse = n1 < 8 or n2 < 8

    witnesses = []
    if margin < -allowance:
        witnesses.append(
            {"int_f": int_f, "rhs": rhs, "violation": float(-margin)}
        )
    return CheckReport(
        name=f"prekopa_leindler({g.description}|{h.description}, p={p})",
        trials=n1 * n2,
        worst_violation=max(0.0, -margin),
        witnesses=witnesses,
        verdict="fail" if margin < -allowance else "pass",
        seed=0,
        tolerance=allowance,
        meta={
            "int_f": int_f,
            "int_g": int_g,
            "int_h": int_h,
            "rhs": rhs,
            "margin": margin,
            "allowance": allowance,
            "resolution": grid_resolution,
            "resolution_too_coarse": coarse,
        },
    )


def check_extended_pl(mu: State, nu: State, omega: State,
                      f: RawFunction, g: RawFunction, h: RawFunction,
                      p: float, premise_trials: int = 40, seed: int = 0) -> CheckReport:
    """The three-measure inequality: premise mu(C) >= nu(A)^p omega(B)^(1-p)
    for C containing the Minkowski p-mix, sampled on convex pairs first; if
    it fails, the report verdict is 'premise-unmet' rather than a failure.
    The conclusion compares int f dmu against the product of the g/nu and
    h/omega integrals."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
    rng = make_rng(seed, 0xE91)
    dim = mu.dim
    premise_failures = []
    for _ in range(premise_trials):
        A, B = _random_set_pair(rng, dim, ("box",))
        C = minkowski_mix(A, B, p)
        ma = mass_with_error(nu, A)
        mb = mass_with_error(omega, B)
        rhs = _floor(ma.value) ** p * _floor(mb.value) ** (1.0 - p)
        if rhs == 0.0:
            continue
        mc = mass_with_error(mu, C)
        tol = 3.0 * (ma.stderr + mb.stderr + mc.stderr) + ABS_TOL
        if mc.value < rhs - tol:
            premise_failures.append(
                {"A": A.to_json(), "B": B.to_json(), "violation": float(rhs - mc.value)}
            )
    if premise_failures:
        return CheckReport(
            name="extended_prekopa_leindler",
            trials=premise_trials,
            worst_violation=0.0,
            witnesses=premise_failures[:5],
            verdict="premise-unmet",
            seed=seed,
            meta={"premise_probes": premise_trials},
        )

    rf = ms.pair_with_error(mu, f)
    rg = ms.pair_with_error(nu, g)
    rh = ms.pair_with_error(omega, h)
    rhs = _floor(rg.value) ** p * _floor(rh.value) ** (1.0 - p)
    tol = 3.0 * (rf.stderr + rg.stderr + rh.stderr) + ABS_TOL
    violation = max(0.0, rhs - rf.value)
    witnesses = []
    if violation > tol:
        witnesses.append(
            {"int_f_mu": rf.value, "rhs": rhs, "violation": float(violation)}
        )
    return CheckReport(
        name="extended_prekopa_leindler",
        trials=premise_trials,
        worst_violation=violation,
        witnesses=witnesses,
        verdict="fail" if violation > tol else "pass",
        seed=seed,
        tolerance=tol,
        meta={
            "premise_probes": premise_trials,
            "int_f_mu": rf.value,
            "int_g_nu": rg.value,
            "int_h_omega": rh.value,
            "rhs": rhs,
        },
    )


def _floor(v: float) -> float:
    return 0.0 if v < ZERO_FLOOR else v


# ---------------------------------------------------------------------------
# Random symbolically-mixable convex sets
# ---------------------------------------------------------------------------


def _random_set(rng, dim, kind, anchor=None):
    """A random convex set whose Minkowski mixes are symbolic and exact:
    ball, axis box, or segment.  When an anchor point is given (a sampled
    channel output, say) the set is centered near it with noise scaled to
    the set size, so small sets still get hit."""
    if dim == 0:
        return Point(np.zeros(0))  # the unit space has one measurable point
    s = float(np.exp(rng.uniform(np.log(0.02), np.log(1.5))))
    if anchor is not None and rng.uniform() < 0.9:
        c = anchor + rng.normal(scale=0.5 * s, size=dim)
    else:
        c = rng.normal(scale=1.5, size=dim)
    if kind == "ball":
        return Ball(c, s)
    if kind == "box":
        w = s * np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=dim))
        return Box(c - w, c + w)
    if kind == "segment":
        d = rng.normal(scale=s, size=dim)
        return hull_of([c - d, c + d])
    raise ValueError(f"unknown set kind {kind!r}")


def _random_set_pair(rng, dim, kinds, anchors=None, anchor_a=None, anchor_b=None):
    """A same-kind pair of such sets, anchored independently."""
    kind = kinds[int(rng.integers(len(kinds)))]

    def pick(explicit):
        if explicit is not None:
            return explicit
        if anchors is not None and len(anchors):
            return anchors[int(rng.integers(len(anchors)))]
        return None

    return (
        _random_set(rng, dim, kind, pick(anchor_a)),
        _random_set(rng, dim, kind, pick(anchor_b)),
    )


# ---------------------------------------------------------------------------
# State and channel log-concavity
# ---------------------------------------------------------------------------


def check_state_log_concave(state: State, trials: int = 1000, seed: int = 0,
                            set_kinds=("ball", "box", "segment"),
                            name: str | None = None) -> CheckReport:
    """Sample omega(pA + (1-p)B) >= omega(A)^p omega(B)^(1-p) on random
    symbolically-mixable convex pairs.  Monte Carlo mass estimates widen the
    per-trial tolerance by three combined standard errors."""
    rng = make_rng(seed, 0x57A)
    anchors = state.sample(8, make_rng(seed, 0x57B)) if state.total_mass() > 0 else None
    violations = np.zeros(trials)
    witnesses = []
    active = 0
    for t in range(trials):
        A, B = _random_set_pair(rng, state.dim, set_kinds, anchors)
        p = rng.uniform()
        ma = mass_with_error(state, A)
        va = _floor(ma.value)
        if va == 0.0:
            continue
        mb = mass_with_error(state, B)
        vb = _floor(mb.value)
        if vb == 0.0:
            continue
        active += 1
        M = minkowski_mix(A, B, p)
        mm = mass_with_error(state, M)
        rhs = va**p * vb ** (1.0 - p)
        slack = 3.0 * (ma.stderr + mb.stderr + mm.stderr)
        violations[t] = max(0.0, rhs - mm.value - slack)
        if violations[t] > ABS_TOL and len(witnesses) < 10:
            witnesses.append(
                {
                    "A": A.to_json(),
                    "B": B.to_json(),
                    "p": float(p),
                    "lhs": mm.value,
                    "rhs": rhs,
                    "violation": float(violations[t]),
                }
            )
    label = name or f"state_log_concavity({type(state).__name__})"
    return _finalize(label, trials, violations, witnesses, seed, ABS_TOL,
                     meta={"active_trials": active})


def _output_anchor(channel, x, rng):
    st = channel.apply(x, seed=int(rng.integers(2**62)), n_mc=64)
    if st.total_mass() <= 0.0:
        return None
    return st.sample(1, make_rng(int(rng.integers(2**62))))[0]


def check_channel_log_concave(channel, trials: int = 1000, seed: int = 0,
                              set_kinds=("ball", "box", "segment"),
                              region: ConvexSet | None = None,
                              name: str | None = None) -> CheckReport:
    """Sample the two-argument kernel inequality

        f(mix(x,y,p), pA + (1-p)B) >= f(x,A)^p f(y,B)^(1-p)

    with inputs from the channel's domain carrier (or a default probe box)
    and set pairs anchored near sampled outputs.  The right side is skipped
    when either factor vanishes, so measure-zero sets short-circuit."""
    rng = make_rng(seed, 0xC4A)
    if region is None:
        region = channel.dom.carrier
        if region.bounding_box() is None:
            region = Box(-2.0 * np.ones(channel.dom.dim), 2.0 * np.ones(channel.dom.dim))
    # Channels with a bounded partial domain are mostly zero off it; keep a
    # majority of probe inputs inside so the nontrivial branch is exercised.
    partial = getattr(channel, "domain", None)
    if partial is not None and partial.bounding_box() is None:
        partial = None

    def draw_input():
        if partial is not None and rng.uniform() < 0.7:
            return sample_batch(partial, 1, rng)[0]
        return sample_batch(region, 1, rng)[0]

    cod_dim = channel.cod.dim
    violations = np.zeros(trials)
    witnesses = []
    active = 0
    for t in range(trials):
        x = draw_input()
        y = draw_input()
        p = rng.uniform()
        # Anchor the sets near one sampled output of each input, so the
        # kernel factors are frequently nonzero and the probe is sharp.
        anchor_a = _output_anchor(channel, x, rng)
        anchor_b = _output_anchor(channel, y, rng)
        A, B = _random_set_pair(rng, cod_dim, set_kinds,
                                anchor_a=anchor_a, anchor_b=anchor_b)
        ka = channel.kernel_with_error(x, A, seed=int(rng.integers(2**62)))
        va = _floor(ka.value)
        if va == 0.0:
            continue
        kb = channel.kernel_with_error(y, B, seed=int(rng.integers(2**62)))
        vb = _floor(kb.value)
        if vb == 0.0:
            continue
        active += 1
        M = minkowski_mix(A, B, p)
        km = channel.kernel_with_error(mix(x, y, p), M, seed=int(rng.integers(2**62)))
        rhs = va**p * vb ** (1.0 - p)
        slack = 3.0 * (ka.stderr + kb.stderr + km.stderr)
        violations[t] = max(0.0, rhs - km.value - slack)
        if violations[t] > ABS_TOL and len(witnesses) < 10:
            witnesses.append(
                {
                    "x": x.tolist(),
                    "y": y.tolist(),
                    "p": float(p),
                    "A": A.to_json(),
                    "B": B.to_json(),
                    "lhs": km.value,
                    "rhs": rhs,
                    "violation": float(violations[t]),
                }
            )
    label = name or f"channel_log_concavity({type(channel).__name__})"
    return _finalize(label, trials, violations, witnesses, seed, ABS_TOL,
                     meta={"active_trials": active})


# ---------------------------------------------------------------------------
# Markov (copy/discard) laws
# ---------------------------------------------------------------------------


def check_markov_laws(space: Space, probes: int = 100, seed: int = 0) -> CheckReport:
    """Comonoid counit/coassociativity/cocommutativity and determinism of
    crisp maps, compared exactly (zero tolerance) on Dirac probe points."""
    rng = make_rng(seed, 0x3A9)
    n = space.dim
    region = space.carrier
    if region.bounding_box() is None:
        region = Box(-2.0 * np.ones(n), 2.0 * np.ones(n))
    X = sample_batch(region, probes, rng)

    I = ch.identity(space)
    C = ch.copy_channel(space)
    D = ch.discard(space)
    S = ch.swap(space, space)
    M = rng.normal(size=(n, n))
    c = rng.normal(size=n)
    f = ch.crisp_affine(M, c, dom=space, cod=whole_space(n))
    cod_copy = ch.copy_channel(whole_space(n))

    laws = {
        "counit_left": (ch.compose(ch.tensor(D, I), C), I),
        "counit_right": (ch.compose(ch.tensor(I, D), C), I),
        "cocommutativity": (ch.compose(S, C), C),
        "coassociativity": (
            ch.compose(ch.tensor(C, I), C),
            ch.compose(ch.tensor(I, C), C),
        ),
        "determinism_crisp": (
            ch.compose(cod_copy, f),
            ch.compose(ch.tensor(f, f), ch.copy_channel(space)),
        ),
    }

    worst = 0.0
    witnesses = []
    for law, (lhs, rhs) in laws.items():
        for x in X:
            a = lhs.apply(x)
            b = rhs.apply(x)
            pa, sa = _dirac_parts(a)
            pb, sb = _dirac_parts(b)
            diff = max(
                float(np.max(np.abs(pa - pb))) if pa.size else 0.0, abs(sa - sb)
            )
            if diff > worst:
                worst = diff
            if diff > 0.0 and len(witnesses) < 10:
                witnesses.append({"law": law, "x": x.tolist(), "violation": diff})
    return CheckReport(
        name=f"markov_laws(dim={n})",
        trials=probes * len(laws),
        worst_violation=worst,
        witnesses=witnesses,
        verdict="fail" if worst > 0.0 else "pass",
        seed=seed,
        tolerance=0.0,
        meta={"laws": sorted(laws)},
    )


def _dirac_parts(state):
    dl = ch._is_dirac_like(state)
    if dl is None:
        raise AssertionError("Markov-law probe produced a non-Dirac state")
    return dl


# ---------------------------------------------------------------------------
# Standard batteries (shared by the acceptance suite and the CLI)
# ---------------------------------------------------------------------------


def standard_concept_battery(seed: int = 0):
    """20 seeded constructions covering every concept constructor, paired
    with the probe regions their checks sample from."""
    rng = make_rng(seed, 0xBA7)
    out = []
    box2 = Box([-1.5, -1.5], [1.5, 1.5])
    box1 = Box([-1.5], [1.5])
    unit1 = Space(1, Box([0.0], [1.0]))

    for i in range(3):  # crisp over balls
        c = rng.normal(scale=0.5, size=2)
        out.append((f"crisp_ball_{i}", crisp(Ball(c, 0.4 + 0.3 * i)), box2))
    out.append(("crisp_box", crisp(Box([-0.5, -0.2], [0.5, 0.9])), box2))
    out.append(
        ("crisp_hull", crisp(hull_of(rng.normal(scale=0.8, size=(5, 2)))), box2)
    )
    out.append(
        ("crisp_simplex", crisp(hull_of([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])), box2)
    )
    for i, sigma in enumerate((0.2, 0.6, 1.1)):  # Gaussian fuzzifications
        out.append(
            (f"fuzz_ball_{i}", gauss_fuzz(Ball(rng.normal(size=2), 0.3), sigma), box2)
        )
    for i in range(2):
        verts = rng.normal(scale=0.7, size=(4, 2))
        out.append((f"fuzz_hull_{i}", gauss_fuzz(hull_of(verts), 0.5), box2))
    out.append(("fuzz_point", gauss_fuzz(Point([0.25]), 0.8), box1))
    for i, (a, b) in enumerate(((np.array([-0.5]), 1.0), (np.array([0.3]), 0.2))):
        out.append((f"affine_{i}", affine_concept(a, b, unit1), Box([0.0], [1.0])))
    out.append(("exponential", exponential(2.0), Box([0.0], [1.0])))
    t1 = tensor(gauss_fuzz(Point([0.0]), 0.5), crisp(Box([-0.4], [0.8])))
    out.append(("tensor_fuzz_crisp", t1, box2))
    t2 = tensor(
        affine_concept([-0.5], 1.0, unit1), gauss_fuzz(Ball([0.2], 0.2), 0.4)
    )
    out.append(("tensor_affine_fuzz", t2, Box([0.0, -1.5], [1.0, 1.5])))
    X2 = whole_space(2)
    m1 = multiply(
        gauss_fuzz(Point([0.1, -0.2]), 0.7, X2), crisp(Ball([0.0, 0.0], 1.2), X2)
    )
    out.append(("product_fuzz_crisp", m1, box2))
    m2 = multiply(
        gauss_fuzz(Ball([0.0, 0.0], 0.3), 0.5, X2),
        gauss_fuzz(Point([0.5, 0.5]), 0.9, X2),
    )
    out.append(("product_fuzz_fuzz", m2, box2))
    out.append(("scalar", scalar_concept(0.7, X2), box2))
    return out


def standard_state_battery(seed: int = 0):
    """The five state families of the measure log-concavity criterion, with
    set kinds whose masses evaluate in closed form."""
    rng = make_rng(seed, 0x57E)
    return [
        ("gaussian_iso_2d", ms.gaussian(rng.normal(size=2), 0.8 * np.eye(2)),
         ("ball", "box", "segment")),
        ("gaussian_diag_3d", ms.gaussian(rng.normal(size=3), np.diag([0.5, 1.0, 2.0])),
         ("box", "segment")),
        ("gaussian_1d", ms.gaussian([0.3], 1.3), ("ball", "box", "segment")),
        ("uniform_box_2d", ms.uniform(Box([-1.0, -0.5], [1.0, 1.5])),
         ("box", "segment")),
        ("uniform_box_1d", ms.uniform(Box([-1.0], [2.0])), ("ball", "box", "segment")),
        ("dirac_2d", ms.dirac(rng.normal(size=2)), ("ball", "box", "segment")),
        ("laplace", ms.density1d("laplace", 0.2, 0.8), ("ball", "box", "segment")),
        ("logistic", ms.density1d("logistic", -0.4, 1.1), ("ball", "box", "segment")),
    ]


def standard_channel_battery(seed: int = 0):
    """Channels for the kernel log-concavity criterion: the comonoid
    structure, updates, crisp/noisy affine maps, and composites/tensors,
    with set kinds matched to closed-form mass evaluation."""
    rng = make_rng(seed, 0xC11)
    R1, R2 = whole_space(1), whole_space(2)
    fuzz = gauss_fuzz(Ball(rng.normal(scale=0.5, size=2), 0.3), 0.5, R2)
    crisp_dom = Ball(np.zeros(2), 1.5)
    ca = ch.crisp_affine(
        rng.normal(size=(2, 2)), rng.normal(scale=0.3, size=2), domain=crisp_dom
    )
    na_iso = ch.noisy_affine(
        rng.normal(size=(2, 2)), rng.normal(scale=0.3, size=2),
        ms.gaussian(np.zeros(2), 0.5 * np.eye(2)),
    )
    na_1d = ch.noisy_affine([[1.3]], [0.2], ms.gaussian([0.0], 0.4))
    na_1d_b = ch.noisy_affine([[-0.7]], [0.5], ms.gaussian([0.1], 0.9))
    composite_1d = ch.compose(na_1d_b, na_1d)
    crisp_1d = ch.crisp_affine([[0.8]], [-0.1], domain=Box([-2.0], [2.0]))
    composite_mixed = ch.compose(na_1d, crisp_1d)
    update_fuzz = ch.update(fuzz)
    tens = ch.tensor(crisp_1d, na_1d)
    wiring = ch.compose(ch.tensor(ch.discard(R1), ch.identity(R1)), ch.copy_channel(R1))

    return [
        ("identity_2d", ch.identity(R2), ("ball", "box", "segment")),
        ("copy_1d", ch.copy_channel(R1), ("ball", "box", "segment")),
        ("discard_2d", ch.discard(R2), ("ball", "box", "segment")),
        ("update_gaussfuzz", update_fuzz, ("ball", "box", "segment")),
        ("crisp_affine_partial", ca, ("ball", "box", "segment")),
        ("noisy_affine_iso_2d", na_iso, ("ball",)),
        ("noisy_affine_1d", na_1d, ("ball", "box", "segment")),
        ("compose_noisy_noisy_1d", composite_1d, ("ball", "box", "segment")),
        ("compose_noisy_crisp_1d", composite_mixed, ("ball", "box", "segment")),
        ("tensor_crisp_noisy", tens, ("box",)),
        ("counit_wiring", wiring, ("ball", "box", "segment")),
    ]


def non_affine_counterexample_channel():
    """x -> Dirac(x^2) on [0,1]: deterministic but not affine, hence not a
    log-concave channel; the checker must find a witness."""
    X = Space(1, Box([0.0], [1.0]))
    return RawDeterministicChannel(
        lambda x: np.asarray(x, dtype=float) ** 2, X, whole_space(1), "x->x^2"
    )


def standard_pl_battery(seed: int = 0):
    """Ten seeded 1-D Gaussian/indicator pairs for the PL grid oracle."""
    rng = make_rng(seed, 0x9A)
    pairs = []

    def gauss_fn(mu, s):
        return RawFunction(
            1,
            lambda pts, mu=mu, s=s: np.exp(-0.5 * ((pts[:, 0] - mu) / s) ** 2),
            f"gauss(mu={mu:.3f},s={s:.3f})",
            support=Box([mu - 8 * s], [mu + 8 * s]),
        )

    def indicator_fn(a, b):
        # Support declared exactly [a, b]: grid sums of the all-ones values
        # are then exact, so the equal-length case reports both sides = 1.
        return RawFunction(
            1,
            lambda pts, a=a, b=b: ((pts[:, 0] >= a) & (pts[:, 0] <= b)).astype(float),
            f"indicator[{a:.3f},{b:.3f}]",
            support=Box([a], [b]),
        )

    # equal-indicator case first: both sides must come out 1 +- resolution
    pairs.append(("indicator_equal", indicator_fn(0.0, 1.0), indicator_fn(0.0, 1.0), 0.5))
    for i in range(5):
        mu1, mu2 = rng.normal(scale=1.0, size=2)
        s1, s2 = np.exp(rng.uniform(np.log(0.3), np.log(1.2), size=2))
        pairs.append((f"gauss_pair_{i}", gauss_fn(mu1, s1), gauss_fn(mu2, s2),
                      float(rng.uniform(0.2, 0.8))))
    for i in range(2):
        a1 = rng.uniform(-1.0, 0.0)
        b1 = a1 + rng.uniform(0.4, 1.5)
        a2 = rng.uniform(-0.5, 0.5)
        b2 = a2 + rng.uniform(0.4, 1.5)
        pairs.append((f"indicator_pair_{i}", indicator_fn(a1, b1), indicator_fn(a2, b2),
                      float(rng.uniform(0.3, 0.7))))
    for i in range(2):
        mu = rng.normal(scale=0.5)
        s = float(np.exp(rng.uniform(np.log(0.3), np.log(1.0))))
        a = rng.uniform(-1.0, 0.0)
        b = a + rng.uniform(0.5, 1.5)
        pairs.append((f"gauss_indicator_{i}", gauss_fn(mu, s), indicator_fn(a, b),
                      float(rng.uniform(0.3, 0.7))))
    return pairs


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def run_suite(suite: str, seed: int = 0, trials: int | None = None):
    """Run a named verification suite; returns a list of CheckReports.

    Suites: concepts, channels, pl, markov, all.  The channels suite also
    covers state log-concavity (states are channels from the unit) and the
    deliberate non-affine counterexample, whose report passes exactly when
    the underlying check fails with a witness.
    """
    if suite == "all":
        out = []
        for name in ("concepts", "channels", "pl", "markov"):
            out.extend(run_suite(name, seed, trials))
        return out

    reports = []
    if suite == "concepts":
        t = trials or 10_000
        battery = standard_concept_battery(seed)
        for name, concept, region in battery:
            rep = check_log_concave(concept, region, trials=t, seed=seed)
            rep.name = f"log_concavity({name})"
            reports.append(rep)
        v00, v11, vmid = counterexample_remark()
        exact = (v00, v11, vmid) == (0.5, 0.5, 0.46875)
        remark = check_quasi_concave(
            remark_tensor(), unit_box(2), trials=t, seed=seed,
            probes=[((0.0, 0.0), (1.0, 1.0), 0.5)],
        )
        reports.append(
            CheckReport(
                name="remark_counterexample",
                trials=remark.trials,
                worst_violation=0.0 if (exact and not remark.passed) else 1.0,
                witnesses=remark.witnesses,
                verdict="pass" if (exact and not remark.passed) else "fail",
                seed=seed,
                tolerance=0.0,
                meta={"values": [v00, v11, vmid], "expected_failure": True},
            )
        )
        return reports

    if suite == "channels":
        t = trials or 1000
        for name, state, kinds in standard_state_battery(seed):
            rep = check_state_log_concave(state, trials=t, seed=seed, set_kinds=kinds,
                                          name=f"state_log_concavity({name})")
            reports.append(rep)
        for name, channel, kinds in standard_channel_battery(seed):
            rep = check_channel_log_concave(channel, trials=t, seed=seed,
                                            set_kinds=kinds,
                                            name=f"channel_log_concavity({name})")
            reports.append(rep)
        bad = check_channel_log_concave(
            non_affine_counterexample_channel(), trials=t, seed=seed,
            set_kinds=("box",), region=Box([0.0], [1.0]),
            name="channel_log_concavity(x->x^2)",
        )
        reports.append(
            CheckReport(
                name="non_affine_counterexample",
                trials=bad.trials,
                worst_violation=0.0 if not bad.passed else 1.0,
                witnesses=bad.witnesses,
                verdict="pass" if not bad.passed else "fail",
                seed=seed,
                tolerance=0.0,
                meta={"expected_failure": True, "found_violation": bad.worst_violation},
            )
        )
        return reports

    if suite == "pl":
        for name, g, h, p in standard_pl_battery(seed):
            rep = check_prekopa_leindler(g, h, p, grid_resolution=1e-3)
            rep.name = f"prekopa_leindler({name})"
            reports.append(rep)
        return reports

    if suite == "markov":
        probes = trials or 100
        for dim in (1, 2, 3, 4):
            reports.append(check_markov_laws(whole_space(dim), probes=probes, seed=seed))
        return reports

    raise ValueError(f"unknown suite {suite!r}; expected concepts/channels/pl/markov/all")
