"""Dimension typechecker and evaluator for the wiring DSL.

Elaboration builds real library values as it checks: spaces and sets are
constructed eagerly, and wiring expressions become symbolic channel trees
(construction never samples).  Every wiring node is annotated with its
inferred (dom, cod) spaces; `;` requires matching cod/dom, `*` adds
dimensions.  Numeric work happens only in `evaluate`, which forces scalar
diagrams (I ~> I) to a value with a standard error.

Names denote what the declaration built; in wiring position they coerce:
concepts act as effects X ~> I, states as preparations I ~> X, numbers as
scalars I ~> I.  Polymorphic builtins (`id`, `copy`, `discard`, `swap`)
need explicit space arguments; bare uses parse but fail here.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from logcon import channels as ch
from logcon import measures as ms
from logcon.concepts import (
    Concept,
    affine_concept,
    crisp as crisp_concept,
    gauss_fuzz,
)
from logcon.geometry import (
    Ball,
    Box,
    ConvexSet,
    GeometryError,
    Point,
    Simplex,
    Space,
    UNIT,
    UNIT_POINT,
    hull_of,
    product_space,
    space_of,
    standard_simplex,
    unit_box,
    whole_space,
)
from logcon.measures import NumericResult, State
from logcon.dsl.parser import Ast, Call, Decl, Name, Number, Seq, Ten, TupleLit, parse

BUILTINS = (
    "box", "simplex", "ball", "hull", "point",
    "fuzz", "crisp", "affine",
    "uniform", "dirac", "gauss", "laplace", "logistic",
    "noisy", "update", "copy", "discard", "id", "swap",
    "convolve", "pair", "pullback",
)


class DslTypeError(ValueError):
    def __init__(self, message, span=None):
        self.span = span
        prefix = f"{span}: " if span is not None else ""
        super().__init__(prefix + message)


class EvalError(RuntimeError):
    def __init__(self, message, span=None):
        self.span = span
        prefix = f"{span}: " if span is not None else ""
        super().__init__(prefix + message)


@dataclass
class SetV:
    """A convex set plus the space it was built against, if any."""

    set: ConvexSet
    space: Space | None = None


def describe(v) -> str:
    if isinstance(v, Space):
        return f"space(dim={v.dim})"
    if isinstance(v, SetV):
        return f"set({type(v.set).__name__.lower()}, dim={v.set.dim})"
    if isinstance(v, float):
        return "number"
    if isinstance(v, tuple):
        return "scalar" if (v and v[0] == "pair") else "tuple"
    if isinstance(v, Concept):
        return f"concept on R^{v.dim}"
    if isinstance(v, State):
        return f"state on R^{v.dim}"
    if isinstance(v, ch.PullbackEffect):
        return f"effect on R^{v.dim}"
    if isinstance(v, ch.Channel):
        return f"channel R^{v.dom.dim} ~> R^{v.cod.dim}"
    return type(v).__name__


def _as_channel(v, span):
    """Coerce a value into wiring position."""
    if isinstance(v, ch.Channel):
        return v
    if isinstance(v, (Concept, ch.PullbackEffect)):
        return ch.EffectChannel(v)
    if isinstance(v, State):
        return ch.StatePrepChannel(v)
    if isinstance(v, float):
        if not 0.0 <= v <= 1.0:
            raise DslTypeError(f"scalar {v} outside [0,1] cannot be a wiring", span)
        return ch.StatePrepChannel(ms.ScaledState(v, ms.DiracState(UNIT_POINT, UNIT)))
    raise DslTypeError(f"{describe(v)} cannot appear in a wiring", span)


def _as_effect_like(v, span):
    """Something with .space and .evaluate, for update/pair/pullback."""
    if isinstance(v, (Concept, ch.PullbackEffect)):
        return v
    if isinstance(v, ch.Channel) and v.cod.is_unit():
        return _EffectView(v)
    raise DslTypeError(f"expected a concept or effect, got {describe(v)}", span)


class _EffectView:
    """Evaluable view of an effect-shaped channel (cod = I)."""

    def __init__(self, channel):
        self.channel = channel
        self.space = channel.dom

    @property
    def dim(self):
        return self.space.dim

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.channel.apply(x).total_mass()
        flat = x.reshape(-1, x.shape[-1])
        out = np.array([self.channel.apply(p).total_mass() for p in flat])
        return out.reshape(x.shape[:-1])

    def is_continuous(self):
        return True


def _numbers(v, span, what="a numeric tuple"):
    """Nested tuples of numbers -> tuple of floats / tuple of tuples."""
    if isinstance(v, float):
        return (v,)
    if isinstance(v, tuple):
        if all(isinstance(i, float) for i in v):
            return v
        if all(isinstance(i, tuple) and all(isinstance(j, float) for j in i) for i in v):
            return v
    raise DslTypeError(f"expected {what}, got {describe(v)}", span)


def _vector(v, span):
    out = _numbers(v, span, "a coordinate tuple")
    if out and isinstance(out[0], tuple):
        raise DslTypeError("expected a flat tuple, got a nested one", span)
    return np.array(out, dtype=float)


def _matrix(v, span):
    out = _numbers(v, span, "a matrix (tuple of tuples)")
    return np.atleast_2d(np.array(out, dtype=float))


def _space_and_set(args, spans, span):
    """[SPACE,] SET leading-argument convention for concept builders."""
    if args and isinstance(args[0], Space):
        if len(args) < 2 or not isinstance(args[1], SetV):
            raise DslTypeError("expected a set after the space argument", span)
        space, sv = args[0], args[1]
        if sv.set.dim != space.dim:
            raise DslTypeError(
                f"set dim {sv.set.dim} does not match space dim {space.dim}", span
            )
        return space, sv.set, args[2:], spans[2:]
    if args and isinstance(args[0], SetV):
        sv = args[0]
        return sv.space or whole_space(sv.set.dim), sv.set, args[1:], spans[1:]
    raise DslTypeError("expected a set (optionally preceded by its space)", span)


@dataclass
class TypedDiagram:
    """A checked program: the AST, its built environment, and per-node types.

    `types` maps id(expr-node) to a human-readable type string; wiring nodes
    additionally appear in `wiring_types` as (dom, cod) Space pairs.
    """

    ast: Ast
    env: dict
    types: dict
    wiring_types: dict
    kinds: dict

    def type_of(self, node) -> str:
        return self.types[id(node)]


class _Elaborator:
    def __init__(self, env=None):
        self.env = dict(env or {})
        self.types = {}
        self.wiring_types = {}
        self.kinds = {}

    # -- expression elaboration --------------------------------------------

    def expr(self, node):
        if isinstance(node, Number):
            return self.note(node, float(node.value))
        if isinstance(node, TupleLit):
            items = tuple(self.expr(i) for i in node.items)
            flat = []
            for i, item in enumerate(items):
                if isinstance(item, float):
                    flat.append(item)
                elif isinstance(item, tuple):
                    flat.append(item)
                else:
                    raise DslTypeError(
                        f"tuple entries must be numeric, entry {i} is "
                        f"{describe(item)}", node.span,
                    )
            return self.note(node, tuple(flat))
        if isinstance(node, Name):
            if node.ident in self.env:
                return self.note(node, self.env[node.ident])
            if node.ident in ("id", "copy", "discard", "swap"):
                raise DslTypeError(
                    f"polymorphic builtin {node.ident!r} needs an explicit "
                    f"space argument, e.g. {node.ident}(X)", node.span,
                )
            if node.ident in BUILTINS:
                raise DslTypeError(
                    f"builtin {node.ident!r} must be called with arguments",
                    node.span,
                )
            raise DslTypeError(f"undeclared name {node.ident!r}", node.span)
        if isinstance(node, Call):
            return self.note(node, self.call(node))
        if isinstance(node, Seq):
            return self.note(node, self.seq(node))
        if isinstance(node, Ten):
            return self.note(node, self.ten(node))
        raise DslTypeError(f"cannot elaborate {node!r}", getattr(node, "span", None))

    def note(self, node, value):
        self.types[id(node)] = describe(value)
        if isinstance(value, ch.Channel):
            self.wiring_types[id(node)] = (value.dom, value.cod)
        elif isinstance(value, (Concept, ch.PullbackEffect)):
            self.wiring_types[id(node)] = (value.space, UNIT)
        elif isinstance(value, State):
            self.wiring_types[id(node)] = (UNIT, value.space)
        return value

    def seq(self, node):
        left = self.expr(node.left)
        right = self.expr(node.right)
        lch = _as_channel(left, node.left.span if hasattr(node.left, "span") else node.span)
        rch = _as_channel(right, node.right.span if hasattr(node.right, "span") else node.span)
        if lch.cod != rch.dom:
            raise DslTypeError(
                f"cannot compose: left ({describe(left)}, output R^{lch.cod.dim}) "
                f"feeds right ({describe(right)}, input R^{rch.dom.dim})",
                node.span,
            )
        return ch.compose(rch, lch)

    def ten(self, node):
        left = self.expr(node.left)
        right = self.expr(node.right)
        if isinstance(left, Space) and isinstance(right, Space):
            return product_space(left, right)
        if isinstance(left, SetV) and isinstance(right, SetV):
            from logcon.geometry import Product

            space = None
            if left.space is not None and right.space is not None:
                space = product_space(left.space, right.space)
            return SetV(Product(left.set, right.set), space)
        if isinstance(left, float) and isinstance(right, float):
            return left * right
        if isinstance(left, Concept) and isinstance(right, Concept):
            from logcon.concepts import tensor as concept_tensor

            return concept_tensor(left, right)
        lch = _as_channel(left, node.span)
        rch = _as_channel(right, node.span)
        return ch.tensor(lch, rch)

    # -- builtins -----------------------------------------------------------

    def call(self, node: Call):
        args = [self.expr(a) for a in node.args]
        spans = [a.span if hasattr(a, "span") else node.span for a in node.args]
        name = node.name
        span = node.span

        def arity(*ns):
            if len(args) not in ns:
                raise DslTypeError(
                    f"{name} takes {' or '.join(map(str, ns))} argument(s), "
                    f"got {len(args)}", span,
                )

        if name == "box":
            arity(1, 2)
            if len(args) == 1:
                if not isinstance(args[0], float) or args[0] != int(args[0]) or args[0] < 1:
                    raise DslTypeError("box(n) needs a positive integer dimension", span)
                return SetV(unit_box(int(args[0])))
            lo, hi = _vector(args[0], spans[0]), _vector(args[1], spans[1])
            try:
                return SetV(Box(lo, hi))
            except GeometryError as e:
                raise DslTypeError(str(e), span)
        if name == "simplex":
            if len(args) == 1 and isinstance(args[0], float):
                if args[0] != int(args[0]) or args[0] < 1:
                    raise DslTypeError("simplex(n) needs a positive integer dimension", span)
                return SetV(standard_simplex(int(args[0])))
            pts = [_vector(a, s) for a, s in zip(args, spans)]
            try:
                return SetV(Simplex(np.array(pts)))
            except GeometryError as e:
                raise DslTypeError(str(e), span)
        if name == "ball":
            arity(2, 3)
            if isinstance(args[0], Space):
                space, rest, rspans = args[0], args[1:], spans[1:]
            else:
                space, rest, rspans = None, args, spans
            if len(rest) != 2:
                raise DslTypeError("ball needs (center, radius)", span)
            center = _vector(rest[0], rspans[0])
            if not isinstance(rest[1], float):
                raise DslTypeError("ball radius must be a number", span)
            if space is not None and center.shape[0] != space.dim:
                raise DslTypeError(
                    f"ball center dim {center.shape[0]} != space dim {space.dim}", span
                )
            try:
                return SetV(Ball(center, rest[1]), space)
            except GeometryError as e:
                raise DslTypeError(str(e), span)
        if name == "hull":
            if args and isinstance(args[0], Space):
                space, rest, rspans = args[0], args[1:], spans[1:]
            else:
                space, rest, rspans = None, args, spans
            if not rest:
                raise DslTypeError("hull needs at least one point", span)
            pts = [_vector(a, s) for a, s in zip(rest, rspans)]
            dims = {p.shape[0] for p in pts}
            if len(dims) != 1:
                raise DslTypeError("hull points must share a dimension", span)
            if space is not None and pts[0].shape[0] != space.dim:
                raise DslTypeError(
                    f"hull point dim {pts[0].shape[0]} != space dim {space.dim}", span
                )
            return SetV(hull_of(np.array(pts)), space)
        if name == "point":
            arity(1)
            return SetV(Point(_vector(args[0], spans[0])))

        if name == "crisp":
            space, region, rest, _ = _space_and_set(args, spans, span)
            if rest:
                raise DslTypeError("crisp takes just a set (and optional space)", span)
            return crisp_concept(region, space)
        if name == "fuzz":
            space, region, rest, rspans = _space_and_set(args, spans, span)
            if len(rest) != 1 or not isinstance(rest[0], float):
                raise DslTypeError("fuzz needs (set, sigma)", span)
            if rest[0] < 0:
                raise DslTypeError("fuzz sigma must be >= 0", span)
            return gauss_fuzz(region, rest[0], space)
        if name == "affine":
            arity(3, 4)
            if len(args) == 3:
                if not isinstance(args[0], Space):
                    raise DslTypeError("affine concept needs (space, coeffs, const)", span)
                a = _vector(args[1], spans[1])
                if not isinstance(args[2], float):
                    raise DslTypeError("affine constant must be a number", span)
                try:
                    return affine_concept(a, args[2], args[0])
                except Exception as e:
                    raise DslTypeError(str(e), span)
            if not (isinstance(args[0], Space) and isinstance(args[1], Space)):
                raise DslTypeError("affine channel needs (dom, cod, M, c)", span)
            M = _matrix(args[2], spans[2])
            c = _vector(args[3], spans[3])
            if M.shape != (args[1].dim, args[0].dim):
                raise DslTypeError(
                    f"matrix shape {M.shape} does not map R^{args[0].dim} to "
                    f"R^{args[1].dim}", span,
                )
            return ch.crisp_affine(M, c, domain=args[0].carrier,
                                   dom=args[0], cod=args[1])

        if name == "uniform":
            arity(1)
            if isinstance(args[0], Space):
                try:
                    return ms.uniform(args[0].carrier, args[0])
                except Exception as e:
                    raise DslTypeError(str(e), span)
            if not isinstance(args[0], SetV):
                raise DslTypeError("uniform needs a set or a space", span)
            try:
                return ms.uniform(args[0].set, args[0].space)
            except Exception as e:
                raise DslTypeError(str(e), span)
        if name == "dirac":
            arity(1, 2)
            if isinstance(args[0], Space):
                x = _vector(args[1], spans[1])
                if x.shape[0] != args[0].dim:
                    raise DslTypeError("dirac point dim != space dim", span)
                return ms.dirac(x, args[0])
            return ms.dirac(_vector(args[0], spans[0]))
        if name == "gauss":
            arity(2)
            mu = _vector(args[0], spans[0])
            cov = args[1]
            if isinstance(cov, float):
                Sigma = cov * np.eye(mu.shape[0])
            else:
                arr = _numbers(cov, spans[1], "a covariance")
                Sigma = np.array(arr, dtype=float)
            try:
                return ms.gaussian(mu, Sigma)
            except Exception as e:
                raise DslTypeError(str(e), span)
        if name in ("laplace", "logistic"):
            arity(2)
            if not (isinstance(args[0], float) and isinstance(args[1], float)):
                raise DslTypeError(f"{name} needs (loc, scale) numbers", span)
            try:
                return ms.density1d(name, args[0], args[1])
            except Exception as e:
                raise DslTypeError(str(e), span)

        if name == "noisy":
            arity(3, 4)
            M = _matrix(args[0], spans[0])
            c = _vector(args[1], spans[1])
            if not isinstance(args[2], State):
                raise DslTypeError("noisy needs a noise state as third argument", span)
            domain = None
            if len(args) == 4:
                if not isinstance(args[3], SetV):
                    raise DslTypeError("noisy domain must be a set", span)
                domain = args[3].set
            try:
                return ch.noisy_affine(M, c, args[2], domain)
            except Exception as e:
                raise DslTypeError(str(e), span)
        if name == "update":
            arity(1)
            return ch.update(_as_effect_like(args[0], span))
        if name == "copy":
            arity(1)
            return ch.copy_channel(_expect_space(args[0], span))
        if name == "discard":
            arity(1)
            return ch.discard(_expect_space(args[0], span))
        if name == "id":
            arity(1)
            return ch.identity(_expect_space(args[0], span))
        if name == "swap":
            arity(2)
            return ch.swap(_expect_space(args[0], span), _expect_space(args[1], span))
        if name == "convolve":
            arity(2)
            f = _as_channel(args[0], spans[0])
            g = _as_channel(args[1], spans[1])
            try:
                return ch.convolve(f, g)
            except Exception as e:
                raise DslTypeError(str(e), span)
        if name == "pair":
            arity(2)
            if not isinstance(args[0], State):
                raise DslTypeError("pair needs (state, concept)", span)
            C = _as_effect_like(args[1], spans[1])
            if C.space.dim != args[0].dim:
                raise DslTypeError(
                    f"pair dims differ: state on R^{args[0].dim}, concept on "
                    f"R^{C.space.dim}", span,
                )
            return ("pair", args[0], C)
        if name == "pullback":
            arity(2)
            f = _as_channel(args[0], spans[0])
            C = _as_effect_like(args[1], spans[1])
            if f.cod != C.space:
                raise DslTypeError(
                    f"pullback dims differ: channel into R^{f.cod.dim}, concept "
                    f"on R^{C.space.dim}", span,
                )
            return ch.pullback_effect(f, C)

        raise DslTypeError(f"unknown builtin {name!r}", span)

    # -- declarations --------------------------------------------------------

    def decl(self, d: Decl):
        value = self.expr(d.expr)
        kind = d.kind
        if kind == "space":
            if isinstance(value, SetV):
                value = value.space or space_of(value.set)
            if not isinstance(value, Space):
                raise DslTypeError(
                    f"declaration {d.name!r} is marked space but is {describe(value)}",
                    d.span,
                )
        elif kind == "concept":
            ok = isinstance(value, (Concept, ch.PullbackEffect)) or (
                isinstance(value, ch.Channel) and value.cod.is_unit()
            )
            if not ok:
                raise DslTypeError(
                    f"declaration {d.name!r} is marked concept but is {describe(value)}",
                    d.span,
                )
        elif kind == "state":
            ok = isinstance(value, State) or (
                isinstance(value, ch.Channel) and value.dom.is_unit()
            )
            if not ok:
                raise DslTypeError(
                    f"declaration {d.name!r} is marked state but is {describe(value)}",
                    d.span,
                )
        elif kind == "channel":
            if not isinstance(value, ch.Channel):
                raise DslTypeError(
                    f"declaration {d.name!r} is marked channel but is {describe(value)}",
                    d.span,
                )
        elif kind == "scalar":
            ok = isinstance(value, float) or (
                isinstance(value, ch.Channel)
                and value.dom.is_unit()
                and value.cod.is_unit()
            ) or (isinstance(value, tuple) and value and value[0] == "pair")
            if not ok:
                raise DslTypeError(
                    f"declaration {d.name!r} is marked scalar but is {describe(value)}",
                    d.span,
                )
        self.env[d.name] = value
        self.kinds[d.name] = kind
        return value


def _expect_space(v, span):
    if isinstance(v, Space):
        return v
    if isinstance(v, SetV):
        return v.space or space_of(v.set)
    raise DslTypeError(f"expected a space, got {describe(v)}", span)


def typecheck(ast: Ast, env: dict | None = None) -> TypedDiagram:
    """Elaborate and check a parsed program; names must be declared before
    use and every wiring must be dimensionally consistent."""
    el = _Elaborator(env)
    for d in ast.decls:
        if d.name in el.env:
            raise DslTypeError(f"name {d.name!r} declared twice", d.span)
        el.decl(d)
    return TypedDiagram(ast, el.env, el.types, el.wiring_types, el.kinds)


def evaluate(td, name: str | None = None, bindings: dict | None = None, seed: int = 0):
    """Force a declaration to its final value.

    Scalars (numbers, `pair` results, and I ~> I wirings) come back as
    NumericResult (value, stderr, strategy); state-shaped wirings come back
    as States; everything else is returned as built.
    """
    if isinstance(td, Ast):
        td = typecheck(td, bindings)
    elif bindings:
        td = typecheck(td.ast, bindings)
    if name is None:
        if not td.ast.decls:
            raise EvalError("empty program has nothing to evaluate")
        name = td.ast.decls[-1].name
    if name not in td.env:
        raise EvalError(f"no declaration named {name!r}")
    value = td.env[name]

    if isinstance(value, float):
        return NumericResult(value, 0.0, "closed-form")
    if isinstance(value, tuple) and value and value[0] == "pair":
        _, state, concept = value
        return ms.pair_with_error(state, concept)
    if isinstance(value, ch.Channel) and value.dom.is_unit():
        out = value.apply(UNIT_POINT, seed=seed)
        if value.cod.is_unit():
            return ch.scalar_with_error(out)
        return out
    return value


# ---------------------------------------------------------------------------
# Shipped corpus
# ---------------------------------------------------------------------------


def corpus_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "corpus")


def corpus_path(filename: str) -> str:
    return os.path.join(corpus_dir(), filename)


def load_corpus(filename: str) -> Ast:
    with open(corpus_path(filename), "r", encoding="utf-8") as fh:
        return parse(fh.read())
