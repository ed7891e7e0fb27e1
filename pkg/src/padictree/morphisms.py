"""
Parabolic automorphisms of the tree of balls as executable maps.

Every ``Morphism`` maps balls to balls (``image_ball`` / ``preimage_ball``)
and exposes its tangent map ``child_action(B)``: the bijection of ``F_p^d``
that sends the tangent class of a child of ``B`` to the class of its image
inside ``image_ball(B)``, both read with canonical base points.

Isometries are procedural: they fix every ball of level ``<= top_level`` and
permute the children of each finer ball ``B`` by ``provider(B)``. A point is
mapped by walking its chain of balls from ``top_level`` downwards.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .balls import (
    Ball,
    Point,
    PointLike,
    ancestor,
    as_point,
    ball_from_point,
    child,
    children,
    class_of,
    digit_at,
    encode_ball,
    encode_ball_bytes,
    power,
    sup,
)
from .core import PAdic, PAdicVec, rational_norm, valuation
from .errors import IdentityViolation, InvalidAction
from .fp import (
    Matrix,
    Vector,
    all_classes,
    class_from_index,
    class_index,
    det_mod,
    identity,
    mat_vec,
    vec_add,
    vec_sub,
)
from .prng import SplitMix64

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChildAction:
    """A bijection of ``F_p^d`` given by its table on class indices."""

    p: int
    d: int
    table: Tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.p**self.d
        if len(self.table) != n or sorted(self.table) != list(range(n)):
            raise InvalidAction(f"child action {self.table} is not a bijection of F_{self.p}^{self.d}")

    @classmethod
    def identity(cls, p: int, d: int) -> "ChildAction":
        return cls(p, d, tuple(range(p**d)))

    @classmethod
    def from_permutation(cls, p: int, d: int, perm: Sequence[int]) -> "ChildAction":
        return cls(p, d, tuple(int(x) for x in perm))

    @classmethod
    def from_affine(cls, p: int, a: Matrix, b: Sequence[int]) -> "ChildAction":
        d = len(a)
        if det_mod(a, p) == 0:
            raise InvalidAction("linear part is singular mod p")
        table = tuple(
            class_index(vec_add(mat_vec(a, c, p), b, p), p) for c in all_classes(p, d)
        )
        return cls(p, d, table)

    def apply(self, c: Sequence[int]) -> Vector:
        return class_from_index(self.table[class_index(c, self.p)], self.p, self.d)

    def inverse(self) -> "ChildAction":
        inv = [0] * len(self.table)
        for i, j in enumerate(self.table):
            inv[j] = i
        return ChildAction(self.p, self.d, tuple(inv))

    def after(self, inner: "ChildAction") -> "ChildAction":
        """``self o inner``."""
        return ChildAction(self.p, self.d, tuple(self.table[i] for i in inner.table))

    @property
    def is_identity(self) -> bool:
        return self.table == tuple(range(len(self.table)))

    def affine_form(self) -> Optional[Tuple[Matrix, Vector]]:
        """``(A, b)`` with ``c -> A c + b`` if the action is affine with invertible ``A``."""
        p, d = self.p, self.d
        b = self.apply((0,) * d)
        cols = [vec_sub(self.apply(tuple(int(i == j) for i in range(d))), b, p) for j in range(d)]
        a = tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))
        if det_mod(a, p) == 0:
            return None
        for c in all_classes(p, d):
            if self.apply(c) != vec_add(mat_vec(a, c, p), b, p):
                return None
        return a, b


class Morphism(ABC):
    """A ball-morphism of Q_p^d fixing the point at infinity.

    ``gamma`` is the dilation exponent: a level-``L`` ball maps to a
    level-``(L + gamma)`` ball.
    """

    p: int
    d: int
    gamma: int = 0

    @abstractmethod
    def image_ball(self, ball: Ball) -> Ball:
        ...

    @abstractmethod
    def preimage_ball(self, ball: Ball) -> Ball:
        ...

    def child_action(self, ball: Ball) -> ChildAction:
        image = self.image_ball(ball)
        table = tuple(
            class_index(class_of(image, self.image_ball(c)), self.p) for c in children(ball)
        )
        return ChildAction(self.p, self.d, table)

    def apply_point(self, x: PAdicVec) -> PAdicVec:
        return apply_point(self, x)


class Isometry(Morphism):
    def __init__(
        self,
        p: int,
        d: int,
        provider: Callable[[Ball], ChildAction],
        top_level: int = 0,
        *,
        seed: Optional[int] = None,
        mode: Optional[str] = None,
        table: Optional[Dict[Ball, ChildAction]] = None,
    ) -> None:
        self.p = p
        self.d = d
        self.gamma = 0
        self.top_level = top_level
        self.seed = seed
        self.mode = mode
        self.table = table
        self._provider = lru_cache(maxsize=1 << 16)(provider)

    def child_action(self, ball: Ball) -> ChildAction:
        if ball.level < self.top_level:
            return ChildAction.identity(self.p, self.d)
        return self._provider(ball)

    def image_ball(self, ball: Ball) -> Ball:
        if ball.level <= self.top_level:
            return ball
        p = self.p
        source = ancestor(ball, self.top_level)
        center = list(source.center)
        for j in range(self.top_level, ball.level):
            cls = tuple(digit_at(c, j, p) for c in ball.center)
            out = self._provider(source).apply(cls)
            step = power(p, j)
            center = [c + r * step for c, r in zip(center, out)]
            source = child(source, cls)
        return Ball(p, self.d, ball.level, tuple(center))

    def preimage_ball(self, ball: Ball) -> Ball:
        if ball.level <= self.top_level:
            return ball
        p = self.p
        source = ancestor(ball, self.top_level)
        for j in range(self.top_level, ball.level):
            target_cls = tuple(digit_at(c, j, p) for c in ball.center)
            act = self._provider(source)
            cls = class_from_index(act.table.index(class_index(target_cls, p)), p, self.d)
            source = child(source, cls)
        return source

    def __repr__(self) -> str:
        if self.seed is not None:
            return f"Isometry(p={self.p}, d={self.d}, seed={self.seed}, mode={self.mode}, top={self.top_level})"
        return f"Isometry(p={self.p}, d={self.d}, table={len(self.table or {})} entries)"


class Dilation(Morphism):
    """``x -> p**gamma x``."""

    def __init__(self, p: int, d: int, gamma: int) -> None:
        self.p = p
        self.d = d
        self.gamma = gamma

    def image_ball(self, ball: Ball) -> Ball:
        scale = power(self.p, self.gamma)
        return Ball(self.p, self.d, ball.level + self.gamma, tuple(c * scale for c in ball.center))

    def preimage_ball(self, ball: Ball) -> Ball:
        scale = power(self.p, -self.gamma)
        return Ball(self.p, self.d, ball.level - self.gamma, tuple(c * scale for c in ball.center))

    def child_action(self, ball: Ball) -> ChildAction:
        return ChildAction.identity(self.p, self.d)

    def __repr__(self) -> str:
        return f"Dilation(p={self.p}, gamma={self.gamma})"


class Translation(Morphism):
    """``x -> x + shift``; a mod-p-affine isometry with identity linear parts."""

    def __init__(self, p: int, shift: PointLike) -> None:
        self.shift = as_point(shift)
        self.p = p
        self.d = len(self.shift)
        self.gamma = 0

    def image_ball(self, ball: Ball) -> Ball:
        return Ball(self.p, self.d, ball.level, tuple(c + s for c, s in zip(ball.center, self.shift)))

    def preimage_ball(self, ball: Ball) -> Ball:
        return Ball(self.p, self.d, ball.level, tuple(c - s for c, s in zip(ball.center, self.shift)))

    def __repr__(self) -> str:
        return f"Translation(p={self.p}, shift={self.shift})"


@dataclass(frozen=True)
class DifferentiableSpec:
    """The affine map ``x -> a + u x`` on Q_p^d (scalar ``u``, finite expansions)."""

    p: int
    a: Point
    u: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", as_point(self.a))
        object.__setattr__(self, "u", Fraction(self.u))
        if self.u == 0:
            raise ValueError("u must be nonzero")
        for q in (self.u,) + self.a:
            den = q.denominator
            while den % self.p == 0:
                den //= self.p
            if den != 1:
                raise ValueError(f"{q} is not a finite {self.p}-adic expansion")

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def gamma(self) -> int:
        return valuation(self.u, self.p)  # type: ignore[return-value]

    def evaluate(self, x: PointLike) -> Point:
        return tuple(ai + self.u * xi for ai, xi in zip(self.a, as_point(x)))


class AffineMorphism(Morphism):
    def __init__(self, spec: DifferentiableSpec) -> None:
        self.spec = spec
        self.p = spec.p
        self.d = spec.d
        self.gamma = spec.gamma
        self._unit = int(spec.u / power(spec.p, self.gamma))

    def image_ball(self, ball: Ball) -> Ball:
        return Ball(self.p, self.d, ball.level + self.gamma, self.spec.evaluate(ball.center))

    def preimage_ball(self, ball: Ball) -> Ball:
        level = ball.level - self.gamma
        center = []
        for c, a in zip(ball.center, self.spec.a):
            t = (c - a) / power(self.p, self.gamma)
            k = valuation_denominator(t, self.p)
            exponent = level + k
            if exponent <= 0:
                center.append(Fraction(0))
                continue
            modulus = self.p**exponent
            s = int(t * power(self.p, k))
            center.append(Fraction(s * pow(self._unit, -1, modulus) % modulus) / power(self.p, k))
        return Ball(self.p, self.d, level, tuple(center))

    def __repr__(self) -> str:
        return f"AffineMorphism(a={self.spec.a}, u={self.spec.u})"


def valuation_denominator(t: Fraction, p: int) -> int:
    """Exponent ``k`` with ``t * p**k`` integral (denominator is a power of p)."""
    k = 0
    den = t.denominator
    while den % p == 0:
        den //= p
        k += 1
    return k


class Composition(Morphism):
    """``parts[0] o parts[1] o ... o parts[-1]``; empty means the identity."""

    def __init__(self, p: int, d: int, parts: Sequence[Morphism] = ()) -> None:
        self.p = p
        self.d = d
        self.parts: Tuple[Morphism, ...] = tuple(parts)
        self.gamma = sum(part.gamma for part in self.parts)

    def image_ball(self, ball: Ball) -> Ball:
        for part in reversed(self.parts):
            ball = part.image_ball(ball)
        return ball

    def preimage_ball(self, ball: Ball) -> Ball:
        for part in self.parts:
            ball = part.preimage_ball(ball)
        return ball

    def child_action(self, ball: Ball) -> ChildAction:
        act = ChildAction.identity(self.p, self.d)
        for part in reversed(self.parts):
            act = part.child_action(ball).after(act)
            ball = part.image_ball(ball)
        return act

    def __repr__(self) -> str:
        if not self.parts:
            return f"Identity(p={self.p}, d={self.d})"
        return " o ".join(repr(part) for part in self.parts)


class Inverse(Morphism):
    def __init__(self, base: Morphism) -> None:
        self.base = base
        self.p = base.p
        self.d = base.d
        self.gamma = -base.gamma

    def image_ball(self, ball: Ball) -> Ball:
        return self.base.preimage_ball(ball)

    def preimage_ball(self, ball: Ball) -> Ball:
        return self.base.image_ball(ball)

    def child_action(self, ball: Ball) -> ChildAction:
        return self.base.child_action(self.base.preimage_ball(ball)).inverse()

    def __repr__(self) -> str:
        return f"({self.base!r})^-1"


# -- constructors --------------------------------------------------------------


def identity_morphism(p: int, d: int = 1) -> Morphism:
    return Composition(p, d, ())


def make_isometry(
    p: int,
    d: int = 1,
    *,
    seed: Optional[int] = None,
    table: Optional[Mapping[Ball, Union[ChildAction, Sequence[int]]]] = None,
    mode: Optional[str] = None,
    top_level: int = 0,
) -> Isometry:
    """Build an isometry from a seed (procedural) or from a finite table.

    Seeded isometries use ``mode="permutation"`` (arbitrary child
    permutations, the default for ``d = 1``) or ``mode="affine"`` (the default
    for ``d > 1``).
    """
    if seed is not None:
        mode = mode or ("permutation" if d == 1 else "affine")
        if mode not in ("permutation", "affine"):
            raise InvalidAction(f"unknown isometry mode {mode!r}")

        def provider(ball: Ball) -> ChildAction:
            stream = SplitMix64.for_key(seed, encode_ball_bytes(ball))
            if mode == "permutation":
                return ChildAction(p, d, stream.permutation(p**d))
            a, b = stream.affine(p, d)
            return ChildAction.from_affine(p, a, b)

        return Isometry(p, d, provider, top_level, seed=seed, mode=mode)

    entries: Dict[Ball, ChildAction] = {}
    for ball, action in (table or {}).items():
        if not isinstance(action, ChildAction):
            action = ChildAction.from_permutation(p, d, action)
        if (action.p, action.d) != (p, d) or (ball.p, ball.d) != (p, d):
            raise InvalidAction(f"table entry at {encode_ball(ball)} has the wrong shape")
        if not action.is_identity:
            entries[ball] = action
    top = min((ball.level for ball in entries), default=top_level)
    fallback = ChildAction.identity(p, d)
    return Isometry(p, d, lambda ball: entries.get(ball, fallback), top, table=entries)


def make_dilation(gamma: int, p: int, d: int = 1) -> Morphism:
    if gamma == 0:
        return identity_morphism(p, d)
    return Dilation(p, d, gamma)


def make_translation(shift: PointLike, p: int) -> Translation:
    return Translation(p, shift)


def make_affine(spec: DifferentiableSpec) -> AffineMorphism:
    return AffineMorphism(spec)


def _flatten(morphism: Morphism) -> List[Morphism]:
    if isinstance(morphism, Composition):
        return [leaf for part in morphism.parts for leaf in _flatten(part)]
    return [morphism]


def compose(*morphisms: Morphism) -> Morphism:
    """``morphisms[0] o morphisms[1] o ...``, flattened with adjacent dilations merged."""
    if not morphisms:
        raise ValueError("compose needs at least one morphism")
    p, d = morphisms[0].p, morphisms[0].d
    if any((m.p, m.d) != (p, d) for m in morphisms):
        raise ValueError("cannot compose morphisms of different p or d")
    parts: List[Morphism] = []
    for leaf in (leaf for m in morphisms for leaf in _flatten(m)):
        if isinstance(leaf, Dilation) and parts and isinstance(parts[-1], Dilation):
            gamma = parts.pop().gamma + leaf.gamma
            if gamma:
                parts.append(Dilation(p, d, gamma))
            continue
        parts.append(leaf)
    if len(parts) == 1:
        return parts[0]
    return Composition(p, d, parts)


def invert(morphism: Morphism) -> Morphism:
    if isinstance(morphism, Dilation):
        return Dilation(morphism.p, morphism.d, -morphism.gamma)
    if isinstance(morphism, Translation):
        return Translation(morphism.p, tuple(-s for s in morphism.shift))
    if isinstance(morphism, Inverse):
        return morphism.base
    if isinstance(morphism, Composition):
        if not morphism.parts:
            return morphism
        return compose(*(invert(part) for part in reversed(morphism.parts)))
    return Inverse(morphism)


def apply_point(morphism: Morphism, x: PAdicVec) -> PAdicVec:
    """Image of a point, known to the same absolute precision shifted by ``gamma``."""
    image = morphism.image_ball(ball_from_point(x, x.absolute_precision))
    level = image.level
    components: List[PAdic] = []
    for c in image.center:
        v = valuation(c, x.p)
        if v is None:
            components.append(PAdic.zero(x.p, max(level, 1)))
        else:
            # the centre carries digits below ``level`` only, so v < level
            components.append(PAdic.from_fraction(c, x.p, level - v))
    return PAdicVec(tuple(components))


def image_ball(morphism: Morphism, ball: Ball) -> Ball:
    return morphism.image_ball(ball)


def tangent_map(morphism: Morphism, ball: Ball) -> ChildAction:
    """``phi_B = T_phi(B) o phi o T_B^-1`` with canonical base points."""
    return morphism.child_action(ball)


def tangent_map_with_base(
    morphism: Morphism, ball: Ball, x_b: PointLike, x_image: PointLike
) -> ChildAction:
    """Tangent map read with arbitrary base points ``x_B`` and ``x_phi(B)``."""
    p = morphism.p
    canonical = morphism.child_action(ball)
    image = morphism.image_ball(ball)
    shift_in = class_of(ball, x_b)
    shift_out = class_of(image, x_image)
    table = []
    for c in all_classes(p, morphism.d):
        out = canonical.apply(vec_add(c, shift_in, p))
        table.append(class_index(vec_sub(out, shift_out, p), p))
    return ChildAction(p, morphism.d, tuple(table))


def parabolic_normalize(morphism: Morphism) -> Tuple[int, Morphism]:
    """Split ``phi = dilation(gamma) o eta`` with ``eta`` an isometry."""
    gamma = morphism.gamma
    if gamma == 0:
        return 0, morphism
    eta = compose(Dilation(morphism.p, morphism.d, -gamma), morphism)
    return gamma, eta


@dataclass
class IsometryReport:
    passed: bool
    checked: int
    counterexample: Optional[str] = None


def _random_ball(rng: np.random.Generator, p: int, d: int, level: int, floor: int) -> Ball:
    center = []
    for _ in range(d):
        digits = rng.integers(0, p, size=max(level - floor, 0))
        center.append(sum((Fraction(int(x)) * power(p, floor + i) for i, x in enumerate(digits)), Fraction(0)))
    return Ball(p, d, level, tuple(center))


def is_isometry_check(
    morphism: Morphism,
    sample_count: int = 100,
    level_range: Tuple[int, int] = (-2, 6),
    seed: int = 0,
    fixed_chain_depth: int = 3,
) -> IsometryReport:
    """Sampled check of diameter and distance preservation and of the fixed ball chain."""
    rng = np.random.default_rng(seed)
    p, d = morphism.p, morphism.d
    low, high = level_range
    for i in range(sample_count):
        level = int(rng.integers(low, high + 1))
        first = _random_ball(rng, p, d, level, low - 2)
        second = _random_ball(rng, p, d, level, low - 2)
        img_first = morphism.image_ball(first)
        img_second = morphism.image_ball(second)
        if img_first.level != first.level:
            return IsometryReport(
                False, i, f"diameter of {encode_ball(first)} changes to {img_first.diameter()}"
            )
        if first != second:
            before = sup(first, second).diameter()
            after = sup(img_first, img_second).diameter()
            if before != after:
                return IsometryReport(
                    False, i, f"distance {encode_ball(first)}|{encode_ball(second)}: {before} -> {after}"
                )
        anchor = sup(first, img_first) if img_first != first else first
        for step in range(fixed_chain_depth + 1):
            outer = ancestor(anchor, anchor.level - step)
            if morphism.image_ball(outer) != outer:
                return IsometryReport(False, i, f"{encode_ball(outer)} above sup(x, phi(x)) is moved")
    logger.debug("isometry check passed for %r over %d samples", morphism, sample_count)
    return IsometryReport(True, sample_count)


def is_mod_p_affine(morphism: Morphism, balls: Sequence[Ball]) -> bool:
    return all(morphism.child_action(ball).affine_form() is not None for ball in balls)


def derivative_norm(
    spec: DifferentiableSpec, x: PointLike, samples: int = 8, seed: int = 0
) -> Fraction:
    """``|u|_p``, after checking ``|f(y) - f(x)| = |u| |y - x|`` on sampled ``y``."""
    p = spec.p
    u_norm = rational_norm(spec.u, p)
    rng = np.random.default_rng(seed)
    base = as_point(x)
    fx = spec.evaluate(base)
    for _ in range(samples):
        offset = tuple(
            Fraction(int(rng.integers(1, p**4))) * power(p, int(rng.integers(-2, 4))) for _ in base
        )
        y = tuple(a + b for a, b in zip(base, offset))
        lhs = max(rational_norm(a - b, p) for a, b in zip(spec.evaluate(y), fx))
        rhs = u_norm * max(rational_norm(a - b, p) for a, b in zip(y, base))
        if lhs != rhs:
            raise IdentityViolation(f"|f(y) - f(x)| = {lhs} but |f'| |y - x| = {rhs}")
    return u_norm


__all__ = [
    "ChildAction",
    "Morphism",
    "Isometry",
    "Dilation",
    "Translation",
    "AffineMorphism",
    "Composition",
    "Inverse",
    "DifferentiableSpec",
    "IsometryReport",
    "identity_morphism",
    "make_isometry",
    "make_dilation",
    "make_translation",
    "make_affine",
    "compose",
    "invert",
    "apply_point",
    "image_ball",
    "tangent_map",
    "tangent_map_with_base",
    "parabolic_normalize",
    "is_isometry_check",
    "is_mod_p_affine",
    "derivative_norm",
]
