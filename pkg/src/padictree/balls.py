"""
The tree of balls T(Q_p^d).

A ``Ball`` of level ``L`` is ``c + p**L Z_p^d``: diameter ``p**-L``, Haar
measure ``p**(-L*d)``. The canonical centre keeps, per coordinate, the digits
at positions ``< L``; it is stored as a nonnegative rational with a power of
``p`` as denominator. Children have level ``L + 1`` and are indexed by the
tangent class (digit vector at position ``L``) in lexicographic order.

Points are tuples of rationals with p-power denominators, i.e. finite p-adic
expansions. ``PAdicVec`` values are accepted wherever a point is expected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .core import PAdicVec, valuation
from .errors import (
    DegenerateBasis,
    EnumerationCap,
    InsufficientPrecision,
    InvalidDirection,
    NotASetS,
    NotInBall,
    SchemaError,
)
from .fp import (
    Vector,
    all_classes,
    canonical_direction,
    class_index,
    rank_mod,
    vec_add,
    vec_scale,
    vec_sub,
)

Point = Tuple[Fraction, ...]
PointLike = Union[PAdicVec, Sequence[Union[int, Fraction]]]
TangentClass = Vector

ENUMERATION_CAP = 10**6


@lru_cache(maxsize=None)
def power(p: int, k: int) -> Fraction:
    return Fraction(p) ** k


def digit_at(r: Fraction, j: int, p: int) -> int:
    """Digit of the p-adic expansion of ``r`` at position ``j``."""
    return int((r / power(p, j)) // 1) % p


def as_point(x: PointLike) -> Point:
    if isinstance(x, PAdicVec):
        return x.to_fractions()
    return tuple(Fraction(c) for c in x)


@dataclass(frozen=True, order=False)
class Ball:
    p: int
    d: int
    level: int
    center: Point = field(default=())

    def __post_init__(self) -> None:
        modulus = power(self.p, self.level)
        center = self.center or (Fraction(0),) * self.d
        if len(center) != self.d:
            raise ValueError(f"centre has {len(center)} coordinates, expected d={self.d}")
        object.__setattr__(self, "center", tuple(Fraction(c) % modulus for c in center))

    @classmethod
    def unit(cls, p: int, d: int = 1) -> "Ball":
        """The unit ball Z_p^d."""
        return cls(p, d, 0)

    def diameter(self) -> Fraction:
        return power(self.p, -self.level)

    def measure(self) -> Fraction:
        return power(self.p, -self.level * self.d)

    def contains(self, other: Union["Ball", PointLike]) -> bool:
        if isinstance(other, Ball):
            if other.level < self.level:
                return False
            return ancestor(other, self.level) == self
        x = as_point(other)
        modulus = power(self.p, self.level)
        return all(c % modulus == b for c, b in zip(x, self.center))

    def sort_key(self) -> Tuple[int, str]:
        return (self.level, encode_ball(self))

    def __repr__(self) -> str:
        return f"Ball({encode_ball(self)})"


def ball_from_point(x: PointLike, level: int, p: Optional[int] = None) -> Ball:
    """The unique ball of the given level containing ``x``."""
    if isinstance(x, PAdicVec):
        short = [c for c in x.components if not c.is_zero and c.absolute_precision < level]
        if short:
            raise InsufficientPrecision(
                f"digits up to position {level - 1} are needed, only "
                f"{min(c.absolute_precision for c in short)} known"
            )
        p = x.p
    if p is None:
        raise ValueError("prime is required for rational points")
    point = as_point(x)
    return Ball(p, len(point), level, point)


def ancestor(ball: Ball, level: int) -> Ball:
    if level > ball.level:
        raise ValueError(f"level {level} is below ball level {ball.level}")
    return Ball(ball.p, ball.d, level, ball.center)


def parent(ball: Ball) -> Ball:
    return ancestor(ball, ball.level - 1)


def child(ball: Ball, cls: Sequence[int]) -> Ball:
    step = power(ball.p, ball.level)
    center = tuple(c + r * step for c, r in zip(ball.center, cls))
    return Ball(ball.p, ball.d, ball.level + 1, center)


@lru_cache(maxsize=65536)
def children(ball: Ball) -> Tuple[Ball, ...]:
    return tuple(child(ball, c) for c in all_classes(ball.p, ball.d))


def descendants(ball: Ball, level: int) -> List[Ball]:
    """All subballs of the given level, in lexicographic child-path order."""
    if level < ball.level:
        raise ValueError("descendant level must not be coarser than the ball")
    layer = [ball]
    for _ in range(level - ball.level):
        layer = [c for b in layer for c in children(b)]
    return layer


def class_of(ball: Ball, sub: Union[Ball, PointLike]) -> TangentClass:
    """Tangent class of the child of ``ball`` containing ``sub`` (canonical base point)."""
    center = sub.center if isinstance(sub, Ball) else as_point(sub)
    return tuple(digit_at(c, ball.level, ball.p) for c in center)


def path_index(support: Ball, sub: Ball) -> int:
    """Index of ``sub`` among the descendants of ``support`` at its level."""
    index = 0
    base = support.p**support.d
    for j in range(support.level, sub.level):
        cls = tuple(digit_at(c, j, support.p) for c in sub.center)
        index = index * base + class_index(cls, support.p)
    return index


def sup(a: Union[Ball, PointLike], b: Union[Ball, PointLike], p: Optional[int] = None) -> Ball:
    """Minimal ball containing both arguments.

    ``PAdicVec`` points are taken at their absolute precision; rational points
    are exact and must differ.
    """
    first = _as_ball_or_point(a)
    second = _as_ball_or_point(b)
    levels = [x.level for x in (first, second) if isinstance(x, Ball)]
    p = next((x.p for x in (first, second) if isinstance(x, Ball)), p)
    if p is None:
        raise ValueError("prime is required for rational points")
    ca = first.center if isinstance(first, Ball) else first
    cb = second.center if isinstance(second, Ball) else second
    if levels:
        m = min(levels)
        modulus = power(p, m)
        if all(x % modulus == y % modulus for x, y in zip(ca, cb)):
            return Ball(p, len(ca), m, ca)
    vals = [valuation(x - y, p) for x, y in zip(ca, cb)]
    finite = [v for v in vals if v is not None]
    if not finite:
        raise ValueError("sup of two equal exact points is not a ball")
    return Ball(p, len(ca), min(finite), ca)


def _as_ball_or_point(x: Union[Ball, PointLike]) -> Union[Ball, Point]:
    if isinstance(x, Ball):
        return x
    if isinstance(x, PAdicVec):
        return ball_from_point(x, x.absolute_precision)
    return as_point(x)


def distance(x: PointLike, y: PointLike, p: int) -> Fraction:
    """``diameter(sup(x, y))``; zero for equal points."""
    px, py = as_point(x), as_point(y)
    if px == py:
        return Fraction(0)
    return sup(px, py, p).diameter()


def tangent_class(
    ball: Ball, x: PointLike, x_b: Optional[PointLike] = None
) -> TangentClass:
    """``T_B(x) = (x - x_B) * diam(B) mod p``; ``x_B`` defaults to the canonical centre."""
    point = as_point(x)
    base = ball.center if x_b is None else as_point(x_b)
    if not ball.contains(point):
        raise NotInBall(f"point is not in {encode_ball(ball)}")
    if not ball.contains(base):
        raise NotInBall(f"base point is not in {encode_ball(ball)}")
    scale = ball.diameter()
    residues = []
    for xi, bi in zip(point, base):
        t = (xi - bi) * scale
        if t.denominator != 1:
            raise NotInBall("difference is not integral after scaling")
        residues.append(t.numerator % ball.p)
    return tuple(residues)


# -- set S -------------------------------------------------------------------


@dataclass(frozen=True)
class SetS:
    """The ``p - 1`` children of ``parent`` on the ``k1``-line through ``b0``, ``b0`` excluded."""

    parent: Ball
    k1: Vector
    b0: Ball
    members: Tuple[Ball, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SetS):
            return NotImplemented
        return set(self.members) == set(other.members)

    def __hash__(self) -> int:
        return hash(frozenset(self.members))

    def measure(self) -> Fraction:
        return sum((b.measure() for b in self.members), Fraction(0))


def build_set_S(ball: Ball, k1: Sequence[int], b0: Ball) -> SetS:
    p = ball.p
    if not any(x % p for x in k1):
        raise InvalidDirection("k1 must be a nonzero vector of F_p^d")
    if b0.level != ball.level + 1 or parent(b0) != ball:
        raise NotInBall(f"{encode_ball(b0)} is not a child of {encode_ball(ball)}")
    k = canonical_direction(k1, p)
    c0 = class_of(ball, b0)
    members = tuple(child(ball, vec_add(c0, vec_scale(j, k, p), p)) for j in range(1, p))
    return SetS(ball, k, b0, members)


def recover_from_S(members: Iterable[Ball]) -> Tuple[Vector, Ball]:
    """Recover ``(canonical k1, B0)`` from the member balls of a set S."""
    balls = list(dict.fromkeys(members))
    if not balls:
        raise NotASetS("empty set")
    p, d = balls[0].p, balls[0].d
    if len(balls) != p - 1:
        raise NotASetS(f"expected {p - 1} balls, got {len(balls)}")
    parents = {parent(b) for b in balls}
    if len(parents) != 1 or len({b.level for b in balls}) != 1:
        raise NotASetS("members are not siblings")
    top = parents.pop()
    classes = [class_of(top, b) for b in balls]
    if p == 2:
        e1 = (1,) + (0,) * (d - 1)
        return e1, child(top, vec_add(classes[0], e1, p))
    k = canonical_direction(vec_sub(classes[1], classes[0], p), p)
    line = [vec_add(classes[0], vec_scale(t, k, p), p) for t in range(p)]
    if set(classes) - set(line):
        raise NotASetS("members are not collinear in F_p^d")
    (c0,) = set(line) - set(classes)
    return k, child(top, c0)


def set_S_from_members(members: Iterable[Ball]) -> SetS:
    members = list(members)
    k1, b0 = recover_from_S(members)
    return build_set_S(parent(b0), k1, b0)


# -- residue enumeration -------------------------------------------------------


def _residues(point: Sequence[Fraction], modulus: Fraction) -> Point:
    return tuple(c % modulus for c in point)


def _check_cap(count: int, cap: int) -> None:
    if count > cap:
        raise EnumerationCap(f"{count} residues exceed the enumeration cap {cap}")


def ball_residues(ball: Ball, precision: int, cap: int = ENUMERATION_CAP) -> FrozenSet[Point]:
    """Residues mod ``p**precision`` of the points of ``ball``."""
    depth = precision - ball.level
    if depth < 0:
        raise ValueError("precision is coarser than the ball")
    _check_cap(ball.p ** (depth * ball.d), cap)
    step = power(ball.p, ball.level)
    modulus = power(ball.p, precision)
    offsets = range(ball.p**depth)
    return frozenset(
        _residues([c + t * step for c, t in zip(ball.center, ts)], modulus)
        for ts in product(offsets, repeat=ball.d)
    )


def set_S_residues(s: SetS, precision: int, cap: int = ENUMERATION_CAP) -> FrozenSet[Point]:
    out: set = set()
    for member in s.members:
        out |= ball_residues(member, precision, cap)
    return frozenset(out)


def _is_integral_unit_norm(v: Point, p: int, expected: int) -> bool:
    vals = [valuation(c, p) for c in v]
    finite = [x for x in vals if x is not None]
    return bool(finite) and min(finite) == expected


def span_region(
    x0: PointLike,
    basis: Sequence[PointLike],
    region: str,
    level: int,
    precision: Optional[int] = None,
    p: Optional[int] = None,
    cap: int = ENUMERATION_CAP,
) -> FrozenSet[Point]:
    """Residues mod ``p**precision`` of ``{x0 + sum z_l k_l}`` over a z-region.

    ``region`` is ``"ball"`` (``|z| <= p**-level``), ``"sphere"``
    (``|z| = p**-level``) or ``"tube"`` (``|z_1| = p**-level``,
    ``|z_l| <= p**-level`` for ``l >= 2``).
    """
    if isinstance(x0, PAdicVec):
        p = x0.p
    if p is None:
        raise ValueError("prime is required for rational points")
    origin = as_point(x0)
    vectors = [as_point(k) for k in basis]
    d = len(origin)
    if len(vectors) != d:
        raise DegenerateBasis(f"expected {d} basis vectors, got {len(vectors)}")
    precision = level + 3 if precision is None else precision
    if precision <= level:
        raise ValueError("precision must be finer than the region level")

    if region in ("ball", "sphere"):
        if not all(_is_integral_unit_norm(k, p, 0) for k in vectors):
            raise DegenerateBasis("basis vectors must have norm one")
        residues = [tuple(digit_at(c, 0, p) for c in k) for k in vectors]
    elif region == "tube":
        if not _is_integral_unit_norm(vectors[0], p, 0) or not all(
            _is_integral_unit_norm(k, p, 1) for k in vectors[1:]
        ):
            raise DegenerateBasis("tube basis needs |k_1| = 1 and |k_l| = 1/p")
        residues = [tuple(digit_at(c, 0, p) for c in vectors[0])]
        residues += [tuple(digit_at(c, 1, p) for c in k) for k in vectors[1:]]
    else:
        raise ValueError(f"unknown region {region!r}")
    if rank_mod(residues, p) != d:
        raise DegenerateBasis("basis residues do not generate F_p^d")

    depth = precision - level
    _check_cap(p ** (depth * d), cap)
    step = power(p, level)
    modulus = power(p, precision)
    out = set()
    for ts in product(range(p**depth), repeat=d):
        if region == "sphere" and all(t % p == 0 for t in ts):
            continue
        if region == "tube" and ts[0] % p == 0:
            continue
        point = [
            origin[i] + sum(t * step * k[i] for t, k in zip(ts, vectors)) for i in range(d)
        ]
        out.add(_residues(point, modulus))
    return frozenset(out)


# -- encodings ----------------------------------------------------------------


def _coordinate_digits(c: Fraction, level: int, p: int) -> List[int]:
    v = valuation(c, p)
    if v is None:
        return []
    return [digit_at(c, j, p) for j in range(v, level)]


@lru_cache(maxsize=65536)
def encode_ball(ball: Ball) -> str:
    """Frozen encoding ``p=<p>;d=<d>;L=<L>;c=<coord>;<coord>...``.

    Each coordinate lists the centre digits from the lowest nonzero position
    up to position ``L - 1``, low to high; digits are separated by ``,`` when
    ``p > 10``.
    """
    sep = "," if ball.p > 10 else ""
    coords = ";".join(
        sep.join(str(x) for x in _coordinate_digits(c, ball.level, ball.p)) for c in ball.center
    )
    return f"p={ball.p};d={ball.d};L={ball.level};c={coords}"


def encode_ball_bytes(ball: Ball) -> bytes:
    return encode_ball(ball).encode("ascii")


def decode_ball(text: str) -> Ball:
    try:
        head, coords = text.split(";c=", 1)
        fields = dict(part.split("=", 1) for part in head.split(";"))
        p, d, level = int(fields["p"]), int(fields["d"]), int(fields["L"])
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"malformed ball encoding {text!r}", "ball") from exc
    parts = coords.split(";")
    if len(parts) != d:
        raise SchemaError(f"expected {d} coordinates in {text!r}", "ball")
    center = []
    for part in parts:
        digits = [int(x) for x in (part.split(",") if p > 10 else part) if x != ""]
        start = level - len(digits)
        center.append(sum((Fraction(x) * power(p, start + i) for i, x in enumerate(digits)), Fraction(0)))
    return Ball(p, d, level, tuple(center))


def ball_to_json(ball: Ball) -> Dict[str, object]:
    return {
        "p": ball.p,
        "d": ball.d,
        "L": ball.level,
        "center": [_coordinate_digits(c, ball.level, ball.p) for c in ball.center],
    }


def ball_from_json(data: object) -> Ball:
    if isinstance(data, str):
        return decode_ball(data)
    if not isinstance(data, dict):
        raise SchemaError("expected an object or an encoded string", "ball")
    try:
        p, d, level = int(data["p"]), int(data["d"]), int(data["L"])
        coords = data.get("center") or [[] for _ in range(d)]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"missing or invalid field ({exc})", "ball") from exc
    center = []
    for digits in coords:
        start = level - len(digits)
        center.append(sum((Fraction(int(x)) * power(p, start + i) for i, x in enumerate(digits)), Fraction(0)))
    return Ball(p, d, level, tuple(center))


def to_dot(ball: Ball, depth: int = 2) -> str:
    """Graphviz rendering of ``ball`` and its descendants ``depth`` levels down."""
    lines = ["digraph balls {", "  node [shape=box, fontname=monospace];"]
    layer = [ball]
    lines.append(f'  "{encode_ball(ball)}";')
    for _ in range(depth):
        nxt = []
        for b in layer:
            for c in children(b):
                lines.append(f'  "{encode_ball(b)}" -> "{encode_ball(c)}";')
                nxt.append(c)
        layer = nxt
    lines.append("}")
    return "\n".join(lines) + "\n"


def direction_to_wavelet_index(k1: Sequence[int], p: int) -> Vector:
    """The wavelet index ``J`` attached to a nonzero tangent direction (``J = k1``)."""
    if not any(x % p for x in k1):
        raise InvalidDirection("k1 must be nonzero")
    return tuple(x % p for x in k1)


__all__ = [
    "Ball",
    "Point",
    "SetS",
    "TangentClass",
    "power",
    "digit_at",
    "as_point",
    "ball_from_point",
    "ancestor",
    "parent",
    "child",
    "children",
    "descendants",
    "class_of",
    "path_index",
    "sup",
    "distance",
    "tangent_class",
    "build_set_S",
    "recover_from_S",
    "set_S_from_members",
    "ball_residues",
    "set_S_residues",
    "span_region",
    "encode_ball",
    "encode_ball_bytes",
    "decode_ball",
    "ball_to_json",
    "ball_from_json",
    "to_dot",
    "direction_to_wavelet_index",
]
