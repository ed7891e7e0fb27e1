"""
Locally constant, compactly supported complex functions on Q_p^d.

An ``LCFunction`` is a dense table over the level-``R`` subballs of its
support ball, stored in child-path order (see ``balls.descendants``). Values
outside the support are zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

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
    descendants,
    digit_at,
    path_index,
    power,
    sup,
)
from .errors import InvalidIndex, MissingCells, UnsupportedDimension
from .fp import Vector, all_classes, class_from_index, class_index
from .morphisms import Morphism, Translation

logger = logging.getLogger(__name__)

Scalar = Union[complex, float, int]


@dataclass(frozen=True, eq=False)
class LCFunction:
    """Function constant on level-``resolution`` balls, supported on ``support``."""

    support: Ball
    resolution: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.resolution < self.support.level:
            raise ValueError("resolution must not be coarser than the support ball")
        values = np.array(self.values, dtype=np.complex128)
        expected = self.cell_count
        if values.shape != (expected,):
            raise MissingCells(f"expected {expected} cell values, got {values.shape[0] if values.ndim else 0}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def p(self) -> int:
        return self.support.p

    @property
    def d(self) -> int:
        return self.support.d

    @property
    def cell_count(self) -> int:
        return self.p ** ((self.resolution - self.support.level) * self.d)

    @property
    def cell_measure(self) -> Fraction:
        return power(self.p, -self.resolution * self.d)

    def cells(self) -> List[Ball]:
        return descendants(self.support, self.resolution)

    def evaluate(self, x: Union[Ball, PointLike]) -> complex:
        return evaluate(self, x)

    def __add__(self, other: "LCFunction") -> "LCFunction":
        first, second = align(self, other)
        return LCFunction(first.support, first.resolution, first.values + second.values)

    def __sub__(self, other: "LCFunction") -> "LCFunction":
        first, second = align(self, other)
        return LCFunction(first.support, first.resolution, first.values - second.values)

    def __neg__(self) -> "LCFunction":
        return LCFunction(self.support, self.resolution, -self.values)

    def __mul__(self, scalar: Scalar) -> "LCFunction":
        return LCFunction(self.support, self.resolution, self.values * complex(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"LCFunction(support={self.support!r}, R={self.resolution})"


@dataclass(frozen=True)
class WaveletIndex:
    """``psi_{gamma n J}``: ``n`` holds the fractional parts in ``[0, 1)``."""

    gamma: int
    n: Point
    j: Vector

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", tuple(Fraction(x) % 1 for x in self.n))
        object.__setattr__(self, "j", tuple(int(x) for x in self.j))
        if len(self.n) != len(self.j):
            raise InvalidIndex("n and J must have the same dimension")

    def support(self, p: int) -> Ball:
        scale = power(p, -self.gamma)
        return Ball(p, len(self.j), -self.gamma, tuple(x * scale for x in self.n))


def make_function(
    support: Ball,
    resolution: int,
    table: Union[Sequence[Scalar], np.ndarray, Mapping[Ball, Scalar]],
) -> LCFunction:
    """Build a function from a full table, either in path order or keyed by cell ball."""
    if isinstance(table, Mapping):
        cells = descendants(support, resolution)
        missing = [c for c in cells if c not in table]
        if missing:
            raise MissingCells(f"{len(missing)} of {len(cells)} cells have no value (first: {missing[0]!r})")
        values = np.array([complex(table[c]) for c in cells], dtype=np.complex128)
        return LCFunction(support, resolution, values)
    return LCFunction(support, resolution, np.asarray(table, dtype=np.complex128))


def indicator(ball: Ball, value: Scalar = 1) -> LCFunction:
    return LCFunction(ball, ball.level, np.array([complex(value)]))


def omega(p: int, d: int = 1) -> LCFunction:
    """Indicator of the unit ball Z_p^d."""
    return indicator(Ball.unit(p, d))


def zero_function(support: Ball) -> LCFunction:
    return indicator(support, 0)


def _cell_index(f: LCFunction, x: Union[Ball, PointLike]) -> Optional[int]:
    if isinstance(x, Ball):
        if x.level < f.resolution:
            raise ValueError(f"{x!r} is coarser than the resolution {f.resolution}")
        cell = ancestor(x, f.resolution)
    else:
        cell = ball_from_point(x, f.resolution, f.p)
    if not f.support.contains(cell):
        return None
    return path_index(f.support, cell)


def evaluate(f: LCFunction, x: Union[Ball, PointLike]) -> complex:
    """Value at a point, or on a ball at least as fine as the resolution."""
    index = _cell_index(f, x)
    return 0j if index is None else complex(f.values[index])


def ball_integral(f: LCFunction, ball: Ball) -> complex:
    """``∫_ball f`` for any ball."""
    if ball.level <= f.support.level:
        return integral(f) if ball.contains(f.support) else 0j
    if not f.support.contains(ball):
        return 0j
    if ball.level >= f.resolution:
        return complex(f.values[path_index(f.support, ancestor(ball, f.resolution))]) * float(ball.measure())
    block = f.p ** ((f.resolution - ball.level) * f.d)
    start = path_index(f.support, ball) * block
    return complex(f.values[start:start + block].sum()) * float(f.cell_measure)


def integral(f: LCFunction) -> complex:
    return complex(f.values.sum()) * float(f.cell_measure)


def refine(f: LCFunction, resolution: int) -> LCFunction:
    """Re-tabulate at a finer resolution; ``evaluate`` is unchanged."""
    if resolution < f.resolution:
        raise ValueError("refine only goes to finer resolutions")
    repeat = f.p ** ((resolution - f.resolution) * f.d)
    return LCFunction(f.support, resolution, np.repeat(f.values, repeat))


def extend_support(f: LCFunction, ball: Ball) -> LCFunction:
    """Re-tabulate on a larger support ball (zeros outside the old support)."""
    if not ball.contains(f.support):
        raise ValueError(f"{ball!r} does not contain {f.support!r}")
    if ball == f.support:
        return f
    depth = f.p ** ((f.resolution - f.support.level) * f.d)
    values = np.zeros(f.p ** ((f.resolution - ball.level) * f.d), dtype=np.complex128)
    start = path_index(ball, f.support) * depth
    values[start:start + depth] = f.values
    return LCFunction(ball, f.resolution, values)


def align(f: LCFunction, g: LCFunction) -> Tuple[LCFunction, LCFunction]:
    """Both functions on the common support ball at the common resolution."""
    if (f.p, f.d) != (g.p, g.d):
        raise ValueError("functions live on different spaces")
    support = sup(f.support, g.support)
    resolution = max(f.resolution, g.resolution)
    return (
        refine(extend_support(f, support), resolution),
        refine(extend_support(g, support), resolution),
    )


def inner(f: LCFunction, g: LCFunction) -> complex:
    """``∫ f conj(g)``."""
    first, second = align(f, g)
    return complex(np.vdot(second.values, first.values)) * float(first.cell_measure)


def l2norm(f: LCFunction) -> float:
    return math.sqrt(float(np.vdot(f.values, f.values).real) * float(f.cell_measure))


def l1norm(f: LCFunction) -> float:
    return float(np.abs(f.values).sum()) * float(f.cell_measure)


def max_abs_diff(f: LCFunction, g: LCFunction) -> Tuple[float, Optional[Ball]]:
    """Largest cell-wise ``|f - g|`` and the cell where it occurs."""
    first, second = align(f, g)
    diff = np.abs(first.values - second.values)
    index = int(np.argmax(diff))
    value = float(diff[index])
    if value == 0.0:
        return 0.0, None
    return value, first.cells()[index]


def root_of_unity(k: int, p: int) -> complex:
    return complex(np.exp(2j * np.pi * (k % p) / p))


def wavelet(index: WaveletIndex, p: int, d: Optional[int] = None) -> LCFunction:
    """``psi_{gamma n J}``: ``p**(-d gamma / 2) * omega**(J . c)`` on the child of class ``c``."""
    d = len(index.j) if d is None else d
    if len(index.j) != d:
        raise InvalidIndex(f"J has {len(index.j)} entries, expected d={d}")
    if not any(x % p for x in index.j):
        raise InvalidIndex("J must be nonzero mod p")
    for x in index.n:
        den = x.denominator
        while den % p == 0:
            den //= p
        if den != 1:
            raise InvalidIndex(f"n coordinate {x} is not a finite {p}-adic expansion")
    support = index.support(p)
    scale = p ** (-d * index.gamma / 2)
    values = [
        scale * root_of_unity(sum(a * b for a, b in zip(index.j, c)), p) for c in all_classes(p, d)
    ]
    return LCFunction(support, support.level + 1, np.array(values, dtype=np.complex128))


def wavelets_on_ball(ball: Ball) -> List[Tuple[WaveletIndex, LCFunction]]:
    """The ``p**d - 1`` wavelets supported on ``ball``."""
    gamma = -ball.level
    n = tuple(c * power(ball.p, gamma) for c in ball.center)
    out = []
    for j in all_classes(ball.p, ball.d)[1:]:
        idx = WaveletIndex(gamma, n, j)
        out.append((idx, wavelet(idx, ball.p, ball.d)))
    return out


def pushforward(phi: Morphism, f: LCFunction) -> LCFunction:
    """``x -> f(phi(x))``, tabulated on ``phi^-1(supp f)`` by walking tangent maps."""
    support = phi.preimage_ball(f.support)
    resolution = f.resolution - phi.gamma
    p, d = f.p, f.d
    # walk the preimage subtree; each node carries the index of its image cell prefix
    layer: List[Tuple[Ball, int]] = [(support, 0)]
    base = p**d
    for _ in range(resolution - support.level):
        nxt: List[Tuple[Ball, int]] = []
        for ball, image_index in layer:
            action = phi.child_action(ball)
            for c, sub in zip(all_classes(p, d), children(ball)):
                nxt.append((sub, image_index * base + action.table[class_index(c, p)]))
        layer = nxt
    values = f.values[np.array([index for _, index in layer], dtype=np.int64)]
    return LCFunction(support, resolution, values)


def unitary_action(phi: Morphism, f: LCFunction) -> LCFunction:
    """``p**(-d gamma / 2) f(phi(x))``; preserves ``l2norm``."""
    return pushforward(phi, f) * (f.p ** (-f.d * phi.gamma / 2))


def translate(f: LCFunction, shift: PointLike) -> LCFunction:
    """``x -> f(x - shift)``."""
    minus = tuple(-c for c in as_point(shift))
    return pushforward(Translation(f.p, minus), f)


# -- frames (d = 1) -------------------------------------------------------------


def _orbit_tables(p: int) -> List[Tuple[int, ...]]:
    return list(permutations(range(p)))


def ball_orbit_functions(ball: Ball) -> List[LCFunction]:
    """The ``p!`` functions on ``ball`` whose child values permute the normalised p-th roots of unity."""
    if ball.d != 1:
        raise UnsupportedDimension("orbit functions are defined for d = 1 only")
    p = ball.p
    scale = p ** (ball.level / 2)
    return [
        LCFunction(ball, ball.level + 1, np.array([scale * root_of_unity(k, p) for k in perm]))
        for perm in _orbit_tables(p)
    ]


def _child_integrals(g: LCFunction, ball: Ball) -> np.ndarray:
    return np.array([ball_integral(g, c) for c in children(ball)], dtype=np.complex128)


def _frame_balls(g: LCFunction, gamma_max: int) -> Iterator[Ball]:
    """Balls meeting ``supp g`` with level ``>= -gamma_max`` on which ``g`` is not constant."""
    for level in range(-gamma_max, g.support.level):
        yield ancestor(g.support, level)
    for level in range(max(g.support.level, -gamma_max), g.resolution):
        yield from descendants(g.support, level)


def frame_coefficients(g: LCFunction, gamma_max: int) -> Dict[Ball, np.ndarray]:
    """Per ball, the inner products ``<g, psi^(N)>`` with its ``p!`` orbit functions.

    Balls are keyed in (level, centre encoding) order and orbit functions in
    lexicographic permutation order. Balls on which ``g`` is constant have
    all-zero coefficients and are left out.
    """
    if g.d != 1:
        raise UnsupportedDimension("frame sums are defined for d = 1 only")
    p = g.p
    roots = np.array([root_of_unity(k, p) for k in range(p)])
    tables = np.array(_orbit_tables(p), dtype=np.int64)
    out: Dict[Ball, np.ndarray] = {}
    for ball in sorted(_frame_balls(g, gamma_max), key=Ball.sort_key):
        integrals = _child_integrals(g, ball)
        if np.all(integrals == integrals[0]):
            continue
        scale = p ** (ball.level / 2)
        # <g, psi> = sum_c I_c * conj(psi_c)
        out[ball] = (integrals[None, :] * np.conj(roots[tables]) * scale).sum(axis=1)
    return out


def frame_partial_sum(g: LCFunction, gamma_max: int) -> Tuple[float, float]:
    """``sum |<g, psi^(N)>|**2`` over orbit functions of balls up to diameter ``p**gamma_max``.

    Returns ``(partial, tail_bound)`` where ``tail_bound = p! p**-gamma_max
    ||g||_1**2 / (p - 1)`` bounds the contribution of the larger balls.
    """
    coefficients = frame_coefficients(g, gamma_max)
    partial = float(sum(float(np.sum(np.abs(c) ** 2)) for c in coefficients.values()))
    p = g.p
    tail = math.factorial(p) * p ** (-gamma_max) * l1norm(g) ** 2 / (p - 1)
    logger.debug("frame partial sum over %d balls: %.17g", len(coefficients), partial)
    return partial, tail


def frame_partial_sums_by_level(g: LCFunction, gamma_max: int) -> List[Tuple[int, float, float]]:
    """Rows ``(gamma, level_sum, cumulative)`` for ``gamma`` from ``gamma_max`` down."""
    by_gamma: Dict[int, float] = {}
    for ball, coeffs in frame_coefficients(g, gamma_max).items():
        by_gamma[-ball.level] = by_gamma.get(-ball.level, 0.0) + float(np.sum(np.abs(coeffs) ** 2))
    rows = []
    total = 0.0
    for gamma in sorted(by_gamma, reverse=True):
        total += by_gamma[gamma]
        rows.append((gamma, by_gamma[gamma], total))
    return rows


def sqrt_p_exponent(value: float, p: int, tol: float = 1e-12) -> Optional[int]:
    """``k`` with ``|value| = p**(k/2)``, or ``None`` if no such integer exists."""
    magnitude = abs(value)
    if magnitude == 0:
        return None
    k = round(2 * math.log(magnitude, p))
    if abs(magnitude - p ** (k / 2)) <= tol * max(1.0, p ** (k / 2)):
        return k
    return None


def coarsen(f: LCFunction, resolution: int) -> Optional[LCFunction]:
    """Re-tabulate at a coarser resolution if ``f`` is constant there."""
    if resolution > f.resolution:
        raise ValueError("coarsen only goes to coarser resolutions")
    block = f.p ** ((f.resolution - resolution) * f.d)
    grid = f.values.reshape(-1, block)
    if not np.allclose(grid, grid[:, :1], rtol=0, atol=1e-12 * max(1.0, float(np.abs(f.values).max()))):
        return None
    return LCFunction(f.support, resolution, grid[:, 0].copy())


def factor_as_wavelet(f: LCFunction, tol: float = 1e-9) -> Optional[Tuple[complex, WaveletIndex]]:
    """Write ``f = c * psi_{gamma n J}`` on ``supp f``, searching all ``J``.

    The support is first shrunk to the smallest ball carrying nonzero values.
    """
    nonzero = np.flatnonzero(np.abs(f.values) > tol * max(1.0, float(np.abs(f.values).max(initial=0.0))))
    if nonzero.size == 0:
        return None
    cells = f.cells()
    ball = cells[int(nonzero[0])]
    for index in nonzero[1:]:
        ball = sup(ball, cells[int(index)])
    if ball.level >= f.resolution:
        return None
    local = _restrict(f, ball)
    values = coarsen(local, ball.level + 1)
    if values is None:
        return None
    for idx, psi in wavelets_on_ball(ball):
        c = inner(values, psi)
        if np.allclose(values.values, c * psi.values, rtol=0, atol=tol * max(1.0, abs(c))):
            return c, idx
    return None


def _restrict(f: LCFunction, ball: Ball) -> LCFunction:
    if ball == f.support:
        return f
    block = f.p ** ((f.resolution - ball.level) * f.d)
    start = path_index(f.support, ball) * block
    return LCFunction(ball, f.resolution, f.values[start:start + block].copy())


def restrict(f: LCFunction, ball: Ball) -> LCFunction:
    """``f`` restricted to ``ball`` and tabulated there."""
    if ball.contains(f.support):
        return extend_support(f, ball)
    if not f.support.contains(ball):
        return zero_function(ball)
    if ball.level > f.resolution:
        return indicator(ball, evaluate(f, ball))
    return _restrict(f, ball)


def cell_path(support: Ball, cell: Ball) -> List[int]:
    """Child indices from ``support`` down to ``cell``."""
    return [
        class_index(tuple(digit_at(c, j, support.p) for c in cell.center), support.p)
        for j in range(support.level, cell.level)
    ]


def cell_from_path(support: Ball, path: Sequence[int]) -> Ball:
    ball = support
    for index in path:
        ball = child(ball, class_from_index(int(index), support.p, support.d))
    return ball


def tabulate(
    support: Ball, resolution: int, func: Callable[[Ball], Scalar]
) -> LCFunction:
    """Tabulate ``func`` over the cells of ``support``."""
    values = [complex(func(cell)) for cell in descendants(support, resolution)]
    return LCFunction(support, resolution, np.array(values, dtype=np.complex128))


def random_wavelet_span(
    rng: np.random.Generator,
    p: int,
    d: int,
    count: int,
    gammas: Sequence[int] = (-1, 0, 1),
    n_digits: int = 1,
) -> LCFunction:
    """Random complex combination of ``count`` wavelets with small ``n``."""
    total: Optional[LCFunction] = None
    for _ in range(count):
        gamma = int(rng.choice(list(gammas)))
        n = tuple(
            sum(
                (Fraction(int(rng.integers(0, p))) * power(p, -k) for k in range(1, n_digits + 1)),
                Fraction(0),
            )
            for _ in range(d)
        )
        j = tuple(int(x) for x in rng.integers(0, p, size=d))
        if not any(j):
            j = (1,) + j[1:]
        coeff = complex(rng.normal(), rng.normal())
        term = wavelet(WaveletIndex(gamma, n, j), p, d) * coeff
        total = term if total is None else total + term
    assert total is not None
    return total


__all__ = [
    "LCFunction",
    "WaveletIndex",
    "make_function",
    "indicator",
    "omega",
    "zero_function",
    "evaluate",
    "ball_integral",
    "integral",
    "refine",
    "extend_support",
    "align",
    "inner",
    "l2norm",
    "l1norm",
    "max_abs_diff",
    "root_of_unity",
    "wavelet",
    "wavelets_on_ball",
    "pushforward",
    "unitary_action",
    "translate",
    "ball_orbit_functions",
    "frame_coefficients",
    "frame_partial_sum",
    "frame_partial_sums_by_level",
    "sqrt_p_exponent",
    "coarsen",
    "factor_as_wavelet",
    "restrict",
    "cell_path",
    "cell_from_path",
    "tabulate",
    "random_wavelet_span",
]
