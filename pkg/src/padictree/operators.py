"""
Pseudodifferential operators on ``LCFunction`` tables.

All operators return values on an explicit ``Window`` (a ball and an output
resolution). For every window cell ``x`` the integral over ``y`` is grouped by
the ball ``sup(x, y)``: levels at or beyond the input resolution contribute
nothing, levels between the kernel's tail and the input resolution are summed
explicitly, and the remaining large balls form a geometric series summed in
closed form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .balls import (
    Ball,
    ancestor,
    build_set_S,
    descendants,
    encode_ball,
    encode_ball_bytes,
    path_index,
    power,
    sup,
)
from .errors import DivergentKernel, InvalidAction, OutOfDomain, UnsupportedDimension
from .fp import Vector, inverse_mod, mat_vec
from .functions import LCFunction, ball_integral, evaluate, max_abs_diff, pushforward
from .morphisms import Morphism, parabolic_normalize
from .prng import SplitMix64

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel ``F`` on balls: table entries at levels ``>= from_level``, power-law tail below.

    The tail is ``F(B) = c * diam(B)**-(d + alpha)``. ``from_level=None``
    means the tail holds at every level (no table). Balls at table levels
    that are missing from the table have ``F = 0``.
    """

    p: int
    d: int
    c: complex
    alpha: float
    from_level: Optional[int] = None
    table: Mapping[Ball, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise DivergentKernel(f"tail exponent alpha={self.alpha} must be positive")
        if self.table and self.from_level is None:
            raise ValueError("a kernel table needs from_level")
        for ball in self.table:
            if (ball.p, ball.d) != (self.p, self.d):
                raise ValueError(f"table ball {encode_ball(ball)} has the wrong p or d")
            if ball.level < self.from_level:  # type: ignore[operator]
                raise ValueError(f"table ball {encode_ball(ball)} lies in the tail")
        object.__setattr__(self, "table", {b: complex(v) for b, v in self.table.items()})

    def __call__(self, ball: Ball) -> complex:
        if self.from_level is None or ball.level < self.from_level:
            return complex(self.c) * float(power(self.p, ball.level)) ** (self.d + self.alpha)
        return self.table.get(ball, 0j)

    def tail_start(self, level: int) -> int:
        """Largest level ``<= level`` below which the closed-form tail applies."""
        return level if self.from_level is None else min(self.from_level, level)

    def tail_sum(self, below: int, shell_fraction: float) -> complex:
        """``sum_{l < below} F(B_l) * shell_fraction * p**(-l d)``."""
        if self.from_level is not None and below > self.from_level:
            raise ValueError("tail sum crosses into the kernel table")
        p, a = self.p, self.alpha
        return complex(self.c) * shell_fraction * p ** ((below - 1) * a) / (1 - p ** (-a))


class VectorField:
    """Per-ball direction ``k1(B)`` in ``F_p^d``, never zero."""

    def __init__(
        self,
        p: int,
        d: int,
        provider: Callable[[Ball], Vector],
        *,
        kind: str = "custom",
        seed: Optional[int] = None,
        entries: Optional[Dict[Ball, Vector]] = None,
        default: Optional[Vector] = None,
    ) -> None:
        self.p = p
        self.d = d
        self.kind = kind
        self.seed = seed
        self.entries = entries
        self.default = default
        self._provider = provider
        self._cache: Dict[Ball, Vector] = {}

    def __call__(self, ball: Ball) -> Vector:
        k = self._cache.get(ball)
        if k is None:
            k = tuple(int(x) % self.p for x in self._provider(ball))
            if not any(k):
                raise InvalidAction(f"vector field vanishes at {encode_ball(ball)}")
            self._cache[ball] = k
        return k

    def __repr__(self) -> str:
        return f"VectorField(kind={self.kind}, p={self.p}, d={self.d})"


def seeded_field(seed: int, p: int, d: int) -> VectorField:
    def provider(ball: Ball) -> Vector:
        return SplitMix64.for_key(seed, encode_ball_bytes(ball)).nonzero_vector(p, d)

    return VectorField(p, d, provider, kind="seeded", seed=seed)


def table_field(entries: Mapping[Ball, Vector], default: Vector, p: int, d: int) -> VectorField:
    table = {ball: tuple(k) for ball, k in entries.items()}
    fallback = tuple(default)
    return VectorField(
        p, d, lambda ball: table.get(ball, fallback), kind="table", entries=table, default=fallback
    )


def constant_field(k1: Vector, p: int, d: int) -> VectorField:
    return table_field({}, k1, p, d)


@dataclass(frozen=True)
class Window:
    """Evaluation ball and output resolution."""

    ball: Ball
    resolution: int

    def __post_init__(self) -> None:
        if self.resolution < self.ball.level:
            raise ValueError("window resolution is coarser than the window ball")

    @classmethod
    def of(cls, f: LCFunction) -> "Window":
        return cls(f.support, f.resolution)

    def image(self, phi: Morphism) -> "Window":
        return Window(phi.image_ball(self.ball), self.resolution + phi.gamma)

    def output_resolution(self, f: LCFunction) -> int:
        return max(self.resolution, f.resolution)


@dataclass
class Residual:
    lhs: LCFunction
    rhs: LCFunction
    max_abs_diff: float
    argmax_cell: Optional[Ball]


def _residual(lhs: LCFunction, rhs: LCFunction) -> Residual:
    diff, cell = max_abs_diff(lhs, rhs)
    return Residual(lhs, rhs, diff, cell)


# -- kernels ---------------------------------------------------------------------


def gamma_p(alpha: float, p: int) -> float:
    """``(p**alpha - 1) / (1 - p**(-1 - alpha))``."""
    if not alpha > 0:
        raise OutOfDomain(f"alpha={alpha} must be positive")
    return (p**alpha - 1) / (1 - p ** (-1 - alpha))


def vladimirov_kernel(alpha: float, p: int, d: int = 1) -> KernelSpec:
    return KernelSpec(p, d, gamma_p(alpha, p), alpha)


def wavelet_eigenvalue(alpha: float, gamma: int, p: int) -> float:
    """Eigenvalue of ``D^alpha`` on wavelets supported on balls of diameter ``p**gamma``."""
    return float(p ** (alpha * (1 - gamma)))


def transport_kernel(kernel: KernelSpec, phi: Morphism) -> KernelSpec:
    """``B -> F(phi(B))``; the tail constant absorbs the diameter shift of ``phi``."""
    g = phi.gamma
    table = {phi.preimage_ball(ball): value for ball, value in kernel.table.items()}
    return KernelSpec(
        kernel.p,
        kernel.d,
        complex(kernel.c) * kernel.p ** (g * (kernel.d + kernel.alpha)),
        kernel.alpha,
        None if kernel.from_level is None else kernel.from_level - g,
        table,
    )


def transport_field(field_: VectorField, phi: Morphism) -> VectorField:
    """``B -> A_B^-1 k1(phi(B))`` with ``A_B`` the linear part of the tangent map at ``B``."""
    p, d = field_.p, field_.d

    def provider(ball: Ball) -> Vector:
        if d == 1:
            return (1,)
        target = field_(phi.image_ball(ball))
        affine = phi.child_action(ball).affine_form()
        if affine is None:
            raise InvalidAction(f"tangent map at {encode_ball(ball)} is not affine")
        return mat_vec(inverse_mod(affine[0], p), target, p)

    return VectorField(p, d, provider, kind="transported")


# -- evaluation ------------------------------------------------------------------


def _cells(w: Window, f: LCFunction) -> Tuple[int, List[Ball]]:
    resolution = w.output_resolution(f)
    return resolution, descendants(w.ball, resolution)


def _inside(f: LCFunction, cell: Ball) -> bool:
    return f.support.contains(cell)


def kernel_op(kernel: KernelSpec, f: LCFunction, w: Window) -> LCFunction:
    """``D_F f(x) = ∫ F(sup(x, y)) (f(x) - f(y)) dy`` on the window."""
    if (kernel.p, kernel.d) != (f.p, f.d):
        raise ValueError("kernel and function live on different spaces")
    p, d = f.p, f.d
    support = f.support
    total = ball_integral(f, support)
    shell = 1 - p ** (-d)
    resolution, cells = _cells(w, f)
    values = np.zeros(len(cells), dtype=np.complex128)
    for i, x in enumerate(cells):
        if _inside(f, x):
            fx = evaluate(f, x)
            lo = kernel.tail_start(support.level)
            acc = kernel.tail_sum(lo, shell) * fx
            inner_integral = total
            for level in range(lo, f.resolution):
                outer = inner_integral
                inner_integral = ball_integral(f, ancestor(x, level + 1))
                acc += kernel(ancestor(x, level)) * (
                    fx * shell * float(power(p, -level * d)) - (outer - inner_integral)
                )
            values[i] = acc
        else:
            values[i] = -kernel(sup(x, support)) * total
    return LCFunction(w.ball, resolution, values)


def vf_op(kernel: KernelSpec, field_: VectorField, f: LCFunction, w: Window) -> LCFunction:
    """Pseudodifferential vector field ``D_{F,k}``: the shell at each level is the set S."""
    if (kernel.p, kernel.d) != (f.p, f.d) or (field_.p, field_.d) != (f.p, f.d):
        raise ValueError("kernel, field and function live on different spaces")
    p, d = f.p, f.d
    support = f.support
    total = ball_integral(f, support)
    sphere = 1 - 1 / p
    jacobian = float(p ** (d - 1))
    resolution, cells = _cells(w, f)
    values = np.zeros(len(cells), dtype=np.complex128)
    for i, x in enumerate(cells):
        if _inside(f, x):
            fx = evaluate(f, x)
            lo = kernel.tail_start(support.level)
            acc = kernel.tail_sum(lo, sphere) * fx
            for level in range(lo, f.resolution):
                ball = ancestor(x, level)
                term = fx * sphere * float(power(p, -level * d))
                if level >= support.level:
                    s = build_set_S(ball, field_(ball), ancestor(x, level + 1))
                    term -= jacobian * sum(ball_integral(f, member) for member in s.members)
                acc += kernel(ball) * term
            values[i] = acc
        else:
            top = sup(x, support)
            s = build_set_S(top, field_(top), ancestor(x, top.level + 1))
            if ancestor(support, top.level + 1) in s.members:
                values[i] = -kernel(top) * jacobian * total
    return LCFunction(w.ball, resolution, values)


def vladimirov(alpha: float, f: LCFunction, w: Window) -> LCFunction:
    """``D^alpha f`` for ``d = 1`` from the pairwise cell-distance matrix of ``supp f``."""
    if f.d != 1:
        raise UnsupportedDimension("the Vladimirov operator is one-dimensional here")
    p = f.p
    coeff = gamma_p(alpha, p)
    support = f.support
    depth = f.resolution - support.level
    n = f.cell_count
    # digit paths of the cells below the support, most significant first
    paths = np.array(
        [[(index // p ** (depth - 1 - k)) % p for k in range(depth)] for index in range(n)],
        dtype=np.int64,
    ).reshape(n, depth)
    if depth:
        differs = paths[:, None, :] != paths[None, :, :]
        common = np.where(differs.any(axis=2), differs.argmax(axis=2), depth)
    else:
        common = np.zeros((n, n), dtype=np.int64)
    sup_level = support.level + common
    weights = np.where(
        common < depth, np.power(float(p), sup_level.astype(float) * (1 + alpha)), 0.0
    )
    cell = float(power(p, -f.resolution))
    fv = f.values
    interior = (weights * (fv[:, None] - fv[None, :])).sum(axis=1) * cell
    exterior = fv * (1 - 1 / p) * p ** ((support.level - 1) * alpha) / (1 - p ** (-alpha))
    on_support = coeff * (interior + exterior)

    total = ball_integral(f, support)
    resolution, cells = _cells(w, f)
    values = np.zeros(len(cells), dtype=np.complex128)
    for i, x in enumerate(cells):
        if _inside(f, x):
            values[i] = on_support[path_index(support, ancestor(x, f.resolution))]
        else:
            distance = float(sup(x, support).diameter())
            values[i] = -coeff * distance ** (-1 - alpha) * total
    return LCFunction(w.ball, resolution, values)


# -- transformation identities -------------------------------------------------


def verify_transform_rule(
    phi: Morphism,
    kernel: KernelSpec,
    f: LCFunction,
    w: Window,
    *,
    negative_control: bool = False,
) -> Residual:
    """``Phi o D_F = p**(-gamma d) D_{F o phi} o Phi`` on the window.

    With ``negative_control`` the kernel is not transported, which breaks the
    identity for every ``phi`` that moves the kernel.
    """
    gamma, _ = parabolic_normalize(phi)
    lhs = pushforward(phi, kernel_op(kernel, f, w.image(phi)))
    moved = kernel if negative_control else transport_kernel(kernel, phi)
    rhs = kernel_op(moved, pushforward(phi, f), w) * (f.p ** (-gamma * f.d))
    return _residual(lhs, rhs)


def verify_chain_rule(phi: Morphism, alpha: float, f: LCFunction, w: Window) -> Residual:
    """``D^alpha o Phi = p**(-gamma alpha) Phi o D^alpha`` on the window."""
    gamma, _ = parabolic_normalize(phi)
    lhs = vladimirov(alpha, pushforward(phi, f), w)
    rhs = pushforward(phi, vladimirov(alpha, f, w.image(phi))) * (f.p ** (-gamma * alpha))
    return _residual(lhs, rhs)


def verify_covariance(
    phi: Morphism,
    kernel: KernelSpec,
    field_: VectorField,
    f: LCFunction,
    w: Window,
    *,
    negative_control: bool = False,
) -> Residual:
    """``Phi o D_{F,k} = D_{F o phi, phi^-1 k(phi)} o Phi`` for an isometry ``phi``."""
    if phi.gamma != 0:
        raise ValueError("covariance is stated for isometries")
    lhs = pushforward(phi, vf_op(kernel, field_, f, w.image(phi)))
    moved_kernel = kernel if negative_control else transport_kernel(kernel, phi)
    moved_field = field_ if negative_control else transport_field(field_, phi)
    rhs = vf_op(moved_kernel, moved_field, pushforward(phi, f), w)
    return _residual(lhs, rhs)


__all__ = [
    "KernelSpec",
    "VectorField",
    "Window",
    "Residual",
    "seeded_field",
    "table_field",
    "constant_field",
    "gamma_p",
    "vladimirov_kernel",
    "wavelet_eigenvalue",
    "transport_kernel",
    "transport_field",
    "kernel_op",
    "vf_op",
    "vladimirov",
    "verify_transform_rule",
    "verify_chain_rule",
    "verify_covariance",
]
