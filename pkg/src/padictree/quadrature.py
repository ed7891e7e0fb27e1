"""
Brute-force quadrature oracles.

These evaluate the defining integrals cell by cell, without the grouping by
``sup(x, y)`` that the operators in ``operators`` use, and serve as an
independent check of them.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import List

import numpy as np

from .balls import Ball, Point, ancestor, descendants, path_index, power, span_region, sup
from .core import valuation
from .errors import UnsupportedDimension
from .fp import Vector
from .functions import LCFunction, evaluate, refine
from .operators import KernelSpec, VectorField, Window, gamma_p

logger = logging.getLogger(__name__)

EXTRA_RESOLUTION = 4


def _abs_diff(x: Fraction, y: Fraction, p: int) -> Fraction:
    v = valuation(x - y, p)
    return Fraction(0) if v is None else power(p, -v)


def quadrature_vladimirov(
    alpha: float, f: LCFunction, w: Window, extra: int = EXTRA_RESOLUTION
) -> LCFunction:
    """``gamma_p(alpha) ∫ (f(x) - f(y)) |x - y|**(-1 - alpha) dy`` summed over refined cells.

    ``f`` is re-tabulated ``extra`` levels finer than its resolution; each
    ``y``-cell is represented by its canonical centre and the exact p-adic
    distance to ``x``. The region outside ``supp f`` is a geometric series in
    the distance shells.
    """
    if f.d != 1:
        raise UnsupportedDimension("the Vladimirov oracle is one-dimensional")
    p = f.p
    fine = refine(f, f.resolution + extra)
    y_cells = fine.cells()
    y_centres = [cell.center[0] for cell in y_cells]
    cell_measure = float(fine.cell_measure)
    coeff = gamma_p(alpha, p)
    support = f.support
    exterior_weight = (1 - 1 / p) * p ** ((support.level - 1) * alpha) / (1 - p ** (-alpha))

    resolution = w.output_resolution(f)
    cells = descendants(w.ball, resolution)
    values = np.zeros(len(cells), dtype=np.complex128)
    for i, cell in enumerate(cells):
        x = cell.center[0]
        fx = evaluate(f, cell)
        acc = 0j
        for y, fy in zip(y_centres, fine.values):
            distance = _abs_diff(x, y, p)
            if distance <= power(p, -fine.resolution):
                continue
            acc += (fx - fy) * float(distance) ** (-1 - alpha) * cell_measure
        if support.contains(cell):
            acc += fx * exterior_weight
        values[i] = coeff * acc
    logger.debug("quadrature oracle: %d window cells x %d integration cells", len(cells), len(y_cells))
    return LCFunction(w.ball, resolution, values)


def completion_basis(k1: Vector, p: int, variant: str = "A") -> List[Point]:
    """A basis ``k_1, ..., k_d`` with ``|k_1| = 1`` and ``|k_l| = 1/p`` whose residues span ``F_p^d``.

    Variant ``"A"`` uses ``k_1 = k1`` and ``p e_j`` for the coordinates other
    than the first nonzero one of ``k1``. Variant ``"B"`` perturbs both:
    ``k1 + p e_1`` and ``p (e_j + k1) + p**2 e_i``.
    """
    d = len(k1)
    lead = next(i for i, x in enumerate(k1) if x % p)
    base = [Fraction(x % p) for x in k1]
    others = [j for j in range(d) if j != lead]

    def unit(j: int) -> List[Fraction]:
        return [Fraction(int(i == j)) for i in range(d)]

    if variant == "A":
        return [tuple(base)] + [tuple(p * x for x in unit(j)) for j in others]
    if variant == "B":
        first = [x + p * e for x, e in zip(base, unit(0))]
        rest = [
            tuple(p * (e + x) + p * p * ei for e, x, ei in zip(unit(j), base, unit(lead)))
            for j in others
        ]
        return [tuple(first)] + rest
    raise ValueError(f"unknown completion variant {variant!r}")


def vector_field_oracle(
    kernel: KernelSpec,
    field_: VectorField,
    f: LCFunction,
    w: Window,
    variant: str = "A",
) -> LCFunction:
    """``D_{F,k} f`` with the z-integral enumerated as residues of ``x + sum z_l k_l``.

    For each level the tube ``|z_1| = p**-level``, ``|z_l| <= p**-level`` is
    enumerated with ``span_region`` in a completion basis of ``k1(B)``; each
    residue mod ``p**R`` is a cell of ``f`` and carries z-measure
    ``p**(d - 1)`` times its Haar measure.
    """
    p, d = f.p, f.d
    support = f.support
    resolution = w.output_resolution(f)
    cells = descendants(w.ball, resolution)
    values = np.zeros(len(cells), dtype=np.complex128)
    cell_weight = float(p ** (d - 1) * power(p, -f.resolution * d))
    sphere = 1 - 1 / p
    for i, cell in enumerate(cells):
        x = cell.center
        fx = evaluate(f, cell)
        start = kernel.tail_start(support.level)
        if not support.contains(cell):
            start = min(start, sup(cell, support).level)
        acc = kernel.tail_sum(start, sphere) * fx
        for level in range(start, f.resolution):
            ball = ancestor(cell, level)
            basis = completion_basis(field_(ball), p, variant)
            region = span_region(x, basis, "tube", level, precision=f.resolution, p=p)
            hit = 0j
            for residue in region:
                if support.contains(residue):
                    hit += f.values[path_index(support, Ball(p, d, f.resolution, residue))]
            acc += kernel(ball) * (fx * sphere * float(power(p, -level * d)) - hit * cell_weight)
        values[i] = acc
    return LCFunction(w.ball, resolution, values)


__all__ = [
    "EXTRA_RESOLUTION",
    "quadrature_vladimirov",
    "completion_basis",
    "vector_field_oracle",
]
