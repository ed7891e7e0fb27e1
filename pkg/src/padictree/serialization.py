"""
JSON codecs for functions, kernels, vector fields, morphisms and residuals.

Decoders raise ``SchemaError`` naming the offending field path, e.g.
``cells[3].re``. Rational coordinates are written as p-adic literals when they
are nonnegative and as ``"num/den"`` strings otherwise.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from .balls import Ball, ball_from_json, ball_to_json, encode_ball
from .core import PAdic, format_padic, parse_padic, valuation
from .errors import MalformedLiteral, PadicTreeError, SchemaError
from .functions import LCFunction, WaveletIndex, cell_from_path, cell_path, make_function
from .morphisms import (
    AffineMorphism,
    ChildAction,
    Composition,
    DifferentiableSpec,
    Dilation,
    Inverse,
    Isometry,
    Morphism,
    Translation,
    compose,
    identity_morphism,
    invert,
    make_dilation,
    make_isometry,
)
from .operators import KernelSpec, Residual, VectorField, seeded_field, table_field

FORMAT_VERSION = 1


def load_json(path: Union[str, Path]) -> Any:
    """Read a JSON file; syntax errors become ``SchemaError`` with line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}", str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", str(path)) from exc


def _field(data: Any, key: str, path: str) -> Any:
    if not isinstance(data, dict):
        raise SchemaError("expected an object", path or None)
    if key not in data:
        raise SchemaError("missing field", f"{path}.{key}" if path else key)
    return data[key]


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected an integer, got {value!r}", path)
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}", path)
    return float(value)


def _ball(value: Any, path: str) -> Ball:
    try:
        return ball_from_json(value)
    except SchemaError as exc:
        raise SchemaError(str(exc), path) from exc


def rational_to_literal(q: Fraction, p: int) -> str:
    if q < 0:
        return f"{q.numerator}/{q.denominator}"
    if q == 0:
        return "0"
    v = valuation(q, p)
    unit = q / Fraction(p) ** v  # type: ignore[operator]
    if unit.denominator != 1:
        return f"{q.numerator}/{q.denominator}"
    width = 1
    while p**width <= unit:
        width += 1
    return format_padic(PAdic.from_fraction(q, p, width))


def literal_to_rational(text: Any, p: int, path: str) -> Fraction:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise SchemaError(f"expected a literal string, got {text!r}", path)
    try:
        if "/" in text or text.startswith("-"):
            return Fraction(text)
        return parse_padic(text, p, precision=max(len(text), 1)).to_fraction()
    except (MalformedLiteral, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(str(exc), path) from exc


# -- functions ---------------------------------------------------------------------


def function_to_json(f: LCFunction) -> Dict[str, Any]:
    cells = [
        {"path": cell_path(f.support, cell), "re": float(v.real), "im": float(v.imag)}
        for cell, v in zip(f.cells(), f.values)
    ]
    return {"support": ball_to_json(f.support), "R": f.resolution, "cells": cells}


def function_from_json(data: Any, path: str = "") -> LCFunction:
    prefix = f"{path}." if path else ""
    support = _ball(_field(data, "support", path), f"{prefix}support")
    resolution = _int(_field(data, "R", path), f"{prefix}R")
    if resolution < support.level:
        raise SchemaError("resolution is coarser than the support ball", f"{prefix}R")
    cells = _field(data, "cells", path)
    if not isinstance(cells, list):
        raise SchemaError("expected a list", f"{prefix}cells")
    table: Dict[Ball, complex] = {}
    depth = resolution - support.level
    for i, entry in enumerate(cells):
        where = f"{prefix}cells[{i}]"
        cell_path_ = _field(entry, "path", where)
        if not isinstance(cell_path_, list) or len(cell_path_) != depth:
            raise SchemaError(f"expected a path of {depth} child indices", f"{where}.path")
        for index in cell_path_:
            if _int(index, f"{where}.path") not in range(support.p**support.d):
                raise SchemaError(f"child index {index} out of range", f"{where}.path")
        re = _number(_field(entry, "re", where), f"{where}.re")
        im = _number(entry.get("im", 0.0), f"{where}.im")
        table[cell_from_path(support, cell_path_)] = complex(re, im)
    try:
        return make_function(support, resolution, table)
    except PadicTreeError as exc:
        raise SchemaError(str(exc), f"{prefix}cells") from exc


def wavelet_index_to_json(idx: WaveletIndex, p: int) -> Dict[str, Any]:
    return {
        "gamma": idx.gamma,
        "n": [rational_to_literal(x, p) for x in idx.n],
        "J": list(idx.j),
    }


def wavelet_index_from_json(data: Any, p: int, path: str = "") -> WaveletIndex:
    prefix = f"{path}." if path else ""
    gamma = _int(_field(data, "gamma", path), f"{prefix}gamma")
    n = [literal_to_rational(x, p, f"{prefix}n[{i}]") for i, x in enumerate(_field(data, "n", path))]
    j = [_int(x, f"{prefix}J[{i}]") for i, x in enumerate(_field(data, "J", path))]
    return WaveletIndex(gamma, tuple(n), tuple(j))


# -- kernels and vector fields -------------------------------------------------------


def kernel_to_json(kernel: KernelSpec) -> Dict[str, Any]:
    c = complex(kernel.c)
    return {
        "p": kernel.p,
        "d": kernel.d,
        "table": [
            {"ball": encode_ball(ball), "re": v.real, "im": v.imag}
            for ball, v in sorted(kernel.table.items(), key=lambda item: item[0].sort_key())
        ],
        "tail": {"c_re": c.real, "c_im": c.imag, "alpha": kernel.alpha, "from_level": kernel.from_level},
    }


def kernel_from_json(data: Any, path: str = "") -> KernelSpec:
    prefix = f"{path}." if path else ""
    p = _int(_field(data, "p", path), f"{prefix}p")
    d = _int(data.get("d", 1), f"{prefix}d")
    tail = _field(data, "tail", path)
    c = complex(
        _number(_field(tail, "c_re", f"{prefix}tail"), f"{prefix}tail.c_re"),
        _number(tail.get("c_im", 0.0), f"{prefix}tail.c_im"),
    )
    alpha = _number(_field(tail, "alpha", f"{prefix}tail"), f"{prefix}tail.alpha")
    from_level = tail.get("from_level")
    if from_level is not None:
        from_level = _int(from_level, f"{prefix}tail.from_level")
    table: Dict[Ball, complex] = {}
    for i, entry in enumerate(data.get("table") or []):
        where = f"{prefix}table[{i}]"
        ball = _ball(_field(entry, "ball", where), f"{where}.ball")
        table[ball] = complex(
            _number(_field(entry, "re", where), f"{where}.re"), _number(entry.get("im", 0.0), f"{where}.im")
        )
    try:
        return KernelSpec(p, d, c, alpha, from_level, table)
    except PadicTreeError as exc:
        raise SchemaError(str(exc), f"{prefix}tail.alpha") from exc
    except ValueError as exc:
        raise SchemaError(str(exc), f"{prefix}table") from exc


def field_to_json(field_: VectorField) -> Dict[str, Any]:
    if field_.kind == "seeded":
        return {"kind": "seeded", "p": field_.p, "d": field_.d, "seed": field_.seed}
    if field_.kind == "table":
        return {
            "kind": "table",
            "p": field_.p,
            "d": field_.d,
            "entries": [
                {"ball": encode_ball(ball), "k1": list(k)}
                for ball, k in sorted((field_.entries or {}).items(), key=lambda item: item[0].sort_key())
            ],
            "default": list(field_.default or ()),
        }
    raise SchemaError(f"a {field_.kind} vector field has no JSON form", "kind")


def field_from_json(data: Any, path: str = "") -> VectorField:
    prefix = f"{path}." if path else ""
    kind = _field(data, "kind", path)
    p = _int(_field(data, "p", path), f"{prefix}p")
    d = _int(data.get("d", 1), f"{prefix}d")
    if kind == "seeded":
        return seeded_field(_int(_field(data, "seed", path), f"{prefix}seed"), p, d)
    if kind == "table":
        default = [_int(x, f"{prefix}default") for x in _field(data, "default", path)]
        if len(default) != d or not any(x % p for x in default):
            raise SchemaError("default must be a nonzero vector of F_p^d", f"{prefix}default")
        entries = {}
        for i, entry in enumerate(data.get("entries") or []):
            where = f"{prefix}entries[{i}]"
            k1 = [_int(x, f"{where}.k1") for x in _field(entry, "k1", where)]
            if len(k1) != d or not any(x % p for x in k1):
                raise SchemaError("k1 must be a nonzero vector of F_p^d", f"{where}.k1")
            entries[_ball(_field(entry, "ball", where), f"{where}.ball")] = tuple(k1)
        return table_field(entries, tuple(default), p, d)
    raise SchemaError(f"unknown kind {kind!r}", f"{prefix}kind")


# -- morphisms ---------------------------------------------------------------------


def morphism_to_json(phi: Morphism) -> Dict[str, Any]:
    if isinstance(phi, Isometry):
        if phi.seed is not None:
            return {"kind": "isometry", "p": phi.p, "d": phi.d, "seed": phi.seed, "mode": phi.mode, "top_level": phi.top_level}
        return {
            "kind": "isometry",
            "p": phi.p,
            "d": phi.d,
            "table": [
                {"ball": encode_ball(ball), "action": list(action.table)}
                for ball, action in sorted((phi.table or {}).items(), key=lambda item: item[0].sort_key())
            ],
        }
    if isinstance(phi, Dilation):
        return {"kind": "dilation", "p": phi.p, "d": phi.d, "gamma": phi.gamma}
    if isinstance(phi, Translation):
        return {"kind": "translation", "p": phi.p, "shift": [rational_to_literal(x, phi.p) for x in phi.shift]}
    if isinstance(phi, AffineMorphism):
        spec = phi.spec
        return {
            "kind": "affine",
            "p": phi.p,
            "a": [rational_to_literal(x, phi.p) for x in spec.a],
            "u": rational_to_literal(spec.u, phi.p),
        }
    if isinstance(phi, Composition):
        return {"kind": "compose", "p": phi.p, "d": phi.d, "parts": [morphism_to_json(m) for m in phi.parts]}
    if isinstance(phi, Inverse):
        return {"kind": "inverse", "base": morphism_to_json(phi.base)}
    raise SchemaError(f"{type(phi).__name__} has no JSON form", "kind")


def morphism_from_json(data: Any, path: str = "") -> Morphism:
    prefix = f"{path}." if path else ""
    kind = _field(data, "kind", path)
    if kind == "inverse":
        return invert(morphism_from_json(_field(data, "base", path), f"{prefix}base"))
    p = _int(_field(data, "p", path), f"{prefix}p")
    d = _int(data.get("d", 1), f"{prefix}d")
    if kind == "isometry":
        if "seed" in data:
            try:
                return make_isometry(
                    p,
                    d,
                    seed=_int(data["seed"], f"{prefix}seed"),
                    mode=data.get("mode"),
                    top_level=_int(data.get("top_level", 0), f"{prefix}top_level"),
                )
            except PadicTreeError as exc:
                raise SchemaError(str(exc), f"{prefix}mode") from exc
        table: Dict[Ball, ChildAction] = {}
        for i, entry in enumerate(_field(data, "table", path)):
            where = f"{prefix}table[{i}]"
            ball = _ball(_field(entry, "ball", where), f"{where}.ball")
            try:
                table[ball] = ChildAction.from_permutation(
                    p, d, [_int(x, f"{where}.action") for x in _field(entry, "action", where)]
                )
            except PadicTreeError as exc:
                raise SchemaError(str(exc), f"{where}.action") from exc
        return make_isometry(p, d, table=table)
    if kind == "dilation":
        return make_dilation(_int(_field(data, "gamma", path), f"{prefix}gamma"), p, d)
    if kind == "translation":
        shift = [literal_to_rational(x, p, f"{prefix}shift[{i}]") for i, x in enumerate(_field(data, "shift", path))]
        return Translation(p, shift)
    if kind == "affine":
        a = [literal_to_rational(x, p, f"{prefix}a[{i}]") for i, x in enumerate(_field(data, "a", path))]
        u = literal_to_rational(_field(data, "u", path), p, f"{prefix}u")
        try:
            return AffineMorphism(DifferentiableSpec(p, tuple(a), u))
        except ValueError as exc:
            raise SchemaError(str(exc), f"{prefix}u") from exc
    if kind == "compose":
        parts = [morphism_from_json(m, f"{prefix}parts[{i}]") for i, m in enumerate(_field(data, "parts", path))]
        return compose(*parts) if parts else identity_morphism(p, d)
    raise SchemaError(f"unknown kind {kind!r}", f"{prefix}kind")


# -- reports -------------------------------------------------------------------------


def residual_to_json(residual: Residual) -> Dict[str, Any]:
    return {
        "lhs": function_to_json(residual.lhs),
        "rhs": function_to_json(residual.rhs),
        "max_abs_diff": residual.max_abs_diff,
        "argmax_cell": None if residual.argmax_cell is None else encode_ball(residual.argmax_cell),
    }


def function_rows(f: LCFunction) -> List[Dict[str, Any]]:
    """One CSV row per window cell: encoded cell, real and imaginary parts."""
    return [
        {"cell": encode_ball(cell), "re": float(v.real), "im": float(v.imag)}
        for cell, v in zip(f.cells(), np.asarray(f.values))
    ]


__all__ = [
    "FORMAT_VERSION",
    "load_json",
    "rational_to_literal",
    "literal_to_rational",
    "function_to_json",
    "function_from_json",
    "wavelet_index_to_json",
    "wavelet_index_from_json",
    "kernel_to_json",
    "kernel_from_json",
    "field_to_json",
    "field_from_json",
    "morphism_to_json",
    "morphism_from_json",
    "residual_to_json",
    "function_rows",
]
