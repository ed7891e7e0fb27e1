"""
Experiment orchestration: configuration, suites and reports.

A suite turns an ``ExperimentConfig`` into a ``Report`` of cases. Every case
records its inputs, expected and observed values, a residual, the tolerance
it was judged against and its provenance:

- ``formula``: the expected value is a closed-form expression;
- ``oracle``: the expected value comes from an independent brute-force
  computation;
- ``triviality``: the expected value is forced (identity maps, zero inputs,
  exact set equalities).

Reports are deterministic for a fixed configuration: floats are written with
17 significant digits and wall-clock times are only included on request.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
import time
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .balls import (
    Ball,
    ball_from_json,
    build_set_S,
    child,
    descendants,
    encode_ball,
    power,
    recover_from_S,
    set_S_from_members,
    set_S_residues,
    span_region,
)
from .core import PAdicVec, is_prime
from .errors import SchemaError
from .fp import Vector, canonical_direction, inverse_mod, mat_vec, transpose, vec_scale
from .functions import (
    LCFunction,
    WaveletIndex,
    factor_as_wavelet,
    frame_coefficients,
    frame_partial_sum,
    frame_partial_sums_by_level,
    l2norm,
    max_abs_diff,
    omega,
    pushforward,
    random_wavelet_span,
    sqrt_p_exponent,
    unitary_action,
    wavelet,
)
from .morphisms import (
    AffineMorphism,
    DifferentiableSpec,
    Morphism,
    compose,
    derivative_norm,
    identity_morphism,
    invert,
    is_isometry_check,
    make_dilation,
    make_isometry,
    parabolic_normalize,
)
from .operators import (
    KernelSpec,
    Window,
    kernel_op,
    seeded_field,
    verify_chain_rule,
    verify_covariance,
    verify_transform_rule,
    vf_op,
    vladimirov,
    vladimirov_kernel,
    wavelet_eigenvalue,
)
from .quadrature import completion_basis, quadrature_vladimirov, vector_field_oracle
from .serialization import (
    field_from_json,
    function_from_json,
    function_rows,
    function_to_json,
    kernel_from_json,
    load_json,
    morphism_from_json,
)

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
EXPERIMENTS = ("frame-bound", "identities", "structure", "apply", "oracle")
CSV_COLUMNS = ("case_id", "p", "d", "seed", "alpha", "residual", "pass")
OPERATORS = ("vladimirov", "kernel", "vf", "pushforward", "unitary")
VF_ORACLE_SEEDS = 5

Warn = Callable[[str], None]


@dataclass
class ExperimentConfig:
    experiment: str = "identities"
    p: int = 2
    primes: Optional[List[int]] = None
    d: int = 1
    dims: List[int] = field(default_factory=lambda: [2, 3])
    precision: int = 16
    seeds: List[int] = field(default_factory=lambda: list(range(20)))
    alphas: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    gamma_max: int = 40
    levels: List[int] = field(default_factory=lambda: list(range(-2, 4)))
    span_size: int = 10
    window: Optional[Dict[str, Any]] = None
    tolerances: Dict[str, float] = field(default_factory=lambda: {"identity": 1e-9, "single": 1e-12})
    negative_control: bool = False
    timings: bool = False
    inputs: Dict[str, str] = field(default_factory=dict)
    operator: str = "vladimirov"
    alpha: float = 1.0

    @property
    def prime_list(self) -> List[int]:
        return list(self.primes) if self.primes else [self.p]

    def tolerance(self, kind: str) -> float:
        defaults = {"identity": 1e-9, "single": 1e-12, "oracle": 1e-10}
        return float(self.tolerances.get(kind, defaults[kind]))

    def to_json(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("timings")
        return data


def config_from_json(data: Any) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise SchemaError("configuration must be a JSON object", "config")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known:
            raise SchemaError("unknown configuration key", key)
    config = ExperimentConfig(**data)
    validate_config(config)
    return config


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return config_from_json(load_json(path))


def validate_config(config: ExperimentConfig) -> None:
    if config.experiment not in EXPERIMENTS:
        raise SchemaError(f"expected one of {', '.join(EXPERIMENTS)}", "experiment")
    for p in config.prime_list:
        if not is_prime(p):
            raise SchemaError(f"{p} is not a prime", "p")
    if config.d < 1 or any(d < 1 for d in config.dims):
        raise SchemaError("dimensions must be positive", "d")
    if config.gamma_max < 1:
        raise SchemaError("gamma_max must be positive", "gamma_max")
    if any(not a > 0 for a in config.alphas):
        raise SchemaError("alphas must be positive", "alphas")
    if config.operator not in OPERATORS:
        raise SchemaError(f"expected one of {', '.join(OPERATORS)}", "operator")
    for key in config.tolerances:
        if key not in ("identity", "single", "oracle"):
            raise SchemaError("unknown tolerance kind", f"tolerances.{key}")


# -- reports ---------------------------------------------------------------------


@dataclass
class Case:
    case_id: str
    provenance: str
    inputs: Dict[str, Any]
    expected: Any
    observed: Any
    residual: float
    tolerance: float
    passed: bool
    seconds: float = 0.0

    def to_json(self, timings: bool = False) -> Dict[str, Any]:
        data = {
            "case_id": self.case_id,
            "provenance": self.provenance,
            "inputs": self.inputs,
            "expected": _plain(self.expected),
            "observed": _plain(self.observed),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if timings:
            data["seconds"] = self.seconds
        return data


@dataclass
class Report:
    experiment: str
    config: ExperimentConfig
    cases: List[Case] = field(default_factory=list)
    artifacts: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(case.passed for case in self.cases)

    @property
    def summary(self) -> Dict[str, int]:
        passed = sum(case.passed for case in self.cases)
        return {"total": len(self.cases), "passed": passed, "failed": len(self.cases) - passed}

    def add(self, case: Case) -> Case:
        self.cases.append(case)
        return case

    def to_json(self) -> Dict[str, Any]:
        return {
            "version": REPORT_VERSION,
            "experiment": self.experiment,
            "config": self.config.to_json(),
            "summary": self.summary,
            "cases": [case.to_json(self.config.timings) for case in self.cases],
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


_FLOAT_MARK = "\u0001f17:"
_FLOAT_PATTERN = re.compile(r'"\\u0001f17:([^"]*)"')


def _mark_floats(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return f"{_FLOAT_MARK}{value:.17g}"
    if isinstance(value, list):
        return [_mark_floats(v) for v in value]
    if isinstance(value, dict):
        return {k: _mark_floats(v) for k, v in value.items()}
    return value


def dumps_json(data: Any) -> str:
    """JSON text with every float written at 17 significant digits."""
    text = json.dumps(_mark_floats(_plain(data)), indent=2)
    return _FLOAT_PATTERN.sub(lambda m: _as_json_number(m.group(1)), text) + "\n"


def _as_json_number(text: str) -> str:
    # "1e-05" is valid JSON, "3" would read back as an int
    return text if any(c in text for c in ".e") else f"{text}.0"


def report_csv(report: Report) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for case in report.cases:
        writer.writerow(
            {
                "case_id": case.case_id,
                "p": case.inputs.get("p", ""),
                "d": case.inputs.get("d", ""),
                "seed": case.inputs.get("seed", ""),
                "alpha": case.inputs.get("alpha", ""),
                "residual": f"{case.residual:.17g}",
                "pass": int(case.passed),
            }
        )
    return buffer.getvalue()


def write_report(report: Report, out_dir: Union[str, Path], fmt: str = "json") -> List[Path]:
    """Write the report (and any extra artefacts) into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv":
        target = out / f"{report.experiment}.csv"
        target.write_text(report_csv(report), encoding="utf-8")
    else:
        target = out / f"{report.experiment}.json"
        target.write_text(dumps_json(report.to_json()), encoding="utf-8")
    written.append(target)
    for name, text in sorted(report.artifacts.items()):
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


class _Timer:
    def __enter__(self) -> "_Timer":
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc: object) -> None:
        self.seconds = time.perf_counter() - self.start


def _judge(residual: float, tolerance: float, scale: float = 1.0) -> bool:
    return bool(residual <= tolerance * max(1.0, scale))


def _scale(f: LCFunction) -> float:
    return float(np.abs(f.values).max(initial=0.0))


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng([k & 0xFFFFFFFF for k in key])


# -- random inputs -------------------------------------------------------------


def random_parabolic(rng: np.random.Generator, p: int, seed: int, d: int = 1) -> Morphism:
    """``dilation(gamma) o isometry`` with ``gamma`` in ``{-1, 0, 1}``."""
    gamma = int(rng.integers(-1, 2))
    iso = make_isometry(p, d, seed=seed, top_level=-3)
    return compose(make_dilation(gamma, p, d), iso) if gamma else iso


def random_kernel(rng: np.random.Generator, f: LCFunction, alpha: float) -> KernelSpec:
    """Tail below ``supp f``, random table on the balls of ``supp f`` above its resolution."""
    table = {
        ball: complex(rng.normal(), rng.normal())
        for level in range(f.support.level, f.resolution)
        for ball in descendants(f.support, level)
    }
    return KernelSpec(f.p, f.d, complex(rng.normal(), rng.normal()), alpha, f.support.level, table)


def random_ball(rng: np.random.Generator, p: int, d: int, level: int, depth: int = 2) -> Ball:
    center = tuple(
        sum((Fraction(int(x)) * power(p, level - depth + i) for i, x in enumerate(rng.integers(0, p, size=depth))), Fraction(0))
        for _ in range(d)
    )
    return Ball(p, d, level, center)


def random_direction(rng: np.random.Generator, p: int, d: int) -> Vector:
    while True:
        k = tuple(int(x) for x in rng.integers(0, p, size=d))
        if any(k):
            return k


def _window_around(f: LCFunction) -> Window:
    """The parent of ``supp f`` at the resolution of ``f``: covers cells inside and outside."""
    parent_ball = Ball(f.p, f.d, f.support.level - 1, f.support.center)
    return Window(parent_ball, f.resolution)


# -- frame bound -----------------------------------------------------------------


def run_frame_bound(config: ExperimentConfig, on_warning: Optional[Warn] = None) -> Report:
    """Frame bound ``p!/(p - 1)`` of the ball orbits and the per-level inner-product law."""
    warn = on_warning or (lambda msg: None)
    report = Report("frame-bound", config)
    if config.d != 1:
        warn("frame sums are one-dimensional; running with d = 1")
    tol = config.tolerance("identity")
    rows = ["p,gamma,level_sum,cumulative"]
    for p in config.prime_list:
        g = omega(p)
        with _Timer() as timer:
            partial, tail = frame_partial_sum(g, config.gamma_max)
        expected = math.factorial(p) / (p - 1)
        residual = abs(partial - expected)
        report.add(
            Case(
                f"frame-bound/p={p}",
                "formula",
                {"p": p, "d": 1, "gamma_max": config.gamma_max},
                expected,
                {"partial": partial, "tail_bound": tail},
                residual,
                tol,
                residual <= tol + tail,
                timer.seconds,
            )
        )
        for gamma, level_sum, cumulative in frame_partial_sums_by_level(g, config.gamma_max):
            rows.append(f"{p},{gamma},{level_sum:.17g},{cumulative:.17g}")

        coefficients = frame_coefficients(g, min(10, config.gamma_max))
        for ball, coeffs in coefficients.items():
            gamma = -ball.level
            exponents = sorted({sqrt_p_exponent(abs(c), p) for c in coeffs}, key=lambda e: (e is None, e))
            report.add(
                Case(
                    f"frame-law/p={p}/gamma={gamma}",
                    "formula",
                    {"p": p, "d": 1, "gamma": gamma, "ball": encode_ball(ball)},
                    [-gamma],
                    exponents,
                    0.0 if exponents == [-gamma] else 1.0,
                    0.0,
                    exponents == [-gamma],
                )
            )
    report.artifacts["frame_partial_sums.csv"] = "\n".join(rows) + "\n"
    logger.info("frame-bound: %s", report.summary)
    return report


# -- identities --------------------------------------------------------------------


def _residual_case(
    report: Report,
    case_id: str,
    provenance: str,
    inputs: Dict[str, Any],
    run: Callable[[], Any],
    tol: float,
) -> None:
    with _Timer() as timer:
        residual = run()
    scale = max(_scale(residual.lhs), _scale(residual.rhs))
    report.add(
        Case(
            case_id,
            provenance,
            inputs,
            0.0,
            {"argmax_cell": None if residual.argmax_cell is None else encode_ball(residual.argmax_cell), "scale": scale},
            residual.max_abs_diff,
            tol,
            _judge(residual.max_abs_diff, tol, scale),
            timer.seconds,
        )
    )


def run_identity_suite(config: ExperimentConfig, on_warning: Optional[Warn] = None) -> Report:
    """Chain rule, kernel transformation rule and vector-field covariance residuals."""
    report = Report("identities", config)
    warn = on_warning or (lambda msg: None)
    if config.d != 1:
        warn(f"chain and transformation rules run with d = 1; d = {config.d} only applies through dims")
    if not config.seeds:
        warn("no seeds given; only identity-morphism cases run")
    tol = config.tolerance("identity")
    single = config.tolerance("single")
    negative = config.negative_control
    for p in config.prime_list:
        base = random_wavelet_span(_rng(0, p, 1), p, 1, config.span_size, gammas=(0, 1))
        w0 = _window_around(base)
        ident = identity_morphism(p, 1)
        for alpha in config.alphas:
            inputs = {"p": p, "d": 1, "seed": "", "alpha": alpha, "morphism": "identity"}
            _residual_case(
                report, f"chain/p={p}/identity/alpha={alpha}", "triviality", inputs,
                lambda: verify_chain_rule(ident, alpha, base, w0), single,
            )
            kernel = random_kernel(_rng(1, p, 1), base, alpha)
            _residual_case(
                report, f"transform/p={p}/identity/alpha={alpha}", "triviality", inputs,
                lambda: verify_transform_rule(ident, kernel, base, w0, negative_control=negative), single,
            )

        for seed in config.seeds:
            rng = _rng(seed, p, 1)
            phi = random_parabolic(rng, p, seed)
            f = random_wavelet_span(rng, p, 1, config.span_size, gammas=(0, 1))
            w = _window_around(pushforward(phi, f))
            for alpha in config.alphas:
                inputs = {"p": p, "d": 1, "seed": seed, "alpha": alpha, "gamma": phi.gamma, "morphism": repr(phi)}
                _residual_case(
                    report, f"chain/p={p}/seed={seed}/alpha={alpha}", "formula", inputs,
                    lambda: verify_chain_rule(phi, alpha, f, w), tol,
                )
                kernel = random_kernel(rng, f, alpha)
                _residual_case(
                    report, f"transform/p={p}/seed={seed}/alpha={alpha}", "formula", inputs,
                    lambda: verify_transform_rule(phi, kernel, f, w, negative_control=negative), tol,
                )
            _affine_chain_case(report, rng, p, seed, f, config)

        for d in config.dims:
            _covariance_cases(report, p, d, config)
    logger.info("identities: %s", report.summary)
    return report


def _affine_chain_case(
    report: Report, rng: np.random.Generator, p: int, seed: int, f: LCFunction, config: ExperimentConfig
) -> None:
    """Chain rule for ``x -> a + u x`` with the factor read from ``|u|_p``."""
    gamma = int(rng.integers(-1, 2))
    unit = int(rng.integers(1, p * p))
    while unit % p == 0:
        unit += 1
    a = Fraction(int(rng.integers(0, p * p)), p)
    spec = DifferentiableSpec(p, (a,), Fraction(unit) * power(p, gamma))
    phi = AffineMorphism(spec)
    alpha = config.alphas[-1]
    tol = config.tolerance("identity")
    derivative = derivative_norm(spec, (Fraction(0),))
    factor = p ** (-phi.gamma * alpha)
    mismatch = abs(factor - float(derivative) ** alpha)
    inputs = {"p": p, "d": 1, "seed": seed, "alpha": alpha, "morphism": repr(phi)}
    report.add(
        Case(
            f"chain-derivative/p={p}/seed={seed}",
            "formula",
            inputs,
            factor,
            float(derivative) ** alpha,
            mismatch,
            config.tolerance("single"),
            _judge(mismatch, config.tolerance("single"), factor),
        )
    )
    _residual_case(
        report, f"chain-affine/p={p}/seed={seed}", "formula", inputs,
        lambda: verify_chain_rule(phi, alpha, f, _window_around(pushforward(phi, f))), tol,
    )


def _covariance_cases(report: Report, p: int, d: int, config: ExperimentConfig) -> None:
    tol = config.tolerance("identity")
    for seed in config.seeds:
        rng = _rng(seed, p, d, 7)
        phi = make_isometry(p, d, seed=seed, mode="affine", top_level=-2)
        field_ = seeded_field(seed + 1, p, d)
        f = random_wavelet_span(rng, p, d, 3, gammas=(0,))
        moved = pushforward(phi, f)
        w = Window.of(moved) if d > 1 else _window_around(moved)
        kernel = random_kernel(rng, f, config.alphas[0])
        inputs = {"p": p, "d": d, "seed": seed, "alpha": config.alphas[0], "morphism": repr(phi)}
        _residual_case(
            report, f"covariance/p={p}/d={d}/seed={seed}", "formula", inputs,
            lambda: verify_covariance(phi, kernel, field_, f, w, negative_control=config.negative_control), tol,
        )


# -- structure ---------------------------------------------------------------------


def _exact_case(report: Report, case_id: str, provenance: str, inputs: Dict[str, Any], expected: Any, observed: Any) -> bool:
    ok = expected == observed
    report.add(Case(case_id, provenance, inputs, expected, observed, 0.0 if ok else 1.0, 0.0, ok))
    return ok


def run_structure_suite(config: ExperimentConfig, on_warning: Optional[Warn] = None) -> Report:
    """Set S, recovery, tangent-map transport, wavelet mapping and group structure checks."""
    report = Report("structure", config)
    dims = sorted(set([config.d] + list(config.dims)))
    warn = on_warning or (lambda msg: None)
    if 2 in config.prime_list and any(d > 1 for d in dims):
        warn("set-s-recover is skipped for p = 2 and d > 1, where S does not determine the pair")
    for p in config.prime_list:
        for d in dims:
            for seed in config.seeds:
                rng = _rng(seed, p, d, 11)
                _set_s_cases(report, rng, p, d, seed)
                _tangent_map_case(report, rng, p, d, seed)
                _wavelet_lemma_case(report, rng, p, d, seed, config)
        for seed in config.seeds:
            _group_cases(report, _rng(seed, p, 13), p, seed, config.precision)
    logger.info("structure: %s", report.summary)
    return report


def _set_s_cases(report: Report, rng: np.random.Generator, p: int, d: int, seed: int) -> None:
    level = int(rng.integers(-1, 2))
    ball = random_ball(rng, p, d, level)
    k1 = random_direction(rng, p, d)
    b0 = child(ball, tuple(int(x) for x in rng.integers(0, p, size=d)))
    s = build_set_S(ball, k1, b0)
    inputs = {"p": p, "d": d, "seed": seed, "ball": encode_ball(ball), "k1": list(k1), "b0": encode_ball(b0)}
    tag = f"p={p}/d={d}/seed={seed}"

    precision = level + 2
    enumerated = span_region(b0.center, completion_basis(k1, p), "tube", level, precision=precision, p=p)
    _exact_case(report, f"set-s-span/{tag}", "triviality", inputs, True, enumerated == set_S_residues(s, precision))
    _exact_case(report, f"set-s-measure/{tag}", "formula", inputs, str((p - 1) * power(p, -(level + 1) * d)), str(s.measure()))

    canonical = canonical_direction(k1, p)
    recovered_k, recovered_b0 = recover_from_S(s.members)
    if p > 2 or d == 1:
        _exact_case(
            report, f"set-s-recover/{tag}", "triviality", inputs,
            [list(canonical), encode_ball(b0)], [list(recovered_k), encode_ball(recovered_b0)],
        )
    _exact_case(report, f"set-s-roundtrip/{tag}", "triviality", inputs, True, set_S_from_members(s.members) == s)
    scale = int(rng.integers(1, p))
    scaled = build_set_S(ball, vec_scale(scale, k1, p), b0)
    _exact_case(report, f"set-s-scaling/{tag}", "triviality", dict(inputs, scale=scale), True, scaled == s)


def _tangent_map_case(report: Report, rng: np.random.Generator, p: int, d: int, seed: int) -> None:
    phi = make_isometry(p, d, seed=seed, mode="affine", top_level=-2)
    ball = random_ball(rng, p, d, int(rng.integers(-1, 2)))
    k1 = random_direction(rng, p, d)
    b0 = child(ball, tuple(int(x) for x in rng.integers(0, p, size=d)))
    s = build_set_S(ball, k1, b0)
    affine = phi.child_action(ball).affine_form()
    inputs = {"p": p, "d": d, "seed": seed, "ball": encode_ball(ball), "k1": list(k1)}
    if affine is None:
        _exact_case(report, f"tangent-map/p={p}/d={d}/seed={seed}", "formula", inputs, "affine", "not affine")
        return
    image_members = {phi.image_ball(m) for m in s.members}
    expected = build_set_S(phi.image_ball(ball), mat_vec(affine[0], k1, p), phi.image_ball(b0))
    _exact_case(
        report, f"tangent-map/p={p}/d={d}/seed={seed}", "formula", inputs,
        sorted(encode_ball(m) for m in expected.members), sorted(encode_ball(m) for m in image_members),
    )


def _observed_law(a: Sequence[Sequence[int]], j: Vector, j_image: Vector, p: int) -> List[str]:
    inv = inverse_mod(tuple(tuple(r) for r in a), p)
    a = tuple(tuple(r) for r in a)
    candidates = {
        "A^T J": mat_vec(transpose(a), j, p),
        "A^-T J": mat_vec(transpose(inv), j, p),
        "A J": mat_vec(a, j, p),
        "A^-1 J": mat_vec(inv, j, p),
    }
    return [name for name, value in candidates.items() if value == tuple(j_image)]


def _wavelet_lemma_case(
    report: Report, rng: np.random.Generator, p: int, d: int, seed: int, config: ExperimentConfig
) -> None:
    phi = make_isometry(p, d, seed=seed + 101, mode="affine", top_level=-3)
    gamma = int(rng.integers(-1, 2))
    n = tuple(Fraction(int(rng.integers(0, p)), p) for _ in range(d))
    j = random_direction(rng, p, d)
    psi = wavelet(WaveletIndex(gamma, n, j), p, d)
    image = pushforward(phi, psi)
    factored = factor_as_wavelet(image)
    inputs = {"p": p, "d": d, "seed": seed, "gamma": gamma, "J": list(j)}
    case_id = f"wavelet-lemma/p={p}/d={d}/seed={seed}"
    if factored is None:
        report.add(Case(case_id, "formula", inputs, "c * psi", None, 1.0, 0.0, False))
        return
    c, idx = factored
    affine = phi.child_action(image.support).affine_form()
    law = _observed_law(affine[0], j, idx.j, p) if affine else []
    unit_err = abs(abs(c) - 1)
    root_err = abs(c**p - 1)
    ok = unit_err <= config.tolerance("single") and root_err <= config.tolerance("identity")
    report.add(
        Case(
            case_id,
            "formula",
            inputs,
            {"abs_c": 1.0, "c_pow_p": 1.0},
            {"c": c, "J_image": list(idx.j), "law": law},
            max(unit_err, root_err),
            config.tolerance("identity"),
            ok,
        )
    )


def _group_cases(report: Report, rng: np.random.Generator, p: int, seed: int, precision: int) -> None:
    iso = make_isometry(p, 1, seed=seed, top_level=-2)
    check = is_isometry_check(iso, sample_count=500, seed=seed)
    inputs = {"p": p, "d": 1, "seed": seed}
    _exact_case(report, f"isometry/p={p}/seed={seed}", "formula", inputs, True, check.passed)

    parts = []
    for _ in range(6):
        if rng.integers(0, 2):
            parts.append(make_dilation(int(rng.integers(-2, 3)), p))
        else:
            parts.append(make_isometry(p, 1, seed=int(rng.integers(0, 2**31)), top_level=int(rng.integers(-3, 1))))
    chain = compose(*parts)
    expected_gamma = sum(part.gamma for part in parts)
    gamma, eta = parabolic_normalize(chain)
    again, _ = parabolic_normalize(eta)
    balls = [random_ball(rng, p, 1, int(rng.integers(-2, 3)), depth=4) for _ in range(20)]
    rebuilt = compose(make_dilation(gamma, p), eta)
    same = all(rebuilt.image_ball(b) == chain.image_ball(b) for b in balls)
    eta_check = is_isometry_check(eta, sample_count=100, seed=seed)
    _exact_case(
        report, f"parabolic-normalize/p={p}/seed={seed}", "triviality", inputs,
        [expected_gamma, 0, True, True], [gamma, again, same, eta_check.passed],
    )

    conjugate = compose(chain, iso, invert(chain))
    conj_check = is_isometry_check(conjugate, sample_count=100, seed=seed)
    _exact_case(
        report, f"normal-subgroup/p={p}/seed={seed}", "formula", inputs,
        [0, True], [conjugate.gamma, conj_check.passed],
    )

    digits = rng.integers(0, p, size=precision)
    x = PAdicVec.from_ints((1 + sum(int(c) * p**k for k, c in enumerate(digits)),), p, precision)
    back = invert(iso).apply_point(iso.apply_point(x))
    _exact_case(
        report, f"apply-point/p={p}/seed={seed}", "triviality", dict(inputs, precision=precision),
        [str(q) for q in x.to_fractions()], [str(q) for q in back.to_fractions()],
    )


# -- oracle ------------------------------------------------------------------------


def run_oracle(config: ExperimentConfig, on_warning: Optional[Warn] = None) -> Report:
    """Certify the wavelet eigenvalue and the vector-field operator against brute-force quadrature."""
    report = Report("oracle", config)
    warn = on_warning or (lambda msg: None)
    if config.d != 1:
        warn(f"the eigenvalue oracle is one-dimensional; running with d = 1 instead of {config.d}")
    if len(config.seeds) > VF_ORACLE_SEEDS:
        warn(f"the vector-field oracle uses the first {VF_ORACLE_SEEDS} of {len(config.seeds)} seeds")
    tol = config.tolerance("oracle")
    for p in config.prime_list:
        for alpha in config.alphas:
            for gamma in config.levels:
                psi = wavelet(WaveletIndex(gamma, (Fraction(0),), (1,)), p, 1)
                w = _window_around(psi)
                eigen = wavelet_eigenvalue(alpha, gamma, p)
                expected = psi * eigen
                with _Timer() as timer:
                    oracle = quadrature_vladimirov(alpha, psi, w)
                    fast = vladimirov(alpha, psi, w)
                    via_kernel = kernel_op(vladimirov_kernel(alpha, p), psi, w)
                scale = _scale(expected)
                oracle_err = _max_diff(oracle, expected) / scale
                fast_err = _max_diff(fast, oracle) / scale
                kernel_err = _max_diff(via_kernel, fast) / scale
                inputs = {"p": p, "d": 1, "seed": "", "alpha": alpha, "gamma": gamma}
                report.add(
                    Case(
                        f"eigenvalue/p={p}/alpha={alpha}/gamma={gamma}",
                        "oracle",
                        inputs,
                        eigen,
                        {"oracle_rel_err": oracle_err, "vladimirov_rel_err": fast_err, "kernel_op_rel_err": kernel_err},
                        max(oracle_err, fast_err, kernel_err),
                        tol,
                        max(oracle_err, fast_err, kernel_err) < tol,
                        timer.seconds,
                    )
                )
        for d in config.dims:
            for seed in config.seeds[:VF_ORACLE_SEEDS]:
                _vector_field_oracle_case(report, p, d, seed, config)
    logger.info("oracle: %s", report.summary)
    return report


def _max_diff(f: LCFunction, g: LCFunction) -> float:
    return float(np.abs(f.values - g.values).max(initial=0.0))


def _vector_field_oracle_case(report: Report, p: int, d: int, seed: int, config: ExperimentConfig) -> None:
    rng = _rng(seed, p, d, 17)
    f = random_wavelet_span(rng, p, d, 2, gammas=(0,), n_digits=0)
    kernel = random_kernel(rng, f, config.alphas[0])
    field_ = seeded_field(seed, p, d)
    w = Window.of(f)
    with _Timer() as timer:
        fast = vf_op(kernel, field_, f, w)
        first = vector_field_oracle(kernel, field_, f, w, "A")
        second = vector_field_oracle(kernel, field_, f, w, "B")
    scale = max(1.0, _scale(fast))
    err = max(_max_diff(fast, first), _max_diff(first, second)) / scale
    report.add(
        Case(
            f"vector-field/p={p}/d={d}/seed={seed}",
            "oracle",
            {"p": p, "d": d, "seed": seed, "alpha": config.alphas[0]},
            0.0,
            {"completion_A_vs_fast": _max_diff(fast, first), "completion_A_vs_B": _max_diff(first, second)},
            err,
            config.tolerance("identity"),
            err <= config.tolerance("identity"),
            timer.seconds,
        )
    )


# -- apply -------------------------------------------------------------------------


def run_apply(config: ExperimentConfig, on_warning: Optional[Warn] = None) -> Report:
    """Apply one operator to a function read from JSON; the output table is a report artefact."""
    warn = on_warning or (lambda msg: None)
    report = Report("apply", config)
    inputs = config.inputs
    if "function" not in inputs:
        raise SchemaError("missing input file", "inputs.function")
    f = function_from_json(load_json(inputs["function"]), "function")
    w = _window_from_config(config.window, f)
    op = config.operator
    with _Timer() as timer:
        if op == "vladimirov":
            out = vladimirov(config.alpha, f, w)
        elif op in ("kernel", "vf"):
            if "kernel" not in inputs:
                raise SchemaError("missing input file", "inputs.kernel")
            kernel = kernel_from_json(load_json(inputs["kernel"]), "kernel")
            if op == "kernel":
                out = kernel_op(kernel, f, w)
            else:
                if "field" not in inputs:
                    raise SchemaError("missing input file", "inputs.field")
                out = vf_op(kernel, field_from_json(load_json(inputs["field"]), "field"), f, w)
        else:
            if "morphism" not in inputs:
                raise SchemaError("missing input file", "inputs.morphism")
            phi = morphism_from_json(load_json(inputs["morphism"]), "morphism")
            out = pushforward(phi, f) if op == "pushforward" else unitary_action(phi, f)
    if config.window is not None and op in ("pushforward", "unitary"):
        warn("window is ignored for pushforward and unitary actions")

    report.artifacts["apply_output.json"] = dumps_json(function_to_json(out))
    report.artifacts["apply_cells.csv"] = _rows_csv(function_rows(out))
    report.add(
        Case(
            f"apply/{op}",
            "triviality",
            {"p": f.p, "d": f.d, "seed": "", "alpha": config.alpha if op == "vladimirov" else "", "operator": op},
            None,
            {"cells": out.cell_count, "l2norm": l2norm(out)},
            0.0,
            0.0,
            True,
            timer.seconds,
        )
    )
    if op == "vladimirov":
        factored = factor_as_wavelet(f)
        if factored is not None:
            _, idx = factored
            eigen = wavelet_eigenvalue(config.alpha, idx.gamma, f.p)
            diff = _max_diff_aligned(out, f * eigen)
            report.add(
                Case(
                    "apply/eigenvalue",
                    "oracle",
                    {"p": f.p, "d": 1, "seed": "", "alpha": config.alpha, "gamma": idx.gamma},
                    eigen,
                    diff,
                    diff,
                    config.tolerance("identity"),
                    _judge(diff, config.tolerance("identity"), _scale(out)),
                )
            )
    return report


def _max_diff_aligned(f: LCFunction, g: LCFunction) -> float:
    return max_abs_diff(f, g)[0]


def _rows_csv(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=("cell", "re", "im"), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({"cell": row["cell"], "re": f"{row['re']:.17g}", "im": f"{row['im']:.17g}"})
    return buffer.getvalue()


def _window_from_config(spec: Optional[Dict[str, Any]], f: LCFunction) -> Window:
    if spec is None:
        return Window.of(f)
    if not isinstance(spec, dict) or "ball" not in spec:
        raise SchemaError("window needs a ball", "window.ball")
    ball = ball_from_json(spec["ball"])
    resolution = spec.get("R", f.resolution)
    if not isinstance(resolution, int) or resolution < ball.level:
        raise SchemaError("window resolution must be an integer at or below the ball", "window.R")
    return Window(ball, resolution)


SUITES: Dict[str, Callable[[ExperimentConfig, Optional[Warn]], Report]] = {
    "frame-bound": run_frame_bound,
    "identities": run_identity_suite,
    "structure": run_structure_suite,
    "apply": run_apply,
    "oracle": run_oracle,
}


def run_experiment(config: ExperimentConfig, on_warning: Optional[Warn] = None) -> Report:
    validate_config(config)
    return SUITES[config.experiment](config, on_warning)


__all__ = [
    "ExperimentConfig",
    "Case",
    "Report",
    "EXPERIMENTS",
    "config_from_json",
    "load_config",
    "validate_config",
    "dumps_json",
    "report_csv",
    "write_report",
    "random_parabolic",
    "random_kernel",
    "random_ball",
    "run_frame_bound",
    "run_identity_suite",
    "run_structure_suite",
    "run_oracle",
    "run_apply",
    "run_experiment",
]
