import json
from pathlib import Path

import pytest

from padictree.errors import SchemaError
from padictree.harness import (
    Case,
    ExperimentConfig,
    config_from_json,
    dumps_json,
    load_config,
    report_csv,
    run_apply,
    run_experiment,
    run_frame_bound,
    run_identity_suite,
    run_oracle,
    run_structure_suite,
    validate_config,
    write_report,
)

BASE = Path(__file__).resolve().parent.parent
SAMPLES = BASE / "samples"


def small_identities(**overrides):
    values = dict(experiment="identities", primes=[2], dims=[2], seeds=[0], alphas=[1.0], span_size=3)
    values.update(overrides)
    return ExperimentConfig(**values)


def test_load_config_sample():
    config = load_config(SAMPLES / "config_identities.json")
    assert config.prime_list == [2, 3]
    assert config.dims == [2]
    assert config.seeds == [0, 1]
    assert config.tolerance("oracle") == 1e-10


def test_unknown_config_key():
    with pytest.raises(SchemaError) as excinfo:
        load_config(SAMPLES / "config_unknown_key.json")
    assert excinfo.value.field == "prime"


@pytest.mark.parametrize(
    "overrides,field",
    [
        ({"p": 4}, "p"),
        ({"primes": [2, 9]}, "p"),
        ({"dims": [0]}, "d"),
        ({"gamma_max": 0}, "gamma_max"),
        ({"alphas": [1.0, -0.5]}, "alphas"),
        ({"operator": "laplace"}, "operator"),
        ({"tolerances": {"loose": 1.0}}, "tolerances.loose"),
        ({"experiment": "everything"}, "experiment"),
    ],
)
def test_validate_config(overrides, field):
    with pytest.raises(SchemaError) as excinfo:
        validate_config(ExperimentConfig(**overrides))
    assert excinfo.value.field == field


def test_config_must_be_an_object():
    with pytest.raises(SchemaError):
        config_from_json([1, 2])


def test_dumps_json_floats():
    text = dumps_json({"x": 0.1, "y": 3.0, "z": float("nan"), "w": 1 + 2j, "n": 4})
    data = json.loads(text)
    assert '"x": 0.10000000000000001' in text
    assert '"y": 3.0' in text
    assert data["z"] is None
    assert data["w"] == {"re": 1.0, "im": 2.0}
    assert data["n"] == 4


def test_case_timings_are_optional():
    case = Case("c", "formula", {}, 1.0, 1.0, 0.0, 0.0, True, seconds=0.5)
    assert "seconds" not in case.to_json()
    assert case.to_json(timings=True)["seconds"] == 0.5


def test_frame_bound_suite():
    report = run_frame_bound(ExperimentConfig(experiment="frame-bound", primes=[2, 3, 5], gamma_max=30))
    assert report.passed
    ids = [case.case_id for case in report.cases]
    assert "frame-bound/p=5" in ids
    assert "frame-law/p=2/gamma=10" in ids
    assert report.artifacts["frame_partial_sums.csv"].startswith("p,gamma,level_sum,cumulative\n")


def test_frame_bound_warns_for_higher_dimension():
    warnings = []
    run_frame_bound(ExperimentConfig(experiment="frame-bound", d=2, gamma_max=5), on_warning=warnings.append)
    assert warnings


def test_identity_suite_passes():
    report = run_identity_suite(small_identities())
    assert report.summary["total"] > 0
    assert report.passed, [c.case_id for c in report.cases if not c.passed]
    provenances = {case.provenance for case in report.cases}
    assert provenances == {"triviality", "formula"}


def test_negative_control_breaks_the_identities():
    report = run_identity_suite(small_identities(negative_control=True))
    assert not report.passed
    failed = [case.case_id for case in report.cases if not case.passed]
    assert all(case_id.startswith(("transform/", "covariance/")) for case_id in failed)


def test_structure_suite_passes():
    config = ExperimentConfig(experiment="structure", primes=[2, 3], d=1, dims=[2], seeds=[0, 1], precision=8)
    report = run_structure_suite(config)
    assert report.passed, [c.case_id for c in report.cases if not c.passed]
    assert any(case.case_id.startswith("wavelet-lemma/p=3/d=2") for case in report.cases)


def test_structure_suite_round_trips_points_for_many_seeds():
    config = ExperimentConfig(experiment="structure", primes=[2, 3], d=1, dims=[], seeds=list(range(10)), precision=8)
    report = run_structure_suite(config)
    round_trips = [case for case in report.cases if case.case_id.startswith("apply-point/")]
    assert len(round_trips) == 20
    assert all(case.passed for case in round_trips), [c.case_id for c in round_trips if not c.passed]


def test_suites_report_degraded_inputs():
    warnings = []
    run_identity_suite(small_identities(d=2, dims=[], seeds=[]), on_warning=warnings.append)
    assert any("d = 1" in message for message in warnings)
    assert any("no seeds" in message for message in warnings)

    warnings.clear()
    run_structure_suite(
        ExperimentConfig(experiment="structure", primes=[2], dims=[2], seeds=[0], precision=4),
        on_warning=warnings.append,
    )
    assert any("set-s-recover" in message for message in warnings)

    warnings.clear()
    config = ExperimentConfig(experiment="oracle", primes=[2], alphas=[1.0], levels=[0], dims=[], seeds=list(range(7)))
    run_oracle(config, on_warning=warnings.append)
    assert warnings == ["the vector-field oracle uses the first 5 of 7 seeds"]


def test_reports_are_deterministic():
    config = ExperimentConfig(experiment="structure", primes=[3], dims=[2], seeds=[4])
    first = dumps_json(run_experiment(config).to_json())
    second = dumps_json(run_experiment(config).to_json())
    assert first == second


def test_oracle_suite_passes():
    config = ExperimentConfig(experiment="oracle", primes=[2, 3], alphas=[1.0], levels=[0, 1], dims=[2], seeds=[0])
    report = run_oracle(config)
    assert report.passed, [c.case_id for c in report.cases if not c.passed]
    assert {case.provenance for case in report.cases} == {"oracle"}


def test_apply_vladimirov_on_a_wavelet():
    config = ExperimentConfig(
        experiment="apply", inputs={"function": str(SAMPLES / "wavelet_p2.json")}, alpha=1.0
    )
    report = run_apply(config)
    assert report.passed
    assert [case.case_id for case in report.cases] == ["apply/vladimirov", "apply/eigenvalue"]
    output = json.loads(report.artifacts["apply_output.json"])
    assert [cell["re"] for cell in output["cells"]] == pytest.approx([2.0, -2.0])
    assert report.artifacts["apply_cells.csv"].splitlines()[0] == "cell,re,im"


def test_apply_with_window_and_kernel():
    config = ExperimentConfig(
        experiment="apply",
        operator="kernel",
        inputs={"function": str(SAMPLES / "wavelet_p2.json"), "kernel": str(SAMPLES / "kernel_p2.json")},
        window={"ball": "p=2;d=1;L=-1;c=", "R": 1},
    )
    output = json.loads(run_apply(config).artifacts["apply_output.json"])
    assert len(output["cells"]) == 4


def test_apply_pushforward_warns_about_window():
    warnings = []
    config = ExperimentConfig(
        experiment="apply",
        operator="pushforward",
        inputs={"function": str(SAMPLES / "wavelet_p2.json"), "morphism": str(SAMPLES / "morphism_p2.json")},
        window={"ball": "p=2;d=1;L=0;c="},
    )
    report = run_apply(config, on_warning=warnings.append)
    assert warnings
    assert report.cases[0].observed["l2norm"] == pytest.approx(2**0.5)


@pytest.mark.parametrize(
    "inputs,operator,field",
    [
        ({}, "vladimirov", "inputs.function"),
        ({"function": "wavelet_p2.json"}, "kernel", "inputs.kernel"),
        ({"function": "wavelet_p2.json"}, "unitary", "inputs.morphism"),
        ({"function": "malformed_function.json"}, "vladimirov", "function.cells[1].re"),
    ],
)
def test_apply_input_errors(inputs, operator, field):
    inputs = {key: str(SAMPLES / name) for key, name in inputs.items()}
    config = ExperimentConfig(experiment="apply", operator=operator, inputs=inputs)
    with pytest.raises(SchemaError) as excinfo:
        run_apply(config)
    assert excinfo.value.field == field


def test_write_report(tmp_path):
    report = run_frame_bound(ExperimentConfig(experiment="frame-bound", primes=[2], gamma_max=8))
    written = write_report(report, tmp_path / "out")
    assert [path.name for path in written] == ["frame-bound.json", "frame_partial_sums.csv"]
    data = json.loads(written[0].read_text(encoding="utf-8"))
    assert data["version"] == 1
    assert data["summary"]["failed"] == 0
    assert "timings" not in data["config"]
    csv_path = write_report(report, tmp_path / "csv", "csv")[0]
    assert csv_path.read_text(encoding="utf-8") == report_csv(report)
    assert report_csv(report).splitlines()[0] == "case_id,p,d,seed,alpha,residual,pass"
