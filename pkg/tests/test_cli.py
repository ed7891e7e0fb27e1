import json
from pathlib import Path

import pytest

from padictree.cli import build_parser, config_from_args, main

BASE = Path(__file__).resolve().parent.parent
SAMPLES = BASE / "samples"


def test_flags_override_the_config_file():
    args = build_parser().parse_args(
        ["identities", "--config", str(SAMPLES / "config_identities.json"), "--p", "5", "--seed", "3", "--d", "2"]
    )
    config = config_from_args(args)
    assert config.prime_list == [5]
    assert config.seeds == [3]
    assert config.dims == [2]
    assert config.alphas == [0.5, 2.0]


def test_apply_to_stdout(capsys):
    assert main(["apply", str(SAMPLES / "wavelet_p2.json"), "--alpha", "1"]) == 0
    output = json.loads(capsys.readouterr().out)
    assert [cell["re"] for cell in output["cells"]] == pytest.approx([2.0, -2.0])


def test_frame_bound_writes_files(tmp_path, capsys):
    assert main(["frame-bound", "--p", "2", "--p", "3", "--gamma-max", "12", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert f"[info] Wrote {tmp_path / 'frame-bound.json'}" in out
    report = json.loads((tmp_path / "frame-bound.json").read_text(encoding="utf-8"))
    assert report["summary"]["failed"] == 0
    assert (tmp_path / "frame_partial_sums.csv").exists()


def test_csv_report_on_stdout(capsys):
    assert main(["frame-bound", "--gamma-max", "6", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "case_id,p,d,seed,alpha,residual,pass"
    assert lines[1].startswith("frame-bound/p=2,2,1,")


def test_malformed_input_reports_the_field(capsys):
    assert main(["apply", str(SAMPLES / "malformed_function.json")]) == 1
    err = capsys.readouterr().err
    assert err.startswith("[error] function.cells[1].re:")


def test_unknown_config_key_fails(capsys):
    assert main(["structure", "--config", str(SAMPLES / "config_unknown_key.json")]) == 1
    assert "prime" in capsys.readouterr().err


def test_negative_control_exit_code(capsys):
    argv = ["identities", "--p", "2", "--seed", "0", "--d", "2", "--negative-control"]
    assert main(argv + ["--config", str(SAMPLES / "config_identities.json")]) == 1
    err = capsys.readouterr().err
    assert "[warn]" in err
    assert "cases failed" in err
