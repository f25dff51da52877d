import json
import os

import pytest

from timobeam.cli import RunConfig, UsageError, main, parse_config
from timobeam.reporting import read_run


def test_defaults_for_each_test():
    config = parse_config(["--test", "1"])
    from timobeam.cli import _resolve_params

    params = _resolve_params(config)
    assert (params.n_steps, params.n_funcs, params.total_time) == (256, 35, 1.0)
    params2 = _resolve_params(parse_config(["--test", "2"]))
    assert (params2.n_steps, params2.n_funcs) == (256, 45)
    params3 = _resolve_params(parse_config(["--test", "3"]))
    assert (params3.n_steps, params3.n_funcs, params3.total_time) == (1024, 15, 4.0)


def test_overrides_apply():
    from timobeam.cli import _resolve_params

    config = parse_config(["--test", "3", "--n", "128", "--N", "7"])
    params = _resolve_params(config)
    assert (params.n_steps, params.n_funcs) == (128, 7)


def test_unknown_test_is_usage_error():
    with pytest.raises(UsageError):
        parse_config(["--test", "9"])
    assert main(["--test", "9"]) == 1


def test_unknown_flag_is_usage_error():
    assert main(["--frobnicate"]) == 1


def test_invalid_override_is_usage_error():
    assert main(["--test", "1", "--alpha", "-1"]) == 1
    assert main(["--test", "1", "--n", "1"]) == 1


def test_config_file_and_flag_precedence(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"test": 1, "n": 32, "N": 10, "parallel": "on"}))
    config = parse_config(["--config", str(config_path)])
    assert (config.test, config.n, config.n_funcs, config.parallel) == (1, 32, 10, True)
    config = parse_config(["--config", str(config_path), "--n", "16"])
    assert config.n == 16  # flag wins over file


def test_config_file_unknown_key(tmp_path):
    config_path = tmp_path / "bad.json"
    config_path.write_text(json.dumps({"nstep": 3}))
    with pytest.raises(UsageError):
        parse_config(["--config", str(config_path)])


def test_env_var_sets_default_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("TIMOSHENKO_OUT_DIR", str(tmp_path))
    config = parse_config(["--test", "1"])
    assert config.out == str(tmp_path)
    monkeypatch.delenv("TIMOSHENKO_OUT_DIR")
    assert parse_config(["--test", "1"]).out == "."


def test_machine_precision_mode(tmp_path, capsys):
    code = main(["--mode", "machine-precision", "--n", "8", "--N", "4",
                 "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "max_E1" in out
    max_e1 = float(out.split("max_E1=")[1].split()[0])
    assert max_e1 <= 1e-12
    assert (tmp_path / "testmp_8_4_errors.csv").exists()
    assert (tmp_path / "testmp_8_4_profile.csv").exists()


def test_run_writes_parseable_records(tmp_path):
    code = main(["--test", "1", "--n", "8", "--N", "6", "--out", str(tmp_path)])
    assert code == 0
    records = read_run(str(tmp_path / "test1_8_6_errors.csv"))
    assert [r.k for r in records] == list(range(9))


def test_json_format(tmp_path):
    code = main(["--test", "1", "--n", "8", "--N", "6", "--format", "json",
                 "--out", str(tmp_path)])
    assert code == 0
    records = read_run(str(tmp_path / "test1_8_6_errors.json"))
    assert len(records) == 9


def test_parallel_and_serial_outputs_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "serial", tmp_path / "parallel"
    assert main(["--test", "1", "--n", "12", "--N", "8", "--out", str(out_a),
                 "--parallel", "off"]) == 0
    assert main(["--test", "1", "--n", "12", "--N", "8", "--out", str(out_b),
                 "--parallel", "on"]) == 0
    name = "test1_12_8_errors.csv"
    assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    profile = "test1_12_8_profile.csv"
    assert (out_a / profile).read_bytes() == (out_b / profile).read_bytes()


def test_io_failure_exit_code(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    code = main(["--test", "1", "--n", "8", "--N", "6", "--out", str(blocker)])
    assert code == 3


def test_temporal_study_mode(tmp_path, capsys):
    code = main(["--mode", "temporal-study", "--test", "1", "--N", "6",
                 "--grid", "8,16,32", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "median order" in out
    assert (tmp_path / "test1_temporal_study.csv").exists()


def test_spatial_study_mode(tmp_path, capsys):
    code = main(["--mode", "spatial-study", "--test", "1", "--n", "16",
                 "--grid", "4,6,8,10", "--out", str(tmp_path)])
    assert code == 0
    assert "decay slope" in capsys.readouterr().out
    assert (tmp_path / "test1_spatial_study.csv").exists()


def test_abstract_demo_mode(tmp_path, capsys):
    code = main(["--mode", "abstract-demo", "--dim", "6", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "running maxima" in out
    payload = json.loads((tmp_path / "abstract_demo.json").read_text())
    assert payload["dim"] == 6
    assert payload["max_relative_spread"] < 0.5
