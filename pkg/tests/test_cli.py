from __future__ import annotations

import json

import pytest

from fracvar import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_perimeter_of_unit_interval(capsys):
    code, out, _ = run(capsys, "perimeter", "--shape", "interval:0,1", "--alpha", "0.5")
    doc = json.loads(out)
    assert code == 0
    assert doc["value"] == pytest.approx(16.0, rel=0.01)
    assert doc["tag"] == "oracle"


def test_verify_strict_interval(capsys):
    code, out, _ = run(capsys, "verify", "strict_interval", "--alpha", "0.5")
    (rep,) = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    assert rep["measured"][0] == pytest.approx(2.2568, abs=1e-4)
    assert rep["expected_or_bound"][0] == pytest.approx(3.1915, abs=1e-4)


def test_failing_suite_sets_exit_one(capsys):
    code, out, _ = run(capsys, "verify", "strict_interval", "--h", "0.5")
    assert code == 1
    assert json.loads(out)[0]["status"] == "fail"


def test_gradient_csv_with_fft_backend(capsys):
    code, out, _ = run(capsys, "gradient", "--fn", "gaussian", "--alpha", "0.7", "--backend", "fft", "--out", "csv", "--h", "0.0625")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# ") and json.loads(lines[0][2:])["provenance"]["backend"] == "fft"
    assert lines[1] == "x,v0"


@pytest.mark.parametrize(
    "argv, flag",
    [
        (["perimeter", "--shape", "interval:0,1", "--alpha", "1.5"], "--alpha"),
        (["gradient", "--h", "-1"], "--h"),
        (["constants", "--dim", "3"], "--dim"),
        (["gradient", "--backend", "gpu"], "--backend"),
        (["riesz", "--beta", "2"], "--beta"),
        (["blowup", "--shape", "ball:0,0,1", "--radii", "0.1,0.2"], "--radii"),
        (["perimeter", "--shape", "triangle:1"], "--shape"),
    ],
)
def test_usage_errors_name_the_flag(capsys, argv, flag):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert flag in err


def test_argparse_errors_exit_two(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and "invalid choice" in err
    code, _, err = run(capsys, "perimeter", "--alpha", "abc")
    assert code == 2 and "--alpha" in err


def test_unknown_suite_is_usage_error(capsys):
    code, _, err = run(capsys, "verify", "nope")
    assert code == 2 and "unknown suite" in err


def test_config_file_defaults_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[fracvar]\nalpha = 0.25\nshape = interval:0,1\n")
    code, out, _ = run(capsys, "perimeter", "--config", str(cfg))
    assert code == 0 and json.loads(out)["value"] == pytest.approx(4 / (0.25 * 0.75))
    code, out, _ = run(capsys, "perimeter", "--config", str(cfg), "--alpha", "0.5")
    assert json.loads(out)["value"] == pytest.approx(16.0)


def test_config_unknown_key_and_empty_file(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[fracvar]\ncolour = blue\n")
    with pytest.raises(cli.UsageError, match="colour"):
        cli.load_config(str(bad))
    empty = tmp_path / "empty.ini"
    empty.write_text("")
    assert cli.load_config(str(empty)) == {}


def test_config_round_trip(tmp_path):
    cfg = cli.RunConfig(command="variation", alpha=0.3, shape="ball:0,0,1", h=0.05, threads=2, radii="0.2,0.1")
    path = tmp_path / "rt.ini"
    cli.save_config(str(path), cfg)
    assert cli.RunConfig(**cli.load_config(str(path))) == cfg


def test_save_config_flag_writes_file(tmp_path, capsys):
    path = tmp_path / "saved.ini"
    code, _, _ = run(capsys, "constants", "--alpha", "0.4", "--save-config", str(path))
    assert code == 0
    assert cli.load_config(str(path))["alpha"] == 0.4


def test_threads_environment_override(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    cfg, _ = cli.resolve_config(["constants"])
    assert cfg.threads == 3
    cfg, _ = cli.resolve_config(["constants", "--threads", "2"])
    assert cfg.threads == 2
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    with pytest.raises(cli.UsageError):
        cli.resolve_config(["constants"])


def test_output_file_and_byte_identical_runs(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert cli.main(["verify", "atom_pairing", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_other_commands_run(capsys):
    for argv in (
        ["variation", "--shape", "interval:0,1", "--h", "0.0078125"],
        ["coarea", "--fn", "bump", "--levels", "8", "--h", "0.03125"],
        ["laplacian", "--fn", "gaussian", "--h", "0.125", "--half-width", "16"],
        ["riesz", "--fn", "gaussian", "--beta", "0.5", "--h", "0.125", "--half-width", "16"],
        ["divergence", "--fn", "bump", "--h", "0.03125"],
        ["constants", "--dim", "2", "--out", "csv"],
        ["blowup", "--shape", "interval:0,1", "--point", "0", "--radii", "0.2,0.1", "--mode", "decay"],
    ):
        code, out, err = run(capsys, *argv)
        assert code == 0, (argv, err)
        assert out.strip()
