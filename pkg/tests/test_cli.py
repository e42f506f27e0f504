import json

import pytest

import qepi.epi
from qepi.cli import EXIT_BREACH, EXIT_OK, EXIT_USAGE, main, parse_state, UsageError


def _files(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def test_bounds_writes_all_formats(tmp_path):
    rc = main(["bounds", "--lambda", "0.5", "--ne", "2", "--nmax", "10", "--points", "11", "--out", str(tmp_path),
               "--format", "csv", "--format", "json", "--format", "svg"])
    assert rc == EXIT_OK
    names = _files(tmp_path)
    assert {"bounds.csv", "bounds.json", "bounds.svg"} <= set(names)
    header = json.loads(names["bounds.csv"].splitlines()[0][2:])
    assert header["config"]["lam"] == 0.5 and "conventions" in header
    assert b"conditional" in names["bounds.svg"]


def test_rerun_is_byte_identical(tmp_path):
    args = ["bounds", "--sweep", "lambda", "--points", "9", "--format", "csv", "--format", "json"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    # the output directory is part of the recorded config, so compare with it masked
    mask = lambda blob, d: blob.replace(str(d).encode(), b"OUT")
    assert {k: mask(v, tmp_path / "a") for k, v in a.items()} == {k: mask(v, tmp_path / "b") for k, v in b.items()}


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"lambda": 0.25, "ne": 5.0, "nmax": 4.0, "points": 5}))
    out = tmp_path / "out"
    assert main(["bounds", "--config", str(cfg), "--ne", "1", "--out", str(out), "--format", "json"]) == EXIT_OK
    data = json.loads((out / "bounds.json").read_text())
    assert data["config"]["lam"] == 0.25 and data["config"]["ne"] == 1.0
    assert data["result"]["N_E"] == 1.0


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("QEPI_OUT", str(tmp_path / "env"))
    assert main(["bounds", "--nu", "1", "--points", "5", "--nmax", "5"]) == EXIT_OK
    assert (tmp_path / "env" / "bounds.csv").exists()


def test_usage_errors(tmp_path, capsys):
    out = ["--out", str(tmp_path)]
    assert main(["bounds", "--nmax", "-1"] + out) == EXIT_USAGE
    assert main(["oracle", "--channel", "teleporter"] + out) == EXIT_USAGE
    assert main(["scurve", "--x", "squeezed:1"] + out) == EXIT_USAGE
    assert main(["bounds", "--lambda", "1.5"] + out) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tolerances": {"nope": 1}}))
    assert main(["bounds", "--config", str(bad)] + out) == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["bounds", "--lambda", "abc"])
    assert info.value.code == 2
    assert "qepi" in capsys.readouterr().err


def test_breach_exit_code(tmp_path, monkeypatch):
    real = qepi.epi.epi_margins

    def shifted(x, y, lam, label=""):
        m = real(x, y, lam, label)
        return qepi.epi.margins_from_entropies(m.S_x, m.S_y, m.S_z - 1.0, lam, 1, label)

    monkeypatch.setattr(qepi.epi, "epi_margins", shifted)
    assert main(["epi-test", "--corpus", "3", "--out", str(tmp_path)]) == EXIT_BREACH


def test_epi_test_small_corpus(tmp_path):
    assert main(["epi-test", "--corpus", "9", "--seed", "1", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "epi_test.json").read_text())["result"]["summary"]
    assert summary["pairs"] == 9 and summary["min_linear_margin"] >= -1e-6


def test_scurve_and_oracle(tmp_path):
    assert main(["scurve", "--t", "1", "--points", "6", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "scurve.csv").exists()
    assert main(["oracle", "--channel", "amplifier", "--gain", "1.2", "--cutoff", "30",
                 "--out", str(tmp_path)]) == EXIT_OK


def test_parse_state():
    assert parse_state("fock:2", 5).rho[2, 2] == 1
    assert parse_state("random:2:4", 6).dims == (6,)
    # the cutoff is a floor that grows to hold the tail
    assert parse_state("thermal:0.5", 5).dims[0] >= 20
    assert parse_state("fock:9", 5).dims == (10,)
    with pytest.raises(UsageError):
        parse_state("cat:1", 5)
