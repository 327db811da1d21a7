import json

import pytest

from qcartier.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_closure_json(capsys, tmp_path):
    code, out, err = run_cli(
        capsys,
        "check",
        "--id",
        "ClosureScalars",
        "--prime",
        "7",
        "--format",
        "json",
        "--cache-dir",
        str(tmp_path),
    )
    assert code == 0
    payload = json.loads(out)
    [check] = payload["checks"]
    assert check["witnesses"]["gamma_1"] == 95
    assert check["witnesses"]["beta_1"] == 283
    assert payload["aggregate"] == "Pass"


def test_prime_three_is_config_error(capsys):
    code, out, err = run_cli(capsys, "check", "--id", "ClosureScalars", "--prime", "3", "--no-cache")
    assert code == 2
    assert "p=3 excluded" in err


def test_composite_prime_rejected(capsys):
    code, out, err = run_cli(capsys, "check", "--id", "InertAp72", "--prime", "15", "--no-cache")
    assert code == 2


def test_precision_too_small_rejected(capsys):
    code, out, err = run_cli(
        capsys, "check", "--id", "MainSupercongruence", "--prime", "7",
        "--precision", "4", "--no-cache",
    )
    assert code == 2


def test_unknown_flag_exits_2(capsys):
    assert main(["check", "--frobnicate"]) == 2


def test_failing_check_exits_1(capsys, tmp_path):
    code, out, err = run_cli(
        capsys,
        "check",
        "--id",
        "MainSupercongruence",
        "--prime",
        "5",
        "--cache-dir",
        str(tmp_path),
    )
    assert code == 1
    assert "first failure at m=1" in out


def test_suite_tsv(capsys, tmp_path):
    code, out, err = run_cli(
        capsys,
        "suite",
        "--primes",
        "7,5",
        "--format",
        "tsv",
        "--m-max",
        "2",
        "--cache-dir",
        str(tmp_path),
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("id\tp\tell")
    assert lines[-1] == "# aggregate\tPass"
    assert any(line.startswith("InertAp72\t5") for line in lines)


def test_json_round_trips_byte_identically(capsys, tmp_path):
    code, out, err = run_cli(
        capsys,
        "check",
        "--id",
        "InertAp72",
        "--prime",
        "5",
        "--format",
        "json",
        "--cache-dir",
        str(tmp_path),
    )
    assert code == 0
    parsed = json.loads(out)
    assert json.dumps(parsed, sort_keys=True, indent=2) + "\n" == out


def test_out_flag_writes_file(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, err = run_cli(
        capsys,
        "check",
        "--id",
        "MumSignature",
        "--format",
        "json",
        "--no-cache",
        "--out",
        str(out_path),
    )
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["aggregate"] == "Pass"


def test_env_var_defaults(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QCARTIER_FORMAT", "tsv")
    code, out, err = run_cli(
        capsys, "check", "--id", "MumSignature", "--cache-dir", str(tmp_path)
    )
    assert code == 0
    assert out.startswith("id\t")
    # explicit flag beats the environment
    code, out, err = run_cli(
        capsys,
        "check",
        "--id",
        "MumSignature",
        "--format",
        "json",
        "--cache-dir",
        str(tmp_path),
    )
    assert json.loads(out)["aggregate"] == "Pass"


def test_dict_command(capsys, tmp_path):
    code, out, err = run_cli(
        capsys, "dict", "--prime", "7", "--precision", "30", "--no-cache"
    )
    assert code == 0
    assert "sturm identification: ok" in out
    assert "h_mix" in out


def test_sequence_command(capsys):
    code, out, err = run_cli(capsys, "sequence", "--n-max", "6", "--no-cache")
    assert code == 0
    assert "26749991016" in out


def test_bench_command(capsys):
    code, out, err = run_cli(
        capsys, "bench", "--primes", "7", "--precision", "60", "--no-cache"
    )
    assert code == 0
    assert out.startswith("p\tbackend")


def test_second_run_hits_cache_and_matches(capsys, tmp_path):
    args = (
        "check",
        "--id",
        "ClosureScalars",
        "--prime",
        "7",
        "--format",
        "json",
        "--cache-dir",
        str(tmp_path),
    )
    code1, out1, _ = run_cli(capsys, *args)
    assert any(p.name.startswith("dict.u__") for p in tmp_path.iterdir())
    code2, out2, _ = run_cli(capsys, *args)
    assert (code1, out1) == (code2, out2)


def test_suite_with_timings_includes_ms(capsys, tmp_path):
    code, out, err = run_cli(
        capsys,
        "check",
        "--id",
        "MumSignature",
        "--format",
        "tsv",
        "--timings",
        "--cache-dir",
        str(tmp_path),
    )
    assert code == 0
    row = [l for l in out.splitlines() if l.startswith("MumSignature")][0]
    assert not row.endswith("\t-")
