import json

import pytest

from phonon_reset.cli import ingest_rpm_csv, load_reference, main, resolve_seed
from phonon_reset.config import parse_config, parse_config_text
from phonon_reset.errors import ConfigError, InsufficientDataError

SMALL = """
seed = 4
[device]
mode_offsets_mhz = [-8.8, -21.4]
[protocol]
mode_order = [1, 2]
n_swaps = 1
[integrator]
step_ns = 1.0
"""


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.toml"
    p.write_text(SMALL)
    return p


def run_cli(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def read_bytes(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_ingest_two_rows(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("contrast\n0\n2e-4\n")
    rs = ingest_rpm_csv(p)
    assert rs.sample_mean == pytest.approx(1e-4)
    assert len(rs) == 2


def test_ingest_header_only(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("contrast,run_id\n")
    with pytest.raises(InsufficientDataError):
        ingest_rpm_csv(p)


def test_ingest_amplitudes_zero_reference_names_row(tmp_path):
    rows = [f"{0.01 * i},1.0" for i in range(1, 7)] + ["0.02,0"] + ["0.01,1.0"]
    p = tmp_path / "amps.csv"
    p.write_text("signal_amp,reference_amp\n" + "\n".join(rows) + "\n")
    with pytest.raises(ConfigError, match="row 7"):
        ingest_rpm_csv(p)


def test_ingest_amplitude_ratio_and_metadata(tmp_path):
    p = tmp_path / "amps.csv"
    p.write_text("run_id,timestamp,signal_amp,reference_amp\n"
                 "a,2023-05-01T10:00:00Z,1e-4,0.5\nb,2023-05-01T10:05:00+00:00,3e-4,0.5\n")
    rs = ingest_rpm_csv(p)
    assert rs.sample_mean == pytest.approx(4e-4)
    assert rs.run_ids == ["a", "b"]
    assert len(rs.timestamps) == 2


@pytest.mark.parametrize("body, match", [
    ("value\n1\n2\n", "contrast"),
    ("contrast\n0.1\nabc\n", "row 2"),
    ("contrast,timestamp\n0.1,yesterday\n0.2,2023-01-01\n", "ISO-8601"),
])
def test_ingest_errors(tmp_path, body, match):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(ConfigError, match=match):
        ingest_rpm_csv(p)


def test_reference_default_and_csv(tmp_path):
    ref = load_reference("default")
    assert ref[4] == pytest.approx(8.3e-5) and ref[3] == pytest.approx(1.3e-4)
    p = tmp_path / "ref.csv"
    p.write_text("n,p\n1,0.02\n2,0.0035\n")
    assert load_reference(str(p)) == {1: 0.02, 2: 0.0035}
    assert load_reference(None) is None


def test_seed_precedence(monkeypatch):
    cfg = parse_config_text("seed = 9\n")
    monkeypatch.delenv("PHONON_RESET_SEED", raising=False)
    assert resolve_seed(None, cfg) == 9
    monkeypatch.setenv("PHONON_RESET_SEED", "21")
    assert resolve_seed(None, cfg) == 21
    assert resolve_seed(3, cfg) == 3


def test_estimate_population_golden(tmp_path, capsys):
    mu, sigma = -0.95e-4, 1.39e-4
    # two records x = mu +- sigma have mean mu and standard error sigma
    data = tmp_path / "rpm.csv"
    data.write_text(f"contrast\n{mu - sigma!r}\n{mu + sigma!r}\n")
    code, _, _ = run_cli(capsys, "estimate-population", "--data", data, "--out", tmp_path / "o")
    assert code == 0
    row = json.loads((tmp_path / "o" / "posterior.json").read_text())["table"][0]
    assert row["mean"] == pytest.approx(8.3e-5, rel=0.02)
    assert row["ci_low"] == pytest.approx(2.7e-6, rel=0.03)
    assert row["ci_high"] == pytest.approx(2.52e-4, rel=0.03)


def test_sweep_outputs_and_manifest(tmp_path, capsys, small_config):
    out = tmp_path / "sweep"
    code, stdout, _ = run_cli(capsys, "sweep-swaps", "--config", small_config, "--out", out,
                              "--reference", "default")
    assert code == 0
    body = json.loads((out / "sweep.json").read_text())
    assert [r["n_swaps"] for r in body["table"]] == [0, 1]
    assert body["table"][1]["reference_p"] == pytest.approx(0.02)
    assert body["metadata"]["seed"] == 4
    manifest = json.loads((out / "manifest.json").read_text())
    listed = {f["path"] for f in manifest["files"]}
    assert listed | {"manifest.json"} == {p.name for p in out.iterdir()}
    assert {"sweep.json", "sweep.svg", "sweep_trajectories.csv", "config.toml"} <= listed
    assert "Date" not in (out / "sweep.svg").read_text()


def test_outputs_are_byte_identical_across_runs(tmp_path, capsys, small_config):
    for name in ("a", "b"):
        assert run_cli(capsys, "simulate-reset", "--config", small_config, "--out", tmp_path / name)[0] == 0
    assert read_bytes(tmp_path / "a") == read_bytes(tmp_path / "b")


def test_csv_format(tmp_path, capsys, small_config):
    code, _, _ = run_cli(capsys, "sweep-swaps", "--config", small_config, "--out", tmp_path, "--format", "csv")
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "n_swaps,p,total_duration_us,reference_p"
    assert len(lines) == 3


def test_rpm_synthesize_then_estimate(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "rpm-synthesize", "--seed", 2, "--out", tmp_path / "s")
    assert code == 0
    rs = ingest_rpm_csv(tmp_path / "s" / "rpm_records.csv")
    assert len(rs) == 84
    code, _, _ = run_cli(capsys, "estimate-population", "--data", tmp_path / "s" / "rpm_records.csv",
                         "--out", tmp_path / "e")
    a = json.loads((tmp_path / "s" / "posterior.json").read_text())["table"]
    b = json.loads((tmp_path / "e" / "posterior.json").read_text())["table"]
    assert a == b


def test_seed_changes_synthetic_records(tmp_path, capsys):
    run_cli(capsys, "rpm-synthesize", "--seed", 1, "--out", tmp_path / "a")
    run_cli(capsys, "rpm-synthesize", "--seed", 2, "--out", tmp_path / "b")
    assert (tmp_path / "a" / "rpm_records.csv").read_bytes() != (tmp_path / "b" / "rpm_records.csv").read_bytes()


def test_error_budget_command(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "error-budget", "--out", tmp_path)
    row = json.loads((tmp_path / "error_budget.json").read_text())["table"][0]
    assert code == 0
    assert row["displacement_population"] == pytest.approx(1.6e-7)


def test_validate_command(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "validate", "--out", tmp_path)
    assert code == 0
    assert out.count("PASS") >= 10 and "FAIL" not in out


def test_validation_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[noise]\nphonon_nbar = [0.1]\n")
    code, _, err = run_cli(capsys, "sweep-swaps", "--config", bad, "--out", tmp_path / "o")
    assert code == 2
    record = json.loads(err.splitlines()[0])
    assert record["error"] == "ConfigError" and "phonon_nbar" in record["message"]


def test_missing_data_is_validation_error(tmp_path, capsys):
    assert run_cli(capsys, "estimate-population", "--out", tmp_path)[0] == 2


def test_numerical_failure_exit_code(tmp_path, capsys, small_config):
    # a 300 ns step is far beyond RK4 stability for the 2 pi x 200 MHz scale of the problem
    code, _, err = run_cli(capsys, "simulate-reset", "--config", small_config, "--out", tmp_path,
                           "--step-ns", 300)
    assert code == 3
    assert json.loads(err.splitlines()[-2])["error"] == "IntegrationError"


def test_step_override_changes_hash(tmp_path, capsys, small_config):
    run_cli(capsys, "simulate-reset", "--config", small_config, "--out", tmp_path / "a")
    run_cli(capsys, "simulate-reset", "--config", small_config, "--out", tmp_path / "b", "--step-ns", 0.5)
    ha = json.loads((tmp_path / "a" / "reset.json").read_text())["metadata"]["config_hash"]
    hb = json.loads((tmp_path / "b" / "reset.json").read_text())["metadata"]["config_hash"]
    assert ha != hb
    assert "step_ns = 0.5" in (tmp_path / "b" / "config.toml").read_text()
    assert parse_config(tmp_path / "b" / "config.toml").step == pytest.approx(5e-4)
