import csv
import json
from pathlib import Path

import numpy as np
import pytest

from wptsim.cli import main
from wptsim.optimizer import smf
from wptsim.scenario import BUILTIN_SCENARIOS, ConfigError, load_scenario, run, sub_seeds, sweep, validate

GOLDEN = Path(__file__).parent / "golden"
HEADERS = json.loads((GOLDEN / "headers.json").read_text())


def _read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_minimal_config_golden():
    assert validate("seed = 1\n").resolved_json() == (GOLDEN / "minimal_resolved.json").read_text()


def test_missing_seed_names_key():
    with pytest.raises(ConfigError) as exc:
        validate("name = 'x'\n")
    assert any(key == "seed" for key, _ in exc.value.errors)


@pytest.mark.parametrize(
    "text, key",
    [
        ("seed = 1\n[transmitter]\npower_w = -1.0\n", "transmitter.power_w"),
        ("seed = 1\n[grid]\nn_tones = 2.5\n", "grid.n_tones"),
        ("seed = 1\n[channel]\nmodel = 'weird'\n", "channel.model"),
        ("seed = 1\nbogus = 3\n", "bogus"),
        ("seed = 1\n[channel]\nfile = 'missing.json'\n", "channel.file"),
        ("seed = 1\n[receiver]\narch = 'ps'\n", "receiver.arch_param"),
    ],
)
def test_located_errors(text, key):
    with pytest.raises(ConfigError) as exc:
        validate(text)
    assert key in [k for k, _ in exc.value.errors]


def test_all_errors_reported_together():
    with pytest.raises(ConfigError) as exc:
        validate("[transmitter]\npower_w = -1.0\nantennas = 0\n")
    keys = [k for k, _ in exc.value.errors]
    assert {"seed", "transmitter.power_w", "transmitter.antennas"} <= set(keys)


def test_sub_seeds_stable():
    a = sub_seeds(5, 4)
    assert a == sub_seeds(5, 4)
    assert a[:2] == sub_seeds(5, 2)
    assert len(set(a)) == 4


def test_cli_validate_exit_codes(tmp_path, capsys):
    good = tmp_path / "ok.toml"
    good.write_text("seed = 1\n")
    assert main(["validate", str(good)]) == 0
    bad = tmp_path / "bad.toml"
    bad.write_text("[transmitter]\npower_w = -1\n")
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "seed" in err and "transmitter.power_w" in err
    broken = tmp_path / "broken.toml"
    broken.write_text("seed = = 1\n")
    assert main(["validate", str(broken)]) == 1


def test_cli_runtime_error_exit_code(tmp_path, monkeypatch):
    import wptsim.cli as cli

    def boom(*a, **k):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(cli, "run", boom)
    cfg = tmp_path / "c.toml"
    cfg.write_text("seed = 1\n")
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 2


def test_run_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("seed = 3\nname = 'small'\nrealizations = 3\n[transmitter]\nantennas = 2\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    out = tmp_path / "out" / "small"
    assert (out / "results.csv").read_text().splitlines()[0] == HEADERS["pdc"]
    assert (out / "seeds.csv").read_text().splitlines()[0] == HEADERS["seeds"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["library_version"]
    assert manifest["wall_time_s"] >= 0
    assert json.loads((out / "resolved_config.json").read_text())["seed"] == 3
    printed = capsys.readouterr().out.splitlines()
    assert printed[0] == "realization,sub_seed"
    assert len(printed) == 4


def test_rows_rerunnable_from_sub_seed(tmp_path):
    sc = validate("seed = 3\nname = 'r'\nrealizations = 3\n")
    rows = _read(run(sc, output_dir=tmp_path) / "results.csv")
    single = validate("seed = 3\nname = 'r1'\n")
    from wptsim.scenario import execute

    _, again = execute(single, [int(rows[2]["seed"])])
    assert repr(float(again[0][6])) == rows[2]["p_dc_w"]


def test_env_var_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("WPTSIM_OUTPUT_DIR", str(tmp_path / "env"))
    sc = validate("seed = 1\nname = 'e'\n")
    assert run(sc) == tmp_path / "env" / "e"


@pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
def test_builtin_headers(name, tmp_path):
    sc = load_scenario(name)
    out = run(sc, output_dir=tmp_path)
    assert (out / "results.csv").read_text().splitlines()[0] == HEADERS[sc["experiment"]]


def test_fig7_matches_direct_smf(tmp_path):
    sc = load_scenario("fig7-smf")
    rows = _read(run(sc, output_dir=tmp_path) / "results.csv")
    ch = sc.channel(int(rows[0]["seed"]))
    x = smf(ch, sc["transmitter"]["beta"], sc["transmitter"]["power_w"])
    np.testing.assert_allclose([float(r["power_w"]) for r in rows], x.tone_powers, rtol=1e-15)
    norms = np.array([float(r["channel_norm"]) for r in rows])
    powers = np.array([float(r["power_w"]) for r in rows])
    # dominant tones get more power
    assert np.all(np.diff(powers[np.argsort(norms)]) >= 0)


def test_fig19_mean_monotone(tmp_path):
    sc = load_scenario("fig19-feedback").with_value("bits", 4)
    sc.config["realizations"] = 20
    rows = _read(run(sc, output_dir=tmp_path) / "results.csv")
    means = [np.mean([float(r["wpt_p_dc_w"]) for r in rows if int(r["bits"]) == b]) for b in range(1, 5)]
    assert all(b >= a for a, b in zip(means, means[1:]))


def test_sweep_m_flat_increasing(tmp_path, capsys):
    cfg = tmp_path / "s.toml"
    cfg.write_text("seed = 1\nname = 'sw'\n[channel]\nmodel = 'flat'\n[grid]\nn_tones = 8\n")
    assert main(["sweep", str(cfg), "--var", "M", "--values", "1,2,4,8", "--out", str(tmp_path)]) == 0
    rows = _read(tmp_path / "sw" / "sweep.csv")
    assert list(rows[0]) == HEADERS["sweep"].split(",")
    p = [float(r["metric_value"]) for r in rows if r["metric"] == "p_dc_w"]
    assert len(p) == 4 and all(b > a for a, b in zip(p, p[1:]))


def test_sweep_n_multisine_beats_cw(tmp_path):
    sc = validate("seed = 2\nname = 'n'\n[channel]\nmodel = 'flat'\n[transmitter]\nantennas = 2\n")
    rows = _read(sweep(sc, "N", [1, 8], output_dir=tmp_path) / "sweep.csv")
    p = {int(r["value"]): float(r["metric_value"]) for r in rows if r["metric"] == "p_dc_w"}
    assert p[8] > p[1]


def test_sweep_distance_path_loss(tmp_path):
    sc = validate("seed = 2\nname = 'd'\n[channel]\nmodel = 'flat'\n[grid]\nn_tones = 1\n")
    rows = _read(sweep(sc, "distance", [1.0, 2.0], output_dir=tmp_path) / "sweep.csv")
    p = {float(r["value"]): float(r["metric_value"]) for r in rows if r["metric"] == "p_rf_r_w"}
    assert p[1.0] / p[2.0] == pytest.approx(4.0, rel=1e-12)


def test_empty_sweep_is_validation_error(tmp_path):
    cfg = tmp_path / "s.toml"
    cfg.write_text("seed = 1\n[sweep]\nvariable = 'M'\nvalues = []\n")
    assert main(["sweep", str(cfg), "--out", str(tmp_path)]) == 1
    assert main(["sweep", str(cfg), "--var", "M", "--values", "", "--out", str(tmp_path)]) == 1


def test_sweep_rejects_invalid_value(tmp_path):
    sc = validate("seed = 1\n")
    with pytest.raises(ConfigError):
        sweep(sc, "M", [1, -2], output_dir=tmp_path)


def test_run_deterministic_with_jobs(tmp_path):
    sc = validate("seed = 9\nname = 'j'\nrealizations = 6\n[transmitter]\nantennas = 2\n")
    a = (run(sc, jobs=1, output_dir=tmp_path / "a") / "results.csv").read_bytes()
    b = (run(sc, jobs=3, output_dir=tmp_path / "b") / "results.csv").read_bytes()
    assert a == b
