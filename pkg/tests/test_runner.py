import csv
import json
import subprocess
import sys

import pytest

from iscc_sim.errors import ConfigError
from iscc_sim.records import SCHEMAS, WALL_CLOCK_COLUMNS
from iscc_sim.runner import SCHEMA, default_config, main, parse_config, parse_config_text
from iscc_sim.runner import cli

SMALL = """\
[run]
seed = 4

[sensing]
snr_db_list = 10, 30
trials = 2

[network]
node_counts = 20
duration_s = 3
trials = 1
protocols = sensing-triggered, fixed-beacon:0.25

[control]
obstacle_radius_list = 30
trials = 1
iterations = 300
replan_iterations = 200
"""

GOLDEN = {
    "sensing": "method,snr_db,trial,armse_m,runtime_ms,converged",
    "network": "protocol,node_count,trial,mean_accuracy,beacons_sent,mean_update_time_s,p95_update_time_s",
    "control": "planner,obstacle_radius_m,trial,replanning_delay_ms,expansions,path_length_m,energy_j,collided",
}


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return p


def test_minimal_config_gets_documented_defaults():
    cfg = parse_config_text("[run]\nseed = 9\n")
    for sec, keys in SCHEMA.items():
        assert set(cfg[sec]) == set(keys)
    assert cfg["control"]["iterations"] == 1000
    assert cfg["control"]["bounds"] == [300.0, 300.0, 100.0]
    assert cfg["network"]["node_counts"] == [20, 40, 60, 80]
    assert cfg["sensing"]["num_subcarriers"] == 512
    assert cfg["network"]["seed"] == cfg["control"]["seed"] == 9
    assert "iterations" in cfg.defaults_applied["control"]
    assert "seed" not in cfg.defaults_applied["run"]


def test_misspelled_key_names_key_and_line():
    text = "[run]\nseed = 1\n\n[control]\nitreations = 5\n"
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text)
    assert exc.value.key == "control.itreations"
    assert exc.value.line == 5
    assert "itreations" in str(exc.value)


def test_bad_type_and_invariant_errors():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("[sensing]\n\ntrials = many\n")
    assert exc.value.key == "sensing.trials" and exc.value.line == 3
    with pytest.raises(ConfigError) as exc:
        parse_config_text("[network]\nspeed_min = 9\nspeed_max = 3\n")
    assert exc.value.key == "network.speed_max"
    with pytest.raises(ConfigError):
        parse_config_text("[network]\nprotocols = warp-drive\n")
    with pytest.raises(ConfigError):
        parse_config_text("[plotting]\ndpi = 3\n")


def test_identical_files_hash_identically(tmp_path):
    a, b = tmp_path / "a.ini", tmp_path / "b.ini"
    a.write_text(SMALL)
    b.write_text(SMALL)
    assert parse_config(a).hash() == parse_config(b).hash()
    assert parse_config(a).hash() != parse_config_text(SMALL.replace("seed = 4", "seed = 5")).hash()
    assert default_config().hash() == parse_config_text("").hash()


def read_rows(path, drop):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    keep = [i for i, c in enumerate(rows[0]) if c not in drop]
    return [[r[i] for i in keep] for r in rows]


def test_all_writes_golden_schemas_and_is_deterministic(small_cfg, tmp_path, capsys):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["all", "--config", str(small_cfg), "--out", str(out1)]) == 0
    assert main(["all", "--config", str(small_cfg), "--out", str(out2)]) == 0
    man = json.loads((out1 / "manifest.json").read_text())
    assert man["config_hash"] == parse_config(small_cfg).hash()
    for exp in ("sensing", "network", "control"):
        f1, f2 = out1 / f"{exp}.csv", out2 / f"{exp}.csv"
        header = f1.read_text().splitlines()[0]
        assert header == GOLDEN[exp] == ",".join(SCHEMAS[exp])
        r1 = read_rows(f1, WALL_CLOCK_COLUMNS[exp])
        assert r1 == read_rows(f2, WALL_CLOCK_COLUMNS[exp])
        assert all(cell != "" for row in r1 for cell in row)
        assert man["experiments"][exp]["records"] == len(r1) - 1
        assert man["experiments"][exp]["wall_clock_columns"] == sorted(WALL_CLOCK_COLUMNS[exp])
    assert man["experiments"]["sensing"]["records"] == 2 * 2 * 3
    # network has no wall-clock column: byte-identical
    assert (out1 / "network.csv").read_bytes() == (out2 / "network.csv").read_bytes()


def test_parallel_matches_sequential(small_cfg, tmp_path):
    cfg = parse_config(small_cfg)
    seq = cli.run_experiment("network", cfg, 1)
    par = cli.run_experiment("network", cfg, 2)
    assert [r.values for r in seq] == [r.values for r in par]


def test_seed_override_changes_results(small_cfg, tmp_path):
    assert main(["sense", "--config", str(small_cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["sense", "--config", str(small_cfg), "--out", str(tmp_path / "b"), "--seed", "99"]) == 0
    a = read_rows(tmp_path / "a" / "sensing.csv", {"runtime_ms"})
    b = read_rows(tmp_path / "b" / "sensing.csv", {"runtime_ms"})
    assert a[0] == b[0] and a != b
    man = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert man["config"]["sensing"]["seed"] == 99


def test_env_var_sets_output_dir(small_cfg, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envout"))
    assert main(["sense", "--config", str(small_cfg)]) == 0
    assert (tmp_path / "envout" / "sensing.csv").exists()


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[control]\nbogus = 1\n")
    assert main(["control", "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert "control.bogus" in capsys.readouterr().err
    assert main(["control", "--config", str(tmp_path / "missing.ini")]) == 1


def test_experiment_failure_exit_code(small_cfg, tmp_path, monkeypatch):
    def boom(sec):
        raise RuntimeError("synthetic failure")

    monkeypatch.setitem(cli.BUILDERS, "network", boom)
    status = main(["all", "--config", str(small_cfg), "--out", str(tmp_path)])
    assert status == 2
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["experiments"]["network"]["status"] == "error"
    assert man["experiments"]["sensing"]["status"] == "ok"


def test_invalid_subcommand_is_usage_error():
    proc = subprocess.run([sys.executable, "-m", "iscc_sim.runner.cli", "plot"], capture_output=True, text=True)
    assert proc.returncode != 0
    assert "usage" in proc.stderr
