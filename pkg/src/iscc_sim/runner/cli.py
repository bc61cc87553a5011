"""``iscc-sim`` command line entry point."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from iscc_sim import __version__
from iscc_sim.errors import ConfigError
from iscc_sim.records import SCHEMAS, WALL_CLOCK_COLUMNS, write_csv
from iscc_sim.runner.config import ExperimentConfig, parse_config, default_config
from iscc_sim.runner.protocols import parse_protocol

log = logging.getLogger("iscc_sim")

OUT_ENV = "ISCC_SIM_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 1, 2
SUBCOMMANDS = {"sense": ("sensing",), "network": ("network",), "control": ("control",),
               "all": ("sensing", "network", "control")}


# task builders: each returns (function, list of argument tuples); the functions are
# module level so they pickle into worker processes


def _sensing_task(snr, trial, seed, settings):
    from iscc_sim.sensing.experiment import run_sensing_trial
    return run_sensing_trial(snr, trial, seed, settings)


def _network_task(n, proto_spec, trial, seed, scenario):
    from iscc_sim.network.experiment import run_network_experiment
    proto = parse_protocol(proto_spec)
    return run_network_experiment([n], [proto], 1, seed, scenario, trial_offset=trial)


def _control_task(radius, trial, seed, scenario, dynamics):
    from iscc_sim.control.experiment import run_control_experiment
    return run_control_experiment([radius], 1, seed, scenario, dynamics, trial_offset=trial)


def sensing_tasks(sec):
    from iscc_sim.sensing.experiment import SensingSettings
    from iscc_sim.sensing.waveform import WaveformConfig
    gap_pos = sec["gap_position"] if sec["gap_position"] == "center" else int(sec["gap_position"])
    settings = SensingSettings(
        waveform=WaveformConfig(sec["carrier_hz"], sec["spacing_hz"], sec["num_subcarriers"]),
        gap_subcarriers=sec["gap_subcarriers"], gap_position=gap_pos, model_order=sec["model_order"])
    return _sensing_task, [(snr, k, sec["seed"], settings)
                           for snr in sec["snr_db_list"] for k in range(sec["trials"])]


def network_tasks(sec):
    from iscc_sim.network.scenario import NetworkScenario
    scenario = NetworkScenario(arena=tuple(sec["arena"]), speed_range=(sec["speed_min"], sec["speed_max"]),
                               comm_range=sec["comm_range_m"], sensing_range=sec["sensing_range_m"],
                               tick=sec["tick_s"], duration=sec["duration_s"])
    return _network_task, [(n, p, k, sec["seed"], scenario.with_nodes(n))
                           for n in sec["node_counts"] for p in sec["protocols"] for k in range(sec["trials"])]


def control_tasks(sec):
    from iscc_sim.control.dynamics import UavDynamics
    from iscc_sim.control.experiment import ControlScenario
    base = ControlScenario()
    b = sec["bounds"]
    scenario = replace(base, bounds=tuple(b),
                       start=(0.1 * b[0], 0.5 * b[1], 0.5 * b[2]), goal=(0.9 * b[0], 0.5 * b[1], 0.5 * b[2]),
                       endpoint_jitter=min(base.endpoint_jitter, 0.3 * b[1]),
                       obstacle_speed=sec["obstacle_speed"], sensing_std=sec["sensing_std_m"],
                       iterations=sec["iterations"], replan_iterations=sec["replan_iterations"],
                       step=sec["step_m"], timing_exclusive=sec["timing_exclusive"])
    cruise = min(UavDynamics().cruise_speed, sec["max_speed"])
    dynamics = UavDynamics(sec["max_speed"], sec["max_yaw_rate"], sec["max_accel"], sec["braking_response_s"],
                           cruise_speed=cruise)
    return _control_task, [(r, k, sec["seed"], scenario, dynamics)
                           for r in sec["obstacle_radius_list"] for k in range(sec["trials"])]


BUILDERS = {"sensing": sensing_tasks, "network": network_tasks, "control": control_tasks}


def run_experiment(name, cfg: ExperimentConfig, parallel=1):
    fn, tasks = BUILDERS[name](cfg[name])
    # wall-clock timing trials stay in one process unless explicitly released
    if name == "control" and cfg["control"]["timing_exclusive"]:
        parallel = 1
    if parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            chunks = list(pool.map(fn, *zip(*tasks)))
    else:
        chunks = [fn(*t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


CSV_NAMES = {"sensing": "sensing.csv", "network": "network.csv", "control": "control.csv"}


def run(subcommand, cfg: ExperimentConfig, out_dir, parallel=1):
    """Run the experiments of ``subcommand``; returns ``(exit status, manifest)``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    manifest = {
        "tool": "iscc-sim",
        "version": __version__,
        "subcommand": subcommand,
        "config_hash": cfg.hash(),
        "config": cfg.sections,
        "defaults_applied": cfg.defaults_applied,
        "started": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "experiments": {},
    }
    status = EXIT_OK
    for name in SUBCOMMANDS[subcommand]:
        t0 = time.perf_counter()
        entry = {"csv": CSV_NAMES[name], "columns": SCHEMAS[name],
                 "wall_clock_columns": sorted(WALL_CLOCK_COLUMNS[name])}
        try:
            records = run_experiment(name, cfg, parallel)
            path = out / CSV_NAMES[name]
            try:
                write_csv(path, name, records)
            except OSError as exc:
                raise OSError(f"cannot write {path}: {exc.strerror}") from exc
            entry.update(records=len(records), status="ok")
        except Exception as exc:  # reported in the manifest and the exit status
            log.exception("%s experiment failed", name)
            entry.update(records=0, status="error", error=f"{type(exc).__name__}: {exc}")
            status = EXIT_FAILURE
        entry["runtime_s"] = round(time.perf_counter() - t0, 3)
        manifest["experiments"][name] = entry
    manifest["finished"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return status, manifest


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="iscc-sim", description="Run sensing, networking and control experiments.")
    p.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    p.add_argument("--config", help="experiment config file (defaults apply when omitted)")
    p.add_argument("--out", help=f"output directory (else ${OUT_ENV}, else [run] out_dir)")
    p.add_argument("--parallel", type=int, default=1, metavar="N")
    p.add_argument("--seed", type=int, help="override every seed in the config")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.parallel < 1:
        print("iscc-sim: --parallel must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(args.config) if args.config else default_config()
    except ConfigError as exc:
        print(f"iscc-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = args.out or os.environ.get(OUT_ENV) or cfg["run"]["out_dir"]
    try:
        status, manifest = run(args.subcommand, cfg, out, args.parallel)
    except OSError as exc:
        print(f"iscc-sim: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for name, e in manifest["experiments"].items():
        msg = f"{name}: {e['records']} records in {e['runtime_s']} s"
        if e["status"] != "ok":
            msg += f" FAILED ({e['error']})"
        print(msg)
    return status


if __name__ == "__main__":
    sys.exit(main())
