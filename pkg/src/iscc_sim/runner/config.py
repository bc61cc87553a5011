"""Sectioned key = value experiment configuration.

Sections ``[run]``, ``[sensing]``, ``[network]`` and ``[control]`` accept
exactly the keys listed in :data:`SCHEMA`; omitted keys take the listed
defaults, and a section ``seed`` falls back to ``[run] seed``.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import dataclass, field

from iscc_sim.errors import ConfigError


def _floats(text):
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    return [float(p) for p in parts]


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ValueError("expected integers")
    return [int(v) for v in vals]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _int(text):
    f = float(text)
    if f != int(f):
        raise ValueError("expected an integer")
    return int(f)


def _triple(text):
    vals = _floats(text)
    if len(vals) != 3:
        raise ValueError("expected three numbers")
    return vals


def _names(text):
    return [p.strip() for p in text.split(",") if p.strip()]


# key -> (parser, default)
SCHEMA = {
    "run": {
        "seed": (_int, 0),
        "out_dir": (str, "results"),
    },
    "sensing": {
        "carrier_hz": (float, 24e9),
        "spacing_hz": (float, 120e3),
        "num_subcarriers": (_int, 512),
        "gap_subcarriers": (_int, 256),
        "gap_position": (str, "center"),
        "snr_db_list": (_floats, [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]),
        "trials": (_int, 200),
        "model_order": (_int, 3),
        "seed": (_int, None),
    },
    "network": {
        "arena": (_triple, [600.0, 600.0, 300.0]),
        "node_counts": (_ints, [20, 40, 60, 80]),
        "speed_min": (float, 5.0),
        "speed_max": (float, 10.0),
        "comm_range_m": (float, 156.0),
        "sensing_range_m": (float, None),
        "tick_s": (float, 0.01),
        "duration_s": (float, 30.0),
        "protocols": (_names, ["sensing-triggered", "fixed-beacon:0.25", "olsr:2.0", "aodv:3.0",
                               "ee-hello:0.5:2.0", "adaptive-hello-fast:0.25:1.0"]),
        "trials": (_int, 10),
        "seed": (_int, None),
    },
    "control": {
        "bounds": (_triple, [300.0, 300.0, 100.0]),
        "obstacle_radius_list": (_floats, [20.0, 30.0, 40.0, 50.0, 60.0]),
        "obstacle_speed": (float, 2.0),
        "max_speed": (float, 26.0),
        "max_yaw_rate": (float, 1.0),
        "max_accel": (float, 8.0),
        "braking_response_s": (float, 0.5),
        "sensing_std_m": (float, 1.0),
        "iterations": (_int, 1000),
        "replan_iterations": (_int, 1000),
        "step_m": (float, 5.0),
        "trials": (_int, 50),
        "seed": (_int, None),
        "timing_exclusive": (_bool, True),
    },
}

EXPERIMENTS = ("sensing", "network", "control")


@dataclass
class ExperimentConfig:
    sections: dict
    defaults_applied: dict = field(default_factory=dict)
    source: str = None

    def __getitem__(self, name):
        return self.sections[name]

    @property
    def seed(self):
        return self.sections["run"]["seed"]

    def with_seed(self, seed):
        secs = {k: dict(v) for k, v in self.sections.items()}
        for k in secs:
            secs[k]["seed"] = int(seed)
        return ExperimentConfig(secs, {k: [x for x in v if x != "seed"] for k, v in self.defaults_applied.items()},
                                self.source)

    def canonical(self):
        return json.dumps(self.sections, sort_keys=True, separators=(",", ":"))

    def hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _line_index(text):
    """(section, key) -> 1-based line number, plus section header lines."""
    where = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            where.setdefault((section, None), no)
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), no)
    return where


def parse_config_text(text, source=None) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed config: {exc.message if hasattr(exc, 'message') else exc}",
                          line=line) from None
    lines = _line_index(text)
    sections = {}
    applied = {}
    for sec in parser.sections():
        if sec.lower() not in SCHEMA:
            raise ConfigError("unknown section", key=f"[{sec}]", line=lines.get((sec.lower(), None)))
    for sec, schema in SCHEMA.items():
        given = parser[sec] if parser.has_section(sec) else {}
        for key in given:
            if key not in schema:
                raise ConfigError("unknown key", key=f"{sec}.{key}", line=lines.get((sec, key)))
        vals = {}
        applied[sec] = []
        for key, (conv, default) in schema.items():
            if key in given:
                try:
                    vals[key] = conv(given[key])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"bad value {given[key]!r} ({exc})", key=f"{sec}.{key}",
                                      line=lines.get((sec, key))) from None
            else:
                vals[key] = default
                applied[sec].append(key)
        sections[sec] = vals
    for sec in EXPERIMENTS:
        if sections[sec]["seed"] is None:
            sections[sec]["seed"] = sections["run"]["seed"]
    cfg = ExperimentConfig(sections, applied, source)
    validate(cfg, lines)
    return cfg


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def default_config() -> ExperimentConfig:
    return parse_config_text("")


def _fail(msg, sec, key, lines):
    raise ConfigError(msg, key=f"{sec}.{key}", line=lines.get((sec, key)))


def validate(cfg: ExperimentConfig, lines=None):
    lines = lines or {}
    s, n, c = cfg["sensing"], cfg["network"], cfg["control"]
    for sec, key in (("sensing", "trials"), ("network", "trials"), ("control", "trials"),
                     ("sensing", "num_subcarriers"), ("sensing", "model_order"),
                     ("control", "iterations"), ("control", "replan_iterations")):
        if cfg[sec][key] < 1:
            _fail("must be at least 1", sec, key, lines)
    if not 0 <= s["gap_subcarriers"] < s["num_subcarriers"]:
        _fail("must lie in [0, num_subcarriers)", "sensing", "gap_subcarriers", lines)
    if s["gap_position"] != "center":
        try:
            int(s["gap_position"])
        except ValueError:
            _fail("must be 'center' or a start index", "sensing", "gap_position", lines)
    if not s["snr_db_list"]:
        _fail("must not be empty", "sensing", "snr_db_list", lines)
    for key in ("carrier_hz", "spacing_hz"):
        if not s[key] > 0:
            _fail("must be positive", "sensing", key, lines)
    if not 0 < n["speed_min"] <= n["speed_max"]:
        _fail("need 0 < speed_min <= speed_max", "network", "speed_max", lines)
    for key in ("comm_range_m", "tick_s", "duration_s"):
        if not n[key] > 0:
            _fail("must be positive", "network", key, lines)
    if any(v < 2 for v in n["node_counts"]) or not n["node_counts"]:
        _fail("need at least two nodes per run", "network", "node_counts", lines)
    if any(v <= 0 for v in n["arena"]):
        _fail("must be positive", "network", "arena", lines)
    from iscc_sim.runner.protocols import parse_protocol
    for spec in n["protocols"]:
        try:
            parse_protocol(spec)
        except ValueError as exc:
            _fail(str(exc), "network", "protocols", lines)
    for key in ("obstacle_speed", "sensing_std_m"):
        if c[key] < 0:
            _fail("must be non-negative", "control", key, lines)
    for key in ("max_speed", "max_yaw_rate", "max_accel", "braking_response_s", "step_m"):
        if not c[key] > 0:
            _fail("must be positive", "control", key, lines)
    if any(v <= 0 for v in c["bounds"]):
        _fail("must be positive", "control", "bounds", lines)
    if not c["obstacle_radius_list"] or any(r <= 0 for r in c["obstacle_radius_list"]):
        _fail("radii must be positive", "control", "obstacle_radius_list", lines)
