"""Experiment output rows and their CSV schemas."""

import csv
from dataclasses import dataclass, field

SCHEMAS = {
    "sensing": ["method", "snr_db", "trial", "armse_m", "runtime_ms", "converged"],
    "network": ["protocol", "node_count", "trial", "mean_accuracy", "beacons_sent",
                "mean_update_time_s", "p95_update_time_s"],
    "control": ["planner", "obstacle_radius_m", "trial", "replanning_delay_ms", "expansions",
                "path_length_m", "energy_j", "collided"],
}

# wall-clock columns; excluded from byte-identical rerun guarantees
WALL_CLOCK_COLUMNS = {
    "sensing": {"runtime_ms"},
    "network": set(),
    "control": {"replanning_delay_ms"},
}


@dataclass(frozen=True)
class MetricsRecord:
    """One CSV row: parameter and metric columns of a single trial."""

    experiment: str
    values: dict
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        missing = [c for c in SCHEMAS[self.experiment] if c not in self.values]
        if missing:
            raise ValueError(f"{self.experiment} record missing columns {missing}")

    def __getitem__(self, key):
        return self.values[key]

    def row(self):
        return [_fmt(self.values[c]) for c in SCHEMAS[self.experiment]]


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(round(value, 12))
    return str(value)


def write_csv(path, experiment, records, wall_clock=True):
    """Write records with a header row.

    ``wall_clock=False`` blanks the wall-clock columns, which makes the file
    reproducible byte for byte.
    """
    columns = SCHEMAS[experiment]
    drop = set() if wall_clock else WALL_CLOCK_COLUMNS[experiment]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            row = rec.row()
            writer.writerow(["" if c in drop else v for c, v in zip(columns, row)])
