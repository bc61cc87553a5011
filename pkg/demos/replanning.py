"""One braking-and-replanning episode: tree reuse against a fresh RRT*."""

import sys

from iscc_sim.control import run_replanning_trial

radius = float(sys.argv[1]) if len(sys.argv) > 1 else 40.0
tr = run_replanning_trial(radius, trial=0, seed=1)
print(f"obstacle radius {radius} m, breach predicted: {tr.breach}, evasive yaw rate {tr.yaw_rate:+.2f} rad/s")
for name, row in tr.rows.items():
    print(f"{name:9s} delay {row['replanning_delay_ms']:7.1f} ms  expansions {row['expansions']:5d}"
          f"  path {row['path_length_m']:6.1f} m  energy {row['energy_j'] / 1e3:6.2f} kJ  collided {row['collided']}")
