"""Compare neighbor accuracy and beacon counts of the six protocols on one mobile swarm."""

import sys

from iscc_sim.network import NetworkScenario, run_discovery
from iscc_sim.network.protocols import default_protocols

n = int(sys.argv[1]) if len(sys.argv) > 1 else 40
sc = NetworkScenario(node_count=n, duration=15.0)
print(f"{n} UAVs, {sc.duration:.0f} s, comm range {sc.comm_range} m")
for proto in default_protocols():
    res = run_discovery(proto, sc, seed=3)
    print(f"{proto.label:22s} accuracy {res.mean_accuracy:.5f}  beacons {res.beacons_sent:6d}"
          f"  frames {sum(res.frames_sent.values()):6d}")
