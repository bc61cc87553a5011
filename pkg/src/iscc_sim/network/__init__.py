"""Swarm neighbor discovery and routing simulation."""

from iscc_sim.network.experiment import (
    UpdateTime, measure_routing_update_time, routing_update_times, run_discovery,
    run_network_experiment,
)
from iscc_sim.network.protocols import (
    AdaptiveHello, FixedBeacon, OnDemandDiscovery, PeriodicHello, ProtocolConfig,
    SensingTriggered, default_protocols,
)
from iscc_sim.network.scenario import (
    NetworkScenario, NodeKinematics, SensedPeer, SwarmState, adjacency, initial_state,
    sense_peers, step_random_waypoint, true_neighbor_sets,
)
from iscc_sim.network.sim import DiscoveryResult, InjectedEvent, SwarmNetworkSim, hop_matrix
from iscc_sim.network.tables import (
    NeighborEntry, NeighborTable, RoutingTable, bfs_first_hops, neighbor_accuracy,
    neighbor_recall, recompute_routes,
)
