from collections import deque
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iscc_sim.errors import InvalidInputError
from iscc_sim.network import (
    AdaptiveHello, FixedBeacon, NetworkScenario, OnDemandDiscovery, PeriodicHello,
    SensingTriggered, SwarmNetworkSim, SwarmState, adjacency, bfs_first_hops, initial_state,
    neighbor_accuracy, neighbor_recall, recompute_routes, run_discovery, sense_peers,
    step_random_waypoint, true_neighbor_sets,
)
from iscc_sim.network.sim import hop_matrix


def bfs_oracle(adj, src):
    """Plain queue BFS returning hop counts (-1 unreachable)."""
    n = len(adj)
    dist = [-1] * n
    dist[src] = 0
    q = deque([src])
    while q:
        u = q.popleft()
        for v in range(n):
            if adj[u][v] and dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def random_graph(rng, n, p):
    a = rng.random((n, n)) < p
    a = np.triu(a, 1)
    return a | a.T


def two_nodes(d):
    pos = np.array([[100.0, 100.0, 100.0], [100.0 + d, 100.0, 100.0]])
    z = np.zeros_like(pos)
    return SwarmState(pos, z, pos.copy(), np.zeros(2))


# ---------------------------------------------------------------- mobility
def test_speed_draws_within_range():
    sc = NetworkScenario(node_count=10_000)
    s = initial_state(sc, np.random.default_rng(0))
    assert s.speed.min() >= 5.0 and s.speed.max() <= 10.0


def test_waypoint_motion_stays_in_arena():
    sc = NetworkScenario(node_count=50)
    rng = np.random.default_rng(1)
    s = initial_state(sc, rng)
    for _ in range(2000):
        s = step_random_waypoint(s, sc, 0.1, rng)
        assert np.all(s.position >= 0) and np.all(s.position <= sc.arena_array)
        v = np.linalg.norm(s.velocity, axis=1)
        assert np.all(v <= 10.0 + 1e-9)


def test_arrival_draws_new_waypoint():
    sc = NetworkScenario(node_count=2)
    s = two_nodes(50.0)
    s.waypoint = s.position.copy()
    s.speed = np.array([7.0, 7.0])
    rng = np.random.default_rng(2)
    out = step_random_waypoint(s, sc, 0.01, rng)
    assert not np.allclose(out.waypoint, s.waypoint)
    # leftover time is spent moving toward the new waypoint
    moved = np.linalg.norm(out.position - s.position, axis=1)
    assert np.all(moved <= out.speed * 0.01 + 1e-9)
    assert np.all(moved > 0)


def test_zero_dt_rejected():
    sc = NetworkScenario(node_count=2)
    with pytest.raises(InvalidInputError):
        step_random_waypoint(two_nodes(10.0), sc, 0.0, np.random.default_rng(0))


def test_move_between_waypoints_is_exact():
    sc = NetworkScenario(node_count=2)
    s = two_nodes(10.0)
    s.waypoint = s.position + np.array([100.0, 0.0, 0.0])
    s.speed = np.array([5.0, 8.0])
    out = step_random_waypoint(s, sc, 1.0, np.random.default_rng(0))
    np.testing.assert_allclose(out.position[:, 0] - s.position[:, 0], [5.0, 8.0])


# ------------------------------------------------------------ ground truth
def test_boundary_inclusive():
    sc = NetworkScenario(node_count=2)
    assert true_neighbor_sets(two_nodes(156.0), sc) == {0: {1}, 1: {0}}
    assert true_neighbor_sets(two_nodes(156.1), sc) == {0: set(), 1: set()}


def test_neighbor_sets_match_pairwise_loop():
    sc = NetworkScenario(node_count=60)
    s = initial_state(sc, np.random.default_rng(3))
    got = true_neighbor_sets(s, sc)
    for i in range(60):
        want = {j for j in range(60)
                if j != i and np.sqrt(np.sum((s.position[i] - s.position[j]) ** 2)) <= 156.0}
        assert got[i] == want
    for i, peers in got.items():
        for j in peers:
            assert i in got[j]


def test_sense_peers_noiseless_and_empty():
    sc = NetworkScenario(node_count=3)
    pos = np.array([[0.0, 0, 0], [100.0, 0, 0], [500.0, 0, 0]])
    s = SwarmState(pos, np.zeros_like(pos), pos.copy(), np.zeros(3))
    obs = sense_peers(0, s, sc, noise_std=0.0)
    assert len(obs) == 1
    np.testing.assert_array_equal(obs[0].position, pos[1])
    assert sense_peers(2, s, sc, noise_std=0.0) == []
    with pytest.raises(InvalidInputError):
        sense_peers(0, s, sc, noise_std=-1.0)


def test_sense_peers_noise_std():
    sc = NetworkScenario(node_count=2)
    s = two_nodes(50.0)
    rng = np.random.default_rng(4)
    samples = np.array([sense_peers(0, s, sc, 1.0, rng)[0].position for _ in range(10_000)])
    err = samples - s.position[1]
    assert abs(err.std() - 1.0) < 0.05


def test_tracks_carry_no_identity():
    sc = NetworkScenario(node_count=2)
    obs = sense_peers(0, two_nodes(50.0), sc, 0.0)
    assert obs[0].track != 1
    assert not hasattr(obs[0], "id")


# ---------------------------------------------------------------- accuracy
def test_neighbor_accuracy_examples():
    assert neighbor_accuracy({1, 2, 3}, {1, 2, 3}) == 1.0
    assert neighbor_accuracy({1, 2}, {2, 3}) == pytest.approx(1 / 3)
    assert neighbor_accuracy(set(), set()) == 1.0
    assert neighbor_recall({1}, {1, 2}) == 0.5


@given(st.sets(st.integers(0, 20)), st.sets(st.integers(0, 20)))
def test_accuracy_bounds(a, b):
    v = neighbor_accuracy(a, b)
    assert 0.0 <= v <= 1.0
    assert (v == 1.0) == (a == b)


# ----------------------------------------------------------------- routing
def test_line_and_mesh_routes():
    tables = recompute_routes({0: {1}, 1: {0, 2}, 2: {1}})
    assert tables[0].routes[2] == (1, 2)
    assert 0 not in tables[0].routes
    mesh = recompute_routes({i: {j for j in range(5) if j != i} for i in range(5)})
    assert all(h == 1 for t in mesh.values() for _, h in t.routes.values())


def test_unreachable_has_no_route():
    tables = recompute_routes({0: {1}, 1: {0}, 2: set()})
    assert 2 not in tables[0].routes


def test_tie_breaks_to_smallest_next_hop():
    # 0 reaches 3 through 1 or 2
    tables = recompute_routes({0: {2, 1}, 1: {0, 3}, 2: {0, 3}, 3: {1, 2}})
    assert tables[0].routes[3] == (1, 2)


def test_bfs_matches_queue_oracle_on_100_graphs():
    rng = np.random.default_rng(5)
    for k in range(100):
        n = int(rng.integers(5, 40))
        adj = random_graph(rng, n, rng.uniform(0.05, 0.4))
        for src in range(n):
            hops, first = bfs_first_hops(adj, src)
            assert hops.tolist() == bfs_oracle(adj.tolist(), src)
            oracle = np.array([bfs_oracle(adj.tolist(), v) for v in range(n)])
            for d in np.flatnonzero(hops > 0):
                nh = first[d]
                assert adj[src, nh]
                assert oracle[nh, d] == hops[d] - 1
                # smallest valid first hop
                valid = [v for v in np.flatnonzero(adj[src]) if oracle[v, d] == hops[d] - 1]
                assert nh == min(valid)


def test_hop_matrix_matches_oracle():
    rng = np.random.default_rng(6)
    adj = random_graph(rng, 25, 0.12)
    h = hop_matrix(adj)
    for s in range(25):
        assert h[s].tolist() == bfs_oracle(adj.tolist(), s)


def test_flooding_state_routes_use_two_way_links():
    n = 3
    lsdb = np.zeros((n, n, n), dtype=bool)
    # node 0's view: 1 claims 2 but 2 never confirmed
    lsdb[0, 1, 2] = True
    lsdb[0, 1, 0] = True
    tables = recompute_routes({0: {1}, 1: {0, 2}, 2: {1}}, flooding_state=lsdb)
    assert 2 not in tables[0].routes
    lsdb[0, 2, 1] = True
    tables = recompute_routes({0: {1}, 1: {0, 2}, 2: {1}}, flooding_state=lsdb)
    assert tables[0].routes[2] == (1, 2)


# ------------------------------------------------------------- simulation
SMALL = NetworkScenario(node_count=20, duration=6.0, warmup=1.0)
ALL = [SensingTriggered(), FixedBeacon(0.25), PeriodicHello(2.0), OnDemandDiscovery(3.0),
       AdaptiveHello(0.5, 2.0, 0.1), PeriodicHello(1.0, topology_flooding=False, label="ph-nf")]


def test_static_sensing_triggered_only_bootstraps():
    sim = SwarmNetworkSim(SensingTriggered(), SMALL, seed=1, static=True)
    sim.run_until(0.5)
    boot = sim.frames_sent["beacon"]
    assert boot > 0
    sim.start_sampling()
    sim.run_until(5.0)
    assert sim.frames_sent["beacon"] == boot
    assert sim.discovery_result().mean_accuracy == 1.0


@pytest.mark.parametrize("proto", ALL, ids=lambda p: p.label)
def test_conservation_and_bounds(proto):
    res = run_discovery(proto, SMALL, seed=2)
    n = SMALL.node_count
    for kind, sent in res.frames_sent.items():
        assert res.frames_received[kind] <= sent * (n - 1)
    assert np.all((res.accuracy >= 0) & (res.accuracy <= 1))
    for t in res.tables:
        assert t.owner not in t.entries
        assert all(e.last_update <= SMALL.duration + 1e-9 for e in t.entries.values())


def test_fixed_beacon_count_lower_bound():
    res = run_discovery(FixedBeacon(0.25), SMALL, seed=3)
    assert res.beacons_sent >= SMALL.node_count * SMALL.duration / 0.25


def test_sensing_triggered_tracks_truth_closely():
    sc = replace(SMALL, node_count=40)
    st_res = run_discovery(SensingTriggered(), sc, seed=4)
    fb = run_discovery(FixedBeacon(0.25), sc, seed=4)
    assert st_res.mean_accuracy > 0.999
    assert st_res.beacons_sent < 0.1 * fb.beacons_sent


def test_noisy_sensing_still_binds():
    sc = replace(SMALL, sensing_noise_std=0.5)
    res = run_discovery(SensingTriggered(), sc, seed=5)
    assert res.mean_accuracy > 0.95


def test_determinism():
    a = run_discovery(AdaptiveHello(), SMALL, seed=6)
    b = run_discovery(AdaptiveHello(), SMALL, seed=6)
    np.testing.assert_array_equal(a.accuracy, b.accuracy)
    assert a.frames_sent == b.frames_sent


def test_adaptive_interval_scales_with_speed():
    p = AdaptiveHello(0.5, 2.0, 0.1)
    assert p.interval_for(0.0) == 2.0
    assert p.interval_for(10.0) == 0.5
    assert p.interval_for(5.0) == pytest.approx(1.25)
    with pytest.raises(InvalidInputError):
        AdaptiveHello(2.0, 1.0)
    with pytest.raises(InvalidInputError):
        FixedBeacon(0.0)


@pytest.mark.parametrize("proto", ALL, ids=lambda p: p.label)
def test_quiescent_routes_equal_bfs_oracle(proto):
    sc = replace(SMALL, node_count=25)
    sim = SwarmNetworkSim(proto, sc, seed=7, routing=True, static=True)
    assert sim.settle(40.0)
    sim.run_until(sim.now + 7.0)
    oracle = np.array([bfs_oracle(sim.adj.tolist(), s) for s in range(sc.node_count)])
    for i in range(sc.node_count):
        table = sim.routing_table(i)
        reach = {int(d) for d in np.flatnonzero(oracle[i] > 0)}
        assert set(table.routes) == reach
        for d, (nh, hops) in table.routes.items():
            assert hops == oracle[i, d]
            assert sim.adj[i, nh] and oracle[nh, d] == hops - 1


def test_event_without_route_change_is_instant():
    sim = SwarmNetworkSim(FixedBeacon(0.25), SMALL, seed=8, routing=True, static=True)
    assert sim.settle(10.0)
    assert sim.await_routes([], 5.0) == 0.0
