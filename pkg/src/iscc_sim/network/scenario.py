"""Swarm scenario, random-waypoint mobility, ground-truth links and sensing."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from iscc_sim.errors import InvalidInputError


@dataclass(frozen=True)
class NetworkScenario:
    """Arena and radio/sensing parameters of one swarm run.

    The link model is a distance disk of radius ``comm_range``; transmit
    power and SINR threshold are carried only as documentation of where the
    156 m radius comes from.
    """

    arena: tuple = (600.0, 600.0, 300.0)
    node_count: int = 40
    speed_range: tuple = (5.0, 10.0)
    comm_range: float = 156.0
    sinr_threshold_db: float = -14.0
    tx_power_w: float = 1.0
    sensing_range: float = None
    scan_rate_hz: float = 20.0
    sensing_noise_std: float = 0.0
    hysteresis: float = 2.0
    tick: float = 0.01
    duration: float = 30.0
    warmup: float = 2.0
    beacon_airtime: float = 0.001

    def __post_init__(self):
        if self.sensing_range is None:
            object.__setattr__(self, "sensing_range", 1.2 * self.comm_range)
        if not self.comm_range > 0:
            raise InvalidInputError("comm_range must be positive")
        if not self.tick > 0:
            raise InvalidInputError("tick must be positive")
        if self.node_count < 2:
            raise InvalidInputError("node_count must be at least 2")
        lo, hi = self.speed_range
        if not 0 <= lo <= hi:
            raise InvalidInputError("speed_range must satisfy 0 <= min <= max")
        if self.beacon_airtime <= 0:
            raise InvalidInputError("beacon_airtime must be positive")

    @property
    def arena_array(self):
        return np.asarray(self.arena, dtype=float)

    def with_nodes(self, node_count):
        return replace(self, node_count=int(node_count))


@dataclass(frozen=True)
class NodeKinematics:
    id: int
    position: np.ndarray
    velocity: np.ndarray
    current_waypoint: np.ndarray


@dataclass
class SwarmState:
    """Kinematics of every node as stacked arrays (row = node id)."""

    position: np.ndarray
    velocity: np.ndarray
    waypoint: np.ndarray
    speed: np.ndarray
    time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def node_count(self):
        return self.position.shape[0]

    def node(self, i) -> NodeKinematics:
        return NodeKinematics(int(i), self.position[i].copy(), self.velocity[i].copy(),
                              self.waypoint[i].copy())

    def copy(self):
        return SwarmState(self.position.copy(), self.velocity.copy(), self.waypoint.copy(),
                          self.speed.copy(), self.time)


def _heading(position, waypoint, speed):
    d = waypoint - position
    norm = np.linalg.norm(d, axis=1, keepdims=True)
    unit = np.divide(d, norm, out=np.zeros_like(d), where=norm > 0)
    return unit * speed[:, None]


def initial_state(scenario: NetworkScenario, rng) -> SwarmState:
    n = scenario.node_count
    arena = scenario.arena_array
    pos = rng.uniform(0.0, 1.0, (n, 3)) * arena
    wp = rng.uniform(0.0, 1.0, (n, 3)) * arena
    speed = rng.uniform(*scenario.speed_range, n)
    return SwarmState(pos, _heading(pos, wp, speed), wp, speed)


def step_random_waypoint(state: SwarmState, scenario: NetworkScenario, dt, rng) -> SwarmState:
    """Advance every node by ``dt`` toward its waypoint.

    A node reaching its waypoint draws a fresh uniform waypoint and speed and
    spends the leftover part of the step moving toward the new waypoint.
    """
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    arena = scenario.arena_array
    pos = state.position.copy()
    wp = state.waypoint.copy()
    speed = state.speed.copy()
    remaining = np.full(pos.shape[0], float(dt))
    for _ in range(8):
        dist = np.linalg.norm(wp - pos, axis=1)
        reach = speed * remaining
        arrive = (dist <= reach) & (remaining > 0)
        moving = ~arrive & (remaining > 0)
        if moving.any():
            step = _heading(pos[moving], wp[moving], speed[moving]) * remaining[moving, None]
            pos[moving] += step
            remaining[moving] = 0.0
        if not arrive.any():
            break
        idx = np.flatnonzero(arrive)
        used = np.divide(dist[idx], speed[idx], out=np.zeros(idx.size), where=speed[idx] > 0)
        remaining[idx] = np.maximum(remaining[idx] - used, 0.0)
        pos[idx] = wp[idx]
        wp[idx] = rng.uniform(0.0, 1.0, (idx.size, 3)) * arena
        speed[idx] = rng.uniform(*scenario.speed_range, idx.size)
    np.clip(pos, 0.0, arena, out=pos)
    return SwarmState(pos, _heading(pos, wp, speed), wp, speed, state.time + dt)


def distance_matrix(position):
    diff = position[:, None, :] - position[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def adjacency(position, comm_range):
    """Boolean link matrix; links at exactly ``comm_range`` count."""
    adj = distance_matrix(position) <= comm_range
    np.fill_diagonal(adj, False)
    return adj


def true_neighbor_sets(state: SwarmState, scenario: NetworkScenario):
    adj = adjacency(state.position, scenario.comm_range)
    return {i: set(np.flatnonzero(adj[i]).tolist()) for i in range(adj.shape[0])}


@dataclass(frozen=True)
class SensedPeer:
    """Radar observation of a peer.

    ``track`` is an opaque per-observer label; it says nothing about the
    peer's network identity until a beacon binds the two.
    """

    track: int
    position: np.ndarray
    velocity: np.ndarray


def track_label(observer, peer, salt=0x5EED):
    return hash((int(observer), int(peer), salt)) & 0x7FFFFFFF


def sense_peers(observer, state: SwarmState, scenario: NetworkScenario, noise_std=None, rng=None):
    """Observations of every peer inside ``sensing_range`` of ``observer``."""
    noise_std = scenario.sensing_noise_std if noise_std is None else noise_std
    if noise_std < 0:
        raise InvalidInputError("noise_std must be non-negative")
    d = np.linalg.norm(state.position - state.position[observer], axis=1)
    peers = np.flatnonzero((d <= scenario.sensing_range) & (np.arange(d.size) != observer))
    rng = np.random.default_rng(rng)
    out = []
    for p in peers:
        pos = state.position[p] + (rng.normal(0.0, noise_std, 3) if noise_std > 0 else 0.0)
        out.append(SensedPeer(track_label(observer, p), np.asarray(pos, dtype=float),
                              state.velocity[p].copy()))
    return out
