"""Event-driven swarm network simulator.

Mobility, expiry and neighbor-set evaluation run on a fixed tick; frames
(beacons, link-state updates, route requests) are discrete events that occupy
the channel for ``beacon_airtime``. Each node has a FIFO transmit queue and
sends when it senses its channel idle; a transmission keeps every node in
range busy, so frames from nearby nodes serialize but never collide. Queued
link-state messages leave as one bundled frame, newest copy per originator.

Per-node protocol state lives in ``(n, n)`` arrays whose row ``i`` is node
``i``'s private view; handlers only write a row from frames the node received
or from its own sensing.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components, shortest_path

from iscc_sim.network.protocols import (
    AdaptiveHello, FixedBeacon, OnDemandDiscovery, PeriodicHello, SensingTriggered,
)
from iscc_sim.network.scenario import (
    NetworkScenario, SwarmState, adjacency, distance_matrix, initial_state, step_random_waypoint,
)
from iscc_sim.network.tables import (
    NeighborEntry, NeighborTable, RoutingTable, believed_graph, bfs_first_hops, jaccard_rows,
)
from iscc_sim.seeding import derive_seed

BEACON, LSA, RREQ = "beacon", "lsa", "rreq"
_EPS = 1e-9


@dataclass(eq=False)
class Frame:
    kind: str
    sender: int
    position: np.ndarray
    velocity: np.ndarray
    sent_at: float
    interval: float = 0.0
    originator: int = -1
    seq: int = -1
    hops: int = 0
    lsas: list = None  # [(originator, seq, neighbor mask)]
    lsdb: tuple = None
    flood: bool = True


@dataclass
class InjectedEvent:
    kind: str
    mover: int
    anchor: int
    time: float
    affected: np.ndarray


@dataclass
class DiscoveryResult:
    protocol: str
    node_count: int
    times: np.ndarray
    accuracy: np.ndarray
    recall: np.ndarray
    beacons: np.ndarray
    beacons_sent: int
    frames_sent: dict
    frames_received: dict
    tables: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    @property
    def mean_accuracy(self):
        return float(self.accuracy.mean()) if self.accuracy.size else 1.0

    @property
    def mean_recall(self):
        return float(self.recall.mean()) if self.recall.size else 1.0


def hop_matrix(adj):
    """All-pairs hop counts, -1 where unreachable."""
    d = shortest_path(adj.astype(float), unweighted=True, directed=False)
    return np.where(np.isinf(d), -1, d).astype(int)


class SwarmNetworkSim:
    """One protocol running on one swarm.

    ``routing=True`` turns on network-wide link-state flooding so routing
    tables can be evaluated; otherwise only neighbor discovery traffic is
    simulated. ``static=True`` freezes every node in a hover.
    """

    def __init__(self, protocol, scenario: NetworkScenario, seed=0, routing=False, static=False,
                 state: SwarmState = None):
        self.protocol = protocol
        self.sc = scenario
        self.routing = routing
        self.static = static
        n = scenario.node_count
        self.n = n
        self._mob_rng = np.random.default_rng(derive_seed(seed, "mobility"))
        self._noise_rng = np.random.default_rng(derive_seed(seed, "sensing-noise"))
        self._proto_rng = np.random.default_rng(derive_seed(seed, "protocol", (protocol.label,)))
        self.state = state.copy() if state is not None else initial_state(scenario, self._mob_rng)
        if static:
            # hovering: a speed-adaptive hello sees zero speed too
            self.state.velocity[:] = 0.0
            self.state.speed[:] = 0.0

        self.now = 0.0
        self._heap = []
        self._seq = itertools.count()
        self.busy = np.zeros(n)
        self._queue = [deque() for _ in range(n)]
        self._flush_pending = np.zeros(n, dtype=bool)
        self._tick_time = 0.0

        self.known = np.zeros((n, n), dtype=bool)
        self.kpos = np.zeros((n, n, 3))
        self.kvel = np.zeros((n, n, 3))
        self.kt = np.zeros((n, n))
        self.kexp = np.full((n, n), np.inf)
        self.reported = np.zeros((n, n), dtype=bool)

        self.is_sensing = isinstance(protocol, SensingTriggered)
        self.is_on_demand = isinstance(protocol, OnDemandDiscovery)
        self.piggyback = isinstance(protocol, PeriodicHello) and not protocol.topology_flooding
        # who announces neighbor-set changes with link-state frames
        self.announce = (routing and not self.is_on_demand and not self.piggyback) or self.is_sensing

        # sensing-triggered track state
        self.spos = np.zeros((n, n, 3))
        self.svel = np.zeros((n, n, 3))
        self.scan_time = 0.0
        self.pending = np.zeros((n, n), dtype=bool)
        self.pending_since = np.full((n, n), np.nan)
        self._beacon_at = np.full((n, n), -np.inf)
        self._sent_at = {}
        self._wins = np.zeros((n, n), dtype=bool)
        self._scan_needed = True

        # link-state database: row o of ls_nbrs[i] is o's neighbor list as node i knows it
        self.ls_seq = np.full((n, n), -1)
        self.ls_nbrs = np.zeros((n, n, n), dtype=bool)
        self.own_seq = np.zeros(n, dtype=int)

        # on-demand routes, stored by destination: rt_*[d, k] is node k's entry for d
        self.rt_next = np.full((n, n), -1)
        self.rt_hops = np.full((n, n), -1)
        self.rt_seq = np.full((n, n), -1)
        self.rt_time = np.full((n, n), -np.inf)
        self.flood_seq = np.zeros(n, dtype=int)

        self.frames_sent = {BEACON: 0, LSA: 0, RREQ: 0}
        self.frames_received = {BEACON: 0, LSA: 0, RREQ: 0}
        self.beacons_per_node = np.zeros(n, dtype=int)

        self.route_dirty = np.ones(n, dtype=bool)
        self._knowledge_dirty = True
        self._positions_changed()

        self.sampling = False
        self._samples_t, self._samples_acc, self._samples_rec, self._samples_b = [], [], [], []
        self.snapshot_every = 0
        self.snapshots = []

        self._tick_index = 0
        self._push(0.0, self._tick, None)
        self._schedule_protocol()

    # ------------------------------------------------------------------ events
    def _push(self, t, fn, arg):
        heapq.heappush(self._heap, (t, next(self._seq), fn, arg))

    def run_until(self, t_end, stop=None, inclusive=True):
        """Process events up to ``t_end``; returns True if ``stop()`` fired."""
        heap = self._heap
        while heap and (heap[0][0] <= t_end + _EPS if inclusive else heap[0][0] < t_end - _EPS):
            t, _, fn, arg = heapq.heappop(heap)
            self.now = t
            fn(arg)
            if stop is not None and stop():
                return True
        self.now = max(self.now, t_end)
        return False

    def _schedule_protocol(self):
        p = self.protocol
        if self.is_sensing:
            self._push(0.0, self._scan, 0)
        elif isinstance(p, (FixedBeacon, PeriodicHello)):
            self._push(0.0, self._hello_round, 0)
        elif isinstance(p, AdaptiveHello):
            for i in range(self.n):
                self._push(0.0, self._adaptive_hello, i)
        elif self.is_on_demand:
            phases = self._proto_rng.uniform(0.0, p.route_timeout, self.n)
            for i in range(self.n):
                self._push(float(phases[i]), self._originate_rreq, i)

    # --------------------------------------------------------------- geometry
    def _positions_changed(self):
        self.adj = adjacency(self.state.position, self.sc.comm_range)
        self._nbr_idx = [np.flatnonzero(row) for row in self.adj]
        self._truth = None
        self._scan_needed = True
        self._knowledge_dirty = True

    @property
    def truth_hops(self):
        if self._truth is None:
            self._truth = hop_matrix(self.adj)
        return self._truth

    # ---------------------------------------------------------------- channel
    def _send(self, frame: Frame):
        s = frame.sender
        self._queue[s].append(frame)
        if not self._flush_pending[s]:
            self._flush_pending[s] = True
            self._push(max(self.now, self.busy[s]), self._flush, s)

    def _flush(self, s):
        if self.busy[s] > self.now + _EPS:
            self._push(self.busy[s], self._flush, s)
            return
        q = self._queue[s]
        frame = q.popleft()
        if frame.kind == LSA:
            frame = self._bundle(frame, q)
        frame.position = self.positions_now()[s].copy()
        frame.velocity = self.state.velocity[s].copy()
        frame.sent_at = self.now
        end = self.now + self.sc.beacon_airtime
        nb = self._nbr_idx[s]
        self.busy[nb] = np.maximum(self.busy[nb], end)
        self.busy[s] = end
        self.frames_sent[frame.kind] += 1
        if frame.kind == BEACON:
            self.beacons_per_node[s] += 1
        self._push(end, self._deliver, frame)
        if q:
            self._push(end, self._flush, s)
        else:
            self._flush_pending[s] = False

    @staticmethod
    def _bundle(frame, q):
        newest = {}
        for o, seq, nbrs in frame.lsas:
            newest[o] = (o, seq, nbrs)
        rest = []
        for f in q:
            if f.kind == LSA and f.flood == frame.flood:
                for o, seq, nbrs in f.lsas:
                    if o not in newest or newest[o][1] < seq:
                        newest[o] = (o, seq, nbrs)
            else:
                rest.append(f)
        q.clear()
        q.extend(rest)
        frame.lsas = list(newest.values())
        return frame

    def _frame(self, kind, sender, **kw):
        # kinematics are stamped when the frame actually goes on air
        return Frame(kind, sender, None, None, self.now, **kw)

    def _deliver(self, f: Frame):
        if self.static or self.now == self._tick_time:
            r = self._nbr_idx[f.sender]
        else:
            pos = self.positions_now()
            d = np.linalg.norm(pos - pos[f.sender], axis=1)
            d[f.sender] = np.inf
            r = np.flatnonzero(d <= self.sc.comm_range)
        self.frames_received[f.kind] += r.size
        if r.size == 0:
            return
        if self.is_sensing:
            self._bind_from_frame(r, f)
        if f.kind == BEACON and not self.is_sensing:
            self._on_hello(r, f)
        elif f.kind == LSA:
            self._on_lsa(r, f)
        elif f.kind == RREQ:
            self._on_rreq(r, f)

    # ------------------------------------------------------------ hello family
    def _hello_round(self, k):
        p = self.protocol
        for i in range(self.n):
            self._send_hello(i, p.interval)
        self._push((k + 1) * p.interval, self._hello_round, k + 1)

    def _adaptive_hello(self, i):
        interval = self.protocol.interval_for(self.state.speed[i])
        self._send_hello(i, interval)
        self._push(self.now + interval, self._adaptive_hello, i)

    def _send_hello(self, i, interval):
        lsdb = (self.ls_seq[i].copy(), self.ls_nbrs[i].copy()) if self.piggyback else None
        self._send(self._frame(BEACON, i, interval=interval, lsdb=lsdb))

    def _entry_lifetime(self, f):
        p = self.protocol
        if isinstance(p, AdaptiveHello):
            return p.expiry_factor * f.interval
        return p.expiry

    def _learn(self, r, f, lifetime):
        s = f.sender
        self.known[r, s] = True
        self.kpos[r, s] = f.position
        self.kvel[r, s] = f.velocity
        self.kt[r, s] = f.sent_at
        self.kexp[r, s] = lifetime
        if self.is_on_demand:
            self._knowledge_dirty = True
        else:
            self._refresh_reported(r)

    def _on_hello(self, r, f):
        self._learn(r, f, self._entry_lifetime(f))
        if f.lsdb is not None:
            seq, nbrs = f.lsdb
            newer = self.ls_seq[r] < seq[None, :]
            if newer.any():
                rows, cols = np.nonzero(newer)
                self.ls_seq[r[rows], cols] = seq[cols]
                self.ls_nbrs[r[rows], cols] = nbrs[cols]
                self.route_dirty[r[np.unique(rows)]] = True

    # -------------------------------------------------------------- link state
    def _originate_lsa(self, i):
        self.own_seq[i] += 1
        self.ls_seq[i, i] = self.own_seq[i]
        self.ls_nbrs[i, i] = self.reported[i]
        entry = (i, int(self.own_seq[i]), self.reported[i].copy())
        self._send(self._frame(LSA, i, lsas=[entry], flood=self.routing))

    def _on_lsa(self, r, f):
        relay = {}
        for o, seq, nbrs in f.lsas:
            newer = r[self.ls_seq[r, o] < seq]
            if newer.size == 0:
                continue
            self.ls_seq[newer, o] = seq
            self.ls_nbrs[newer, o] = nbrs
            self.route_dirty[newer] = True
            if f.flood:
                for k in newer:
                    if k != o:
                        relay.setdefault(int(k), []).append((o, seq, nbrs))
        for k, entries in relay.items():
            self._send(self._frame(LSA, k, lsas=entries, flood=True))

    # --------------------------------------------------------------- on demand
    def _originate_rreq(self, i):
        self.flood_seq[i] += 1
        self._send(self._frame(RREQ, i, originator=i, seq=int(self.flood_seq[i]), hops=0))
        self._push(self.now + self.protocol.route_timeout, self._originate_rreq, i)

    def _on_rreq(self, r, f):
        self._learn(r, f, self.protocol.expiry)
        o, s, hops, seq = f.originator, f.sender, f.hops + 1, f.seq
        k = r[r != o]
        rs, rh, rn = self.rt_seq[o], self.rt_hops[o], self.rt_next[o]
        cs, ch, cn = rs[k], rh[k], rn[k]
        fresher = seq > cs
        shorter = (seq == cs) & (hops < ch)
        tie = (seq == cs) & (hops == ch) & (s < cn)
        upd = k[fresher | shorter | tie]
        if upd.size == 0:
            return
        rs[upd], rh[upd], rn[upd] = seq, hops, s
        self.rt_time[o, upd] = self.now
        self.route_dirty[upd] = True
        for j in k[fresher | shorter]:
            self._send(self._frame(RREQ, int(j), originator=o, seq=seq, hops=hops))

    # --------------------------------------------------------- sensing-triggered
    def _scan(self, k):
        period = 1.0 / self.sc.scan_rate_hz
        self._push((k + 1) * period, self._scan, k + 1)
        noisy = self.sc.sensing_noise_std > 0
        if not (self.static and not noisy and not self._scan_needed):
            self._observe()
        self._plan_handshakes(period)

    def _observe(self):
        """Radar scan: refresh bound tracks, drop tracks that left the band."""
        self._scan_needed = False
        n, pos, vel = self.n, self.positions_now(), self.state.velocity
        sensed = distance_matrix(pos) <= self.sc.sensing_range
        np.fill_diagonal(sensed, False)
        spos = np.broadcast_to(pos[None, :, :], (n, n, 3)).copy()
        if self.sc.sensing_noise_std > 0:
            spos += self._noise_rng.normal(0.0, self.sc.sensing_noise_std, (n, n, 3))
        self.spos = spos
        self.svel = np.broadcast_to(vel[None, :, :], (n, n, 3)).copy()
        self.scan_time = self.now
        ds = np.linalg.norm(spos - pos[:, None, :], axis=2)

        keep = sensed & (ds <= self.sc.comm_range + self.sc.hysteresis)
        drop = self.known & ~keep
        if drop.any():
            self.known[drop] = False
        b = self.known
        self.kpos[b] = spos[b]
        self.kvel[b] = self.svel[b]
        self.kt[b] = self.now
        self._knowledge_dirty = True

        self.pending = sensed & ~self.known
        self.pending_since = np.where(
            self.pending, np.where(np.isnan(self.pending_since), self.now, self.pending_since), np.nan)
        # lexicographically smaller position initiates; x alone is decisive almost surely
        self._wins = pos[:, 0][:, None] < spos[:, :, 0]

    def _crossing_delay(self):
        """Time until each unbound track enters ``comm_range`` (inf if not soon, 0 if inside)."""
        pos, vel = self.positions_now(), self.state.velocity
        p = self.spos + self.svel * (self.now - self.scan_time) - pos[:, None, :]
        v = self.svel - vel[:, None, :]
        a = np.einsum("ijk,ijk->ij", v, v)
        b = 2.0 * np.einsum("ijk,ijk->ij", p, v)
        c = np.einsum("ijk,ijk->ij", p, p) - self.sc.comm_range ** 2
        disc = b * b - 4.0 * a * c
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = (-b - np.sqrt(np.maximum(disc, 0.0))) / (2.0 * a)
        tau = np.where((disc >= 0) & (b < 0) & (a > 0), tau, np.inf)
        return np.where(c <= 0, 0.0, tau)

    def _plan_handshakes(self, period):
        """Schedule a beacon at each predicted boundary entry this scan period.

        The winner of the position order beacons; a track left unbound
        inside the range for two scan periods is beaconed by either side.
        """
        if not self.pending.any():
            return
        tau = self._crossing_delay()
        stale = (self.now - self.pending_since) >= 2.0 * period - _EPS
        due = self.pending & (tau <= period) & (self._wins | (stale & (tau == 0)))
        due &= self._beacon_at <= self.now
        for i, j in np.argwhere(due):
            t = self.now + max(tau[i, j] - self.sc.beacon_airtime + 1e-6, 0.0)
            self._beacon_at[i, j] = t
            self._push(t, self._handshake_beacon, (int(i), int(j)))

    def _handshake_beacon(self, pair):
        i, j = pair
        # one broadcast covers every track the node is binding at this instant
        if self.known[i, j] or self._sent_at.get(i) == self.now:
            return
        self._sent_at[i] = self.now
        self._send(self._frame(BEACON, i))

    def _bind_from_frame(self, r, f):
        s = f.sender
        cand = r[self.pending[r, s]]
        if cand.size == 0:
            return
        if self.sc.sensing_noise_std > 0:
            gate = 4.0 * math.sqrt(3.0) * self.sc.sensing_noise_std + 1.0
            cand = cand[np.linalg.norm(self.spos[cand, s] - f.position, axis=1) <= gate]
        self.known[cand, s] = True
        self.kpos[cand, s] = self.spos[cand, s]
        self.kvel[cand, s] = self.svel[cand, s]
        self.kt[cand, s] = self.scan_time
        self.pending[cand, s] = False
        self.pending_since[cand, s] = np.nan
        self._refresh_reported(cand)

    # ------------------------------------------------------------------- tick
    def positions_now(self):
        """Positions extrapolated from the last tick to the current time."""
        if self.static or self.now == self._tick_time:
            return self.state.position
        return self.state.position + self.state.velocity * (self.now - self._tick_time)

    def _tick(self, _):
        sc = self.sc
        if not self.static and self.now > 0:
            self.state = step_random_waypoint(self.state, sc, sc.tick, self._mob_rng)
            self._positions_changed()
        self._tick_time = self.now
        if not self.is_sensing:
            expired = self.known & ((self.now - self.kt) > self.kexp + _EPS)
            if expired.any():
                self.known[expired] = False
                self._knowledge_dirty = True
        if self._knowledge_dirty:
            self._refresh_reported()
        if self.is_on_demand:
            self.route_dirty[:] = True
        if self.sampling:
            self._sample()
        self._tick_index += 1
        self._push(self._tick_index * sc.tick, self._tick, None)

    def _refresh_reported(self, rows=None):
        """Re-evaluate neighbor sets (all rows, or just ``rows``) at the current time."""
        if rows is None:
            self._knowledge_dirty = False
            rows = np.arange(self.n)
        rows = np.asarray(rows)
        pos = self.positions_now()
        dt = self.now - self.kt[rows]
        pred = self.kpos[rows] + self.kvel[rows] * dt[..., None]
        d = np.linalg.norm(pred - pos[rows, None, :], axis=2)
        rep = self.known[rows] & (d <= self.sc.comm_range)
        changed = rows[(rep != self.reported[rows]).any(axis=1)]
        if changed.size == 0:
            return
        self.reported[rows] = rep
        self.route_dirty[changed] = True
        for i in changed:
            if self.announce:
                self._originate_lsa(int(i))
            else:
                self.own_seq[i] += 1
                self.ls_seq[i, i] = self.own_seq[i]
                self.ls_nbrs[i, i] = self.reported[i]

    def _sample(self):
        acc = jaccard_rows(self.reported, self.adj)
        truth_n = self.adj.sum(axis=1)
        hit = (self.reported & self.adj).sum(axis=1)
        rec = np.where(truth_n == 0, 1.0, hit / np.maximum(truth_n, 1))
        self._samples_t.append(self.now)
        self._samples_acc.append(acc.mean())
        self._samples_rec.append(rec.mean())
        self._samples_b.append(self.frames_sent[BEACON])
        if self.snapshot_every and len(self._samples_t) % self.snapshot_every == 0:
            self.snapshots.append((self.now, self.neighbor_tables(), self.frames_sent[BEACON]))

    # ------------------------------------------------------------ public views
    def neighbor_table(self, i) -> NeighborTable:
        source = "sensing" if self.is_sensing else "beacon"
        entries = {int(j): NeighborEntry(self.kpos[i, j].copy(), self.kvel[i, j].copy(),
                                         float(self.kt[i, j]), source)
                   for j in np.flatnonzero(self.known[i])}
        return NeighborTable(int(i), entries)

    def neighbor_tables(self):
        return [self.neighbor_table(i) for i in range(self.n)]

    def believed_routes(self, i):
        """``(hops, first_hop)`` arrays of node ``i``'s current routing view."""
        if self.is_on_demand:
            nh = self.rt_next[:, i]
            valid = (self.rt_seq[:, i] >= 0) & (self.now - self.rt_time[:, i] <= self.protocol.expiry)
            valid &= self.reported[i, np.maximum(nh, 0)] & (nh >= 0)
            hops = np.where(valid, self.rt_hops[:, i], -1)
            first = np.where(valid, nh, -1)
            hops[i], first[i] = 0, -1
            return hops, first
        return bfs_first_hops(believed_graph(self.ls_nbrs[i], self.reported[i], i), i)

    def routing_table(self, i) -> RoutingTable:
        hops, first = self.believed_routes(i)
        return RoutingTable(int(i), {int(d): (int(first[d]), int(hops[d]))
                                     for d in np.flatnonzero(hops > 0)})

    def route_correct(self, i):
        """Min-hop count to every destination and a next hop on some shortest path."""
        hops, first = self.believed_routes(i)
        th = self.truth_hops[i]
        if not np.array_equal(hops, th):
            return False
        d = np.flatnonzero(th > 0)
        nh = first[d]
        return bool(np.all(self.adj[i, nh] & (self.truth_hops[nh, d] == th[d] - 1)))

    def all_routes_correct(self):
        return all(self.route_correct(i) for i in range(self.n))

    # ------------------------------------------------------ discovery / routing
    def start_sampling(self, snapshot_every=0):
        self.sampling = True
        self.snapshot_every = snapshot_every

    def discovery_result(self) -> DiscoveryResult:
        return DiscoveryResult(
            protocol=self.protocol.label, node_count=self.n,
            times=np.asarray(self._samples_t), accuracy=np.asarray(self._samples_acc),
            recall=np.asarray(self._samples_rec), beacons=np.asarray(self._samples_b, dtype=int),
            beacons_sent=int(self.frames_sent[BEACON]), frames_sent=dict(self.frames_sent),
            frames_received=dict(self.frames_received), tables=self.neighbor_tables(),
            snapshots=list(self.snapshots))

    def await_routes(self, nodes, timeout):
        """Run until every node in ``nodes`` holds correct routes.

        Returns the elapsed time, or ``None`` if ``timeout`` passed first.
        """
        nodes = np.asarray(nodes, dtype=int)
        t0 = self.now
        if nodes.size == 0:
            return 0.0
        status = np.zeros(nodes.size, dtype=bool)
        self.route_dirty[nodes] = True

        def stop():
            idx = np.flatnonzero(self.route_dirty[nodes])
            for k in idx:
                status[k] = self.route_correct(nodes[k])
            self.route_dirty[nodes] = False
            return bool(status.all())

        if stop():
            return 0.0
        if self.run_until(t0 + timeout, stop=stop):
            return self.now - t0
        return None

    def settle(self, max_time=30.0):
        """Run until every node's routes are correct; False if that never happens."""
        return self.await_routes(np.arange(self.n), max_time) is not None

    # -------------------------------------------------------------- injection
    def _candidate(self, kind, mover, anchor):
        sc = self.sc
        pos = self.state.position
        u = pos[mover] - pos[anchor]
        norm = np.linalg.norm(u)
        if norm == 0:
            return None
        target = sc.comm_range + 3.0 if kind == "break" else sc.comm_range - 3.0
        new = pos[anchor] + u / norm * target
        if np.any(new < 0) or np.any(new > sc.arena_array):
            return None
        moved = pos.copy()
        moved[mover] = new
        return moved

    def inject_link_event(self, kind, rng, max_candidates=400) -> InjectedEvent | None:
        """Move one node radially so exactly one link breaks or forms.

        The pair is chosen so that no other link changes, the set of
        connected components is unchanged and at least one node's min-hop
        routes change. Returns ``None`` if no such pair exists.
        """
        if kind not in ("break", "form"):
            raise ValueError("kind must be 'break' or 'form'")
        sc = self.sc
        adj = self.adj
        if kind == "break":
            pairs = np.argwhere(np.triu(adj))
        else:
            d = distance_matrix(self.state.position)
            band = (d > sc.comm_range + 2.0 * sc.hysteresis + 1.0) & (d <= sc.comm_range + 60.0)
            pairs = np.argwhere(np.triu(band, 1))
        if pairs.size == 0:
            return None
        order = rng.permutation(len(pairs))[:max_candidates]
        old_hops = self.truth_hops
        ncomp, labels = connected_components(adj, directed=False)
        old_first = None
        for idx in order:
            a, b = pairs[idx]
            mover, anchor = (a, b) if rng.random() < 0.5 else (b, a)
            moved = self._candidate(kind, mover, anchor)
            if moved is None:
                continue
            new_adj = adjacency(moved, sc.comm_range)
            if np.count_nonzero(new_adj != adj) != 2:
                continue
            ncomp2, labels2 = connected_components(new_adj, directed=False)
            if ncomp2 != ncomp or not _same_partition(labels, labels2):
                continue
            new_hops = hop_matrix(new_adj)
            if old_first is None:
                old_first = np.array([bfs_first_hops(adj, i)[1] for i in range(self.n)])
            affected = _affected_nodes(old_hops, old_first, new_hops, new_adj)
            if affected.size == 0:
                continue
            self.state.position[:] = moved
            self._positions_changed()
            self._truth = new_hops
            return InjectedEvent(kind, int(mover), int(anchor), self.now, affected)
        return None


def _same_partition(a, b):
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def _affected_nodes(old_hops, old_first, new_hops, new_adj):
    """Nodes whose hop counts change or whose old next hop stops being shortest."""
    changed = (old_hops != new_hops).any(axis=1)
    n = old_hops.shape[0]
    for i in np.flatnonzero(~changed):
        d = np.flatnonzero(new_hops[i] > 0)
        nh = old_first[i, d]
        ok = new_adj[i, nh] & (new_hops[nh, d] == new_hops[i, d] - 1)
        if not ok.all():
            changed[i] = True
    return np.flatnonzero(changed[:n])
