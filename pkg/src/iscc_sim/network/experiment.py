"""Neighbor-discovery runs, routing update-time measurement and the protocol sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from iscc_sim.errors import InvalidInputError
from iscc_sim.network.protocols import default_protocols
from iscc_sim.network.scenario import NetworkScenario
from iscc_sim.network.sim import DiscoveryResult, SwarmNetworkSim
from iscc_sim.records import MetricsRecord
from iscc_sim.seeding import derive_seed, trial_rng


def run_discovery(protocol, scenario: NetworkScenario, seed=0, snapshot_every=0) -> DiscoveryResult:
    """Mobile run of ``scenario.duration`` seconds.

    Accuracy is sampled every tick from ``scenario.warmup`` on. Mobility is
    seeded from ``seed`` alone, so every protocol sees the same trajectories.
    """
    sim = SwarmNetworkSim(protocol, scenario, seed=seed)
    warm = min(scenario.warmup, scenario.duration)
    sim.run_until(warm, inclusive=False)
    sim.start_sampling(snapshot_every)
    sim.run_until(scenario.duration)
    return sim.discovery_result()


@dataclass(frozen=True)
class UpdateTime:
    seconds: float
    censored: bool
    kind: str
    affected: int

    @property
    def value(self):
        return math.inf if self.censored else self.seconds


def _cycle(protocol, scenario):
    c = protocol.cycle
    return c if c is not None else 1.0 / scenario.scan_rate_hz


def _static_sim(protocol, scenario, seed, trial, warmup_timeout):
    layout_seed = derive_seed(seed, "network-layout", (scenario.node_count,), trial)
    sim = SwarmNetworkSim(protocol, scenario, seed=layout_seed, routing=True, static=True)
    sim.run_until(max(2.0 * _cycle(protocol, scenario), 0.5))
    sim.settle(warmup_timeout)
    return sim


def routing_update_times(protocol, scenario: NetworkScenario, seed=0, trial=0, events=4,
                         timeout=20.0, warmup_timeout=40.0):
    """Inject ``events`` link changes (alternating break/formation) into a static swarm.

    Injection instants sit at a uniformly drawn phase of the protocol's
    cycle; the phase stream depends only on ``(seed, trial, event)``, so runs
    at different node counts see the same phases (common random numbers).
    Censored results mean the affected nodes did not converge within
    ``timeout``.
    """
    sim = _static_sim(protocol, scenario, seed, trial, warmup_timeout)
    cycle = _cycle(protocol, scenario)
    out = []
    for k in range(events):
        rng = trial_rng(seed, "network-event", (), trial * 1000 + k)
        phase = rng.random()
        kind = "break" if k % 2 == 0 else "form"
        t0 = (math.floor(sim.now / cycle + 1e-9) + 1 + phase) * cycle
        sim.run_until(t0, inclusive=False)
        ev = sim.inject_link_event(kind, rng)
        if ev is None:
            continue
        dt = sim.await_routes(ev.affected, timeout)
        out.append(UpdateTime(dt if dt is not None else timeout, dt is None, kind, int(ev.affected.size)))
        sim.settle(warmup_timeout)
    return out


def measure_routing_update_time(protocol, scenario: NetworkScenario, event="break", seed=0,
                                timeout=20.0) -> UpdateTime:
    """Update time of a single injected link break or formation."""
    if event not in ("break", "form"):
        raise InvalidInputError("event must be 'break' or 'form'")
    sim = _static_sim(protocol, scenario, seed, 0, 40.0)
    cycle = _cycle(protocol, scenario)
    rng = trial_rng(seed, "network-event", (), 0)
    t0 = (math.floor(sim.now / cycle) + 1 + rng.random()) * cycle
    sim.run_until(t0, inclusive=False)
    ev = sim.inject_link_event(event, rng)
    if ev is None:
        raise InvalidInputError("no link event affecting a route exists in this layout")
    dt = sim.await_routes(ev.affected, timeout)
    return UpdateTime(dt if dt is not None else timeout, dt is None, event, int(ev.affected.size))


def run_network_experiment(node_counts, protocols=None, trials=10, seed=0, scenario=None,
                           events_per_trial=4, duration=None, measure_update=True, trial_offset=0):
    """Full factorial sweep; one record per (protocol, node_count, trial).

    Trial indices run from ``trial_offset``, so a sweep can be split into
    single-trial pieces without changing any result.
    """
    protocols = default_protocols() if protocols is None else list(protocols)
    base = scenario or NetworkScenario()
    if duration is not None:
        base = replace(base, duration=float(duration))
    records = []
    for n in node_counts:
        sc = base.with_nodes(n)
        for proto in protocols:
            for trial in range(trial_offset, trial_offset + trials):
                mob_seed = derive_seed(seed, "network-mobility", (n,), trial)
                res = run_discovery(proto, sc, mob_seed)
                times = []
                if measure_update:
                    times = routing_update_times(proto, sc, seed, trial, events_per_trial)
                vals = np.array([t.value for t in times]) if times else np.array([np.nan])
                finite = vals[np.isfinite(vals)]
                records.append(MetricsRecord("network", {
                    "protocol": proto.label,
                    "node_count": int(n),
                    "trial": trial,
                    "mean_accuracy": res.mean_accuracy,
                    "beacons_sent": res.beacons_sent,
                    "mean_update_time_s": float(finite.mean()) if finite.size else math.nan,
                    "p95_update_time_s": float(np.percentile(vals, 95)) if times else math.nan,
                }, seed=mob_seed, extra={"update_times": times, "recall": res.mean_recall,
                                         "frames_sent": res.frames_sent}))
    return records
