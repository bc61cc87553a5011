"""Neighbor-discovery / routing protocol configurations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from iscc_sim.errors import InvalidInputError


def _positive(name, value):
    if not value > 0:
        raise InvalidInputError(f"{name} must be positive")


@dataclass(frozen=True)
class SensingTriggered:
    """Beacon only when a sensed track enters the communication boundary.

    Entries are refreshed by sensing and never expire while the track stays
    inside the hysteresis band.
    """

    label: str = "sensing-triggered"

    @property
    def cycle(self):
        return None


@dataclass(frozen=True)
class FixedBeacon:
    interval: float = 0.25
    expiry: float = None
    label: str = "fixed-beacon"

    def __post_init__(self):
        _positive("interval", self.interval)
        if self.expiry is None:
            object.__setattr__(self, "expiry", 3.0 * self.interval)
        _positive("expiry", self.expiry)

    @property
    def cycle(self):
        return self.interval


@dataclass(frozen=True)
class PeriodicHello:
    """Fixed-interval hellos with link-state dissemination.

    ``topology_flooding=True`` floods link-state updates as soon as a neighbor
    set changes (OLSR-like); otherwise the link-state database is piggybacked
    on hellos and spreads one hop per hello.
    """

    interval: float = 2.0
    topology_flooding: bool = True
    expiry: float = None
    label: str = "periodic-hello"

    def __post_init__(self):
        _positive("interval", self.interval)
        if self.expiry is None:
            object.__setattr__(self, "expiry", 3.0 * self.interval)
        _positive("expiry", self.expiry)

    @property
    def cycle(self):
        return self.interval


@dataclass(frozen=True)
class OnDemandDiscovery:
    """AODV-like: every node floods a route request each ``route_timeout``.

    Neighbor knowledge and routes are learned only from overheard requests.
    """

    route_timeout: float = 3.0
    expiry: float = None
    label: str = "on-demand"

    def __post_init__(self):
        _positive("route_timeout", self.route_timeout)
        if self.expiry is None:
            object.__setattr__(self, "expiry", 2.0 * self.route_timeout)
        _positive("expiry", self.expiry)

    @property
    def cycle(self):
        return self.route_timeout


@dataclass(frozen=True)
class AdaptiveHello:
    """Hello interval shrinking linearly with own speed.

    ``interval = max - (max - min) * clip(speed * speed_scaling, 0, 1)``; a
    hello carries its interval and receivers expire the entry after
    ``expiry_factor`` times that interval.
    """

    min_interval: float = 0.5
    max_interval: float = 2.0
    speed_scaling: float = 0.1
    expiry_factor: float = 3.0
    label: str = "adaptive-hello"

    def __post_init__(self):
        _positive("min_interval", self.min_interval)
        _positive("max_interval", self.max_interval)
        _positive("expiry_factor", self.expiry_factor)
        if self.min_interval > self.max_interval:
            raise InvalidInputError("min_interval must not exceed max_interval")
        if self.speed_scaling < 0:
            raise InvalidInputError("speed_scaling must be non-negative")

    def interval_for(self, speed):
        frac = min(max(float(speed) * self.speed_scaling, 0.0), 1.0)
        return self.max_interval - (self.max_interval - self.min_interval) * frac

    @property
    def cycle(self):
        return self.max_interval


ProtocolConfig = Union[SensingTriggered, FixedBeacon, PeriodicHello, OnDemandDiscovery, AdaptiveHello]


def default_protocols():
    """The six compared protocols; the last is a faster adaptive variant."""
    return [
        SensingTriggered(),
        FixedBeacon(0.25),
        PeriodicHello(2.0, topology_flooding=True, label="olsr"),
        OnDemandDiscovery(3.0, label="aodv"),
        AdaptiveHello(0.5, 2.0, 0.1, label="ee-hello"),
        AdaptiveHello(0.25, 1.0, 0.1, label="adaptive-hello-fast"),
    ]


def is_hello_based(protocol):
    return isinstance(protocol, (FixedBeacon, PeriodicHello, AdaptiveHello))
