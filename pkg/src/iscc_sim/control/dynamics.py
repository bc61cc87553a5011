"""UAV limits, collision spheres and the rotary-wing propulsion power model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from iscc_sim.errors import InvalidInputError

SIGMA_MULTIPLIER = 3.0  # inflation = k * sensing_std (three-sigma containment)


@dataclass(frozen=True)
class UavDynamics:
    max_speed: float = 26.0
    max_yaw_rate: float = 1.0
    max_accel: float = 8.0
    braking_response: float = 0.5
    physical_radius: float = 1.0
    cruise_speed: float = 10.0

    def __post_init__(self):
        for name in ("max_speed", "max_yaw_rate", "max_accel", "braking_response",
                     "physical_radius", "cruise_speed"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.cruise_speed > self.max_speed:
            raise InvalidInputError("cruise_speed exceeds max_speed")


def inflation(sensing_std, k=SIGMA_MULTIPLIER):
    if sensing_std < 0:
        raise InvalidInputError("sensing_std must be non-negative")
    return k * float(sensing_std)


@dataclass(frozen=True)
class EquivalentSphere:
    """Circumscribed sphere inflated by sensing uncertainty."""

    center: np.ndarray
    physical_radius: float
    sensing_std: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        if not self.physical_radius > 0:
            raise InvalidInputError("physical_radius must be positive")
        if self.sensing_std < 0:
            raise InvalidInputError("sensing_std must be non-negative")

    @property
    def equivalent_radius(self):
        return self.physical_radius + inflation(self.sensing_std)

    def moved(self, center):
        return EquivalentSphere(center, self.physical_radius, self.sensing_std)


@dataclass(frozen=True)
class PowerModelParams:
    """Rotary-wing propulsion coefficients (typical small quadrotor values)."""

    blade_profile_w: float = 79.86   # P0
    induced_w: float = 88.63         # Pi
    tip_speed: float = 120.0         # U_tip, m/s
    induced_velocity: float = 4.03   # v0, mean rotor induced velocity in hover
    fuselage_drag_ratio: float = 0.6  # d0
    air_density: float = 1.225
    rotor_solidity: float = 0.05
    rotor_area: float = 0.503


def propulsion_power(v, p: PowerModelParams = PowerModelParams()):
    """P(v): blade-profile + induced + parasite terms, vectorised over ``v``."""
    v = np.asarray(v, dtype=float)
    profile = p.blade_profile_w * (1.0 + 3.0 * v**2 / p.tip_speed**2)
    r = v**2 / (2.0 * p.induced_velocity**2)
    induced = p.induced_w * np.sqrt(np.sqrt(1.0 + r**2) - r)
    parasite = 0.5 * p.fuselage_drag_ratio * p.air_density * p.rotor_solidity * p.rotor_area * v**3
    return profile + induced + parasite


def path_energy(path, speed_profile, params: PowerModelParams = PowerModelParams(), hover_time=0.0):
    """Energy in J to fly ``path`` (k,3) at per-segment speeds, plus optional hover.

    ``speed_profile`` is a scalar or one speed per segment. Zero-length
    segments cost nothing.
    """
    path = np.atleast_2d(np.asarray(path, dtype=float))
    if hover_time < 0:
        raise InvalidInputError("hover_time must be non-negative")
    energy = float(propulsion_power(0.0, params)) * hover_time
    if path.shape[0] < 2:
        return energy
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    v = np.broadcast_to(np.asarray(speed_profile, dtype=float), seg.shape)
    moving = seg > 0
    if np.any(v[moving] <= 0):
        raise InvalidInputError("speed must be positive on non-degenerate segments")
    t = np.zeros_like(seg)
    t[moving] = seg[moving] / v[moving]
    return energy + float(np.sum(propulsion_power(v, params) * t))


def path_length(path):
    path = np.atleast_2d(np.asarray(path, dtype=float))
    if path.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(path, axis=0), axis=1).sum())
