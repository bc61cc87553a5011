"""Collision prediction and brake-then-yaw evasion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from iscc_sim.control.dynamics import EquivalentSphere, UavDynamics
from iscc_sim.control.tracking import EncounterClassification, KinematicTrack
from iscc_sim.errors import InvalidInputError

N_YAW_CANDIDATES = 21


def min_safe_separation(a: EquivalentSphere, b: EquivalentSphere, closing_speed, response, prediction_error):
    """r_a + r_b + closing_speed * response + prediction_error."""
    if np.any(np.asarray(closing_speed) < 0) or response < 0 or prediction_error < 0:
        raise InvalidInputError("closing_speed, response and prediction_error must be non-negative")
    return a.equivalent_radius + b.equivalent_radius + closing_speed * response + prediction_error


@dataclass(frozen=True)
class Clear:
    min_distance: float

    @property
    def breach(self):
        return False


@dataclass(frozen=True)
class Breach:
    time_to_breach: float
    min_distance: float

    @property
    def breach(self):
        return True


def _policy_values(policy, closing):
    if callable(policy):
        try:
            vals = np.asarray(policy(closing), dtype=float)
            if vals.shape == np.shape(closing):
                return vals
        except (TypeError, ValueError):
            pass
        flat = [policy(float(c)) for c in np.ravel(closing)]
        return np.array(flat, dtype=float).reshape(np.shape(closing))
    return np.full(np.shape(closing), float(policy))


def predict_collision(self_track: KinematicTrack, other_track: KinematicTrack, horizon, step, d_safe_policy):
    """First grid time in ``[0, horizon]`` at which the center distance drops below d_safe.

    Both tracks follow the constant-velocity mean of :func:`ekf_predict`
    (``x + v t``), evaluated at all grid times at once. ``d_safe_policy``
    is a constant or a callable of the instantaneous closing speed.
    """
    if not horizon > 0:
        raise InvalidInputError("horizon must be positive")
    if not step > 0:
        raise InvalidInputError("step must be positive")
    k = int(math.ceil(horizon / step - 1e-9))
    t = np.minimum(np.arange(k + 1) * step, horizon)
    dp = other_track.position - self_track.position
    dv = other_track.velocity - self_track.velocity
    rel = dp[None, :] + t[:, None] * dv[None, :]
    dist = np.linalg.norm(rel, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        closing = np.where(dist > 0, -(rel @ dv) / dist, np.linalg.norm(dv))
    closing = np.maximum(closing, 0.0)
    d_safe = _policy_values(d_safe_policy, closing)
    hit = np.flatnonzero(dist < d_safe)
    if hit.size:
        return Breach(float(t[hit[0]]), float(dist.min()))
    return Clear(float(dist.min()))


@dataclass(frozen=True)
class EmergencyPacket:
    """Collision status plus the yaw rates assigned to both UAVs."""

    collision_status: Breach
    own_yaw_rate: float
    peer_yaw_rate: float


@dataclass(frozen=True)
class Maneuver:
    yaw_rate: float
    brake_duration: float
    decel: float
    min_separation: float
    critical: bool
    packet: Optional[EmergencyPacket] = None
    candidates: np.ndarray = None
    scores: np.ndarray = None


def yaw_candidates(max_yaw_rate, n=N_YAW_CANDIDATES):
    return np.linspace(-max_yaw_rate, max_yaw_rate, n)


def maneuver_positions(position, velocity, dynamics: UavDynamics, yaw_rates, times, evasion_speed=None):
    """Positions (c, k, 3) under brake-then-yaw for each candidate yaw rate.

    Speed drops at ``max_accel`` for ``braking_response`` (not below
    ``evasion_speed``, default 0.6 of cruise), then the horizontal heading
    turns at the candidate rate until it has changed by pi, after which the
    UAV flies straight. Altitude is held.
    """
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    yaw_rates = np.atleast_1d(np.asarray(yaw_rates, dtype=float))
    times = np.asarray(times, dtype=float)
    v0 = float(np.hypot(velocity[0], velocity[1]))
    psi0 = math.atan2(velocity[1], velocity[0])
    floor = min(v0, dynamics.cruise_speed * 0.6 if evasion_speed is None else evasion_speed)
    tb = dynamics.braking_response
    t_stop = (v0 - floor) / dynamics.max_accel if v0 > floor else 0.0
    t_dec = min(tb, t_stop)
    v_after = v0 - dynamics.max_accel * t_dec

    def dist_at(t):
        t1 = np.minimum(t, t_dec)
        return v0 * t1 - 0.5 * dynamics.max_accel * t1**2 + v_after * np.maximum(t - t_dec, 0.0)

    # straight while braking, then a constant-rate turn at v_after
    s_brake = float(dist_at(np.array(tb)))
    tau = np.maximum(times - tb, 0.0)
    straight = np.minimum(dist_at(times), s_brake)
    head = np.array([math.cos(psi0), math.sin(psi0)])
    base = position[:2][None, :] + straight[:, None] * head[None, :]
    w = yaw_rates[:, None]
    turning = np.abs(w) > 1e-12
    w_safe = np.where(turning, w, 1.0)
    # the turn stops once the heading is reversed, then the UAV flies straight
    t_turn = np.where(turning, np.pi / np.abs(w_safe), np.inf)
    tc = np.minimum(tau[None, :], t_turn)
    rest = tau[None, :] - tc
    ang = psi0 + w * tc
    dx = np.where(turning, v_after / w_safe * (np.sin(ang) - math.sin(psi0)), v_after * tau * head[0])
    dy = np.where(turning, -v_after / w_safe * (np.cos(ang) - math.cos(psi0)), v_after * tau * head[1])
    dx = dx + v_after * rest * np.cos(ang)
    dy = dy + v_after * rest * np.sin(ang)
    out = np.empty((yaw_rates.size, times.size, 3))
    out[:, :, 0] = base[None, :, 0] + dx
    out[:, :, 1] = base[None, :, 1] + dy
    out[:, :, 2] = position[2]
    return out


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def plan_avoidance(position, velocity, dynamics: UavDynamics, threats, own_sphere: EquivalentSphere,
                   classification=EncounterClassification.OBSTACLE, goal=None, horizon=6.0, step=0.1,
                   breach: Breach = None, n_candidates=N_YAW_CANDIDATES, evasion_speed=None):
    """Pick the yaw rate maximising the minimum predicted clearance.

    ``threats`` is a single ``(track, sphere)`` pair or a list of them.
    Clearance is center distance minus the two equivalent radii. Scores
    within 1e-6 m count as ties; ties go to the least final heading
    deviation from ``goal`` and then to the positive rate.
    """
    if breach is not None and not breach.breach:
        raise InvalidInputError("plan_avoidance requires a predicted breach")
    if isinstance(threats, tuple):
        threats = [threats]
    cands = yaw_candidates(dynamics.max_yaw_rate, n_candidates)
    times = np.arange(int(math.ceil(horizon / step)) + 1) * step
    own = maneuver_positions(position, velocity, dynamics, cands, times, evasion_speed)
    score = np.full(cands.size, np.inf)
    for track, sphere in threats:
        traj = track.position[None, :] + times[:, None] * track.velocity[None, :]
        d = np.linalg.norm(own - traj[None, :, :], axis=2).min(axis=1)
        score = np.minimum(score, d - own_sphere.equivalent_radius - sphere.equivalent_radius)
    best = score.max()
    tied = np.flatnonzero(score >= best - 1e-6)
    if goal is not None and tied.size > 1:
        psi0 = math.atan2(velocity[1], velocity[0])
        turn = np.clip(cands[tied] * max(horizon - dynamics.braking_response, 0.0), -np.pi, np.pi)
        psi_end = psi0 + turn
        end = own[tied, -1, :2]
        to_goal = np.arctan2(goal[1] - end[:, 1], goal[0] - end[:, 0])
        dev = np.abs(_wrap(psi_end - to_goal))
        tied = tied[dev <= dev.min() + 1e-9]
    pick = int(tied.max())  # positive sign wins remaining ties
    w = float(cands[pick])
    packet = None
    if classification is EncounterClassification.PEER_UAV:
        packet = EmergencyPacket(breach, w, -w)
    return Maneuver(w, dynamics.braking_response, dynamics.max_accel, float(score[pick]),
                    bool(score[pick] <= 0.0), packet, cands, score)
