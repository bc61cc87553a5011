"""Target classification and constant-velocity EKF tracking."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from iscc_sim.errors import DegenerateUpdateError, InvalidInputError

H = np.hstack([np.eye(3), np.zeros((3, 3))])


class EncounterClassification(enum.Enum):
    OBSTACLE = "obstacle"
    PEER_UAV = "peer-uav"

    @property
    def fuses_feedback(self):
        """Peers share their own state, so echo and feedback are both usable."""
        return self is EncounterClassification.PEER_UAV


def classify_detection(echo_detected, feedback_received):
    if not echo_detected:
        raise InvalidInputError("classification requires a detected echo")
    if feedback_received:
        return EncounterClassification.PEER_UAV
    return EncounterClassification.OBSTACLE


@dataclass(frozen=True)
class KinematicTrack:
    state: np.ndarray       # px py pz vx vy vz
    covariance: np.ndarray  # 6x6
    last_update: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.state, dtype=float).reshape(6)
        P = np.asarray(self.covariance, dtype=float).reshape(6, 6)
        object.__setattr__(self, "state", s)
        object.__setattr__(self, "covariance", P)

    @property
    def position(self):
        return self.state[:3]

    @property
    def velocity(self):
        return self.state[3:]

    @classmethod
    def from_measurement(cls, position, velocity=(0, 0, 0), pos_std=1.0, vel_std=10.0, t=0.0):
        P = np.diag([pos_std**2] * 3 + [vel_std**2] * 3)
        return cls(np.concatenate([np.asarray(position, float), np.asarray(velocity, float)]), P, t)


def transition(dt):
    F = np.eye(6)
    F[:3, 3:] = dt * np.eye(3)
    return F


def process_noise(dt, accel_std):
    """Piecewise white acceleration noise for one axis block, replicated on x/y/z."""
    q = accel_std**2
    Q = np.zeros((6, 6))
    I = np.eye(3)
    Q[:3, :3] = q * dt**4 / 4 * I
    Q[:3, 3:] = Q[3:, :3] = q * dt**3 / 2 * I
    Q[3:, 3:] = q * dt**2 * I
    return Q


def _check_psd(P, what):
    P = 0.5 * (P + P.T)
    w = np.linalg.eigvalsh(P)
    if w[0] < -1e-9 * max(1.0, abs(w[-1])):
        raise DegenerateUpdateError(f"{what} covariance lost positive semidefiniteness")
    return P


def ekf_predict(track: KinematicTrack, dt, process_noise_accel_std=0.0) -> KinematicTrack:
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    F = transition(dt)
    P = F @ track.covariance @ F.T + process_noise(dt, process_noise_accel_std)
    return KinematicTrack(F @ track.state, 0.5 * (P + P.T), track.last_update + dt)


def ekf_update(track: KinematicTrack, measurement, measurement_cov, t=None) -> KinematicTrack:
    """Position-only update in Joseph form."""
    R = np.asarray(measurement_cov, dtype=float).reshape(3, 3)
    if np.abs(R - R.T).max() > 1e-9 * max(1.0, np.abs(R).max()):
        raise InvalidInputError("measurement_cov must be symmetric")
    z = np.asarray(measurement, dtype=float).reshape(3)
    P = track.covariance
    S = H @ P @ H.T + R
    w = np.linalg.eigvalsh(S)
    if w[0] <= 1e-12 * max(1.0, abs(w[-1])):
        raise DegenerateUpdateError("innovation covariance is numerically singular")
    K = np.linalg.solve(S, H @ P).T
    x = track.state + K @ (z - H @ track.state)
    A = np.eye(6) - K @ H
    P_new = _check_psd(A @ P @ A.T + K @ R @ K.T, "posterior")
    return KinematicTrack(x, P_new, track.last_update if t is None else t)


def fuse_shared_measurements(observations):
    """Information-weighted fusion of position observations ``[(pos, cov), ...]``."""
    if len(observations) == 0:
        raise InvalidInputError("need at least one observation")
    info = np.zeros((3, 3))
    vec = np.zeros(3)
    for pos, cov in observations:
        cov = np.asarray(cov, dtype=float).reshape(3, 3)
        w = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        if w[0] <= 1e-12 * max(1.0, w[-1]):
            raise InvalidInputError("observation covariance must be positive definite")
        Wi = np.linalg.inv(cov)
        info += Wi
        vec += Wi @ np.asarray(pos, dtype=float).reshape(3)
    if len(observations) == 1:
        pos, cov = observations[0]
        return np.asarray(pos, dtype=float).reshape(3).copy(), np.asarray(cov, dtype=float).reshape(3, 3).copy()
    fused_cov = np.linalg.inv(info)
    fused_cov = 0.5 * (fused_cov + fused_cov.T)
    return fused_cov @ vec, fused_cov
