"""Replanning-delay sweep over dynamic obstacle radius."""

from __future__ import annotations

import gc
import math
import time
from dataclasses import dataclass, field

import numpy as np

from iscc_sim.control.avoidance import (maneuver_positions, min_safe_separation, plan_avoidance,
                                        predict_collision)
from iscc_sim.control.dynamics import EquivalentSphere, UavDynamics, path_energy, path_length
from iscc_sim.control.planning import Environment3d, Obstacle, replan_with_reuse, rrt_star, shortcut_path
from iscc_sim.control.tracking import KinematicTrack, ekf_predict, ekf_update
from iscc_sim.records import MetricsRecord
from iscc_sim.seeding import derive_seed, trial_rng


@dataclass(frozen=True)
class ControlScenario:
    bounds: tuple = (300.0, 300.0, 100.0)
    start: tuple = (30.0, 150.0, 50.0)
    goal: tuple = (270.0, 150.0, 50.0)
    endpoint_jitter: float = 40.0
    obstacle_speed: float = 2.0
    sensing_std: float = 1.0
    iterations: int = 1000
    replan_iterations: int = 1000
    step: float = 5.0
    goal_radius: float = 5.0
    sweep_horizon: float = 40.0  # planning treats the obstacle as swept over this time
    detection_gap: tuple = (20.0, 35.0)  # extra distance beyond the inflated radius at detection
    track_updates: int = 50
    track_accel_std: float = 0.05
    tick: float = 0.1
    horizon: float = 8.0
    timing_exclusive: bool = True


@dataclass
class ReplanTrial:
    radius: float
    trial: int
    rows: dict = field(default_factory=dict)  # planner -> values
    breach: object = None
    yaw_rate: float = 0.0
    sweep: float = 0.0


def _timed(fn, exclusive):
    if exclusive:
        gc.collect()
        gc.disable()
    try:
        t0 = time.perf_counter()
        out = fn()
        return out, time.perf_counter() - t0
    finally:
        if exclusive:
            gc.enable()


def _path_collides(path, speed, t0, obstacle, uav_radius, true_radius, dt=0.02):
    """Fly ``path`` at constant speed from time t0 against the true moving sphere."""
    if path is None:
        return False
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] == 0:
        return False
    s = np.arange(0.0, cum[-1] + speed * dt, speed * dt).clip(max=cum[-1])
    pts = np.column_stack([np.interp(s, cum, path[:, k]) for k in range(3)])
    centers = obstacle.sphere.center[None, :] + (t0 + s / speed)[:, None] * obstacle.velocity[None, :]
    return bool(np.any(np.linalg.norm(pts - centers, axis=1) < true_radius + uav_radius))


def run_replanning_trial(radius, trial, seed=0, scenario: ControlScenario = ControlScenario(),
                         dynamics: UavDynamics = UavDynamics()) -> ReplanTrial:
    rng = trial_rng(seed, "control", (float(radius),), trial)
    sc = scenario
    bounds = np.asarray(sc.bounds, float)
    jit = rng.uniform(-sc.endpoint_jitter, sc.endpoint_jitter, 2)
    start = np.asarray(sc.start, float) + np.array([0.0, jit[0], 0.0])
    goal = np.asarray(sc.goal, float) + np.array([0.0, jit[1], 0.0])
    env0 = Environment3d(bounds, [], clearance=dynamics.physical_radius)
    plan_seed = derive_seed(seed, "control-plan", (float(radius),), trial)
    tree0 = rrt_star(env0, start, goal, sc.iterations, sc.step, seed=plan_seed, goal_radius=sc.goal_radius)
    path0 = tree0.path_points()
    if path0 is None:  # initial budget exhausted; fall back to the straight line
        path0 = np.vstack([start, goal])
    seg = np.linalg.norm(np.diff(path0, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    L = cum[-1]

    def along(s):
        return np.array([np.interp(s, cum, path0[:, k]) for k in range(3)])

    # encounter point and UAV state at detection
    eq_r = radius + 3.0 * sc.sensing_std + dynamics.physical_radius
    s_enc = rng.uniform(0.45, 0.6) * L
    s_det = max(s_enc - eq_r - rng.uniform(*sc.detection_gap) - 5.0, 1.0)
    p_det = along(s_det)
    u = along(min(s_det + 1.0, L)) - p_det
    u /= np.linalg.norm(u)
    # the obstacle sits on the current heading so that a breach is predicted
    x_enc = p_det + u * (s_enc - s_det)
    perp = np.array([-u[1], u[0], 0.0])
    perp /= np.linalg.norm(perp)
    side = 1.0 if rng.random() < 0.5 else -1.0
    center = x_enc + perp * side * rng.uniform(0.0, 0.3 * radius)
    center[2] = np.clip(center[2] + rng.uniform(-10, 10), 0, bounds[2])
    obs_vel = -side * perp * sc.obstacle_speed
    truth = Obstacle(EquivalentSphere(center, radius, 0.0), obs_vel)

    # noisy track of the obstacle during the approach
    R = max(sc.sensing_std, 1e-3) ** 2 * np.eye(3)
    n_up = sc.track_updates
    t_first = -(n_up - 1) * sc.tick
    trk = KinematicTrack.from_measurement(center + obs_vel * t_first + rng.normal(0, sc.sensing_std, 3),
                                          pos_std=max(sc.sensing_std, 1e-3), vel_std=5.0, t=t_first)
    for k in range(1, n_up):
        t_k = t_first + k * sc.tick
        trk = ekf_update(ekf_predict(trk, sc.tick, sc.track_accel_std), center + obs_vel * t_k + rng.normal(0, sc.sensing_std, 3), R, t_k)
    vel = u * dynamics.cruise_speed
    own = KinematicTrack(np.concatenate([p_det, vel]), np.zeros((6, 6)))
    own_sphere = EquivalentSphere(p_det, dynamics.physical_radius, 0.0)
    threat_sphere = EquivalentSphere(trk.position, radius, sc.sensing_std)
    breach = predict_collision(own, trk, sc.horizon, sc.tick,
                               lambda c: min_safe_separation(own_sphere, threat_sphere, c,
                                                             dynamics.braking_response, 3.0 * sc.sensing_std))
    out = ReplanTrial(float(radius), trial, breach=breach)
    if breach.breach:
        m = plan_avoidance(p_det, vel, dynamics, (trk, threat_sphere), own_sphere, goal=goal,
                           horizon=sc.horizon, step=sc.tick, breach=breach)
        out.yaw_rate = m.yaw_rate
    # emergency brake along the current heading, then replan from there
    p_b = maneuver_positions(p_det, vel, dynamics, [0.0], [dynamics.braking_response])[0, 0]
    t_b = dynamics.braking_response
    est = EquivalentSphere(np.clip(trk.position + trk.velocity * t_b, 0, bounds), radius, sc.sensing_std)
    sweep = sc.sweep_horizon
    # the swept volume may not swallow the goal or the braked UAV; shorten it if it does
    for _ in range(40):
        env1 = env0.with_obstacles([Obstacle(est, trk.velocity, sweep)])
        if env1.point_free(goal) and env1.point_free(p_b):
            break
        sweep *= 0.8
    else:
        sweep = 0.0
        env1 = env0.with_obstacles([Obstacle(est, trk.velocity, 0.0)])
    out.sweep = sweep
    replan_seed = derive_seed(seed, "control-replan", (float(radius),), trial)

    res, dt_reuse = _timed(lambda: replan_with_reuse(tree0, env1, p_b, goal, seed=replan_seed,
                                                     iterations=sc.replan_iterations, step_length=sc.step,
                                                     goal_radius=sc.goal_radius, smooth=True),
                           sc.timing_exclusive)

    def from_scratch():
        t = rrt_star(env1, p_b, goal, sc.replan_iterations, sc.step, seed=replan_seed,
                     goal_radius=sc.goal_radius)
        return t, shortcut_path(env1, t.path_points())

    (scratch, scratch_path), dt_scratch = _timed(from_scratch, sc.timing_exclusive)
    for name, path, delay, exp in (("reuse", res.path, dt_reuse, res.expansions),
                                   ("rrt-star", scratch_path, dt_scratch, scratch.expansions)):
        ok = path is not None
        out.rows[name] = {
            "planner": name,
            "obstacle_radius_m": float(radius),
            "trial": int(trial),
            "replanning_delay_ms": delay * 1e3,
            "expansions": int(exp),
            "path_length_m": path_length(path) if ok else math.nan,
            "energy_j": path_energy(path, dynamics.cruise_speed) if ok else math.nan,
            "collided": _path_collides(path, dynamics.cruise_speed, t_b, truth,
                                       dynamics.physical_radius, radius),
            "found": ok,
            "path": path,
            "env": env1,
        }
    return out


def run_control_experiment(radius_sweep=(20, 30, 40, 50, 60), trials=50, seed=0,
                           scenario: ControlScenario = ControlScenario(), dynamics=UavDynamics(),
                           trial_offset=0):
    """One record per (planner, radius, trial); trial indices start at ``trial_offset``."""
    records = []
    for r in radius_sweep:
        for k in range(trial_offset, trial_offset + trials):
            tr = run_replanning_trial(r, k, seed, scenario, dynamics)
            for name in ("reuse", "rrt-star"):
                row = tr.rows[name]
                vals = {c: row[c] for c in ("planner", "obstacle_radius_m", "trial", "replanning_delay_ms",
                                            "expansions", "path_length_m", "energy_j", "collided")}
                records.append(MetricsRecord("control", vals, seed=seed,
                                             extra={"found": row["found"], "path": row["path"],
                                                    "env": row["env"], "breach": tr.breach.breach}))
    return records
