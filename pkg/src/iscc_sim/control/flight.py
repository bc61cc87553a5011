"""Start-to-goal flights among moving spheres, with or without avoidance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from iscc_sim.control.avoidance import min_safe_separation, plan_avoidance, predict_collision
from iscc_sim.control.dynamics import EquivalentSphere, UavDynamics
from iscc_sim.control.planning import Obstacle
from iscc_sim.control.tracking import KinematicTrack, ekf_predict, ekf_update
from iscc_sim.errors import InvalidInputError
from iscc_sim.seeding import trial_rng


@dataclass(frozen=True)
class FlightScenario:
    bounds: tuple = (300.0, 300.0, 100.0)
    start: tuple = (20.0, 150.0, 50.0)
    goal: tuple = (280.0, 150.0, 50.0)
    obstacle_count: int = 2
    obstacle_radius_range: tuple = (20.0, 60.0)
    obstacle_speed: float = 2.0
    sensing_std: float = 1.0
    sensing_range: float = 200.0
    tick: float = 0.1
    horizon: float = 8.0
    process_noise_accel: float = 0.5
    goal_radius: float = 5.0
    max_time: float = 150.0

    def __post_init__(self):
        if self.obstacle_count < 0:
            raise InvalidInputError("obstacle_count must be non-negative")
        if self.sensing_std < 0 or self.obstacle_speed < 0:
            raise InvalidInputError("sensing_std and obstacle_speed must be non-negative")
        if not (self.tick > 0 and self.horizon > 0 and self.max_time > 0):
            raise InvalidInputError("tick, horizon and max_time must be positive")


def random_obstacles(scenario: FlightScenario, rng, min_start_gap=15.0):
    """Moving spheres centred near the straight start-goal line."""
    start = np.asarray(scenario.start, float)
    goal = np.asarray(scenario.goal, float)
    bounds = np.asarray(scenario.bounds, float)
    u = goal - start
    u /= np.linalg.norm(u)
    perp = np.array([-u[1], u[0], 0.0])
    out = []
    for _ in range(scenario.obstacle_count):
        for _attempt in range(100):
            r = rng.uniform(*scenario.obstacle_radius_range)
            frac = rng.uniform(0.25, 0.75)
            c = start + frac * (goal - start) + perp * rng.uniform(-60, 60)
            c[2] = rng.uniform(0.0, bounds[2])
            c = np.clip(c, 0, bounds)
            ang = rng.uniform(0, 2 * np.pi)
            v = scenario.obstacle_speed * np.array([math.cos(ang), math.sin(ang), 0.0])
            far = all(np.linalg.norm(c - p) > r + min_start_gap + 30.0 for p in (start, goal))
            apart = all(np.linalg.norm(c - o.sphere.center) > r + o.sphere.physical_radius for o in out)
            if far and apart:
                out.append(Obstacle(EquivalentSphere(c, r, 0.0), v))
                break
    return out


def deterministic_encounter(scenario: FlightScenario, dynamics: UavDynamics, radius=30.0, frac=0.5):
    """A sphere timed to cross the straight path exactly when the UAV gets there."""
    start = np.asarray(scenario.start, float)
    goal = np.asarray(scenario.goal, float)
    u = (goal - start) / np.linalg.norm(goal - start)
    perp = np.array([-u[1], u[0], 0.0])
    x = start + frac * (goal - start)
    t_arrive = np.linalg.norm(x - start) / dynamics.cruise_speed
    v = -perp * scenario.obstacle_speed
    return [Obstacle(EquivalentSphere(x - v * t_arrive, radius, 0.0), v)]


@dataclass
class FlightResult:
    collided: bool
    reached: bool
    duration: float
    min_clearance: float
    avoidance_ticks: int
    trajectory: np.ndarray = field(repr=False, default=None)


def simulate_flight(scenario: FlightScenario, dynamics: UavDynamics, avoidance=True, rng=None,
                    obstacles=None, record=False) -> FlightResult:
    """Tick-synchronous flight; collision when center distance < sum of physical radii."""
    rng = np.random.default_rng(0) if rng is None else rng
    if obstacles is None:
        obstacles = random_obstacles(scenario, rng)
    dt = scenario.tick
    pos = np.asarray(scenario.start, float).copy()
    goal = np.asarray(scenario.goal, float)
    heading = math.atan2(goal[1] - pos[1], goal[0] - pos[0])
    speed = dynamics.cruise_speed
    own_sphere = EquivalentSphere(pos, dynamics.physical_radius, 0.0)
    sig = scenario.sensing_std
    R = max(sig, 1e-3) ** 2 * np.eye(3)
    tracks = [None] * len(obstacles)
    centers0 = np.array([o.sphere.center for o in obstacles]).reshape(-1, 3)
    vels = np.array([o.velocity for o in obstacles]).reshape(-1, 3)
    radii = np.array([o.sphere.physical_radius for o in obstacles])
    min_clear = math.inf
    collided = False
    evading = 0
    traj = [pos.copy()] if record else None
    t = 0.0
    n_steps = int(math.ceil(scenario.max_time / dt))
    for _ in range(n_steps):
        true_c = centers0 + vels * t
        if len(obstacles):
            clear = np.linalg.norm(true_c - pos, axis=1) - radii - dynamics.physical_radius
            min_clear = min(min_clear, float(clear.min()))
            if clear.min() < 0:
                collided = True
                break
        if np.linalg.norm(goal - pos) <= scenario.goal_radius:
            return FlightResult(collided, True, t, min_clear, evading, np.array(traj) if record else None)
        vel = speed * np.array([math.cos(heading), math.sin(heading), 0.0])
        yaw_cmd = None
        if avoidance and len(obstacles):
            own_track = KinematicTrack(np.concatenate([pos, vel]), np.zeros((6, 6)), t)
            threats = []
            breach = None
            for i in range(len(obstacles)):
                if np.linalg.norm(true_c[i] - pos) - radii[i] > scenario.sensing_range:
                    continue
                z = true_c[i] + rng.normal(0.0, sig, 3)
                if tracks[i] is None:
                    tracks[i] = KinematicTrack.from_measurement(z, pos_std=max(sig, 1e-3), vel_std=5.0, t=t)
                else:
                    tracks[i] = ekf_update(ekf_predict(tracks[i], dt, scenario.process_noise_accel), z, R, t)
                trk = tracks[i]
                sph = EquivalentSphere(trk.position, radii[i], sig)
                # trace bounds the largest eigenvalue
                pos_sd = math.sqrt(max(np.trace(trk.covariance[:3, :3]), 0.0))
                vel_sd = math.sqrt(max(np.trace(trk.covariance[3:, 3:]), 0.0))
                err = 3.0 * (pos_sd + vel_sd * dynamics.braking_response)

                def policy(closing, sph=sph, err=err):
                    return min_safe_separation(own_sphere, sph, closing, dynamics.braking_response, err)

                res = predict_collision(own_track, trk, scenario.horizon, dt, policy)
                threats.append((trk, EquivalentSphere(trk.position, radii[i], sig + err / 3.0)))
                if res.breach and (breach is None or res.time_to_breach < breach.time_to_breach):
                    breach = res
            if breach is not None:
                m = plan_avoidance(pos, vel, dynamics, threats, own_sphere, goal=goal,
                                   horizon=scenario.horizon, step=dt, breach=breach)
                yaw_cmd = m.yaw_rate
                evading += 1
        if yaw_cmd is not None:
            speed = max(speed - dynamics.max_accel * dt, min(speed, 0.6 * dynamics.cruise_speed))
            heading += yaw_cmd * dt
        else:
            want = math.atan2(goal[1] - pos[1], goal[0] - pos[0])
            err_h = (want - heading + math.pi) % (2 * math.pi) - math.pi
            heading += float(np.clip(err_h, -dynamics.max_yaw_rate * dt, dynamics.max_yaw_rate * dt))
            speed = min(speed + dynamics.max_accel * dt, dynamics.cruise_speed)
        step_len = min(speed * dt, float(np.linalg.norm(goal[:2] - pos[:2])))
        pos = pos + step_len * np.array([math.cos(heading), math.sin(heading), 0.0])
        t += dt
        if record:
            traj.append(pos.copy())
    return FlightResult(collided, False if collided else bool(np.linalg.norm(goal - pos) <= scenario.goal_radius),
                        t, min_clear, evading, np.array(traj) if record else None)


@dataclass(frozen=True)
class CollisionEstimate:
    probability: float
    ci_low: float
    ci_high: float
    collisions: int
    trials: int
    reached: int = 0


def clopper_pearson(k, n, level=0.95):
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def collision_probability(avoidance, scenario: FlightScenario = FlightScenario(), dynamics=UavDynamics(),
                          sensing_std=None, trials=100, seed=0, obstacles=None) -> CollisionEstimate:
    """Monte Carlo collision rate over noise realisations and obstacle layouts.

    ``obstacles`` fixes the layout (and disables random placement).
    """
    if trials < 1:
        raise InvalidInputError("trials must be at least 1")
    if sensing_std is not None:
        from dataclasses import replace
        scenario = replace(scenario, sensing_std=float(sensing_std))
    hits = 0
    reached = 0
    for k in range(trials):
        rng = trial_rng(seed, "control-flight", (scenario.sensing_std, bool(avoidance)), k)
        res = simulate_flight(scenario, dynamics, avoidance, rng, obstacles)
        hits += res.collided
        reached += res.reached
    lo, hi = clopper_pearson(hits, trials)
    return CollisionEstimate(hits / trials, lo, hi, hits, trials, reached)
