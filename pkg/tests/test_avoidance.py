import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iscc_sim.control import (Breach, EncounterClassification, EquivalentSphere, KinematicTrack, UavDynamics,
                              ekf_predict, inflation, maneuver_positions, min_safe_separation,
                              plan_avoidance, predict_collision, yaw_candidates)
from iscc_sim.errors import InvalidInputError


def sphere(r, std=0.0, c=(0, 0, 0)):
    return EquivalentSphere(c, r, std)


def track(p, v):
    return KinematicTrack(np.r_[p, v], np.eye(6) * 0.01)


def test_equivalent_radius_inflation():
    assert sphere(2.0).equivalent_radius == 2.0
    radii = [sphere(2.0, s).equivalent_radius for s in (0.0, 0.5, 1.0, 3.0)]
    assert all(b > a for a, b in zip(radii, radii[1:]))
    assert inflation(1.5) == pytest.approx(4.5)
    with pytest.raises(InvalidInputError):
        sphere(0.0)


def test_min_safe_separation_examples():
    assert min_safe_separation(sphere(1), sphere(2), 0, 0, 0) == 3.0
    assert min_safe_separation(sphere(1), sphere(1), 26.0, 0.5, 2.0) == pytest.approx(17.0)
    with pytest.raises(InvalidInputError):
        min_safe_separation(sphere(1), sphere(1), -1.0, 0.5, 0)


@given(st.floats(0.1, 50), st.floats(0.1, 50), st.floats(0, 40), st.floats(0, 3), st.floats(0, 10),
       st.floats(0, 5), st.integers(0, 4))
def test_min_safe_separation_monotone(ra, rb, v, resp, err, bump, which):
    args = [ra, rb, v, resp, err]
    base = min_safe_separation(sphere(args[0]), sphere(args[1]), *args[2:])
    args[which] += bump
    assert min_safe_separation(sphere(args[0]), sphere(args[1]), *args[2:]) >= base
    assert base == pytest.approx(ra + rb + v * resp + err)


def test_parallel_tracks_clear():
    res = predict_collision(track([0, 0, 0], [10, 0, 0]), track([0, 200, 0], [10, 0, 0]), 10, 0.1, 17.0)
    assert not res.breach
    assert res.min_distance == pytest.approx(200)


def test_head_on_breach_time():
    a, b = sphere(1), sphere(1)

    def policy(c):
        return min_safe_separation(a, b, c, 0.5, 2.0)

    res = predict_collision(track([0, 0, 0], [13, 0, 0]), track([100, 0, 0], [-13, 0, 0]), 10, 0.1, policy)
    exact = (100 - 17) / 26
    assert res.breach
    assert exact <= res.time_to_breach <= exact + 0.1


def test_breach_time_non_increasing_with_gap():
    times = []
    for gap in np.linspace(200, 20, 30):
        r = predict_collision(track([0, 0, 0], [10, 0, 0]), track([gap, 3, 0], [-5, 0, 0]), 30, 0.05, 10.0)
        assert r.breach
        times.append(r.time_to_breach)
    assert all(b <= a for a, b in zip(times, times[1:]))


def test_vectorised_propagation_matches_repeated_predict():
    rng = np.random.default_rng(3)
    s = track(rng.normal(size=3) * 50, rng.normal(size=3) * 5)
    o = track(rng.normal(size=3) * 50, rng.normal(size=3) * 5)
    step, k = 0.25, 40
    dists = [np.linalg.norm(o.position - s.position)]
    a, b = s, o
    for _ in range(k):
        a, b = ekf_predict(a, step, 1.0), ekf_predict(b, step, 1.0)
        dists.append(np.linalg.norm(b.position - a.position))
    res = predict_collision(s, o, k * step, step, -1.0)
    assert res.min_distance == pytest.approx(min(dists), rel=1e-12)


def euler_positions(p, v, dyn, w, times, h=1e-3, evasion=None):
    """Independent small-step integration of brake-then-yaw."""
    floor = min(np.hypot(v[0], v[1]), 0.6 * dyn.cruise_speed if evasion is None else evasion)
    pos = np.array(p, float)
    speed = float(np.hypot(v[0], v[1]))
    psi = math.atan2(v[1], v[0])
    psi_start = psi
    out = []
    t = 0.0
    for target in times:
        while t < target - 1e-12:
            dt = min(h, target - t)
            if t < dyn.braking_response:
                d = min(dt, dyn.braking_response - t)
                new_speed = max(speed - dyn.max_accel * d, floor)
                pos[:2] += 0.5 * (speed + new_speed) * d * np.array([math.cos(psi), math.sin(psi)])
                speed = new_speed
                rest = dt - d
            else:
                rest = dt
            if rest > 0:
                psi_new = psi + w * rest
                if abs(psi_new - psi_start) > math.pi:  # turn capped at a full reversal
                    psi_new = psi_start + math.copysign(math.pi, w)
                mid = 0.5 * (psi + psi_new)
                pos[:2] += speed * rest * np.array([math.cos(mid), math.sin(mid)])
                psi = psi_new
            t += dt
        out.append(pos.copy())
    return np.array(out)


def test_maneuver_matches_euler_integration():
    dyn = UavDynamics()
    times = np.linspace(0, 6, 13)
    for w in (-1.0, -0.3, 0.0, 0.55, 1.0):
        fast = maneuver_positions([5, -3, 40], [8, 6, 0], dyn, [w], times)[0]
        slow = euler_positions([5, -3, 40], [8, 6, 0], dyn, w, times)
        np.testing.assert_allclose(fast, slow, atol=1e-3)


def brute_force_best(p, v, dyn, threat_p, threat_v, r_sum, horizon, step):
    times = np.arange(int(math.ceil(horizon / step)) + 1) * step
    scores = []
    for w in yaw_candidates(dyn.max_yaw_rate):
        own = euler_positions(p, v, dyn, w, times, h=2e-3)
        th = np.asarray(threat_p) + times[:, None] * np.asarray(threat_v)
        scores.append(np.linalg.norm(own - th, axis=1).min() - r_sum)
    return np.array(scores)


def test_threat_ahead_symmetric_turns_max_positive():
    dyn = UavDynamics()
    me = sphere(1.0)
    threat = (track([60, 0, 50], [-5, 0, 0]), sphere(20.0, 1.0))
    m = plan_avoidance([0, 0, 50], [10, 0, 0], dyn, threat, me, goal=np.array([250, 0, 50]),
                       breach=Breach(2.0, 0.0))
    assert abs(m.yaw_rate) == pytest.approx(dyn.max_yaw_rate)
    assert m.yaw_rate > 0
    assert m.packet is None


def test_threat_left_turns_right_matching_brute_force():
    dyn = UavDynamics()
    me = sphere(1.0)
    tp, tv = np.array([50, 12, 50]), np.array([-4, 0, 0])
    m = plan_avoidance([0, 0, 50], [10, 0, 0], dyn, (track(tp, tv), sphere(20.0, 1.0)), me,
                       goal=np.array([250, 0, 50]), horizon=6.0, step=0.1)
    assert m.yaw_rate < 0
    brute = brute_force_best([0, 0, 50], [10, 0, 0], dyn, tp, tv, 1.0 + 23.0, 6.0, 0.1)
    np.testing.assert_allclose(m.scores, brute, atol=5e-3)
    assert m.yaw_rate == pytest.approx(yaw_candidates(dyn.max_yaw_rate)[int(np.argmax(brute))])


def test_peer_packet_has_opposite_rates():
    dyn = UavDynamics()
    b = Breach(1.5, 3.0)
    m = plan_avoidance([0, 0, 50], [10, 0, 0], dyn, (track([40, 5, 50], [-10, 0, 0]), sphere(1.0)),
                       sphere(1.0), EncounterClassification.PEER_UAV, breach=b)
    assert m.packet is not None
    assert m.packet.collision_status is b
    assert m.packet.own_yaw_rate == m.yaw_rate == -m.packet.peer_yaw_rate


def test_unavoidable_geometry_flagged_critical():
    dyn = UavDynamics()
    m = plan_avoidance([0, 0, 50], [10, 0, 0], dyn, (track([0, 0, 50], [0, 0, 0]), sphere(200.0)), sphere(1.0))
    assert m.critical
    assert m.min_separation <= 0


def test_clear_prediction_rejected():
    from iscc_sim.control import Clear
    with pytest.raises(InvalidInputError):
        plan_avoidance([0, 0, 0], [1, 0, 0], UavDynamics(), (track([9, 0, 0], [0, 0, 0]), sphere(1.0)),
                       sphere(1.0), breach=Clear(50.0))
