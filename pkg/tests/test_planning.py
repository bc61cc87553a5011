import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iscc_sim.control import (Environment3d, EquivalentSphere, Obstacle, replan_with_reuse, rrt_star,
                              segment_segment_distance, shortcut_path)
from iscc_sim.errors import InvalidInputError

START = np.array([30.0, 150.0, 50.0])
GOAL = np.array([270.0, 150.0, 50.0])


def dense_clear(env, path, spacing=0.05):
    """Independent check: points every ``spacing`` m vs densely sampled obstacle axes."""
    path = np.atleast_2d(path)
    pts = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        n = max(int(np.ceil(np.linalg.norm(b - a) / spacing)), 1)
        pts.append(a + np.linspace(0, 1, n + 1)[1:, None] * (b - a))
    pts = np.vstack(pts)
    if np.any(pts < -1e-9) or np.any(pts > env.bounds + 1e-9):
        return False
    for ob in env.obstacles:
        a, b = ob.axis
        m = max(int(np.linalg.norm(b - a) / 0.02), 1)
        axis = a + np.linspace(0, 1, m + 1)[:, None] * (b - a)
        for chunk in np.array_split(pts, max(len(pts) // 2000, 1)):
            d = np.linalg.norm(chunk[:, None, :] - axis[None, :, :], axis=2).min()
            if d <= ob.sphere.equivalent_radius + env.clearance:
                return False
    return True


def audit(tree):
    n = len(tree.parents)
    roots = np.flatnonzero(tree.parents < 0)
    assert len(roots) == 1
    for i in range(n):
        seen, k = set(), i
        while k >= 0:
            assert k not in seen
            seen.add(k)
            k = tree.parents[k]
        p = tree.parents[i]
        if p >= 0:
            edge = np.linalg.norm(tree.positions[i] - tree.positions[p])
            assert tree.costs[i] == pytest.approx(tree.costs[p] + edge, rel=1e-9, abs=1e-9)
    if tree.goal_path:
        assert tree.parents[tree.goal_path[0]] < 0
        for a, b in zip(tree.goal_path, tree.goal_path[1:]):
            assert tree.parents[b] == a
        assert np.linalg.norm(tree.positions[tree.goal_path[-1]] - tree.goal) <= 5.0 + 1e-9


def cluttered_env():
    obs = [Obstacle(EquivalentSphere([150, 150, 50], 30, 1.0)),
           Obstacle(EquivalentSphere([90, 110, 40], 20, 0.5), [0, 2, 0], 10.0),
           Obstacle(EquivalentSphere([210, 190, 60], 25, 1.0), [-1, -1, 0], 15.0)]
    return Environment3d(obstacles=obs, clearance=1.0)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=12, max_size=12))
def test_segment_distance_matches_sampling(c):
    p0, p1, q0, q1 = (np.array(c[i:i + 3]) for i in range(0, 12, 3))
    d = segment_segment_distance(p0[None], p1[None], q0, q1)[0]
    s = np.linspace(0, 1, 801)
    P = p0 + s[:, None] * (p1 - p0)
    Q = q0 + s[:, None] * (q1 - q0)
    brute = np.linalg.norm(P[:, None] - Q[None], axis=2).min()
    step = max(np.linalg.norm(p1 - p0), np.linalg.norm(q1 - q0)) / 800
    assert d <= brute + 1e-9
    assert brute - d <= step + 1e-9


def test_degenerate_segments():
    d = segment_segment_distance(np.zeros((1, 3)), np.zeros((1, 3)), np.array([3.0, 4, 0]), np.array([3.0, 4, 0]))
    assert d[0] == pytest.approx(5.0)


def test_empty_environment_path_near_straight():
    ratios = []
    straight = np.linalg.norm(GOAL - START)
    for seed in range(50):
        t = rrt_star(Environment3d(), START, GOAL, 1000, 5.0, seed=seed)
        ratios.append(t.path_cost() / straight)
    assert np.median(ratios) <= 1.3


def test_goal_inside_obstacle_rejected():
    env = Environment3d(obstacles=[Obstacle(EquivalentSphere(GOAL, 10.0))])
    with pytest.raises(InvalidInputError):
        rrt_star(env, START, GOAL, 10)
    with pytest.raises(InvalidInputError):
        rrt_star(Environment3d(), START, [400, 0, 0], 10)


def test_unreached_goal_gives_empty_path():
    t = rrt_star(Environment3d(), START, GOAL, 5, seed=0)
    assert t.goal_path == [] and t.path_points() is None
    audit(t)


def test_paths_pass_dense_check_and_tree_audit():
    env = cluttered_env()
    for seed in range(4):
        t = rrt_star(env, START, GOAL, 1500, 5.0, seed=seed)
        audit(t)
        assert t.found
        assert dense_clear(env, t.path_points())
        assert dense_clear(env, shortcut_path(env, t.path_points()))


def test_reuse_noop_returns_same_path():
    env = Environment3d()
    t = rrt_star(env, START, GOAL, 1000, seed=3)
    far = env.with_obstacles([Obstacle(EquivalentSphere([150, 20, 90], 5.0))])
    res = replan_with_reuse(t, far, START, GOAL, seed=1)
    assert not res.failed
    assert res.pruned == 0
    np.testing.assert_allclose(res.path, t.path_points())
    audit(res.tree)


def test_reuse_after_new_obstacle_is_valid():
    env = Environment3d(clearance=1.0)
    t = rrt_star(env, START, GOAL, 1000, seed=4)
    ob = Obstacle(EquivalentSphere([160, 150, 50], 35, 1.0), [0, 2, 0], 20.0)
    env2 = env.with_obstacles([ob])
    cur = np.array([70.0, 150.0, 50.0])
    res = replan_with_reuse(t, env2, cur, GOAL, seed=2)
    assert not res.failed and res.pruned > 0
    assert res.delay > 0
    audit(res.tree)
    np.testing.assert_allclose(res.path[0], cur)
    assert dense_clear(env2, res.path)
    smooth = replan_with_reuse(t, env2, cur, GOAL, seed=2, smooth=True)
    assert dense_clear(env2, smooth.path)
    tree, path, delay = smooth
    assert delay == smooth.delay


def test_reuse_failure_flagged():
    env = Environment3d(clearance=1.0)
    t = rrt_star(env, START, GOAL, 600, seed=5)
    # a wall of spheres across the box cuts every route to the goal
    wall = [Obstacle(EquivalentSphere([200, y, z], 30.0)) for y in range(0, 301, 30) for z in (0, 50, 100)]
    res = replan_with_reuse(t, env.with_obstacles(wall), START, GOAL, seed=0, iterations=200)
    assert res.failed and res.path is None
    audit(res.tree)


def test_rrt_deterministic():
    a = rrt_star(cluttered_env(), START, GOAL, 400, seed=9)
    b = rrt_star(cluttered_env(), START, GOAL, 400, seed=9)
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(a.parents, b.parents)


def test_environment_validation():
    with pytest.raises(InvalidInputError):
        Environment3d(obstacles=[Obstacle(EquivalentSphere([400, 0, 0], 20))])
    with pytest.raises(InvalidInputError):
        Environment3d(obstacles=[Obstacle(EquivalentSphere([100, 100, 50], 70))], radius_range=(20, 60))
