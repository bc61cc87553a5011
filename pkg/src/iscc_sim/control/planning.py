"""RRT* planning in a 3-D box with sphere obstacles, and tree-reuse replanning."""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from iscc_sim.control.dynamics import EquivalentSphere
from iscc_sim.errors import InvalidInputError


@dataclass(frozen=True)
class Obstacle:
    """Sphere moving at constant velocity.

    For planning, the sphere is swept along its predicted motion over
    ``sweep_horizon`` seconds (a capsule).
    """

    sphere: EquivalentSphere
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sweep_horizon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))
        if self.sweep_horizon < 0:
            raise InvalidInputError("sweep_horizon must be non-negative")

    @property
    def axis(self):
        c = self.sphere.center
        return c, c + self.velocity * self.sweep_horizon

    def at(self, t):
        return self.sphere.center + self.velocity * t


def segment_segment_distance(p0, p1, q0, q1):
    """Distances between segments ``p0-p1`` (m,3) and one segment ``q0-q1``."""
    p0 = np.atleast_2d(p0)
    p1 = np.atleast_2d(p1)
    d1 = p1 - p0
    d2 = np.asarray(q1, float) - np.asarray(q0, float)
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = float(d2 @ d2)
    f = r @ d2
    eps = 1e-12
    c = np.einsum("ij,ij->i", d1, r)
    if e <= eps:
        s = np.where(a > eps, np.clip(-c / np.where(a > eps, a, 1.0), 0, 1), 0.0)
        t = np.zeros_like(s)
    else:
        b = d1 @ d2
        denom = a * e - b * b
        s = np.where(denom > eps, np.clip((b * f - c * e) / np.where(denom > eps, denom, 1.0), 0, 1), 0.0)
        t = (b * s + f) / e
        safe_a = np.where(a > eps, a, 1.0)
        lo = t < 0
        hi = t > 1
        s = np.where(lo, np.where(a > eps, np.clip(-c / safe_a, 0, 1), 0.0), s)
        s = np.where(hi, np.where(a > eps, np.clip((b - c) / safe_a, 0, 1), 0.0), s)
        t = np.clip(t, 0, 1)
    cp = p0 + s[:, None] * d1
    cq = q0 + t[:, None] * d2
    return np.linalg.norm(cp - cq, axis=1)


@dataclass
class Environment3d:
    bounds: np.ndarray = field(default_factory=lambda: np.array([300.0, 300.0, 100.0]))
    obstacles: list = field(default_factory=list)
    clearance: float = 0.0  # own radius added to every obstacle
    radius_range: tuple = None

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(3)
        if np.any(self.bounds <= 0):
            raise InvalidInputError("bounds must be positive")
        for ob in self.obstacles:
            c = ob.sphere.center
            if np.any(c < 0) or np.any(c > self.bounds):
                raise InvalidInputError("obstacle center outside bounds")
            if self.radius_range is not None:
                lo, hi = self.radius_range
                if not lo <= ob.sphere.physical_radius <= hi:
                    raise InvalidInputError("obstacle radius outside configured range")

    def with_obstacles(self, extra):
        return Environment3d(self.bounds, list(self.obstacles) + list(extra), self.clearance, self.radius_range)

    def _radius(self, ob):
        return ob.sphere.equivalent_radius + self.clearance

    def in_bounds(self, pts):
        pts = np.atleast_2d(pts)
        return np.all((pts >= 0) & (pts <= self.bounds), axis=1)

    def points_free(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = self.in_bounds(pts)
        for ob in self.obstacles:
            a, b = ob.axis
            ok &= segment_segment_distance(pts, pts, a, b) > self._radius(ob)
        return ok

    def point_free(self, p):
        return bool(self.points_free(p)[0])

    def segments_free(self, starts, ends):
        """Vectorised edge check; both endpoints must be in bounds (the box is convex)."""
        starts = np.atleast_2d(np.asarray(starts, dtype=float))
        ends = np.atleast_2d(np.asarray(ends, dtype=float))
        starts, ends = np.broadcast_arrays(starts, ends)
        ok = self.in_bounds(starts) & self.in_bounds(ends)
        for ob in self.obstacles:
            a, b = ob.axis
            ok &= segment_segment_distance(starts, ends, a, b) > self._radius(ob)
        return ok

    def path_free(self, path):
        path = np.atleast_2d(path)
        if path.shape[0] == 1:
            return self.point_free(path[0])
        return bool(np.all(self.segments_free(path[:-1], path[1:])))


def default_gamma(bounds):
    """Lower bound on the RRT* rewiring constant for a 3-D box."""
    vol = float(np.prod(bounds))
    unit_ball = 4.0 / 3.0 * math.pi
    return 2.0 * (1.0 + 1.0 / 3.0) ** (1.0 / 3.0) * (vol / unit_ball) ** (1.0 / 3.0)


@dataclass
class PlanTree:
    positions: np.ndarray
    parents: np.ndarray
    costs: np.ndarray
    goal: np.ndarray
    goal_path: list = field(default_factory=list)
    expansions: int = 0

    @property
    def nodes(self):
        return [(self.positions[i], int(self.parents[i]), float(self.costs[i]))
                for i in range(len(self.parents))]

    @property
    def found(self):
        return len(self.goal_path) > 0

    def path_points(self):
        if not self.goal_path:
            return None
        pts = self.positions[self.goal_path]
        if np.linalg.norm(pts[-1] - self.goal) > 1e-9:
            pts = np.vstack([pts, self.goal])
        return pts

    def path_cost(self):
        pts = self.path_points()
        return math.inf if pts is None else float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


class _Grower:
    """Mutable RRT* tree with array storage and child lists."""

    def __init__(self, env, goal, step, goal_radius, gamma, max_radius, capacity=2048):
        self.env = env
        self.goal = np.asarray(goal, dtype=float)
        self.step = float(step)
        self.goal_radius = float(goal_radius)
        self.gamma = gamma
        self.max_radius = max_radius
        self.P = np.empty((capacity, 3))
        self.parent = np.empty(capacity, dtype=np.int64)
        self.cost = np.empty(capacity)
        self.children = []
        self.m = 0
        self.goal_nodes = []

    def _grow_storage(self):
        cap = self.P.shape[0] * 2
        for name in ("P", "parent", "cost"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self.m] = old[: self.m]
            setattr(self, name, new)

    def add(self, p, parent, cost):
        if self.m == self.P.shape[0]:
            self._grow_storage()
        i = self.m
        self.P[i] = p
        self.parent[i] = parent
        self.cost[i] = cost
        self.children.append([])
        if parent >= 0:
            self.children[parent].append(i)
        self.m += 1
        if np.linalg.norm(p - self.goal) <= self.goal_radius:
            if self.env.segments_free(p, self.goal)[0]:
                self.goal_nodes.append(i)
        return i

    def radius(self):
        n = max(self.m, 2)
        return min(self.gamma * (math.log(n) / n) ** (1.0 / 3.0), self.max_radius)

    def _propagate(self, k, delta):
        stack = [k]
        while stack:
            u = stack.pop()
            self.cost[u] += delta
            stack.extend(self.children[u])

    def extend(self, x):
        P = self.P[: self.m]
        d2 = np.einsum("ij,ij->i", P - x, P - x)
        i = int(np.argmin(d2))
        d = math.sqrt(d2[i])
        if d < 1e-9:
            return None
        new = P[i] + (x - P[i]) * min(1.0, self.step / d)
        if not self.env.point_free(new):
            return None
        dn = np.linalg.norm(P - new, axis=1)
        near = np.flatnonzero(dn <= max(self.radius(), self.step * (1 + 1e-9)))
        if near.size == 0:
            near = np.array([i])
        free = self.env.segments_free(P[near], new)
        if not free.any():
            return None
        near = near[free]
        c = self.cost[near] + dn[near]
        j = int(np.argmin(c))
        k_new = self.add(new, int(near[j]), float(c[j]))
        # rewire
        for k, dk in zip(near, dn[near]):
            if k == near[j]:
                continue
            alt = self.cost[k_new] + dk
            if alt < self.cost[k] - 1e-9:
                old = self.parent[k]
                self.children[old].remove(k)
                self.parent[k] = k_new
                self.children[k_new].append(k)
                self._propagate(int(k), alt - self.cost[k])
        return k_new

    def grow(self, rng, iterations, goal_bias, stop_at_goal=False):
        lo = np.zeros(3)
        hi = self.env.bounds
        done = 0
        for _ in range(iterations):
            if stop_at_goal and self.goal_nodes:
                break
            done += 1
            x = self.goal if rng.random() < goal_bias else rng.uniform(lo, hi)
            self.extend(x)
        return done

    def best_goal_path(self):
        if not self.goal_nodes:
            return []
        g = np.array(self.goal_nodes)
        total = self.cost[g] + np.linalg.norm(self.P[g] - self.goal, axis=1)
        k = int(g[np.argmin(total)])
        path = []
        while k >= 0:
            path.append(k)
            k = int(self.parent[k])
        return path[::-1]

    def to_tree(self, expansions):
        m = self.m
        return PlanTree(self.P[:m].copy(), self.parent[:m].copy(), self.cost[:m].copy(),
                        self.goal.copy(), self.best_goal_path(), expansions)


def _check_endpoints(env, start, goal):
    if not env.point_free(start):
        raise InvalidInputError("start is outside bounds or inside an obstacle")
    if not env.point_free(goal):
        raise InvalidInputError("goal is outside bounds or inside an obstacle")


def rrt_star(env: Environment3d, start, goal, iterations=1000, step_length=5.0, seed=0,
             gamma=None, max_radius=None, goal_bias=0.1, goal_radius=5.0, stop_at_goal=False) -> PlanTree:
    """RRT* with choose-parent and rewiring inside ``min(gamma (log n / n)^(1/3), max_radius)``.

    An unreached goal gives a tree with an empty ``goal_path``.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    _check_endpoints(env, start, goal)
    if iterations < 0:
        raise InvalidInputError("iterations must be non-negative")
    rng = np.random.default_rng(seed)
    g = _Grower(env, goal, step_length, goal_radius, gamma or default_gamma(env.bounds),
                max_radius or 4.0 * step_length)
    g.add(start, -1, 0.0)
    n = g.grow(rng, iterations, goal_bias, stop_at_goal)
    return g.to_tree(n)


@dataclass
class ReplanResult:
    tree: PlanTree
    path: np.ndarray
    delay: float
    expansions: int
    failed: bool
    pruned: int = 0

    def __iter__(self):
        return iter((self.tree, self.path, self.delay))


def replan_with_reuse(tree: PlanTree, env_updated: Environment3d, current_position, goal=None, seed=0,
                      iterations=1000, step_length=5.0, gamma=None, max_radius=None, goal_bias=0.1,
                      goal_radius=5.0, smooth=False) -> ReplanResult:
    """Prune invalid nodes and edges, re-root at ``current_position`` and regrow until a goal path exists.

    Valid edges of the old tree are kept as an undirected forest. The
    component holding the node nearest ``current_position`` is re-oriented
    from the new root; other components are re-attached through a
    choose-parent step when possible. ``expansions`` counts regrowth samples
    plus re-attachment attempts. ``smooth`` shortcuts the returned path
    (inside the timed region).
    """
    t0 = time.perf_counter()
    env = env_updated
    cur = np.asarray(current_position, dtype=float)
    goal = tree.goal if goal is None else np.asarray(goal, dtype=float)
    if not env.point_free(cur):
        raise InvalidInputError("current_position is not collision-free")
    P = tree.positions
    par = tree.parents
    m = P.shape[0]
    node_ok = env.points_free(P)
    child = np.flatnonzero(par >= 0)
    edge_ok = np.zeros(m, dtype=bool)
    cand = child[node_ok[child] & node_ok[par[child]]]
    if cand.size:
        edge_ok[cand] = env.segments_free(P[par[cand]], P[cand])
    adj = [[] for _ in range(m)]
    for c in np.flatnonzero(edge_ok):
        p = int(par[c])
        adj[p].append(int(c))
        adj[int(c)].append(p)
    pruned = int(m - node_ok.sum())

    g = _Grower(env, goal, step_length, goal_radius, gamma or default_gamma(env.bounds),
                max_radius or 4.0 * step_length, capacity=max(2 * m, 64))
    new_id = np.full(m, -1, dtype=np.int64)

    def absorb(root_old, parent_new, base_cost):
        # BFS over the surviving undirected forest from ``root_old``
        new_id[root_old] = g.add(P[root_old], parent_new, base_cost)
        q = deque([root_old])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if new_id[v] < 0:
                    nu = new_id[u]
                    new_id[v] = g.add(P[v], int(nu), g.cost[nu] + float(np.linalg.norm(P[v] - P[u])))
                    q.append(v)

    ok_idx = np.flatnonzero(node_ok)
    attempts = 1
    if ok_idx.size:
        d = np.linalg.norm(P[ok_idx] - cur, axis=1)
        order = np.argsort(d, kind="stable")
        anchor = -1
        if d[order[0]] < 1e-9:
            anchor = int(ok_idx[order[0]])
            absorb(anchor, -1, 0.0)
        else:
            g.add(cur, -1, 0.0)
            near = order[: 32]
            free = env.segments_free(P[ok_idx[near]], cur)
            if free.any():
                anchor = int(ok_idx[near[np.argmax(free)]])
                absorb(anchor, 0, float(d[near[np.argmax(free)]]))
        # orphans, upstream first
        orphans = ok_idx[np.argsort(tree.costs[ok_idx], kind="stable")]
        for u in orphans:
            if new_id[u] >= 0:
                continue
            attempts += 1
            Pc = g.P[: g.m]
            dn = np.linalg.norm(Pc - P[u], axis=1)
            near = np.flatnonzero(dn <= g.radius())
            if near.size == 0:
                continue
            free = env.segments_free(Pc[near], P[u])
            if not free.any():
                continue
            near = near[free]
            c = g.cost[near] + dn[near]
            j = int(np.argmin(c))
            absorb(int(u), int(near[j]), float(c[j]))
    else:
        g.add(cur, -1, 0.0)

    rng = np.random.default_rng(seed)
    grown = g.grow(rng, iterations, goal_bias, stop_at_goal=True)
    new_tree = g.to_tree(grown + attempts)
    path = new_tree.path_points()
    if smooth:
        path = shortcut_path(env, path)
    delay = time.perf_counter() - t0
    return ReplanResult(new_tree, path, delay, grown + attempts,
                        not new_tree.found, pruned)


def shortcut_path(env: Environment3d, path):
    """Greedy line-of-sight smoothing: jump to the farthest visible waypoint."""
    if path is None:
        return None
    path = np.atleast_2d(path)
    keep = [0]
    i = 0
    last = path.shape[0] - 1
    while i < last:
        free = env.segments_free(np.repeat(path[i][None, :], last - i, axis=0), path[i + 1:])
        vis = np.flatnonzero(free)
        j = i + 1 + int(vis.max()) if vis.size else i + 1
        keep.append(j)
        i = j
    return path[keep]
