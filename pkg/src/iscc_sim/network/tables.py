"""Neighbor tables, routing tables and min-hop route computation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NeighborEntry:
    position: np.ndarray
    velocity: np.ndarray
    last_update: float
    source: str  # "beacon" | "sensing"


@dataclass
class NeighborTable:
    owner: int
    entries: dict = field(default_factory=dict)

    def neighbor_set(self, now, own_position, comm_range):
        """Peers whose extrapolated position is within ``comm_range``."""
        out = set()
        for peer, e in self.entries.items():
            pred = e.position + e.velocity * (now - e.last_update)
            if np.linalg.norm(pred - own_position) <= comm_range:
                out.add(peer)
        return out


@dataclass
class RoutingTable:
    owner: int
    routes: dict = field(default_factory=dict)  # dest -> (next_hop, hop_count)


def neighbor_accuracy(reported, truth) -> float:
    """Jaccard index of two neighbor sets; 1.0 when both are empty."""
    reported, truth = set(reported), set(truth)
    union = reported | truth
    if not union:
        return 1.0
    return len(reported & truth) / len(union)


def neighbor_recall(reported, truth) -> float:
    truth = set(truth)
    if not truth:
        return 1.0
    return len(set(reported) & truth) / len(truth)


def jaccard_rows(reported, truth):
    """Row-wise Jaccard of two boolean matrices (vectorised ``neighbor_accuracy``)."""
    inter = np.count_nonzero(reported & truth, axis=1)
    union = np.count_nonzero(reported | truth, axis=1)
    return np.where(union == 0, 1.0, inter / np.maximum(union, 1))


def bfs_first_hops(adj, source):
    """Hop counts and smallest-id first hops from ``source``.

    Returns ``(hops, first)``; unreachable nodes have ``hops == -1`` and
    ``first == -1``. Level-synchronous BFS: a node's first hop is the minimum
    first hop over its parents on the previous level, which is the smallest
    first hop over all shortest paths.
    """
    n = adj.shape[0]
    hops = np.full(n, -1)
    first = np.full(n, -1)
    hops[source] = 0
    frontier = np.flatnonzero(adj[source])
    frontier = frontier[frontier != source]
    hops[frontier] = 1
    first[frontier] = frontier
    level = 1
    while frontier.size:
        sub = adj[frontier]
        cand = np.flatnonzero(sub.any(axis=0) & (hops < 0))
        if cand.size == 0:
            break
        labels = np.where(sub[:, cand], first[frontier][:, None], n).min(axis=0)
        level += 1
        hops[cand] = level
        first[cand] = labels
        frontier = cand
    return hops, first


def routing_table_from_graph(owner, adj) -> RoutingTable:
    hops, first = bfs_first_hops(adj, owner)
    routes = {int(d): (int(first[d]), int(hops[d]))
              for d in np.flatnonzero(hops > 0)}
    return RoutingTable(owner, routes)


def graph_from_neighbor_sets(neighbor_sets, n=None):
    """Undirected graph keeping only links both endpoints report."""
    n = n or (max(neighbor_sets) + 1 if neighbor_sets else 0)
    adj = np.zeros((n, n), dtype=bool)
    for i, peers in neighbor_sets.items():
        for j in peers:
            adj[i, j] = True
    return adj & adj.T


def recompute_routes(neighbor_sets, flooding_state=None, n=None):
    """Min-hop routes for every node.

    ``neighbor_sets`` maps node id to the peers it currently reports. With
    ``flooding_state=None`` every node is assumed to know every other node's
    neighbor set (converged link state). Otherwise ``flooding_state[i]`` is the
    boolean ``(n, n)`` topology node ``i`` has learned, row ``o`` being the
    neighbor list last advertised by ``o``; node ``i``'s own row is replaced by
    its current neighbor set.
    """
    n = n or (max(neighbor_sets) + 1 if neighbor_sets else 0)
    tables = {}
    if flooding_state is None:
        adj = graph_from_neighbor_sets(neighbor_sets, n)
        for i in neighbor_sets:
            own = np.zeros(n, dtype=bool)
            own[list(neighbor_sets[i])] = True
            g = adj.copy()
            g[i], g[:, i] = own, own
            tables[i] = routing_table_from_graph(i, g)
        return tables
    for i in neighbor_sets:
        own = np.zeros(n, dtype=bool)
        own[list(neighbor_sets[i])] = True
        tables[i] = routing_table_from_graph(i, believed_graph(flooding_state[i], own, i))
    return tables


def believed_graph(lsdb_rows, own_row, owner):
    """Two-way-checked topology with the owner's links taken from its own table."""
    g = lsdb_rows & lsdb_rows.T
    g[owner, :] = own_row
    g[:, owner] = own_row
    g[owner, owner] = False
    return g
