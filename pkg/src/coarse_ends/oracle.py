"""Brute-force reference computations for small instances.

Nothing here shares code with the fast paths: distances come from dense
matrices (Floyd-Warshall on graphs), components from a boolean transitive
closure. Intended for a few hundred points.
"""
from __future__ import annotations

import numpy as np

from .neighbors import REL_TOL

ORACLE_LIMIT = 1500


def dense_distances(instance):
    """Full distance matrix, in the instance's internal point order."""
    n = len(instance)
    if n > ORACLE_LIMIT:
        raise ValueError(f"oracle limited to {ORACLE_LIMIT} points")
    if instance.coords is not None:
        diff = instance.coords[:, None, :] - instance.coords[None, :, :]
        if instance.metric_kind == "chebyshev":
            return np.abs(diff).max(axis=2)
        return np.sqrt((diff ** 2).sum(axis=2))
    g = instance._graph.tocoo()
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for u, v, w in zip(g.row, g.col, g.data):
        if w < D[u, v]:
            D[u, v] = D[v, u] = w
    for k in range(n):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return D


def _close(d, R):
    return d <= R * (1.0 + REL_TOL)


def transitive_closure(adj):
    reach = adj | np.eye(adj.shape[0], dtype=bool)
    while True:
        # repeated squaring; float matmul counts paths without overflow
        m = reach.astype(np.float32)
        nxt = (m @ m) > 0
        if (nxt == reach).all():
            return reach
        reach = nxt


def chain_labels(instance, r, R, D=None):
    """Minimum-index component labels of the annulus ``d(x, base) >= r``; -1 outside."""
    D = dense_distances(instance) if D is None else D
    radii = D[instance.base_index]
    inside = radii >= r * (1.0 - REL_TOL)
    idx = np.nonzero(inside)[0]
    labels = np.full(len(instance), -1, dtype=np.int64)
    if idx.size == 0:
        return labels
    reach = transitive_closure(_close(D[np.ix_(idx, idx)], R))
    labels[idx] = idx[reach.argmax(axis=1)]
    return labels


def escape_depths(instance, R, shell, D=None):
    """Hop counts from the base point with steps ``<= R`` (-1 if unreachable)
    and the mask of shell points."""
    D = dense_distances(instance) if D is None else D
    adj = _close(D, R)
    n = len(instance)
    depth = np.full(n, -1)
    depth[instance.base_index] = 0
    frontier = np.zeros(n, dtype=bool)
    frontier[instance.base_index] = True
    hop = 0
    while frontier.any():
        hop += 1
        nxt = adj[frontier].any(axis=0) & (depth < 0)
        depth[nxt] = hop
        frontier = nxt
    radii = D[instance.base_index]
    return depth, np.isfinite(radii) & (radii >= shell * (1.0 - REL_TOL))


def escape_classes(instance, R, shell, r_outer, D=None):
    """Outermost-annulus components that contain a reachable shell point."""
    D = dense_distances(instance) if D is None else D
    depth, shell_mask = escape_depths(instance, R, shell, D)
    labels = chain_labels(instance, r_outer, R, D)
    hit = (depth >= 0) & shell_mask
    return sorted({int(labels[i]) for i in np.nonzero(hit)[0] if labels[i] >= 0})


def min_cross_distance(points_a, points_b):
    """Smallest distance between two finite point sets (exhaustive)."""
    a = np.asarray(points_a, dtype=float)
    b = np.asarray(points_b, dtype=float)
    if not len(a) or not len(b):
        return np.inf
    best = np.inf
    for start in range(0, len(a), 512):
        block = a[start:start + 512]
        d = np.sqrt(((block[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
        best = min(best, float(d.min()))
    return best
