"""Incremental union-find over a nested family of annuli.

Points enter the structure in decreasing distance from the base point, so a
single pass over the edge list yields the partition of every annulus
``{x : d(x, base) >= r}`` for a descending list of cut-offs ``r``.
"""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True, nogil=True)
def _filtration_kernel(n, point_order, point_key, edge_u, edge_v, edge_key, thresholds):
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    canon = np.empty(n, dtype=np.int64)
    labels = np.full((thresholds.size, n), -1, dtype=np.int64)
    p = 0
    e = 0
    m = edge_u.size
    for li in range(thresholds.size):
        th = thresholds[li]
        while p < n and point_key[p] >= th:
            active[point_order[p]] = True
            p += 1
        while e < m and edge_key[e] >= th:
            a = _find(parent, edge_u[e])
            b = _find(parent, edge_v[e])
            if a != b:
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
            e += 1
        # second pass: label each class by its minimum index
        canon[:] = -1
        for i in range(n):
            if active[i]:
                root = _find(parent, i)
                if canon[root] < 0:
                    canon[root] = i
                labels[li, i] = canon[root]
    return labels


def annulus_labels(radii, edge_u, edge_v, thresholds):
    """Canonical component labels of nested annuli.

    ``radii[i]`` is the distance of point ``i`` from the base point and
    ``thresholds`` must be descending. Row ``q`` of the result labels the
    points with ``radii >= thresholds[q]`` by the minimum index of their
    component; points outside the annulus get ``-1``.
    """
    radii = np.asarray(radii, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if np.any(np.diff(thresholds) > 0):
        raise ValueError("thresholds must be descending")
    edge_u = np.asarray(edge_u, dtype=np.int64)
    edge_v = np.asarray(edge_v, dtype=np.int64)
    point_order = np.argsort(-radii, kind="stable")
    edge_key = np.minimum(radii[edge_u], radii[edge_v]) if edge_u.size else np.empty(0)
    edge_order = np.argsort(-edge_key, kind="stable")
    return _filtration_kernel(
        radii.size,
        point_order.astype(np.int64),
        radii[point_order],
        edge_u[edge_order],
        edge_v[edge_order],
        edge_key[edge_order],
        thresholds,
    )
