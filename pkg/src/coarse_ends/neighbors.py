"""Fixed-radius neighbor enumeration.

Point clouds are bucketed into a regular grid whose cell width equals the
search radius, so only adjacent cells need to be compared. Graphs are
handled by growing a bounded Dijkstra ball from every vertex.
"""
from __future__ import annotations

import heapq
import itertools

import numba
import numpy as np

# Relative tolerance for "within R" tests; ties count as within.
REL_TOL = 1e-9

# Upper bound on candidate pairs materialised at once by the grid join.
_CHUNK_PAIRS = 4_000_000


def within(d, radius):
    """Elementwise ``d <= radius`` with the package-wide relative tolerance."""
    return d <= radius * (1.0 + REL_TOL)


def cloud_distance(a, b, metric):
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if metric == "chebyshev":
        return np.abs(diff).max(axis=-1)
    return np.sqrt((diff * diff).sum(axis=-1))


def _half_offsets(dim):
    """Neighbor cell offsets with the zero offset first, one of each +-pair."""
    offsets = [(0,) * dim]
    for off in itertools.product((-1, 0, 1), repeat=dim):
        if any(off) and off > (0,) * dim:
            offsets.append(off)
    return np.array(offsets, dtype=np.int64)


def _cross_pairs(start_a, count_a, start_b, count_b):
    """All (a, b) index pairs between matched cell runs, as two flat arrays."""
    sizes = count_a * count_b
    total = int(sizes.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    owner = np.repeat(np.arange(sizes.size), sizes)
    offsets = np.cumsum(sizes) - sizes
    local = np.arange(total, dtype=np.int64) - offsets[owner]
    nb = count_b[owner]
    return start_a[owner] + local // nb, start_b[owner] + local % nb


def grid_pairs(coords, radius, metric="euclidean"):
    """Return ``(i, j, d)`` for every pair ``i < j`` with ``d(i, j) <= radius``.

    Uses spatial bucketing with cell width ``radius`` (inflated by the
    tolerance), giving near-linear work for bounded-density clouds.
    """
    coords = np.asarray(coords, dtype=np.float64)
    n, dim = coords.shape
    empty_i = np.empty(0, dtype=np.int64)
    if n < 2 or radius <= 0:
        return empty_i, empty_i, np.empty(0)
    width = radius * (1.0 + REL_TOL)
    cells = np.floor((coords - coords.min(axis=0)) / width).astype(np.int64)
    # pad by one so offsets never wrap around the key space
    extent = cells.max(axis=0) + 3
    cells += 1
    strides = np.ones(dim, dtype=np.int64)
    for ax in range(dim - 2, -1, -1):
        strides[ax] = strides[ax + 1] * extent[ax + 1]
    keys = cells @ strides
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    uniq, start, count = np.unique(sorted_keys, return_index=True, return_counts=True)

    out_i, out_j, out_d = [], [], []
    for off in _half_offsets(dim):
        shift = int(off @ strides)
        target = uniq + shift
        pos = np.searchsorted(uniq, target)
        pos_clip = np.minimum(pos, uniq.size - 1)
        hit = uniq[pos_clip] == target
        a_cells = np.nonzero(hit)[0]
        b_cells = pos_clip[hit]
        if a_cells.size == 0:
            continue
        csum = np.cumsum(count[a_cells] * count[b_cells])
        lo = 0
        while lo < a_cells.size:
            # chunk so the candidate arrays stay bounded
            base = csum[lo - 1] if lo else 0
            hi = max(int(np.searchsorted(csum, base + _CHUNK_PAIRS, side="right")), lo + 1)
            sa, sb = a_cells[lo:hi], b_cells[lo:hi]
            pa, pb = _cross_pairs(start[sa], count[sa], start[sb], count[sb])
            lo = hi
            if shift == 0:
                keep = pa < pb
                pa, pb = pa[keep], pb[keep]
            ia, ib = order[pa], order[pb]
            d = cloud_distance(coords[ia], coords[ib], metric)
            keep = within(d, radius)
            ia, ib, d = ia[keep], ib[keep], d[keep]
            swap = ia > ib
            ia[swap], ib[swap] = ib[swap], ia[swap].copy()
            out_i.append(ia)
            out_j.append(ib)
            out_d.append(d)
    if not out_i:
        return empty_i, empty_i, np.empty(0)
    return np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_d)


@numba.njit(cache=True, nogil=True)
def _ball_pairs_kernel(indptr, indices, weights, local, limit):
    nv = indptr.size - 1
    dist = np.full(nv, np.inf)
    done = np.zeros(nv, dtype=np.bool_)
    touched = np.empty(nv, dtype=np.int64)
    cap = 1024
    out_i = np.empty(cap, dtype=np.int64)
    out_j = np.empty(cap, dtype=np.int64)
    out_d = np.empty(cap, dtype=np.float64)
    cnt = 0
    for s in range(nv):
        ls = local[s]
        if ls < 0:
            continue
        nt = 0
        dist[s] = 0.0
        touched[nt] = s
        nt += 1
        heap = [(0.0, s)]
        while len(heap) > 0:
            d, v = heapq.heappop(heap)
            if done[v]:
                continue
            done[v] = True
            lv = local[v]
            if lv > ls:
                if cnt == cap:
                    cap *= 2
                    ni = np.empty(cap, dtype=np.int64)
                    nj = np.empty(cap, dtype=np.int64)
                    nd = np.empty(cap, dtype=np.float64)
                    ni[:cnt] = out_i[:cnt]
                    nj[:cnt] = out_j[:cnt]
                    nd[:cnt] = out_d[:cnt]
                    out_i, out_j, out_d = ni, nj, nd
                out_i[cnt] = ls
                out_j[cnt] = lv
                out_d[cnt] = d
                cnt += 1
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                nd_ = d + weights[e]
                if nd_ <= limit and nd_ < dist[u]:
                    if dist[u] == np.inf:
                        touched[nt] = u
                        nt += 1
                    dist[u] = nd_
                    heapq.heappush(heap, (nd_, u))
        for q in range(nt):
            dist[touched[q]] = np.inf
            done[touched[q]] = False
    return out_i[:cnt], out_j[:cnt], out_d[:cnt]


@numba.njit(cache=True, nogil=True)
def _pair_distance_kernel(indptr, indices, weights, src, dst):
    nv = indptr.size - 1
    dist = np.full(nv, np.inf)
    done = np.zeros(nv, dtype=np.bool_)
    touched = np.empty(nv, dtype=np.int64)
    out = np.empty(src.size, dtype=np.float64)
    for q in range(src.size):
        s = src[q]
        t = dst[q]
        if s == t:
            out[q] = 0.0
            continue
        nt = 0
        dist[s] = 0.0
        touched[nt] = s
        nt += 1
        heap = [(0.0, s)]
        res = np.inf
        while len(heap) > 0:
            d, v = heapq.heappop(heap)
            if done[v]:
                continue
            done[v] = True
            if v == t:
                res = d
                break
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                nd_ = d + weights[e]
                if nd_ < dist[u]:
                    if dist[u] == np.inf:
                        touched[nt] = u
                        nt += 1
                    dist[u] = nd_
                    heapq.heappush(heap, (nd_, u))
        out[q] = res
        for k in range(nt):
            dist[touched[k]] = np.inf
            done[touched[k]] = False
    return out


def graph_pairs(csr, local, radius):
    """Ball-growing enumeration of instance pairs within ``radius`` in a graph.

    ``local`` maps graph vertices to instance indices (-1 for vertices
    outside the truncation; paths may still pass through them).
    """
    limit = radius * (1.0 + REL_TOL)
    return _ball_pairs_kernel(
        csr.indptr.astype(np.int64),
        csr.indices.astype(np.int64),
        csr.data.astype(np.float64),
        np.asarray(local, dtype=np.int64),
        float(limit),
    )


def graph_pair_distances(csr, src, dst):
    """Exact shortest-path lengths for aligned vertex arrays (early exit)."""
    return _pair_distance_kernel(
        csr.indptr.astype(np.int64),
        csr.indices.astype(np.int64),
        csr.data.astype(np.float64),
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
    )
