"""Finite pointed pseudometric instances and coarse-map checks at finite scale.

An instance is a finite window ``{x : d(x, base) <= rho_max}`` into an
unbounded space. Distances live in the extended reals: graph instances may
contain pairs at distance ``inf`` (different coarse components).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import ConvexHull, cKDTree

from .errors import InstanceError, MapError
from .neighbors import cloud_distance, graph_pair_distances, graph_pairs, grid_pairs, within

METRICS = ("euclidean", "chebyshev", "graph")

# Graph instances at or below this many vertices get a full distance table.
ALL_PAIRS_LIMIT = 2048
# Exact hop diameters are computed up to this many points.
HOP_EXACT_LIMIT = 3000


@dataclass(frozen=True)
class ScaleLadder:
    """Cut-off radii ``r`` (ball sizes) and entourage scales ``R``."""

    r_values: tuple[float, ...]
    R_values: tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(v) for v in self.r_values)
        big = tuple(float(v) for v in self.R_values)
        object.__setattr__(self, "r_values", r)
        object.__setattr__(self, "R_values", big)
        if not r or r[0] != 0.0:
            raise InstanceError("r_values must start at 0")
        if not big:
            raise InstanceError("R_values must be nonempty")
        if not all(math.isfinite(v) for v in r + big):
            raise InstanceError("ladder values must be finite")
        if any(b <= a for a, b in zip(r, r[1:])) or any(b <= a for a, b in zip(big, big[1:])):
            raise InstanceError("ladder values must be strictly ascending")
        if big[0] <= 0:
            raise InstanceError("R_values must be positive")

    @classmethod
    def default(cls, rho_max):
        """r in {0, rho/16, rho/8, rho/4, 0.45 rho}; R in {1, 2, 4, 8}."""
        rho = float(rho_max)
        return cls((0.0, rho / 16, rho / 8, rho / 4, rho / 2 * 0.9), (1.0, 2.0, 4.0, 8.0))

    def check(self, instance):
        if self.r_values[-1] >= instance.truncation_radius:
            raise InstanceError(
                f"largest cut-off {self.r_values[-1]} must be below rho_max {instance.truncation_radius}"
            )

    def to_dict(self):
        return {"r": list(self.r_values), "R": list(self.R_values), "units": "metric"}


class FiniteCoarseInstance:
    """A finite pointed pseudometric space.

    Points are stored in ascending id order, so the minimum point id of a set
    is also its minimum internal index. Instances are immutable after
    construction; the lazily filled distance caches are guarded by a lock.
    """

    def __init__(self, *, ids, metric_kind, basepoint, truncation_radius, radii,
                 coords=None, graph=None, graph_ids=None, graph_index=None,
                 dropped=0, name=None):
        self.ids = tuple(ids)
        self.metric_kind = metric_kind
        self.basepoint = basepoint
        self.truncation_radius = float(truncation_radius)
        self.radii = radii
        self.coords = coords
        self.dropped = dropped
        self.name = name
        self._graph = graph
        self._graph_ids = graph_ids
        self._graph_index = graph_index
        self._index = {pid: i for i, pid in enumerate(self.ids)}
        self.base_index = self._index[basepoint]
        self._lock = threading.Lock()
        self._rows: dict[int, np.ndarray] = {}
        self._table = None
        self._pairs = None
        self._pairs_radius = -1.0
        if graph is not None:
            local = np.full(graph.shape[0], -1, dtype=np.int64)
            local[graph_index] = np.arange(len(self.ids))
            self._local = local
        for arr in (self.radii, self.coords):
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        return (f"FiniteCoarseInstance(name={self.name!r}, n={len(self)}, "
                f"metric={self.metric_kind!r}, rho_max={self.truncation_radius:g})")

    @property
    def is_graph(self):
        return self.metric_kind == "graph"

    def index(self, pid):
        try:
            return self._index[pid]
        except KeyError:
            raise InstanceError(f"unknown point id {pid!r}") from None

    def same_space(self, other):
        if self is other:
            return True
        if (self.ids != other.ids or self.metric_kind != other.metric_kind
                or self.basepoint != other.basepoint):
            return False
        if self.coords is not None:
            return other.coords is not None and np.array_equal(self.coords, other.coords)
        return (self._graph != other._graph).nnz == 0

    # -- distances -----------------------------------------------------------

    def _row(self, i):
        """Distances from point ``i`` to every instance point."""
        if not self.is_graph:
            return cloud_distance(self.coords, self.coords[i], self.metric_kind)
        with self._lock:
            if self._table is not None:
                return self._table[i]
            row = self._rows.get(i)
            if row is None:
                full = csgraph.dijkstra(self._graph, directed=False, indices=int(self._graph_index[i]))
                row = full[self._graph_index]
                row.setflags(write=False)
                self._rows[i] = row
            return row

    def _ensure_table(self):
        with self._lock:
            if self._table is None:
                full = csgraph.dijkstra(self._graph, directed=False, indices=self._graph_index)
                self._table = full[:, self._graph_index]
                self._table.setflags(write=False)
            return self._table

    def distance(self, p, q):
        """Distance between two point ids (``inf`` if unreachable)."""
        i, j = self.index(p), self.index(q)
        if i == j:
            return 0.0
        return float(self.pair_distances(np.array([i]), np.array([j]))[0])

    def distances_from(self, i):
        return self._row(i)

    def pair_distances(self, left, right):
        """Distances for aligned arrays of internal indices."""
        left = np.asarray(left, dtype=np.int64)
        right = np.asarray(right, dtype=np.int64)
        if not self.is_graph:
            return cloud_distance(self.coords[left], self.coords[right], self.metric_kind)
        if self._graph.shape[0] <= ALL_PAIRS_LIMIT:
            return self._ensure_table()[left, right]
        out = np.empty(left.size)
        same = left == right
        out[same] = 0.0
        rest = ~same
        gi = self._graph_index
        out[rest] = graph_pair_distances(self._graph, gi[left[rest]], gi[right[rest]])
        return out

    def neighbor_pairs(self, radius):
        """All pairs ``i < j`` with ``d(i, j) <= radius`` as ``(i, j, d)`` arrays."""
        radius = float(radius)
        with self._lock:
            if self._pairs is not None and radius <= self._pairs_radius:
                i, j, d = self._pairs
                if radius == self._pairs_radius:
                    return i, j, d
                keep = within(d, radius)
                return i[keep], j[keep], d[keep]
        if self.is_graph:
            i, j, d = graph_pairs(self._graph, self._local, radius)
        else:
            i, j, d = grid_pairs(self.coords, radius, self.metric_kind)
        order = np.lexsort((j, i))
        triple = (i[order], j[order], d[order])
        for arr in triple:
            arr.setflags(write=False)
        with self._lock:
            if radius > self._pairs_radius:
                self._pairs, self._pairs_radius = triple, radius
        return triple

    def adjacency(self, radius):
        """Symmetric boolean adjacency matrix of the step-``radius`` relation."""
        i, j, _ = self.neighbor_pairs(radius)
        n = len(self)
        data = np.ones(2 * i.size, dtype=np.int8)
        return sparse.csr_matrix((data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))

    def rebased(self, new_basepoint):
        """The same point set viewed from another base point.

        The truncation radius grows to the largest finite distance from the
        new base point, so nothing is dropped.
        """
        b = self.index(new_basepoint)
        radii = np.array(self._row(b), dtype=np.float64)
        finite = radii[np.isfinite(radii)]
        rho = float(finite.max()) if finite.size else 0.0
        return FiniteCoarseInstance(
            ids=self.ids, metric_kind=self.metric_kind, basepoint=new_basepoint,
            truncation_radius=rho, radii=radii,
            coords=None if self.coords is None else self.coords.copy(),
            graph=self._graph, graph_ids=self._graph_ids, graph_index=self._graph_index,
            dropped=0, name=self.name,
        )


def _sorted_ids(ids):
    try:
        order = sorted(range(len(ids)), key=lambda k: ids[k])
    except TypeError:
        raise InstanceError("point ids must be mutually comparable") from None
    return order


def build_instance(raw, metric_kind, basepoint, truncation_radius, *, name=None):
    """Build a truncated instance from a point table or a graph description.

    Cloud input: a mapping ``id -> coordinates`` or a sequence of
    ``(id, coordinates)``. Graph input: a mapping with ``"edges"`` (triples
    ``(u, v, w)``) and optional ``"vertices"``. Points farther than
    ``truncation_radius`` from the base point are dropped and counted in
    ``instance.dropped``; graph vertices unreachable from the base point are
    kept, at distance ``inf``.
    """
    if metric_kind not in METRICS:
        raise InstanceError(f"unknown metric kind {metric_kind!r}")
    rho = float(truncation_radius)
    if not rho >= 0 or not math.isfinite(rho):
        raise InstanceError("truncation radius must be a finite nonnegative number")
    if metric_kind == "graph":
        return _build_graph(raw, basepoint, rho, name)
    return _build_cloud(raw, metric_kind, basepoint, rho, name)


def _build_cloud(raw, metric_kind, basepoint, rho, name):
    items = list(raw.items()) if isinstance(raw, Mapping) else list(raw)
    if not items:
        raise InstanceError("empty point table")
    ids = [pid for pid, _ in items]
    if len(set(ids)) != len(ids):
        raise InstanceError("duplicate point ids")
    try:
        coords = np.array([np.atleast_1d(np.asarray(c, dtype=np.float64)) for _, c in items])
    except ValueError:
        raise InstanceError("points must all have the same dimension") from None
    if coords.ndim != 2:
        raise InstanceError("points must all have the same dimension")
    if not np.all(np.isfinite(coords)):
        raise InstanceError("coordinates must be finite")
    order = _sorted_ids(ids)
    ids = [ids[k] for k in order]
    coords = coords[order]
    if basepoint not in set(ids):
        raise InstanceError(f"basepoint {basepoint!r} not among the points")
    b = ids.index(basepoint)
    radii = cloud_distance(coords, coords[b], metric_kind)
    keep = within(radii, rho)
    kept_ids = [pid for pid, k in zip(ids, keep) if k]
    return FiniteCoarseInstance(
        ids=kept_ids, metric_kind=metric_kind, basepoint=basepoint, truncation_radius=rho,
        radii=np.ascontiguousarray(radii[keep]), coords=np.ascontiguousarray(coords[keep]),
        dropped=int((~keep).sum()), name=name,
    )


def _build_graph(raw, basepoint, rho, name):
    edges = list(raw.get("edges", ()))
    vertices = list(raw.get("vertices", ()))
    seen = dict.fromkeys(vertices)
    for e in edges:
        if len(e) != 3:
            raise InstanceError(f"edge {e!r} must be a (u, v, w) triple")
        u, v, w = e
        if not float(w) >= 0 or not math.isfinite(float(w)):
            raise InstanceError(f"edge ({u!r}, {v!r}) has invalid weight {w!r}")
        seen.setdefault(u)
        seen.setdefault(v)
    if not seen:
        raise InstanceError("empty graph")
    gids = list(seen)
    order = _sorted_ids(gids)
    gids = [gids[k] for k in order]
    pos = {pid: k for k, pid in enumerate(gids)}
    if basepoint not in pos:
        raise InstanceError(f"basepoint {basepoint!r} not among the vertices")
    nv = len(gids)
    if edges:
        u = np.array([pos[e[0]] for e in edges], dtype=np.int64)
        v = np.array([pos[e[1]] for e in edges], dtype=np.int64)
        w = np.array([float(e[2]) for e in edges])
        loops = u == v
        u, v, w = u[~loops], v[~loops], w[~loops]
        a, b = np.minimum(u, v), np.maximum(u, v)
        # parallel edges: keep the lightest
        key = np.lexsort((w, b, a))
        a, b, w = a[key], b[key], w[key]
        first = np.ones(a.size, dtype=bool)
        first[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
        a, b, w = a[first], b[first], w[first]
        # explicit zeros would vanish from a sparse matrix
        w = np.where(w == 0.0, np.finfo(float).tiny, w)
        graph = sparse.csr_matrix((np.concatenate([w, w]), (np.concatenate([a, b]), np.concatenate([b, a]))),
                                  shape=(nv, nv))
    else:
        graph = sparse.csr_matrix((nv, nv))
    graph.sort_indices()
    full = csgraph.dijkstra(graph, directed=False, indices=pos[basepoint])
    keep = within(full, rho) | np.isinf(full)
    gindex = np.nonzero(keep)[0]
    return FiniteCoarseInstance(
        ids=[gids[k] for k in gindex], metric_kind="graph", basepoint=basepoint,
        truncation_radius=rho, radii=np.ascontiguousarray(full[gindex]),
        graph=graph, graph_ids=gids, graph_index=gindex,
        dropped=int((~keep).sum()), name=name,
    )


def distance(instance, p, q):
    return instance.distance(p, q)


def subset_diameter(instance, points):
    """Maximum pairwise distance over a nonempty set of point ids."""
    idx = np.unique([instance.index(p) for p in points])
    if idx.size == 0:
        raise InstanceError("diameter of an empty set is undefined")
    if idx.size == 1:
        return 0.0
    if instance.is_graph:
        return float(max(instance.distances_from(i)[idx].max() for i in idx))
    pts = instance.coords[idx]
    if instance.metric_kind == "chebyshev":
        return float((pts.max(axis=0) - pts.min(axis=0)).max())
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    if idx.size > 64:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:
            pass  # degenerate hull (collinear etc.): fall through to all pairs
    best = 0.0
    for k in range(0, len(pts), 512):
        block = cloud_distance(pts[k:k + 512, None, :], pts[None, :, :], "euclidean")
        best = max(best, float(block.max()))
    return best


def is_controlled_relation(instance, pairs):
    """Largest step of a relation given as point-id pairs (0 for no pairs)."""
    pairs = list(pairs)
    if not pairs:
        return 0.0
    left = np.array([instance.index(p) for p, _ in pairs])
    right = np.array([instance.index(q) for _, q in pairs])
    return float(instance.pair_distances(left, right).max())


def is_coarsely_connected(instance):
    """True iff every pair of points is at finite distance."""
    if not instance.is_graph:
        return True
    return bool(np.all(np.isfinite(instance.radii)))


@dataclass(frozen=True)
class ArchimedeanResult:
    connected: bool
    max_hops: int | None


def archimedean_check(instance, R):
    """Whether the whole instance is chained together by steps ``<= R``.

    ``max_hops`` is the hop diameter (the largest over pairs of the fewest
    steps needed); it is only computed for up to ``HOP_EXACT_LIMIT`` points.
    """
    if not R > 0:
        raise InstanceError("R must be positive")
    adj = instance.adjacency(R)
    ncomp = csgraph.connected_components(adj, directed=False, return_labels=False)
    if ncomp != 1:
        return ArchimedeanResult(False, None)
    if len(instance) > HOP_EXACT_LIMIT:
        return ArchimedeanResult(True, None)
    hops = csgraph.shortest_path(adj, directed=False, unweighted=True)
    return ArchimedeanResult(True, int(hops.max()))


# -- map samples -------------------------------------------------------------


@dataclass(eq=False)
class CoarseMapSample:
    """A total map between two instances, stored as target indices."""

    source: FiniteCoarseInstance
    target: FiniteCoarseInstance
    assignment: np.ndarray
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.shape != (len(self.source),):
            raise MapError("assignment must cover every source point")
        if a.size and (a.min() < 0 or a.max() >= len(self.target)):
            raise MapError("assignment refers to unknown target points")
        a.setflags(write=False)
        self.assignment = a
        fb = int(a[self.source.base_index])
        if not math.isfinite(self.target.radii[fb]):
            raise MapError("base point must map to a point finitely close to the target base point")

    def image_ids(self):
        return {self.source.ids[i]: self.target.ids[j] for i, j in enumerate(self.assignment)}

    def compose(self, other):
        """``other after self``."""
        if not self.target.same_space(other.source):
            raise MapError("maps are not composable")
        return CoarseMapSample(self.source, other.target, other.assignment[self.assignment],
                               name=f"{other.name}*{self.name}")


def map_from_ids(source, target, mapping, name=""):
    """Map sample from a dict or callable on point ids."""
    get = mapping if callable(mapping) else mapping.__getitem__
    try:
        a = np.array([target.index(get(pid)) for pid in source.ids], dtype=np.int64)
    except KeyError as exc:
        raise MapError(f"mapping undefined at {exc.args[0]!r}") from None
    return CoarseMapSample(source, target, a, name=name)


def map_from_function(source, target, fn, name=""):
    """Apply ``fn`` to source coordinates and snap to the nearest target point."""
    if source.coords is None or target.coords is None:
        raise MapError("coordinate maps need point-cloud instances")
    img = np.asarray(fn(source.coords), dtype=np.float64).reshape(len(source), -1)
    p = np.inf if target.metric_kind == "chebyshev" else 2
    _, idx = cKDTree(target.coords).query(img, p=p)
    return CoarseMapSample(source, target, idx, name=name)


def identity_map(instance):
    return CoarseMapSample(instance, instance, np.arange(len(instance)), name="identity")


def constant_map(source, target, target_id=None):
    j = target.base_index if target_id is None else target.index(target_id)
    return CoarseMapSample(source, target, np.full(len(source), j), name="constant")


@dataclass(frozen=True)
class ModulusReport:
    """Bornologous modulus ``S(R)`` at each ladder scale."""

    R_values: tuple[float, ...]
    S_values: tuple[float, ...]

    @property
    def ok(self):
        return all(math.isfinite(s) for s in self.S_values)

    def to_dict(self):
        return {"R": list(self.R_values), "S": [_num(s) for s in self.S_values],
                "bornologous": self.ok, "units": "metric"}


def bornologous_modulus(fmap, ladder):
    """``S(R) = sup{d(f x, f y) : d(x, y) <= R}`` for every ladder scale."""
    big = ladder.R_values
    i, j, d = fmap.source.neighbor_pairs(big[-1])
    fi, fj = fmap.assignment[i], fmap.assignment[j]
    img = fmap.target.pair_distances(fi, fj) if i.size else np.empty(0)
    out = []
    for R in big:
        mask = within(d, R)
        out.append(float(img[mask].max()) if mask.any() else 0.0)
    return ModulusReport(tuple(big), tuple(out))


@dataclass(frozen=True)
class PropernessReport:
    """Largest source radius over the preimage of each target ball."""

    r_values: tuple[float, ...]
    preimage_radius: tuple[float, ...]
    proper: bool

    def to_dict(self):
        return {"r": list(self.r_values), "preimage_radius": [_num(v) for v in self.preimage_radius],
                "proper": self.proper, "units": "metric"}


def properness_report(fmap, ladder):
    """Preimage radii of the target balls ``B(eta, r)`` for ladder cut-offs.

    The map is flagged proper at these scales when every radius is finite
    and the preimages avoid the outermost source points.
    """
    src_r = fmap.source.radii
    img_r = fmap.target.radii[fmap.assignment]
    out = []
    for r in ladder.r_values:
        mask = within(img_r, r)
        out.append(float(src_r[mask].max()) if mask.any() else 0.0)
    finite = src_r[np.isfinite(src_r)]
    outer = float(finite.max()) if finite.size else 0.0
    proper = all(math.isfinite(v) for v in out) and all(v < outer for v in out)
    return PropernessReport(tuple(ladder.r_values), tuple(out), proper)


def homotopy_distance(f, g):
    """``sup_x d(f x, g x)`` over all source points."""
    if not (f.source.same_space(g.source) and f.target.same_space(g.target)):
        raise MapError("homotopy distance needs maps with the same source and target")
    if len(f.source) == 0:
        return 0.0
    return float(f.target.pair_distances(f.assignment, g.assignment).max())


def _num(x):
    """JSON-safe number: infinities become strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf"
    return x
