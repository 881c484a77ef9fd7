"""The (r, R) grid of annulus partitions and its transition maps.

Cell ``(i, j)`` partitions the annulus ``{x : d(x, base) >= r_i}`` into
classes of points chained together by steps of length at most ``R_j``.
Every component is labelled by its minimum point index, so a transition
map is a plain lookup: the image of component ``c`` under inclusion or
coarsening is the label of point ``c`` in the other cell.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import CoarseMapSample, ScaleLadder, bornologous_modulus, properness_report
from .errors import InstanceError, MapError
from .neighbors import REL_TOL, within
from .unionfind import annulus_labels


def _thresholds(r_values):
    return np.array([r * (1.0 - REL_TOL) for r in r_values])


@dataclass(frozen=True)
class Partition:
    """Component labels of one annulus at one scale."""

    ids: tuple
    labels: np.ndarray  # minimum member index per point, -1 outside the annulus

    @property
    def count(self):
        return int(np.unique(self.labels[self.labels >= 0]).size)

    def representatives(self):
        """Sorted internal indices of the component minima."""
        return np.unique(self.labels[self.labels >= 0])

    def as_dict(self):
        """Point id -> id of the minimum point of its component."""
        return {self.ids[i]: self.ids[c] for i, c in enumerate(self.labels) if c >= 0}

    def components(self):
        out = {}
        for i in np.nonzero(self.labels >= 0)[0]:
            out.setdefault(self.ids[self.labels[i]], []).append(self.ids[i])
        return out


def chain_components(instance, r, R):
    """Partition of ``{x : d(x, base) >= r}`` by chains with steps ``<= R``."""
    if not R > 0:
        raise InstanceError("R must be positive")
    i, j, _ = instance.neighbor_pairs(R)
    labels = annulus_labels(instance.radii, i, j, _thresholds([r]))
    return Partition(instance.ids, labels[0])


@dataclass(frozen=True)
class Thread:
    """A component of the outermost annulus traced down through every level."""

    R_index: int
    labels: tuple[int, ...]  # component label at each r level, innermost first
    representative: object   # point id of the outermost component's minimum


@dataclass(eq=False)
class EndSystem:
    instance: object
    ladder: ScaleLadder
    labels: np.ndarray  # shape (n_r, n_R, n_points)
    down_maps: dict = field(default_factory=dict)
    coarsen_maps: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.labels.shape[:2]

    def cell(self, i, j):
        return Partition(self.instance.ids, self.labels[i, j])

    def counts(self):
        nr, nR = self.shape
        return np.array([[self.cell(i, j).count for j in range(nR)] for i in range(nr)], dtype=np.int64)

    def reps(self, i, j):
        return self.cell(i, j).representatives()

    def down(self, i_from, i_to, j):
        """Inclusion-induced map from components at ``r[i_from]`` to ``r[i_to]``."""
        if i_to > i_from:
            raise ValueError("down maps go from larger to smaller cut-offs")
        return {int(c): int(self.labels[i_to, j, c]) for c in self.reps(i_from, j)}

    def coarsen(self, i, j_from, j_to):
        """Refinement-induced map from components at ``R[j_from]`` to ``R[j_to]``."""
        if j_to < j_from:
            raise ValueError("coarsening maps go from smaller to larger scales")
        return {int(c): int(self.labels[i, j_to, c]) for c in self.reps(i, j_from)}

    def push(self, label, cell_from, cell_to):
        """Image of a component under the transition maps between two cells."""
        (i, j), (k, l) = cell_from, cell_to
        if k > i or l < j:
            raise ValueError(f"no transition map from cell {cell_from} to {cell_to}")
        return int(self.labels[k, l, label])

    def to_dict(self, window=3):
        inst = self.instance
        counts = self.counts()
        cells = [
            {"r": self.ladder.r_values[i], "R": self.ladder.R_values[j], "count": int(counts[i, j])}
            for i in range(counts.shape[0]) for j in range(counts.shape[1])
        ]
        threads_out = []
        for j in range(self.shape[1]):
            for th in threads(self, j):
                threads_out.append({
                    "R": self.ladder.R_values[j],
                    "representative": th.representative,
                    "components": [inst.ids[c] for c in th.labels],
                })
        report = {
            "instance": {"name": inst.name, "points": len(inst), "dropped": inst.dropped,
                         "metric": inst.metric_kind, "basepoint": inst.basepoint,
                         "rho_max": inst.truncation_radius},
            "ladder": self.ladder.to_dict(),
            "cells": cells,
            "threads": threads_out,
        }
        if min(self.shape) >= window:
            report["stability"] = stable_end_count(self, window).to_dict()
        return report

    def counts_csv(self):
        counts = self.counts()
        lines = ["r,R,count"]
        for i, r in enumerate(self.ladder.r_values):
            for j, R in enumerate(self.ladder.R_values):
                lines.append(f"{r!r},{R!r},{int(counts[i, j])}")
        return "\n".join(lines) + "\n"


def build_end_system(instance, ladder, jobs=1):
    """All cells of the ladder grid plus adjacent transition maps.

    Scales are independent, so with ``jobs > 1`` they are filled by a thread
    pool (the union-find kernel releases the GIL).
    """
    ladder.check(instance)
    thr = _thresholds(ladder.r_values)[::-1].copy()
    # one neighbor search at the largest scale, filtered per scale
    instance.neighbor_pairs(ladder.R_values[-1])

    def one_scale(R):
        i, j, _ = instance.neighbor_pairs(R)
        return annulus_labels(instance.radii, i, j, thr)[::-1]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_scale = list(pool.map(one_scale, ladder.R_values))
    else:
        per_scale = [one_scale(R) for R in ladder.R_values]
    labels = np.stack(per_scale, axis=1)
    labels.setflags(write=False)
    system = EndSystem(instance, ladder, labels)
    nr, nR = system.shape
    for j in range(nR):
        for i in range(1, nr):
            system.down_maps[(i, i - 1, j)] = system.down(i, i - 1, j)
    for i in range(nr):
        for j in range(nR - 1):
            system.coarsen_maps[(i, j, j + 1)] = system.coarsen(i, j, j + 1)
    return system


def threads(system, R_index):
    """One thread per component of the outermost annulus at scale ``R_index``."""
    nr = system.shape[0]
    out = []
    for c in system.reps(nr - 1, R_index):
        trail = [int(system.labels[i, R_index, c]) for i in range(nr)]
        out.append(Thread(R_index, tuple(trail), system.instance.ids[c]))
    return out


STABILIZED, SPARSE, INCONCLUSIVE = "stabilized", "sparse", "inconclusive"


@dataclass(frozen=True)
class StabilityReport:
    status: str
    k: int | None
    window_r: tuple[float, ...]
    window_R: tuple[float, ...]
    counts: tuple[tuple[int, ...], ...]  # full table, rows indexed by r

    def __str__(self):
        if self.status == STABILIZED:
            return f"Stabilized({self.k})"
        return self.status.capitalize()

    def to_dict(self):
        return {"status": self.status, "k": self.k, "label": str(self),
                "window": {"r": list(self.window_r), "R": list(self.window_R)},
                "counts": [list(row) for row in self.counts]}

    @classmethod
    def from_dict(cls, data):
        return cls(data["status"], data["k"], tuple(data["window"]["r"]), tuple(data["window"]["R"]),
                   tuple(tuple(row) for row in data["counts"]))


def _bijective(mapping):
    return len(set(mapping.values())) == len(mapping)


def stable_end_count(system, window=3):
    """Diagnose the top-right ``window x window`` block of the count table.

    Stabilized(k): every count in the block is k and every transition map
    inside it is a bijection. Sparse: at every scale in the block the count
    strictly grows as the cut-off shrinks (each inner annulus has more
    components). Otherwise Inconclusive.
    """
    nr, nR = system.shape
    if window < 1 or nr < window or nR < window:
        raise InstanceError(f"ladder needs at least {window} cut-offs and {window} scales")
    rows = range(nr - window, nr)
    cols = range(nR - window, nR)
    counts = system.counts()
    block = counts[np.ix_(list(rows), list(cols))]
    ladder = system.ladder
    win_r = tuple(ladder.r_values[i] for i in rows)
    win_R = tuple(ladder.R_values[j] for j in cols)
    table = tuple(tuple(int(v) for v in row) for row in counts)
    k = int(block[0, 0])
    if np.all(block == k):
        maps_ok = all(_bijective(system.down(i, i - 1, j)) for j in cols for i in list(rows)[1:])
        maps_ok = maps_ok and all(_bijective(system.coarsen(i, j, j + 1)) for i in rows for j in list(cols)[:-1])
        if maps_ok:
            return StabilityReport(STABILIZED, k, win_r, win_R, table)
    if window > 1 and np.all(np.diff(block, axis=0) < 0):
        return StabilityReport(SPARSE, None, win_r, win_R, table)
    return StabilityReport(INCONCLUSIVE, None, win_r, win_R, table)


# -- induced maps --------------------------------------------------------------


@dataclass(frozen=True)
class CellMap:
    target: tuple[int, int]
    mapping: dict  # source component label -> target component label


@dataclass(eq=False)
class InducedEndMap:
    fmap: CoarseMapSample
    source: EndSystem
    target: EndSystem
    cells: dict  # (i, j) -> CellMap

    def apply(self, cell, label, to_cell=None):
        """Image of a source component, optionally pushed to a coarser target cell."""
        cm = self.cells[cell]
        out = cm.mapping[label]
        if to_cell is not None and to_cell != cm.target:
            out = self.target.push(out, cm.target, to_cell)
        return out

    def thread_map(self, R_index):
        """Outermost-component map at one scale, when it lands on target threads."""
        nr = self.source.shape[0]
        cell = (nr - 1, R_index)
        cm = self.cells.get(cell)
        if cm is None or cm.target[0] != self.target.shape[0] - 1:
            return None
        return dict(cm.mapping)

    def to_dict(self):
        sid, tid = self.source.instance.ids, self.target.instance.ids
        sl, tl = self.source.ladder, self.target.ladder
        out = []
        for (i, j), cm in sorted(self.cells.items()):
            k, l = cm.target
            out.append({"source_cell": {"r": sl.r_values[i], "R": sl.R_values[j]},
                        "target_cell": {"r": tl.r_values[k], "R": tl.R_values[l]},
                        "map": {str(sid[a]): tid[b] for a, b in sorted(cm.mapping.items())}})
        return {"map": self.fmap.name, "cells": out}


def _match_scale(values, s):
    """Index of the smallest ladder scale that is >= s (tolerant)."""
    for l, R in enumerate(values):
        if within(s, R):
            return l
    return None


def _match_cutoff(values, m):
    """Index of the largest ladder cut-off r with annulus(r) containing radius m."""
    best = None
    for k, r in enumerate(values):
        if m >= r * (1.0 - REL_TOL):
            best = k
    return best


def induced_end_map(fmap, sys_x, sys_y):
    """Component maps induced by a bornologous, proper map sample.

    Source cell ``(r, R)`` is sent to the target cell whose scale is the
    smallest ladder scale ``>= S(R)`` and whose cut-off is the largest
    ladder cut-off below ``min{d(f x, eta) : d(x, xi) >= r}``. Cells whose
    modulus exceeds every target scale are left out.
    """
    if not (fmap.source.same_space(sys_x.instance) and fmap.target.same_space(sys_y.instance)):
        raise MapError("end systems were built on other instances")
    modulus = bornologous_modulus(fmap, sys_x.ladder)
    if not modulus.ok:
        raise MapError(f"map {fmap.name!r} is not bornologous at ladder scales: S(R) = inf")
    proper = properness_report(fmap, sys_y.ladder)
    if not proper.proper:
        raise MapError(f"map {fmap.name!r} is not proper at ladder scales")
    img_r = fmap.target.radii[fmap.assignment]
    a = fmap.assignment
    cells = {}
    nr, nR = sys_x.shape
    for j in range(nR):
        l = _match_scale(sys_y.ladder.R_values, modulus.S_values[j])
        if l is None:
            continue
        for i in range(nr):
            src = sys_x.labels[i, j]
            members = np.nonzero(src >= 0)[0]
            if members.size == 0:
                cells[(i, j)] = CellMap((0, l), {})
                continue
            k = _match_cutoff(sys_y.ladder.r_values, float(img_r[members].min()))
            tgt = sys_y.labels[k, l, a[members]]
            mapping = {}
            for c, t in zip(src[members], tgt):
                prev = mapping.setdefault(int(c), int(t))
                if prev != t or t < 0:
                    raise MapError(f"induced map ill-defined at cell ({i}, {j})")
            cells[(i, j)] = CellMap((k, l), mapping)
    if not cells:
        raise MapError(f"map {fmap.name!r} has modulus beyond every target scale")
    return InducedEndMap(fmap, sys_x, sys_y, cells)


def compose_induced(first, second):
    """``second after first`` as cell maps, routed through ``second``'s cells."""
    cells = {}
    for cell, cm in first.cells.items():
        k, l = cm.target
        # the intermediate cell must be a source cell of the second map
        if (k, l) not in second.cells:
            continue
        cm2 = second.cells[(k, l)]
        cells[cell] = CellMap(cm2.target, {c: cm2.mapping[t] for c, t in cm.mapping.items()})
    return InducedEndMap(first.fmap.compose(second.fmap), first.source, second.target, cells)


def maps_agree(m1, m2, min_scale=None):
    """Compare two induced maps on shared source cells after pushing both
    images to the coarsest common target cell. With ``min_scale`` the common
    cell is also raised to a target scale of at least that size (cells with
    no such scale are skipped). Returns the disagreeing
    ``(source cell, label, common target cell)`` triples and the list of
    ``(source cell, common target cell)`` pairs compared.
    """
    floor = 0
    if min_scale is not None:
        floor = _match_scale(m1.target.ladder.R_values, min_scale)
        if floor is None:
            return [], []
    bad = []
    compared = []
    for cell in sorted(set(m1.cells) & set(m2.cells)):
        c1, c2 = m1.cells[cell], m2.cells[cell]
        common = (min(c1.target[0], c2.target[0]), max(c1.target[1], c2.target[1], floor))
        compared.append((cell, common))
        for label in c1.mapping:
            if m1.apply(cell, label, common) != m2.apply(cell, label, common):
                bad.append((cell, label, common))
    return bad, compared
