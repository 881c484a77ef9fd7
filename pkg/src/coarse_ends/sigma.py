"""Escape chains from the base point and their classes among end threads.

A finite stand-in for a coarse sequence is a chain of steps ``<= R`` that
starts at the base point and reaches the escape shell near the truncation
radius. Two such chains are identified when their terminal points lie in
the same component of the outermost annulus, i.e. on the same thread.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .core import bornologous_modulus
from .errors import InstanceError
from .filtration import _match_scale
from .neighbors import REL_TOL


@dataclass(frozen=True)
class EscapeChain:
    R: float
    ids: tuple
    shell_radius: float

    def __len__(self):
        return len(self.ids)

    def to_dict(self):
        return {"R": self.R, "ids": list(self.ids), "shell_radius": self.shell_radius}


def _shell_radius(instance, margin, r_outer=0.0):
    if not 0.0 < margin < 1.0:
        raise InstanceError("margin must lie strictly between 0 and 1")
    return max((1.0 - margin) * instance.truncation_radius, r_outer)


def _bfs(instance, R):
    """Hop depth from the base point and min-id BFS parents (-1 if unreached)."""
    adj = instance.adjacency(R)
    n = len(instance)
    order, pred = csgraph.breadth_first_order(adj, instance.base_index, directed=False, return_predecessors=True)
    depth = np.full(n, -1, dtype=np.int64)
    depth[instance.base_index] = 0
    # BFS layers in visiting order: each vertex sits one layer below its first visitor
    for x in order[1:]:
        depth[x] = depth[pred[x]] + 1
    coo = adj.tocoo()
    u, v = coo.row.astype(np.int64), coo.col.astype(np.int64)
    parent = np.full(n, n, dtype=np.int64)
    ok = (depth[u] >= 0) & (depth[v] == depth[u] + 1)
    np.minimum.at(parent, v[ok], u[ok])
    parent[parent == n] = -1
    return depth, parent


def _trace(instance, parent, target):
    path = [target]
    while parent[path[-1]] >= 0:
        path.append(int(parent[path[-1]]))
    return tuple(instance.ids[k] for k in reversed(path))


def _reachable_shell(instance, R, shell):
    depth, parent = _bfs(instance, R)
    hit = np.nonzero((depth >= 0) & (instance.radii >= shell * (1.0 - REL_TOL)) & np.isfinite(instance.radii))[0]
    return depth, parent, hit


def find_escape_chain(instance, R, margin=0.1, r_outer=0.0):
    """Fewest-step chain from the base point to the escape shell, or None.

    Ties are broken toward the smallest point id, both for the terminal
    point and for every predecessor along the way.
    """
    if not R > 0:
        raise InstanceError("R must be positive")
    shell = _shell_radius(instance, margin, r_outer)
    depth, parent, hit = _reachable_shell(instance, R, shell)
    if hit.size == 0:
        return None
    best = hit[np.lexsort((hit, depth[hit]))[0]]
    return EscapeChain(float(R), _trace(instance, parent, int(best)), shell)


@dataclass(frozen=True)
class SigmaClass:
    R_index: int
    thread: int  # outermost-annulus component label (minimum point index)
    chain: EscapeChain


@dataclass(frozen=True)
class ScaleEntry:
    R: float
    exists: bool
    chain: EscapeChain | None
    classes: tuple[SigmaClass, ...]


@dataclass(eq=False)
class SigmaReport:
    instance: object
    ladder: object
    margin: float
    shell_radius: float
    scales: list[ScaleEntry]
    merges: list[dict] = field(default_factory=list)

    def classes(self, R_index=-1):
        return self.scales[R_index].classes

    def class_count(self, R_index=-1):
        return len(self.scales[R_index].classes)

    def to_dict(self):
        ids = self.instance.ids
        return {
            "instance": self.instance.name,
            "margin": self.margin,
            "shell_radius": self.shell_radius,
            "units": "metric",
            "scales": [
                {"R": e.R, "exists": e.exists,
                 "chain": None if e.chain is None else e.chain.to_dict(),
                 "classes": [{"thread": ids[c.thread], "chain": c.chain.to_dict()} for c in e.classes]}
                for e in self.scales
            ],
            "merges": self.merges,
            "class_count": self.class_count(),
        }


def sigma_report(instance, ladder, margin=0.1, system=None):
    """Escape-chain classes at every ladder scale, with their merge history."""
    from .filtration import build_end_system

    if system is None:
        system = build_end_system(instance, ladder)
    nr = system.shape[0]
    shell = _shell_radius(instance, margin, ladder.r_values[-1])
    entries = []
    for j, R in enumerate(ladder.R_values):
        depth, parent, hit = _reachable_shell(instance, R, shell)
        if hit.size == 0:
            entries.append(ScaleEntry(R, False, None, ()))
            continue
        best = hit[np.lexsort((hit, depth[hit]))[0]]
        chain = EscapeChain(R, _trace(instance, parent, int(best)), shell)
        outer = system.labels[nr - 1, j, hit]
        classes = []
        for lab in np.unique(outer):
            members = hit[outer == lab]
            rep = members[np.lexsort((members, depth[members]))[0]]
            classes.append(SigmaClass(j, int(lab), EscapeChain(R, _trace(instance, parent, int(rep)), shell)))
        entries.append(ScaleEntry(R, True, chain, tuple(classes)))
    merges = []
    for j in range(len(entries) - 1):
        fwd = {instance.ids[c.thread]: instance.ids[int(system.labels[nr - 1, j + 1, c.thread])]
               for c in entries[j].classes}
        merges.append({"R_from": entries[j].R, "R_to": entries[j + 1].R, "map": fwd})
    return SigmaReport(instance, ladder, margin, shell, entries, merges)


@dataclass(frozen=True)
class OmegaMap:
    """Classes to threads at every scale."""

    mapping: tuple[dict, ...]  # per scale: class thread label -> thread index
    thread_counts: tuple[int, ...]

    def injective(self, j=-1):
        m = self.mapping[j]
        return len(set(m.values())) == len(m)

    def surjective(self, j=-1):
        return len(set(self.mapping[j].values())) == self.thread_counts[j]

    def bijective(self, j=-1):
        return self.injective(j) and self.surjective(j)

    def to_dict(self):
        return {"scales": [{"map": {str(k): v for k, v in m.items()}, "threads": t,
                            "injective": len(set(m.values())) == len(m),
                            "surjective": len(set(m.values())) == t}
                           for m, t in zip(self.mapping, self.thread_counts)]}


def omega_map(report, system):
    """Send each class to the thread holding its chain's terminal point."""
    from .filtration import threads

    if report.instance is not system.instance and not report.instance.same_space(system.instance):
        raise InstanceError("report and end system were built on different instances")
    nr = system.shape[0]
    maps, counts = [], []
    for j, entry in enumerate(report.scales):
        ths = threads(system, j)
        index = {system.instance.index(t.representative): q for q, t in enumerate(ths)}
        m = {}
        for c in entry.classes:
            end = system.instance.index(c.chain.ids[-1])
            m[c.thread] = index[int(system.labels[nr - 1, j, end])]
        maps.append(m)
        counts.append(len(ths))
    return OmegaMap(tuple(maps), tuple(counts))


def sigma_class_map(fmap, report_x, report_y, sys_y):
    """Push escape-chain classes forward along a map sample.

    A class at source scale ``R`` goes to the target class, at the smallest
    target scale ``>= S(R)``, whose thread holds the image of the chain's
    terminal point. Returns ``{(j, thread): (l, target_thread)}``; classes
    whose image leaves the target's outermost annulus are omitted.
    """
    modulus = bornologous_modulus(fmap, report_x.ladder)
    nr_y = sys_y.shape[0]
    src = fmap.source
    out = {}
    for j, entry in enumerate(report_x.scales):
        l = _match_scale(sys_y.ladder.R_values, modulus.S_values[j])
        if l is None:
            continue
        y_threads = {c.thread for c in report_y.scales[l].classes}
        for c in entry.classes:
            end = int(fmap.assignment[src.index(c.chain.ids[-1])])
            lab = int(sys_y.labels[nr_y - 1, l, end])
            if lab >= 0 and lab in y_threads:
                out[(j, c.thread)] = (l, lab)
    return out


def naturality_violations(fmap, induced, report_x, report_y, sys_x, sys_y):
    """Cells where the induced end map disagrees with the pushed-forward class.

    For each class ``c`` at source scale ``j`` the outermost cell map sends
    ``omega_X(c)`` to some target cell; ``omega_Y`` of the pushed class is
    transported to that same cell and the two labels must coincide.
    """
    cmap = sigma_class_map(fmap, report_x, report_y, sys_y)
    nr_x, nr_y = sys_x.shape[0], sys_y.shape[0]
    bad, checked = [], 0
    for (j, thread), (l, y_thread) in sorted(cmap.items()):
        cell = (nr_x - 1, j)
        if cell not in induced.cells:
            continue
        cm = induced.cells[cell]
        k, l2 = cm.target
        common = (k, max(l, l2))
        lhs = induced.apply(cell, thread, common)
        rhs = sys_y.push(y_thread, (nr_y - 1, l), common)
        checked += 1
        if lhs != rhs:
            bad.append((j, thread))
    return bad, checked
