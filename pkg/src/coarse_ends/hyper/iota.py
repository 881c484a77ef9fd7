"""Classify declared infinite points into chain-connected classes from certificates."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from ..errors import CertificateError, InconsistentCertificates
from .certificates import verify_chain_schema, verify_gap_certificate
from .space import finitely_close, is_infinite

CONNECTED, SEPARATED, UNKNOWN = "Connected", "Separated", "Unknown"


@dataclass
class IotaReport:
    space: str
    representatives: list
    pairs: dict  # (a, b) with a < b in declaration order -> {"status", "by"}
    classes: list  # lists of representative names
    schemas: list = field(default_factory=list)  # verdict dicts
    gaps: list = field(default_factory=list)

    @property
    def decided(self):
        return all(p["status"] != UNKNOWN for p in self.pairs.values())

    @property
    def class_count(self):
        """Number of classes, or None while some pair is undecided."""
        return len(self.classes) if self.decided else None

    def status(self, a, b):
        if a == b:
            return CONNECTED
        key = (a, b) if (a, b) in self.pairs else (b, a)
        return self.pairs[key]["status"]

    def to_dict(self):
        return {
            "space": self.space,
            "representatives": list(self.representatives),
            "pairs": [{"a": a, "b": b, **v} for (a, b), v in self.pairs.items()],
            "classes": [list(c) for c in self.classes],
            "decided": self.decided,
            "class_count": self.class_count,
            "schemas": self.schemas,
            "gaps": self.gaps,
        }

    @classmethod
    def from_dict(cls, data):
        pairs = {(p["a"], p["b"]): {"status": p["status"], "by": p["by"]} for p in data["pairs"]}
        return cls(data["space"], list(data["representatives"]), pairs,
                   [list(c) for c in data["classes"]], list(data["schemas"]), list(data["gaps"]))


def iota_report(space, representatives, schemas=(), gaps=()):
    """Decide, for each pair of representatives, Connected / Separated / Unknown.

    ``representatives`` maps names to symbolic points, one per claimed class.
    Connection is closed under transitivity and separation is inherited by
    whole classes; a pair that ends up both raises
    :class:`InconsistentCertificates`.
    """
    names = list(representatives)
    for n in names:
        if not is_infinite(representatives[n], space):
            raise CertificateError(f"representative {n!r} is not an infinite point")
    parent = {n: n for n in names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    link_by = {}
    schema_out = []
    for sc in schemas:
        verdict = verify_chain_schema(sc, space)
        d = verdict.to_dict()
        ends = []
        if verdict.ok:
            a_side = [n for n in names if finitely_close(representatives[n], sc.start_point())]
            b_side = [n for n in names if finitely_close(representatives[n], sc.end_point())]
            for a in a_side:
                for b in b_side:
                    if a != b:
                        ends.append([a, b])
                        link_by.setdefault(frozenset((a, b)), sc.name)
                        ra, rb = find(a), find(b)
                        if ra != rb:
                            parent[max(ra, rb, key=names.index)] = min(ra, rb, key=names.index)
        d["joins"] = ends
        schema_out.append(d)

    sep_by = {}
    gap_out = []
    for gc in gaps:
        verdict = verify_gap_certificate(gc, space)
        d = verdict.to_dict()
        split = []
        if verdict.ok:
            idx_a = {space.pieces.index(space.piece(n)) for n in gc.A}
            idx_b = {space.pieces.index(space.piece(n)) for n in gc.B}
            where = {n: set(space.locate(representatives[n])) for n in names}
            side_a = [n for n in names if where[n] & idx_a]
            side_b = [n for n in names if where[n] & idx_b]
            for a in side_a:
                for b in side_b:
                    if a == b:
                        raise InconsistentCertificates(f"representative {a!r} lies on both sides of gap {gc.name!r}")
                    split.append([a, b])
                    sep_by.setdefault(frozenset((a, b)), gc.name)
        d["splits"] = split
        gap_out.append(d)

    # separation of two members separates their classes
    sep_classes = {}
    for pair, by in sep_by.items():
        a, b = tuple(pair)
        ra, rb = find(a), find(b)
        if ra == rb:
            raise InconsistentCertificates(
                f"{a!r} and {b!r} are joined by chain schemas but separated by gap {by!r}")
        sep_classes.setdefault(frozenset((ra, rb)), by)

    pairs = {}
    for a, b in combinations(names, 2):
        ra, rb = find(a), find(b)
        if ra == rb:
            pairs[(a, b)] = {"status": CONNECTED, "by": link_by.get(frozenset((a, b)), "transitivity")}
        elif frozenset((ra, rb)) in sep_classes:
            by = sep_by.get(frozenset((a, b)))
            pairs[(a, b)] = {"status": SEPARATED, "by": by or f"class of {sep_classes[frozenset((ra, rb))]}"}
        else:
            pairs[(a, b)] = {"status": UNKNOWN, "by": None}
    groups = {}
    for n in names:
        groups.setdefault(find(n), []).append(n)
    classes = [groups[r] for r in sorted(groups, key=names.index)]
    return IotaReport(space.name, names, pairs, classes, schema_out, gap_out)
