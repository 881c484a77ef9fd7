"""Chain schemas and gap certificates, and their verifiers.

A chain schema describes, for every large parameter ``t``, a finite chain of
points whose consecutive steps are at most ``R``. Read at an unbounded ``t``
it joins its two end points by a chain of finitely close steps that never
comes within ``g(t)`` of the base point. A gap certificate bounds from below
the distance between two groups of pieces outside a ball about the base
point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from ..errors import CertificateError
from .poly import BiPoly, Poly, format_poly
from .positivity import nonnegative_on, region_nonnegative
from .space import SymbolicPoint, membership_check


@dataclass(frozen=True)
class Segment:
    point: tuple  # BiPoly per coordinate
    steps: Poly  # m(t); k runs over 0..m(t)

    def at(self, t, k):
        return tuple(c(t, k) for c in self.point)

    def start(self):
        return tuple(c.subs_k(Poly()) for c in self.point)

    def end(self):
        return tuple(c.subs_k(self.steps) for c in self.point)


@dataclass(frozen=True)
class ChainSchema:
    R: Fraction
    segments: tuple
    escape: Poly
    t0: Fraction = Fraction(0)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "R", Fraction(self.R))
        object.__setattr__(self, "t0", Fraction(self.t0))
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.R <= 0:
            raise CertificateError(f"schema {self.name!r}: R must be positive")
        if not self.segments:
            raise CertificateError(f"schema {self.name!r}: no segments")
        dims = {len(s.point) for s in self.segments}
        if len(dims) != 1:
            raise CertificateError(f"schema {self.name!r}: segments disagree on dimension")
        if self.escape.degree < 1 or self.escape.lead <= 0:
            raise CertificateError(f"schema {self.name!r}: escape bound needs degree >= 1 and a positive leading coefficient")

    @property
    def dim(self):
        return len(self.segments[0].point)

    def start_point(self):
        return SymbolicPoint(self.segments[0].start(), self.t0)

    def end_point(self):
        return SymbolicPoint(self.segments[-1].end(), self.t0)

    def to_dict(self):
        return {
            "name": self.name,
            "R": str(self.R),
            "t0": str(self.t0),
            "escape": format_poly(self.escape),
            "segments": [{"point": [str(c) for c in s.point], "steps": format_poly(s.steps)} for s in self.segments],
        }


def evaluate_schema(schema, t):
    """The concrete chain at parameter ``t`` as a list of rational points."""
    t = Fraction(t)
    points = []
    for seg in schema.segments:
        m = seg.steps(t)
        if m.denominator != 1 or m < 0:
            raise CertificateError(f"step count {m} at t={t} is not a nonnegative integer")
        for k in range(int(m) + 1):
            p = seg.at(t, Fraction(k))
            if not points or points[-1] != p:
                points.append(p)
    return points


@dataclass
class Clause:
    ok: bool
    method: str = "symbolic"
    witness: object = None
    detail: str = ""

    def to_dict(self):
        w = self.witness
        if isinstance(w, tuple):
            w = [str(x) for x in w]
        return {"ok": self.ok, "method": self.method, "witness": w, "detail": self.detail}


@dataclass
class SchemaVerdict:
    schema: ChainSchema
    clauses: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(c.ok for c in self.clauses.values())

    @property
    def failure(self):
        for name, c in self.clauses.items():
            if not c.ok:
                return name, c
        return None

    @property
    def method(self):
        return "sampled" if any(c.method == "sampled" for c in self.clauses.values()) else "symbolic"

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"schema": self.schema.name, "ok": self.ok, "method": self.method,
                "clauses": {k: v.to_dict() for k, v in self.clauses.items()}}


def _integer_valued(p, t0):
    base = math.ceil(t0)
    for i in range(int(max(p.degree, 0)) + 1):
        v = p(Fraction(base + i))
        if v.denominator != 1:
            return Fraction(base + i)
    return None


def _merge(checks, label):
    """Fold region checks into one clause; first failure wins."""
    method = "symbolic"
    for where, chk in checks:
        if chk.method == "sampled":
            method = "sampled"
        if not chk.ok:
            return Clause(False, chk.method, chk.witness, f"{label} fails on {where}")
    return Clause(True, method)


def verify_chain_schema(schema, space):
    """Check the step counts, joins, step bound, membership and escape bound.

    Clauses are evaluated in that order and all are reported; the verdict's
    ``failure`` names the first one that does not hold.
    """
    if schema.dim != space.dim:
        raise CertificateError(f"schema dimension {schema.dim} does not match space dimension {space.dim}")
    t0 = schema.t0
    out = SchemaVerdict(schema)

    bad = None
    for j, seg in enumerate(schema.segments):
        w = _integer_valued(seg.steps, t0)
        if w is not None:
            bad = Clause(False, "symbolic", (w,), f"segment {j}: step count not an integer")
            break
        chk = nonnegative_on(seg.steps, t0)
        if not chk.ok:
            bad = Clause(False, "symbolic", (chk.witness,), f"segment {j}: negative step count")
            break
    out.clauses["step_counts"] = bad or Clause(True)

    bad = None
    for j in range(len(schema.segments) - 1):
        a, b = schema.segments[j].end(), schema.segments[j + 1].start()
        if a != b:
            bad = Clause(False, "symbolic", None, f"segment {j} ends where segment {j + 1} does not start")
            break
    out.clauses["joins"] = bad or Clause(True)

    R2 = schema.R * schema.R
    checks = []
    for j, seg in enumerate(schema.segments):
        if seg.steps.is_zero():
            continue
        disp = [c.shift_k(1) - c for c in seg.point]
        M = seg.steps - 1
        if space.metric == "sup":
            for i, d in enumerate(disp):
                checks.append((f"segment {j}, coordinate {i}", region_nonnegative(BiPoly.const(R2) - d * d, t0, M)))
        else:
            sq = sum((d * d for d in disp), BiPoly())
            checks.append((f"segment {j}", region_nonnegative(BiPoly.const(R2) - sq, t0, M)))
    out.clauses["step_bound"] = _merge(checks, "step bound")

    out.clauses["membership"] = _membership_clause(schema, space)

    xi = [c.lead for c in space.basepoint.coords]
    g2 = (schema.escape * schema.escape).to_bipoly()
    if space.metric == "sup":
        g2 = g2 * space.dim
    checks = []
    for j, seg in enumerate(schema.segments):
        sq = sum(((c - x) * (c - x) for c, x in zip(seg.point, xi)), BiPoly())
        checks.append((f"segment {j}", region_nonnegative(sq - g2, t0, seg.steps)))
    out.clauses["escape"] = _merge(checks, "escape bound")
    return out


def _membership_clause(schema, space):
    method = "symbolic"
    for j, seg in enumerate(schema.segments):
        m = seg.steps
        if m.degree <= 0 and m.lead <= 10_000:
            # fixed step count: every point may use its own piece
            for kv in range(int(m.lead) + 1):
                pt = tuple(c.subs_k(Poly.const(kv)).to_bipoly() for c in seg.point)
                hits = [membership_check(pt, p, schema.t0) for p in space.pieces]
                good = [h for h in hits if h.ok]
                if not good:
                    return Clause(False, "symbolic", (schema.t0, Fraction(kv)), f"segment {j}, k={kv} lies on no piece")
                if all(h.method == "sampled" for h in good):
                    method = "sampled"
            continue
        hits = [membership_check(seg.point, p, schema.t0, m) for p in space.pieces]
        good = [h for h in hits if h.ok]
        if not good:
            w = next((h.witness for h in hits if h.witness is not None), None)
            return Clause(False, "symbolic", w, f"segment {j} does not lie on a single piece")
        if all(h.method == "sampled" for h in good):
            method = "sampled"
    return Clause(True, method)


# -- gap certificates ------------------------------------------------------------


@dataclass(frozen=True)
class GapCertificate:
    R: Fraction
    A: tuple  # piece names
    B: tuple
    m0: Poly  # threshold as a polynomial in R
    name: str = ""
    sampled: bool = False  # permit a sampled fallback for non-affine pieces

    def __post_init__(self):
        object.__setattr__(self, "R", Fraction(self.R))
        object.__setattr__(self, "A", tuple(self.A))
        object.__setattr__(self, "B", tuple(self.B))
        if self.R <= 0:
            raise CertificateError(f"gap {self.name!r}: R must be positive")
        if not self.A or not self.B or set(self.A) & set(self.B):
            raise CertificateError(f"gap {self.name!r}: piece sets must be nonempty and disjoint")

    @property
    def threshold(self):
        return self.m0(self.R)

    def to_dict(self):
        return {"name": self.name, "R": str(self.R), "A": list(self.A), "B": list(self.B),
                "m0": format_poly(self.m0, "R"), "sampled": self.sampled}


@dataclass
class GapVerdict:
    certificate: GapCertificate
    at_scale: bool
    divergent: bool
    min_sq_distance: Fraction | float | None
    method: str = "symbolic"
    detail: str = ""

    @property
    def ok(self):
        return self.at_scale and self.divergent

    def __bool__(self):
        return self.ok

    def to_dict(self):
        d = self.min_sq_distance
        return {"gap": self.certificate.name, "ok": self.ok, "at_scale": self.at_scale,
                "divergent": self.divergent, "method": self.method, "detail": self.detail,
                "threshold": str(self.certificate.threshold),
                "min_sq_distance": None if d is None else str(d)}


_SQRT_BITS = 64


def _sqrt_below(x):
    """A rational lower bound for ``sqrt(x)``, within ``2**-64`` relative."""
    if x <= 0:
        return Fraction(0)
    p, q = x.numerator, x.denominator
    scale = 1 << _SQRT_BITS
    return Fraction(math.isqrt(p * q * scale * scale), q * scale)


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _feasible_intervals(piece, xi, m):
    """Parameter intervals of ``piece`` at distance ``>= m`` from ``xi``.

    Irrational cut points are rounded toward the inside of the excluded
    interval, so the result is a superset of the true feasible set.
    """
    lo = piece.start
    hi = piece.end  # None for rays
    d = piece.direction
    w = tuple(o - x for o, x in zip(piece.offset, xi))
    a, b, c = _dot(d, d), _dot(d, w), _dot(w, w) - m * m
    if a == 0:
        return [(lo, hi)] if c >= 0 else []
    disc = b * b - a * c
    if disc <= 0:
        return [(lo, hi)]
    s = _sqrt_below(disc)
    left, right = (-b - s) / a, (-b + s) / a
    out = []
    if left >= lo:
        out.append((lo, left if hi is None else min(left, hi)))
    if hi is None or right <= hi:
        out.append((max(right, lo), hi))
    return [(u, v) for u, v in out if v is None or u <= v]


def _quad_min_1d(A, B, C, lo, hi):
    """Minimum of ``A x^2 + 2 B x + C`` over ``[lo, hi]`` (``hi`` may be None), ``A >= 0``."""
    if A == 0:
        if B == 0:
            return C
        if B > 0:
            return C + 2 * B * lo
        return None if hi is None else C + 2 * B * hi
    x = -B / A
    x = max(x, lo)
    if hi is not None:
        x = min(x, hi)
    return A * x * x + 2 * B * x + C


def _pair_min_sq(p, q, I, J):
    """Exact minimum of ``|p(u) - q(v)|^2`` over the box ``I x J``."""
    w = tuple(a - b for a, b in zip(p.offset, q.offset))
    d, f = p.direction, q.direction
    dd, ff, df = _dot(d, d), _dot(f, f), _dot(d, f)
    wd, wf, ww = _dot(w, d), _dot(w, f), _dot(w, w)
    # F(u, v) = dd u^2 + ff v^2 - 2 df u v + 2 wd u - 2 wf v + ww
    (ul, uh), (vl, vh) = I, J
    cands = []
    det = dd * ff - df * df
    if det != 0:
        u = (df * wf - ff * wd) / det
        v = (dd * wf - df * wd) / det
        if ul <= u and (uh is None or u <= uh) and vl <= v and (vh is None or v <= vh):
            cands.append(_F(dd, ff, df, wd, wf, ww, u, v))
    for u in (ul, uh):
        if u is not None:
            # fixed u: ff v^2 + 2 (-df u - wf) v + const
            r = _quad_min_1d(ff, -df * u - wf, dd * u * u + 2 * wd * u + ww, vl, vh)
            if r is not None:
                cands.append(r)
    for v in (vl, vh):
        if v is not None:
            r = _quad_min_1d(dd, -df * v + wd, ff * v * v - 2 * wf * v + ww, ul, uh)
            if r is not None:
                cands.append(r)
    # lower bounds are always finite, so a minimiser (which exists for a convex
    # quadratic bounded below on a polyhedron) sits inside or on those edges
    return min(cands)


def _F(dd, ff, df, wd, wf, ww, u, v):
    return dd * u * u + ff * v * v - 2 * df * u * v + 2 * wd * u - 2 * wf * v + ww


def _positively_parallel(d, f):
    if not any(d) or not any(f):
        return True
    i = next(i for i, x in enumerate(d) if x != 0)
    if f[i] == 0:
        return False
    lam = f[i] / d[i]
    return lam > 0 and all(y == lam * x for x, y in zip(d, f))


def verify_gap_certificate(cert, space):
    """Decide the certificate's claim at its declared scale.

    ``at_scale``: outside ``B(xi, m0(R))`` the two groups of pieces are more
    than ``R`` apart, and every other piece lies inside that ball.
    ``divergent``: no ray of one group runs parallel to a ray of the other in
    the same direction, so the separation persists at every larger scale.
    """
    pieces_a = [space.piece(n) for n in cert.A]
    pieces_b = [space.piece(n) for n in cert.B]
    m = cert.threshold
    if m < 0:
        return GapVerdict(cert, False, False, None, detail="negative threshold")
    xi = tuple(c.lead for c in space.basepoint.coords)
    named = set(cert.A) | set(cert.B)
    for p in space.pieces:
        if p.name in named:
            continue
        if p.kind != "segment":
            return GapVerdict(cert, False, False, None, detail=f"piece {p.name!r} is unbounded and in neither group")
        for u in (p.start, p.end):
            gap = tuple(x - y for x, y in zip(p.at(u), xi))
            if _dot(gap, gap) >= m * m:
                return GapVerdict(cert, False, False, None, detail=f"piece {p.name!r} reaches beyond the ball")
    for p in pieces_a + pieces_b:
        if p.kind in ("lattice", "plane"):
            raise CertificateError(f"gap {cert.name!r}: piece {p.name!r} of kind {p.kind} cannot be separated")
    if not all(p.is_affine for p in pieces_a + pieces_b):
        if not cert.sampled:
            raise CertificateError(f"gap {cert.name!r}: non-affine pieces need the sampled fallback")
        return _sampled_gap(cert, space, pieces_a, pieces_b, xi, m)

    best = None
    for p in pieces_a:
        for q in pieces_b:
            for I in _feasible_intervals(p, xi, m):
                for J in _feasible_intervals(q, xi, m):
                    val = _pair_min_sq(p, q, I, J)
                    best = val if best is None else min(best, val)
    bound = cert.R * cert.R * (space.dim if space.metric == "sup" else 1)
    at_scale = best is None or best > bound
    divergent = True
    for p in pieces_a:
        for q in pieces_b:
            if p.kind == "ray" and q.kind == "ray" and _positively_parallel(p.direction, q.direction):
                divergent = False
    detail = "" if at_scale else "groups come within R outside the ball"
    if at_scale and not divergent:
        detail = "parallel rays: separation does not grow with the scale"
    return GapVerdict(cert, at_scale, divergent, best, "symbolic", detail)


def _sampled_gap(cert, space, pieces_a, pieces_b, xi, m, span=1000, step=Fraction(1, 8)):
    import numpy as np
    from scipy.spatial import cKDTree

    def cloud(pieces):
        pts = []
        for p in pieces:
            hi = p.end if p.end is not None else p.start + span
            us = np.arange(float(p.start), float(hi) + 1e-12, float(step))
            coords = np.stack([np.array([float(c(Fraction(u))) for u in us]) for c in p.coords], axis=1)
            pts.append(coords)
        pts = np.concatenate(pts)
        keep = np.linalg.norm(pts - np.asarray(xi, dtype=float), axis=1) >= float(m)
        return pts[keep]

    a, b = cloud(pieces_a), cloud(pieces_b)
    if not len(a) or not len(b):
        return GapVerdict(cert, True, True, None, "sampled")
    dist, _ = cKDTree(b).query(a, p=np.inf if space.metric == "sup" else 2)
    best = float(dist.min())
    return GapVerdict(cert, best > float(cert.R), True, best * best, "sampled")


# -- transport along affine maps -------------------------------------------------


def _det(M):
    M = [row[:] for row in M]
    n, det = len(M), Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if M[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            M[i], M[piv] = M[piv], M[i]
            det = -det
        det *= M[i][i]
        for r in range(i + 1, n):
            f = M[r][i] / M[i][i]
            for c in range(i, n):
                M[r][c] -= f * M[i][c]
    return det


def is_psd(S):
    """Exact positive semidefiniteness via all principal minors."""
    n = len(S)
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            if _det([[S[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


def _gram(M):
    n = len(M[0])
    return [[sum((M[r][i] * M[r][j] for r in range(len(M))), Fraction(0)) for j in range(n)] for i in range(n)]


def transport_schema(schema, matrix, offset, lipschitz, co_lipschitz, name=None):
    """Image of a schema under ``x -> matrix @ x + offset``.

    ``lipschitz`` and ``co_lipschitz`` are checked exactly (``L^2 I - M^T M``
    and ``M^T M - c^2 I`` must be positive semidefinite). The image schema
    uses scale ``L R`` and escape bound ``c g`` measured from the image of
    the base point, so it verifies on any target space containing the image.
    """
    M = [[Fraction(x) for x in row] for row in matrix]
    b = [Fraction(x) for x in offset]
    L, c = Fraction(lipschitz), Fraction(co_lipschitz)
    if not M or len(M[0]) != schema.dim or len(b) != len(M):
        raise CertificateError("matrix shape does not match the schema dimension")
    G = _gram(M)
    n = len(G)
    upper = [[(L * L if i == j else 0) - G[i][j] for j in range(n)] for i in range(n)]
    lower = [[G[i][j] - (c * c if i == j else 0) for j in range(n)] for i in range(n)]
    if L <= 0 or not is_psd(upper):
        raise CertificateError(f"{L} is not a Lipschitz bound for the map")
    if c <= 0 or not is_psd(lower):
        raise CertificateError(f"{c} is not a lower stretch bound for the map")
    segs = []
    for seg in schema.segments:
        pt = tuple(sum((seg.point[j] * M[i][j] for j in range(schema.dim)), BiPoly()) + b[i] for i in range(len(M)))
        segs.append(Segment(pt, seg.steps))
    return ChainSchema(schema.R * L, tuple(segs), schema.escape.scale(c), schema.t0,
                       name or f"{schema.name}@map")


def transport_point(point, matrix, offset):
    M = [[Fraction(x) for x in row] for row in matrix]
    coords = tuple(sum((point.coords[j] * M[i][j] for j in range(point.dim)), Poly()) + Fraction(offset[i])
                   for i in range(len(M)))
    return SymbolicPoint(coords, point.t0)
