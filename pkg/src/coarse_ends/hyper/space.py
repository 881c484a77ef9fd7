"""Symbolic points and piecewise-polynomial spaces.

A symbolic point is a family of points with polynomial coordinates in a
parameter ``t``, read at an unbounded value of ``t``. Two such points are
finitely close exactly when their squared distance is a bounded polynomial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import CertificateError
from .poly import BiPoly, Poly, format_poly
from .positivity import SAMPLE_SPAN, region_nonnegative

PIECE_KINDS = ("ray", "segment", "lattice", "plane")
METRICS = ("euclidean", "sup")


@dataclass(frozen=True)
class SymbolicPoint:
    coords: tuple
    t0: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(c if isinstance(c, Poly) else Poly.const(c) for c in self.coords))
        object.__setattr__(self, "t0", Fraction(self.t0))

    @classmethod
    def constant(cls, values):
        return cls(tuple(Poly.const(Fraction(v)) for v in values))

    @property
    def dim(self):
        return len(self.coords)

    def __sub__(self, other):
        _same_dim(self, other)
        return SymbolicPoint(tuple(a - b for a, b in zip(self.coords, other.coords)), max(self.t0, other.t0))

    def sq_norm(self):
        return sum((c * c for c in self.coords), Poly())

    def at(self, t):
        return tuple(c(t) for c in self.coords)

    def as_formula(self):
        return tuple(c.to_bipoly() for c in self.coords)

    def to_dict(self):
        return {"coords": [str(c) for c in self.coords], "t0": str(self.t0)}


def _same_dim(p, q):
    if p.dim != q.dim:
        raise CertificateError(f"dimension mismatch: {p.dim} vs {q.dim}")


def finitely_close(p, q):
    """True iff ``|p - q|^2`` is a bounded polynomial."""
    return (p - q).sq_norm().is_bounded()


@dataclass(frozen=True)
class Piece:
    """One building block of a parametric space.

    ``ray``: ``u -> coords(u)`` for ``u >= start``; ``segment``: affine map
    on ``[start, end]``; ``lattice``: the integer points of R^n; ``plane``:
    all of R^n.
    """

    kind: str
    dim: int
    coords: tuple = ()
    start: Fraction | None = None
    end: Fraction | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in PIECE_KINDS:
            raise CertificateError(f"unknown piece kind {self.kind!r}")
        if self.kind in ("ray", "segment"):
            if len(self.coords) != self.dim:
                raise CertificateError(f"piece {self.name!r}: expected {self.dim} coordinates")
            if self.start is None:
                raise CertificateError(f"piece {self.name!r}: missing start parameter")
            object.__setattr__(self, "start", Fraction(self.start))
        if self.kind == "segment":
            if self.end is None or Fraction(self.end) < self.start:
                raise CertificateError(f"segment {self.name!r} needs end >= start")
            object.__setattr__(self, "end", Fraction(self.end))
            if not self.is_affine:
                raise CertificateError(f"segment {self.name!r} must be affine")

    @property
    def is_affine(self):
        return self.kind in ("ray", "segment") and all(c.degree <= 1 for c in self.coords)

    @property
    def bounded(self):
        return self.kind == "segment"

    @property
    def offset(self):
        return tuple(c(Fraction(0)) for c in self.coords)

    @property
    def direction(self):
        return tuple(c.coeffs[1] if len(c.coeffs) > 1 else Fraction(0) for c in self.coords)

    def at(self, u):
        return tuple(c(u) for c in self.coords)

    def to_dict(self):
        d = {"kind": self.kind, "name": self.name}
        if self.kind in ("ray", "segment"):
            d["coords"] = [format_poly(c, "u") for c in self.coords]
            d["from"] = str(self.start)
        if self.kind == "segment":
            d["to"] = str(self.end)
        if self.kind in ("lattice", "plane"):
            d["dimension"] = self.dim
        return d


@dataclass(frozen=True)
class Membership:
    ok: bool
    method: str  # "symbolic" or "sampled"
    witness: tuple | None = None

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "method": self.method,
                "witness": None if self.witness is None else [str(x) for x in self.witness]}


def _first_nonzero(expr, t0, M, tries=64):
    """A grid point (t, k) where the bivariate ``expr`` does not vanish."""
    start = math.ceil(t0)
    for tv in range(start, start + tries):
        top = M(Fraction(tv))
        for kv in range(0, int(min(max(top, 0), tries)) + 1):
            if expr(Fraction(tv), Fraction(kv)) != 0:
                return Fraction(tv), Fraction(kv)
    return None


def membership_check(formula, piece, t0=0, M=None):
    """Does ``formula(t, k)`` lie on ``piece`` for all ``t >= t0``, ``0 <= k <= M(t)``?

    Affine pieces are decided by solving for the piece parameter; lattices by
    an integrality test on a finite grid (exact for polynomials); other rays
    by sampling.
    """
    formula = tuple(f if isinstance(f, BiPoly) else Poly.const(f).to_bipoly() if not isinstance(f, Poly)
                    else f.to_bipoly() for f in formula)
    M = Poly() if M is None else M
    t0 = Fraction(t0)
    if len(formula) != piece.dim:
        raise CertificateError(f"dimension mismatch: formula {len(formula)} vs piece {piece.dim}")
    if piece.kind == "plane":
        return Membership(True, "symbolic")
    if piece.kind == "lattice":
        return _lattice_membership(formula, t0)
    if piece.is_affine:
        return _affine_membership(formula, piece, t0, M)
    return _sampled_membership(formula, piece, t0, M)


def _lattice_membership(formula, t0):
    # integer values on a (deg_t+1) x (deg_k+1) grid force integer values everywhere
    base = math.ceil(t0)
    for f in formula:
        dt = max(int(max(f.degree_t, 0)), 0)
        dk = max(int(max(f.degree_k, 0)), 0)
        for i in range(dt + 1):
            for j in range(dk + 1):
                v = f(Fraction(base + i), Fraction(j))
                if v.denominator != 1:
                    return Membership(False, "symbolic", (Fraction(base + i), Fraction(j)))
    return Membership(True, "symbolic")


def _affine_membership(formula, piece, t0, M):
    if M.degree <= 0:
        # finitely many k: an identity in k would be too strong, check each one
        top = M(Fraction(0))
        if top < 0:
            return Membership(True, "symbolic")
        method = "symbolic"
        for kv in range(int(top) + 1):
            fixed = tuple(f.subs_k(Poly.const(kv)).to_bipoly() for f in formula)
            res = _affine_identity(fixed, piece, t0, Poly())
            if not res.ok:
                return Membership(False, res.method, res.witness and (res.witness[0], Fraction(kv)))
            method = res.method if res.method == "sampled" else method
        return Membership(True, method)
    return _affine_identity(formula, piece, t0, M)


def _affine_identity(formula, piece, t0, M):
    off, dirn = piece.offset, piece.direction
    axis = next((i for i, d in enumerate(dirn) if d != 0), None)
    if axis is None:
        u = BiPoly.const(piece.start)
    else:
        u = (formula[axis] - off[axis]) * BiPoly.const(1 / dirn[axis])
    for j, f in enumerate(formula):
        diff = f - (u * dirn[j] + off[j])
        if not diff.is_zero():
            return Membership(False, "symbolic", _first_nonzero(diff, t0, M))
    chk = region_nonnegative(u - piece.start, t0, M)
    if not chk.ok:
        return Membership(False, chk.method, chk.witness)
    if piece.end is not None:
        chk = region_nonnegative(BiPoly.const(piece.end) - u, t0, M)
        if not chk.ok:
            return Membership(False, chk.method, chk.witness)
    return Membership(True, chk.method)


def _sampled_membership(formula, piece, t0, M, tol=1e-9):
    start = math.ceil(t0)
    lead_axis = max(range(piece.dim), key=lambda i: piece.coords[i].degree)
    pc = piece.coords[lead_axis]
    budget = 200_000
    for tv in range(start, start + SAMPLE_SPAN + 1):
        top = M(Fraction(tv))
        for kv in range(0, int(max(math.floor(top), 0)) + 1):
            budget -= 1
            if budget < 0:
                return Membership(True, "sampled")
            point = [float(f(Fraction(tv), Fraction(kv))) for f in formula]
            shifted = (pc - Fraction(point[lead_axis])).coeffs
            roots = np.roots([float(c) for c in reversed(shifted)]) if len(shifted) > 1 else []
            found = False
            for r in roots:
                if abs(r.imag) > 1e-7 or r.real < float(piece.start) - tol:
                    continue
                cand = [float(c(Fraction(r.real))) for c in piece.coords]
                if all(abs(a - b) <= tol * max(1.0, abs(b)) * 1e3 for a, b in zip(cand, point)):
                    found = True
                    break
            if not found:
                return Membership(False, "sampled", (Fraction(tv), Fraction(kv)))
    return Membership(True, "sampled")


@dataclass
class ParametricSpace:
    name: str
    dim: int
    pieces: list
    basepoint: SymbolicPoint
    metric: str = "euclidean"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise CertificateError(f"unknown metric {self.metric!r}")
        if self.basepoint.dim != self.dim or any(not c.is_bounded() for c in self.basepoint.coords):
            raise CertificateError("base point must be a constant point of the right dimension")
        for p in self.pieces:
            if p.dim != self.dim:
                raise CertificateError(f"piece {p.name!r} has dimension {p.dim}, expected {self.dim}")
        if not self.locate(self.basepoint):
            raise CertificateError("base point lies on no piece")

    def piece(self, name):
        for p in self.pieces:
            if p.name == name:
                return p
        raise CertificateError(f"no piece named {name!r} in {self.name!r}")

    def locate(self, point):
        """Indices of the pieces that contain ``point`` for every ``t >= t0``."""
        f = point.as_formula()
        return [i for i, p in enumerate(self.pieces) if membership_check(f, p, point.t0).ok]

    def to_dict(self):
        return {
            "name": self.name,
            "dimension": self.dim,
            "metric": self.metric,
            "basepoint": [str(c.lead) for c in self.basepoint.coords],
            "pieces": [p.to_dict() for p in self.pieces],
        }


def is_infinite(point, space):
    """True iff ``point`` lies at unbounded distance from the base point.

    Raises :class:`CertificateError` when the point lies on no piece.
    """
    _same_dim(point, space.basepoint)
    if not space.locate(point):
        raise CertificateError(f"point {[str(c) for c in point.coords]} lies on no piece of {space.name!r}")
    return (point - space.basepoint).sq_norm().degree >= 1
