"""Exact sign checks for polynomials on half-lines and on (t, k) regions.

Univariate checks are decided exactly with Sturm sequences. Regions
``{(t, k) : t >= t0, 0 <= k <= M(t)}`` are handled symbolically when the
polynomial has degree at most two in ``k``; otherwise the caller falls back
to sampling, which is reported as such.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .poly import BiPoly, Poly, poly_gcd

SAMPLE_SPAN = 1000
SAMPLE_CAP = 1_000_000


def sturm_sequence(p):
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = seq[-2].divmod(seq[-1])[1]
        if r.is_zero():
            break
        seq.append(-r)
    return [q for q in seq if not q.is_zero()]


def _sign_changes(values):
    signs = [v for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def _at_infinity(seq):
    return [q.lead for q in seq]


def count_roots_above(p, a):
    """Number of distinct real roots of ``p`` in ``(a, inf)``."""
    if p.degree <= 0:
        return 0
    seq = sturm_sequence(p)
    return _sign_changes([q(a) for q in seq]) - _sign_changes(_at_infinity(seq))


def odd_part(p):
    """Product of the square-free factors of odd multiplicity (Yun's algorithm)."""
    if p.degree <= 0:
        return Poly.const(1)
    p = p.monic()
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.divmod(a)[0]
    c = dp.divmod(a)[0]
    d = c - b.derivative()
    out, i = Poly.const(1), 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        if i % 2 == 1:
            out = out * a
        b = b.divmod(a)[0]
        c = d.divmod(a)[0]
        d = c - b.derivative()
        i += 1
    return out


@dataclass(frozen=True)
class SignCheck:
    ok: bool
    witness: Fraction | None = None  # a t >= t0 with p(t) < 0, when found
    method: str = "exact"


def _witness(p, t0):
    """A rational point >= t0 where ``p`` is negative (best effort)."""
    candidates = [Fraction(t0)]
    if p.degree >= 1:
        roots = np.roots([float(c) for c in reversed(p.coeffs)])
        real = sorted(r.real for r in roots if abs(r.imag) < 1e-9 and r.real > float(t0))
        pts = [float(t0)] + real
        for a, b in zip(pts, pts[1:]):
            candidates.append(Fraction((a + b) / 2))
        top = (real[-1] if real else float(t0)) + 1.0
        candidates.append(Fraction(top))
    for x in candidates:
        if x >= t0 and p(x) < 0:
            return x
    return None


def nonnegative_on(p, t0):
    """Exact: is ``p(t) >= 0`` for every real ``t >= t0``?"""
    t0 = Fraction(t0)
    if p.is_zero():
        return SignCheck(True)
    if p.lead < 0 or p(t0) < 0:
        return SignCheck(False, _witness(p, t0))
    if p.degree == 0:
        return SignCheck(True)
    # with p(t0) >= 0 and a positive leading coefficient, p dips below zero
    # exactly when it has a root of odd multiplicity beyond t0
    if count_roots_above(odd_part(p), t0) == 0:
        return SignCheck(True)
    return SignCheck(False, _witness(p, t0))


@dataclass(frozen=True)
class RegionCheck:
    ok: bool
    method: str  # "symbolic" or "sampled"
    witness: tuple | None = None  # (t, k) where the value is negative

    def to_dict(self):
        return {"ok": self.ok, "method": self.method,
                "witness": None if self.witness is None else [str(x) for x in self.witness]}


def _fail_t(q, t0, kpoly, method):
    chk = nonnegative_on(q, t0)
    if chk.ok:
        return None
    w = chk.witness
    return RegionCheck(False, method, None if w is None else (w, kpoly(w) if kpoly is not None else None))


def region_nonnegative(Q, t0, M):
    """Decide ``Q(t, k) >= 0`` on ``t >= t0`` (integer), ``0 <= k <= M(t)``.

    ``M`` is a :class:`Poly` assumed nonnegative on the region; ``k`` is
    treated as real, which only makes the check stricter. Degree <= 1 in
    ``k`` is decided through the endpoints; degree 2 through a handful of
    sufficient conditions (concavity, monotonicity, discriminant); anything
    else is sampled.
    """
    t0 = Fraction(t0)
    if Q.is_zero():
        return RegionCheck(True, "symbolic")
    cs = Q.in_k()
    if len(cs) == 1:
        bad = _fail_t(cs[0], t0, None, "symbolic")
        if bad is not None:
            return RegionCheck(False, "symbolic", (bad.witness[0], Fraction(0)) if bad.witness else None)
        return RegionCheck(True, "symbolic")
    if M.degree <= 0 and int(M.lead) == M.lead and M.lead <= 10_000:
        # constant range: check every integer k separately
        for kv in range(int(M.lead) + 1):
            q = Q.subs_k(Poly.const(kv))
            chk = nonnegative_on(q, t0)
            if not chk.ok:
                return RegionCheck(False, "symbolic", None if chk.witness is None else (chk.witness, Fraction(kv)))
        return RegionCheck(True, "symbolic")
    if len(cs) == 2:
        for kpoly in (Poly(), M):
            q = Q.subs_k(kpoly)
            chk = nonnegative_on(q, t0)
            if not chk.ok:
                w = None if chk.witness is None else (chk.witness, kpoly(chk.witness))
                return RegionCheck(False, "symbolic", w)
        return RegionCheck(True, "symbolic")
    if len(cs) == 3:
        C, B, A = cs
        for kpoly in (Poly(), M):
            chk = nonnegative_on(Q.subs_k(kpoly), t0)
            if not chk.ok:
                w = None if chk.witness is None else (chk.witness, kpoly(chk.witness))
                return RegionCheck(False, "symbolic", w)
        if nonnegative_on(-A, t0).ok:
            return RegionCheck(True, "symbolic")
        if nonnegative_on(A, t0).ok:
            if nonnegative_on(B, t0).ok:
                return RegionCheck(True, "symbolic")
            if nonnegative_on(-(A * M.scale(2) + B), t0).ok:
                return RegionCheck(True, "symbolic")
            if nonnegative_on(A * C * 4 - B * B, t0).ok:
                return RegionCheck(True, "symbolic")
    return _sampled(Q, t0, M)


def _eval_grid(Q, t, k):
    out = np.zeros_like(k, dtype=np.float64)
    for (i, j), c in Q.terms.items():
        out += float(c) * t ** i * k ** j
    return out


def _sampled(Q, t0, M):
    """Sample integer ``t`` in ``t0..t0+SAMPLE_SPAN`` and all integer ``k`` up to ``M(t)``.

    Also requires the leading behaviour along ``k = a*M(t)`` for ``a`` in
    {0, 1/2, 1} to be nonnegative, so the check extends to large ``t``.
    """
    start = math.ceil(t0)
    budget = SAMPLE_CAP
    scale = max((abs(float(c)) for c in Q.terms.values()), default=1.0)
    for tv in range(start, start + SAMPLE_SPAN + 1):
        mv = M(Fraction(tv))
        top = int(math.floor(mv)) if mv >= 0 else -1
        if top < 0:
            continue
        n = min(top + 1, budget)
        if n <= 0:
            break
        ks = np.arange(n, dtype=np.float64)
        vals = _eval_grid(Q, float(tv), ks)
        mag = _eval_grid(BiPoly({e: abs(c) for e, c in Q.terms.items()}), float(tv), ks)
        neg = np.nonzero(vals < -1e-9 * np.maximum(mag, scale))[0]
        if neg.size:
            kv = int(neg[0])
            if Q(Fraction(tv), Fraction(kv)) < 0:
                return RegionCheck(False, "sampled", (Fraction(tv), Fraction(kv)))
        budget -= n
        if budget <= 0:
            break
    for a in (Fraction(0), Fraction(1, 2), Fraction(1)):
        if Q.subs_k(M.scale(a)).lead < 0:
            return RegionCheck(False, "sampled", None)
    return RegionCheck(True, "sampled")
