"""Exact rational polynomials in one variable ``t`` and in two variables ``(t, k)``."""
from __future__ import annotations

import ast
import math
from fractions import Fraction

from ..errors import CertificateError


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise CertificateError(f"non-finite coefficient {x}")
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise CertificateError(f"bad rational {x!r}") from None
    return Fraction(x)


class Poly:
    """Polynomial with rational coefficients, stored in ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = [_frac(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def const(cls, value):
        return cls((value,))

    @classmethod
    def t(cls):
        return cls((0, 1))

    @property
    def degree(self):
        """Degree; ``-inf`` for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self):
        return not self.coeffs

    def is_bounded(self):
        return self.degree <= 0

    def __call__(self, x):
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if not isinstance(acc, float) else float(c))
        return acc

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out, base = Poly.const(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, c):
        c = _frac(c)
        return Poly(x * c for x in self.coeffs)

    def compose(self, inner):
        """``self(inner(t))``."""
        out = Poly()
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    def derivative(self):
        return Poly(i * c for i, c in enumerate(self.coeffs) if i)

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        quot = [Fraction(0)] * (dq + 1)
        lead = other.lead
        for i in range(dq, -1, -1):
            q = rem[i + len(other.coeffs) - 1] / lead
            quot[i] = q
            if q:
                for j, b in enumerate(other.coeffs):
                    rem[i + j] -= q * b
        return Poly(quot), Poly(rem[: len(other.coeffs) - 1])

    def monic(self):
        return self.scale(1 / self.lead) if self.coeffs else self

    def to_bipoly(self):
        return BiPoly({(i, 0): c for i, c in enumerate(self.coeffs)})

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def _as_poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    return NotImplemented


def poly_gcd(a, b):
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


def poly_is_bounded(p):
    return p.is_bounded()


def _fmt_coeff(c):
    return str(c) if c.denominator == 1 else f"({c})"


def _format_terms(terms):
    """``terms`` is a list of (coefficient, monomial string) in display order."""
    parts = []
    for c, mono in terms:
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{_fmt_coeff(mag)}*{mono}"
        else:
            body = _fmt_coeff(mag)
        parts.append(("-" if c < 0 else "+", body))
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _mono(var, e):
    return "" if e == 0 else var if e == 1 else f"{var}**{e}"


def format_poly(p, var="t"):
    return _format_terms([(c, _mono(var, i)) for i, c in reversed(list(enumerate(p.coeffs))) if c])


class BiPoly:
    """Polynomial in ``t`` (first exponent) and ``k`` (second exponent)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {e: _frac(c) for e, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, value):
        return cls({(0, 0): value})

    @classmethod
    def var(cls, name):
        return cls({(1, 0) if name == "t" else (0, 1): 1})

    def is_zero(self):
        return not self.terms

    @property
    def degree_t(self):
        return max((i for i, _ in self.terms), default=-math.inf)

    @property
    def degree_k(self):
        return max((j for _, j in self.terms), default=-math.inf)

    def in_k(self):
        """Coefficients of ``k**j`` as polynomials in ``t``, ascending in ``j``."""
        if not self.terms:
            return []
        rows = [[Fraction(0)] * (self.degree_t + 1) for _ in range(self.degree_k + 1)]
        for (i, j), c in self.terms.items():
            rows[j][i] = c
        return [Poly(r) for r in rows]

    def to_poly(self):
        if self.degree_k > 0:
            raise CertificateError("expression depends on k")
        return Poly([self.terms.get((i, 0), 0) for i in range(int(max(self.degree_t, -1)) + 1)])

    def subs_k(self, kpoly):
        """Substitute a polynomial in ``t`` for ``k``."""
        kpoly = _as_poly(kpoly)
        out = Poly()
        for j, coeff in reversed(list(enumerate(self.in_k()))):
            out = out * kpoly + coeff
        return out

    def shift_k(self, delta=1):
        """``self(t, k + delta)``."""
        kp = BiPoly({(0, 1): 1, (0, 0): delta})
        out = BiPoly()
        for j, coeff in reversed(list(enumerate(self.in_k()))):
            out = out * kp + coeff.to_bipoly()
        return out

    def __call__(self, t, k):
        return sum((c * t ** i * k ** j for (i, j), c in self.terms.items()), Fraction(0))

    def __eq__(self, other):
        other = _as_bipoly(other)
        return other is not NotImplemented and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        other = _as_bipoly(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = _as_bipoly(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_bipoly(other)
        if other is NotImplemented:
            return other
        out = {}
        for (a, b), c in self.terms.items():
            for (x, y), d in other.terms.items():
                e = (a + x, b + y)
                out[e] = out.get(e, 0) + c * d
        return BiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = BiPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return f"BiPoly({format_bipoly(self)!r})"

    def __str__(self):
        return format_bipoly(self)


def _as_bipoly(x):
    if isinstance(x, BiPoly):
        return x
    if isinstance(x, Poly):
        return x.to_bipoly()
    if isinstance(x, (int, Fraction)):
        return BiPoly.const(x)
    return NotImplemented


def format_bipoly(p):
    items = sorted(p.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))
    terms = []
    for (i, j), c in items:
        mono = "*".join(m for m in (_mono("t", i), _mono("k", j)) if m)
        terms.append((c, mono))
    return _format_terms(terms)


# -- parsing ---------------------------------------------------------------------

_ALLOWED = ("t", "k")


def parse_bipoly(text, variables=_ALLOWED):
    """Parse ``"t - k"``, ``"3/2*t**2"`` and the like into a :class:`BiPoly`.

    Names in ``variables`` map to ``t`` then ``k`` in order. Division is
    allowed only by constants; powers only by nonnegative integer literals.
    """
    if isinstance(text, (int, Fraction)):
        return BiPoly.const(text)
    if not isinstance(text, str):
        raise CertificateError(f"expected a polynomial string, got {text!r}")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise CertificateError(f"cannot parse polynomial {text!r}") from None
    names = {v: ("t", "k")[i] for i, v in enumerate(variables)}
    return _walk(tree.body, names, text)


def _walk(node, names, text):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return BiPoly.const(_frac(str(node.value)) if isinstance(node.value, float) else node.value)
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise CertificateError(f"unknown variable {node.id!r} in {text!r}")
        return BiPoly.var(names[node.id])
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        inner = _walk(node.operand, names, text)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left = _walk(node.left, names, text)
        if isinstance(node.op, ast.Pow):
            exp = node.right
            if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int) and exp.value >= 0):
                raise CertificateError(f"exponent must be a nonnegative integer literal in {text!r}")
            return left ** exp.value
        right = _walk(node.right, names, text)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if right.degree_t > 0 or right.degree_k > 0 or right.is_zero():
                raise CertificateError(f"division by a non-constant or zero in {text!r}")
            return left * BiPoly.const(1 / right.terms[(0, 0)])
    raise CertificateError(f"unsupported syntax in polynomial {text!r}")


def parse_poly(text, var="t"):
    """Parse a univariate polynomial in ``var``."""
    return parse_bipoly(text, (var,)).to_poly()
