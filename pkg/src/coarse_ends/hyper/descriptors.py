"""JSON descriptors for parametric spaces and certificate bundles.

Coefficients are exact rationals written as strings (``"3/2"``); polynomial
fields are expressions such as ``"t - k"`` or ``"2*t**2 + 1"``. Pieces are
written in the variable ``u``, points in ``t`` and, inside chain segments,
the step index ``k``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from ..errors import CertificateError
from .certificates import ChainSchema, GapCertificate, Segment
from .poly import parse_bipoly, parse_poly
from .space import ParametricSpace, Piece, SymbolicPoint

BUILTINS = ("line", "vase", "flared_vase", "lattice2d")
_ALIASES = {"grid2d": "lattice2d", "fv": "flared_vase"}


def _read(source):
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CertificateError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _req(d, key, where):
    try:
        return d[key]
    except (KeyError, TypeError):
        raise CertificateError(f"{where}: missing field {key!r}") from None


def space_from_dict(d):
    dim = int(_req(d, "dimension", "space"))
    pieces = []
    for i, p in enumerate(_req(d, "pieces", "space")):
        where = f"piece {i}"
        kind = _req(p, "kind", where)
        name = p.get("name", f"piece{i}")
        if kind in ("lattice", "plane"):
            pieces.append(Piece(kind, dim, name=name))
            continue
        coords = tuple(parse_poly(c, "u") for c in _req(p, "coords", where))
        end = p.get("to")
        pieces.append(Piece(kind, dim, coords, Fraction(_req(p, "from", where)),
                            None if end is None else Fraction(end), name))
    xi = SymbolicPoint.constant(Fraction(x) for x in _req(d, "basepoint", "space"))
    return ParametricSpace(d.get("name", "space"), dim, pieces, xi, d.get("metric", "euclidean"))


def load_space(source):
    return space_from_dict(_read(source))


def point_from_dict(d):
    return SymbolicPoint(tuple(parse_poly(c) for c in _req(d, "coords", "point")), Fraction(d.get("t0", 0)))


def schema_from_dict(d):
    name = d.get("name", "")
    segs = []
    for i, s in enumerate(_req(d, "segments", f"schema {name!r}")):
        pt = tuple(parse_bipoly(c) for c in _req(s, "point", f"schema {name!r} segment {i}"))
        segs.append(Segment(pt, parse_poly(str(_req(s, "steps", f"schema {name!r} segment {i}")))))
    return ChainSchema(Fraction(_req(d, "R", f"schema {name!r}")), tuple(segs),
                       parse_poly(_req(d, "escape", f"schema {name!r}")), Fraction(d.get("t0", 0)), name)


def gap_from_dict(d):
    name = d.get("name", "")
    return GapCertificate(Fraction(_req(d, "R", f"gap {name!r}")), tuple(_req(d, "A", f"gap {name!r}")),
                          tuple(_req(d, "B", f"gap {name!r}")), parse_poly(str(_req(d, "m0", f"gap {name!r}")), "R"),
                          name, bool(d.get("sampled", False)))


@dataclass
class CertificateBundle:
    representatives: dict
    schemas: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    space: str | None = None

    def to_dict(self):
        return {
            "space": self.space,
            "representatives": {n: p.to_dict() for n, p in self.representatives.items()},
            "schemas": [s.to_dict() for s in self.schemas],
            "gaps": [g.to_dict() for g in self.gaps],
        }


def bundle_from_dict(d):
    reps = {n: point_from_dict(p) for n, p in _req(d, "representatives", "certificates").items()}
    return CertificateBundle(reps, [schema_from_dict(s) for s in d.get("schemas", [])],
                             [gap_from_dict(g) for g in d.get("gaps", [])], d.get("space"))


def load_certificates(source):
    return bundle_from_dict(_read(source))


def dump(obj, path):
    Path(path).write_text(json.dumps(obj.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _builtin_name(name):
    name = _ALIASES.get(name, name)
    if name not in BUILTINS:
        raise CertificateError(f"no parametric descriptor for {name!r}; available: {', '.join(BUILTINS)}")
    return name


def _data(filename):
    return json.loads(resources.files("coarse_ends").joinpath("data", filename).read_text(encoding="utf-8"))


def builtin_space(name):
    return space_from_dict(_data(f"{_builtin_name(name)}.json"))


def builtin_certificates(name):
    return bundle_from_dict(_data(f"{_builtin_name(name)}_certs.json"))


def resolve_space(arg):
    """A path to a descriptor file, or the name of a built-in one."""
    if Path(arg).exists():
        return load_space(arg)
    return builtin_space(Path(arg).stem.removesuffix("_space"))


def resolve_certificates(arg):
    if Path(arg).exists():
        return load_certificates(arg)
    return builtin_certificates(Path(arg).stem.removesuffix("_certs"))

