"""Example spaces as finite instances, file ingestion and report output."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import build_instance
from .errors import InstanceError, ReportExistsError

RECIPES = ("line", "grid2d", "vase", "flared_vase", "squares", "book", "discrete_book")


@dataclass(frozen=True)
class SpaceRecipe:
    """A named example space with its size parameters.

    Recognised parameters: ``N`` (half-width of line/grid), ``spacing``
    (line), ``height`` (vases and books), ``pages`` (books), ``rho``
    (truncation radius, defaults to the farthest generated point),
    ``perturb`` and ``seed`` (seeded jitter for robustness tests).
    ``kind="parametric"`` asks for the symbolic descriptor instead.
    """

    name: str
    params: dict = field(default_factory=dict)
    kind: str = "finite"


def generate(recipe):
    """Finite instance (or parametric descriptor) for a recipe."""
    if recipe.kind == "parametric":
        from .hyper.descriptors import builtin_space

        return builtin_space(recipe.name)
    if recipe.kind != "finite":
        raise InstanceError(f"unknown recipe kind {recipe.kind!r}")
    try:
        maker = _MAKERS[recipe.name]
    except KeyError:
        raise InstanceError(f"unknown recipe {recipe.name!r}; expected one of {', '.join(RECIPES)}") from None
    p = dict(recipe.params)
    perturb = float(p.pop("perturb", 0.0))
    seed = p.pop("seed", 0)
    rho = p.pop("rho", None)
    if recipe.name == "squares" and rho is not None:
        p["rho"] = rho
    raw, metric, base, default_rho = maker(**p)
    if perturb:
        raw = _perturb(raw, metric, base, perturb, seed)
        default_rho = None
    if default_rho is None:
        # truncate at the farthest generated point
        default_rho = build_instance(raw, metric, base, 1e300).radii
        default_rho = float(np.max(default_rho[np.isfinite(default_rho)]))
    name = recipe.name if not perturb else f"{recipe.name}~{perturb:g}#{seed}"
    return build_instance(raw, metric, base, default_rho if rho is None else float(rho), name=name)


def _line(N=100, spacing=1.0):
    spacing = float(spacing)
    K = int(math.floor(float(N) / spacing + 1e-9))
    return {k: (k * spacing,) for k in range(-K, K + 1)}, "euclidean", 0, float(N)


def _grid2d(N=50):
    N = int(N)
    side = 2 * N + 1
    xs, ys = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1), indexing="ij")
    ids = (xs + N) * side + (ys + N)
    raw = dict(zip(ids.ravel().tolist(), np.stack([xs.ravel(), ys.ravel()], axis=1).astype(float)))
    return raw, "euclidean", N * side + N, N * math.sqrt(2.0)


def _vase_like(height, arm):
    height = int(height)
    raw = {0: (-1.0, 1.0), 1: (0.0, 1.0), 2: (1.0, 1.0)}
    for s in range(1, height + 1):
        x, y = arm(s)
        raw[2 + s] = (-x, y)
        raw[2 + height + s] = (x, y)
    return raw, "euclidean", 1, None


def _vase(height=100):
    return _vase_like(height, lambda s: (1.0, 1.0 + s))


def _flared_vase(height=100):
    h = math.sqrt(0.5)
    return _vase_like(height, lambda s: (1.0 + s * h, 1.0 + s * h))


def _squares(rho=10_000):
    n_max = math.isqrt(int(rho))
    return {n * n: (float(n * n),) for n in range(n_max + 1)}, "euclidean", 0, float(rho)


def _book_graph(pages, height, positions):
    pages, height = int(pages), int(height)
    edges = []
    for i in range(1, pages + 1):
        prev, prev_x = 0, 0
        for x in positions(i, height):
            pid = (i - 1) * height + x
            edges.append((prev, pid, float(x - prev_x)))
            prev, prev_x = pid, x
    return {"vertices": [0], "edges": edges}, "graph", 0, float(height)


def _book(pages=5, height=100):
    return _book_graph(pages, height, lambda i, h: range(1, h + 1))


def _discrete_book(pages=5, height=100):
    return _book_graph(pages, height, lambda i, h: range(i, h + 1, i))


_MAKERS = {
    "line": _line,
    "grid2d": _grid2d,
    "vase": _vase,
    "flared_vase": _flared_vase,
    "squares": _squares,
    "book": _book,
    "discrete_book": _discrete_book,
}


def _perturb(raw, metric, base, sigma, seed):
    rng = np.random.default_rng(seed)
    if metric == "graph":
        edges = [(u, v, w * rng.uniform(1.0, 1.0 + sigma)) for u, v, w in raw["edges"]]
        return {"vertices": raw.get("vertices", []), "edges": edges}
    out = {}
    for pid in sorted(raw):
        c = np.asarray(raw[pid], dtype=float)
        out[pid] = c if pid == base else c + rng.normal(0.0, sigma, size=c.shape)
    return out


def fingerprint(instance):
    """SHA-256 over ids, base point, radius and geometry; equal for equal instances."""
    h = hashlib.sha256()
    h.update(repr((instance.ids, instance.basepoint, instance.truncation_radius, instance.metric_kind)).encode())
    if instance.coords is not None:
        h.update(np.ascontiguousarray(instance.coords).tobytes())
    else:
        g = instance._graph
        for arr in (g.indptr, g.indices, g.data):
            h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


# -- file ingestion --------------------------------------------------------------


def _coerce_ids(tokens):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        return list(tokens)


def load(path, fmt=None, *, basepoint=None, rho=None, metric=None, vertices=None):
    """Read a point-cloud CSV (``id,x1,...,xd``) or a ``u v w`` edge list.

    ``fmt`` is ``"csv"`` or ``"edges"`` and defaults from the file suffix.
    The base point defaults to the smallest id and the truncation radius to
    the farthest reachable point.
    """
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "edges"
    if fmt == "csv":
        raw, metric = _read_csv(path), metric or "euclidean"
        ids = list(raw)
    elif fmt == "edges":
        raw, metric = _read_edges(path, vertices), "graph"
        ids = sorted({e[0] for e in raw["edges"]} | {e[1] for e in raw["edges"]} | set(raw["vertices"]))
    else:
        raise InstanceError(f"unknown input format {fmt!r}")
    if not ids:
        raise InstanceError(f"{path}: no points")
    if basepoint is None:
        basepoint = min(ids)
    elif isinstance(ids[0], int):
        try:
            basepoint = int(basepoint)
        except ValueError:
            pass
    if rho is None:
        probe = build_instance(raw, metric, basepoint, 1e300)
        finite = probe.radii[np.isfinite(probe.radii)]
        rho = float(finite.max())
    return build_instance(raw, metric, basepoint, rho, name=path.stem)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InstanceError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[0] != "id" or any(not h for h in header[1:]):
            raise InstanceError("header must be 'id,x1,...,xd'", line=1)
        dim = len(header) - 1
        ids, rows = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != dim + 1:
                raise InstanceError(f"expected {dim + 1} fields, got {len(row)}", line=line)
            try:
                rows.append(tuple(float(c) for c in row[1:]))
            except ValueError:
                raise InstanceError(f"non-numeric coordinate in {row!r}", line=line) from None
            ids.append(row[0].strip())
    return dict(zip(_coerce_ids(ids), rows))


def _read_edges(path, vertices_path=None):
    tokens_u, tokens_v, weights, lone = [], [], [], []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            body = line.split("#", 1)[0].split()
            if not body:
                continue
            if len(body) == 1:
                lone.append(body[0])
                continue
            if len(body) != 3:
                raise InstanceError(f"expected 'u v w', got {line.strip()!r}", line=line_no)
            try:
                w = float(body[2])
            except ValueError:
                raise InstanceError(f"bad weight {body[2]!r}", line=line_no) from None
            if w < 0:
                raise InstanceError(f"negative edge weight {w}", line=line_no)
            tokens_u.append(body[0])
            tokens_v.append(body[1])
            weights.append(w)
    if vertices_path is not None:
        with open(vertices_path, encoding="utf-8") as handle:
            lone.extend(t for line in handle for t in line.split("#", 1)[0].split())
    names = _coerce_ids(tokens_u + tokens_v + lone)
    n = len(tokens_u)
    us, vs, extra = names[:n], names[n:2 * n], names[2 * n:]
    return {"vertices": extra, "edges": list(zip(us, vs, weights))}


# -- reports ---------------------------------------------------------------------


def to_jsonable(obj):
    """Recursively convert reports to JSON-ready values (inf and rationals as strings)."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_report(report):
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n"


def save_report(report, path, overwrite=False):
    """Write a report as JSON; refuses to replace an existing file unless asked."""
    path = Path(path)
    if path.exists() and not overwrite:
        raise ReportExistsError(f"{path} exists; pass overwrite=True to replace it")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding="utf-8")


def load_report(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
