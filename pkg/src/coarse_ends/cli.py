"""Command-line front end: one subcommand per pipeline, JSON reports.

Exit codes: 0 success, 1 a verification failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import (
    ScaleLadder,
    bornologous_modulus,
    constant_map,
    homotopy_distance,
    identity_map,
    map_from_function,
    map_from_ids,
    properness_report,
)
from .errors import CertificateError, CoarseError, InconsistentCertificates, InstanceError, MapError
from .filtration import build_end_system, induced_end_map, maps_agree, stable_end_count
from .nonscattering import check_consequences, nonscattering_witness
from .sigma import omega_map, sigma_report
from .spaces import RECIPES, SpaceRecipe, dumps_report, generate, load, save_report

JOBS_ENV = "COARSE_ENDS_JOBS"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

_RECIPE_FLAGS = {"N": float, "spacing": float, "height": int, "pages": int, "rho": float,
                 "perturb": float, "seed": int}


@dataclass
class RunConfig:
    command: str
    recipe: SpaceRecipe | None = None
    input: Path | None = None
    input_options: dict = field(default_factory=dict)
    ladder_r: tuple | None = None
    ladder_R: tuple | None = None
    margin: float = 0.1
    window: int = 3
    jobs: int = 1
    out: Path | None = None
    overwrite: bool = False
    extra: dict = field(default_factory=dict)


def parse_values(text):
    """``"0,10,20"`` or ``"geom:1:2:4"`` (start, ratio, count), mixable by commas."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if item.startswith("geom:"):
            try:
                start, ratio, count = item[5:].split(":")
                start, ratio, count = float(start), float(ratio), int(count)
            except ValueError:
                raise InstanceError(f"bad geometric progression {item!r}; expected geom:start:ratio:count") from None
            out.extend(start * ratio ** q for q in range(count))
        else:
            try:
                out.append(float(item))
            except ValueError:
                raise InstanceError(f"bad ladder value {item!r}") from None
    return tuple(out)


def parse_recipe(text, overrides=None):
    """``name`` or ``name:key=value,...``; ``overrides`` win over inline values."""
    name, _, rest = text.partition(":")
    if name not in RECIPES:
        raise InstanceError(f"unknown recipe {name!r}; expected one of {', '.join(RECIPES)}")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key not in _RECIPE_FLAGS:
            raise InstanceError(f"bad recipe parameter {item!r}")
        params[key] = _RECIPE_FLAGS[key](value)
    params.update(overrides or {})
    return SpaceRecipe(name, params)


def _add_source(p):
    src = p.add_argument_group("input space")
    ex = src.add_mutually_exclusive_group(required=True)
    ex.add_argument("--recipe", help=f"built-in space ({', '.join(RECIPES)}), optionally name:key=value,...")
    ex.add_argument("--input", type=Path, help="point-cloud CSV (id,x1,...) or 'u v w' edge list")
    src.add_argument("--format", choices=("csv", "edges"), help="input format (default: from suffix)")
    src.add_argument("--basepoint", help="base point id (default: smallest id)")
    src.add_argument("--metric", choices=("euclidean", "chebyshev"), help="metric for point clouds")
    src.add_argument("--vertices", type=Path, help="extra vertex list for edge-list input")
    for flag, typ in _RECIPE_FLAGS.items():
        src.add_argument(f"--{flag}", type=typ, default=None, help=f"recipe parameter {flag}")


def _add_common(p, ladder=True):
    if ladder:
        p.add_argument("--ladder-r", help="cut-off radii, e.g. 0,10,20 or 0,geom:10:2:4")
        p.add_argument("--ladder-R", help="scales, e.g. 1,2,4,8 or geom:1:2:4")
        p.add_argument("--margin", type=float, default=0.1, help="escape shell margin (default 0.1)")
        p.add_argument("--window", type=int, default=3, help="stability window size (default 3)")
        p.add_argument("--jobs", type=int, default=None,
                       help=f"worker threads (default ${JOBS_ENV} or 1)")
    p.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
    p.add_argument("--overwrite", action="store_true", help="replace an existing report file")


def build_parser():
    parser = argparse.ArgumentParser(prog="coarse-ends", description="Finite-scale ends of pointed metric spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("ends", "end system and stability diagnosis"),
                            ("sigma", "escape chains, their classes and the map to threads"),
                            ("nonscattering", "witness scale and its one-end consequences")):
        p = sub.add_parser(name, help=help_text)
        _add_source(p)
        _add_common(p)

    p = sub.add_parser("maps", help="modulus, properness, homotopy and induced end map of a map sample")
    _add_source(p)
    _add_common(p)
    p.add_argument("--target", required=True, help="target recipe (name:key=value,...) or input file")
    p.add_argument("--map", default="identity",
                   help="identity | constant | scale:F | JSON file of source id -> target id")
    p.add_argument("--compare", help="second map (same syntax) for homotopy checks")

    p = sub.add_parser("hyper", help="verify certificates and classify representatives")
    p.add_argument("--space", required=True, help="space descriptor JSON or built-in name")
    p.add_argument("--certs", help="certificate JSON or built-in name (default: the space's own)")
    _add_common(p, ladder=False)

    p = sub.add_parser("suite", help="run the acceptance battery")
    p.add_argument("--only", help="comma-separated criterion numbers")
    _add_common(p, ladder=False)
    return parser


def config_from_args(args):
    jobs = getattr(args, "jobs", None)
    if jobs is None:
        try:
            jobs = int(os.environ.get(JOBS_ENV, "1"))
        except ValueError:
            raise InstanceError(f"${JOBS_ENV} must be an integer") from None
    cfg = RunConfig(args.command, out=args.out, overwrite=args.overwrite, jobs=max(1, jobs))
    if hasattr(args, "recipe"):
        overrides = {k: getattr(args, k) for k in _RECIPE_FLAGS if getattr(args, k) is not None}
        if args.recipe:
            cfg.recipe = parse_recipe(args.recipe, overrides)
        else:
            cfg.input = args.input
            cfg.input_options = {"fmt": args.format, "basepoint": args.basepoint, "rho": overrides.get("rho"),
                                 "metric": args.metric, "vertices": args.vertices}
        cfg.ladder_r = parse_values(args.ladder_r) if args.ladder_r else None
        cfg.ladder_R = parse_values(args.ladder_R) if args.ladder_R else None
        cfg.margin, cfg.window = args.margin, args.window
    for key in ("target", "map", "compare", "space", "certs", "only"):
        if hasattr(args, key):
            cfg.extra[key] = getattr(args, key)
    return cfg


def _instance(cfg):
    if cfg.recipe is not None:
        return generate(cfg.recipe)
    return load(cfg.input, **cfg.input_options)


def _ladder(cfg, instance):
    base = ScaleLadder.default(instance.truncation_radius)
    ladder = ScaleLadder(cfg.ladder_r or base.r_values, cfg.ladder_R or base.R_values)
    ladder.check(instance)
    return ladder


def _emit(cfg, report, summary):
    if cfg.out is not None:
        save_report(report, cfg.out, overwrite=cfg.overwrite)
    else:
        sys.stdout.write(dumps_report(report))
    print(summary, file=sys.stderr)


def cmd_ends(cfg):
    inst = _instance(cfg)
    system = build_end_system(inst, _ladder(cfg, inst), jobs=cfg.jobs)
    stab = stable_end_count(system, cfg.window)
    report = system.to_dict(cfg.window)
    report["stability"] = stab.to_dict()
    _emit(cfg, report, f"{inst.name}: {stab}")
    return EXIT_OK


def cmd_sigma(cfg):
    inst = _instance(cfg)
    ladder = _ladder(cfg, inst)
    system = build_end_system(inst, ladder, jobs=cfg.jobs)
    rep = sigma_report(inst, ladder, cfg.margin, system=system)
    omega = omega_map(rep, system)
    report = {"sigma": rep.to_dict(), "omega": omega.to_dict(), "ladder": ladder.to_dict()}
    _emit(cfg, report, f"{inst.name}: {rep.class_count()} classes, "
                       f"{omega.thread_counts[-1]} threads, omega bijective: {omega.bijective()}")
    return EXIT_OK


def cmd_nonscattering(cfg):
    inst = _instance(cfg)
    ladder = _ladder(cfg, inst)
    wit = nonscattering_witness(inst, ladder)
    check = check_consequences(inst, ladder, cfg.margin, cfg.window)
    report = {"instance": inst.name, "ladder": ladder.to_dict(),
              "witness": None if wit is None else wit.to_dict(), "consequences": check.to_dict()}
    found = "none" if wit is None else f"R={wit.R:g}"
    _emit(cfg, report, f"{inst.name}: witness {found}; violations: {len(check.violations)}")
    for v in check.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_OK if check.ok else EXIT_FAIL


def _target(text):
    path = Path(text)
    if path.exists():
        return load(path)
    return generate(parse_recipe(text))


def _map(text, source, target, name):
    if text == "identity":
        return identity_map(source) if source is target else map_from_ids(source, target, lambda pid: pid, name=name)
    if text == "constant":
        return constant_map(source, target)
    if text.startswith("scale:"):
        try:
            factor = float(text[6:])
        except ValueError:
            raise InstanceError(f"bad scale factor in {text!r}") from None
        return map_from_function(source, target, lambda x: factor * x, name=name)
    path = Path(text)
    if not path.exists():
        raise InstanceError(f"unknown map {text!r}")
    table = json.loads(path.read_text(encoding="utf-8"))
    key = type(source.ids[0])
    return map_from_ids(source, target, {key(k): v for k, v in table.items()}, name=name)


def _target_ladder(target, source_ladder, modulus):
    base = ScaleLadder.default(target.truncation_radius)
    scales = sorted({*source_ladder.R_values, *(s for s in modulus.S_values if 0 < s < float("inf"))})
    return ScaleLadder(base.r_values, tuple(scales))


def cmd_maps(cfg):
    source = _instance(cfg)
    target = _target(cfg.extra["target"])
    ladder = _ladder(cfg, source)
    f = _map(cfg.extra["map"], source, target, "f")
    mod = bornologous_modulus(f, ladder)
    report = {"source": source.name, "target": target.name, "modulus": mod.to_dict()}
    ok = mod.ok
    if ok:
        t_ladder = _target_ladder(target, ladder, mod)
        report["properness"] = properness_report(f, t_ladder).to_dict()
        sx = build_end_system(source, ladder, jobs=cfg.jobs)
        sy = build_end_system(target, t_ladder, jobs=cfg.jobs)
        try:
            induced = induced_end_map(f, sx, sy)
            report["induced"] = induced.to_dict()
        except MapError as exc:
            report["induced"] = None
            report["error"] = str(exc)
            ok = False
        if ok and cfg.extra.get("compare"):
            g = _map(cfg.extra["compare"], source, target, "g")
            C = homotopy_distance(f, g)
            entry = {"homotopy_distance": C}
            try:
                bad, compared = maps_agree(induced, induced_end_map(g, sx, sy), min_scale=C)
                entry.update({"cells_compared": len(compared), "disagreements": len(bad)})
                ok = not bad
            except MapError as exc:
                entry["error"] = str(exc)
            report["homotopy"] = entry
    report["ok"] = ok
    _emit(cfg, report, f"{source.name} -> {target.name}: {'ok' if ok else 'failed'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_hyper(cfg):
    from .hyper.descriptors import resolve_certificates, resolve_space
    from .hyper.iota import iota_report

    space = resolve_space(cfg.extra["space"])
    bundle = resolve_certificates(cfg.extra.get("certs") or space.name)
    try:
        rep = iota_report(space, bundle.representatives, bundle.schemas, bundle.gaps)
    except InconsistentCertificates as exc:
        print(f"inconsistent certificates: {exc}", file=sys.stderr)
        return EXIT_FAIL
    failed = [s["schema"] for s in rep.schemas if not s["ok"]] + [g["gap"] for g in rep.gaps if not g["ok"]]
    report = {"space": space.to_dict(), "iota": rep.to_dict()}
    count = rep.class_count if rep.decided else "undecided"
    _emit(cfg, report, f"{space.name}: {count} classes; failed certificates: {', '.join(failed) or 'none'}")
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_suite(cfg):
    from .suite import run_suite

    only = None
    if cfg.extra.get("only"):
        try:
            only = {int(x) for x in cfg.extra["only"].split(",") if x.strip()}
        except ValueError:
            raise InstanceError("--only expects comma-separated integers") from None

    def show(res):
        print(res.line(), flush=True)
        print(f"  {res.seconds:.2f}s", file=sys.stderr)

    results = run_suite(only, progress=show)
    report = {"criteria": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}
    if cfg.out is not None:
        save_report(report, cfg.out, overwrite=cfg.overwrite)
    return EXIT_OK if report["passed"] else EXIT_FAIL


COMMANDS = {"ends": cmd_ends, "sigma": cmd_sigma, "nonscattering": cmd_nonscattering,
            "maps": cmd_maps, "hyper": cmd_hyper, "suite": cmd_suite}


def run(cfg):
    return COMMANDS[cfg.command](cfg)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(config_from_args(args))
    except (InstanceError, CertificateError, FileNotFoundError, FileExistsError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MapError as exc:
        print(f"map check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except CoarseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
