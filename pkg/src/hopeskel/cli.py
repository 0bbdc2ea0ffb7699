"""Command-line front end: ``hopeskel <command> ...``."""

from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import MAPPER_EPS_GRID, MAPPER_T_GRID, REEB_ALPHA_GRID, MapperConfig, alpha_reeb, mapper
from .evaluate import run_benchmark
from .filtration import build_filtration
from .geometry import CloudError, load_cloud
from .hopes import build_hopes, derived_hopes, simhopes
from .persistence import compute_persistence, diagonal_gaps, gap_report
from .render import diagram_svg, skeleton_svg
from .skeleton import SkeletonGraph
from .synth import DatasetSpec, NoiseModel, generate_dataset, paper_grid

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3, 4


class ConfigError(Exception):
    """Malformed key=value configuration (reported like a parse error)."""


class ValidationError(Exception):
    pass


def _header(args: argparse.Namespace, seed) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func" and not callable(v)}
    cfg = {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in cfg.items()}
    cfg = json.loads(json.dumps(cfg, default=str))
    return {"tool": "hopeskel", "version": __version__, "command": args.command, "config": cfg, "seed": seed}


def _write(path, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


# -----------------------------------------------------------------------------
# commands
# -----------------------------------------------------------------------------
def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    if args.seed is None:
        print(f"seed: {seed}")
    if args.paper_grid:
        spec = paper_grid(args.clouds, args.density, seed)
    else:
        if not args.pattern:
            raise ValidationError("give at least one --pattern or --paper-grid")
        try:
            noises = [NoiseModel.parse(n) for n in (args.noise or ["none"])]
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        spec = DatasetSpec.product(args.pattern, noises, clouds_per_type=args.clouds, density=args.density, seed=seed)
    try:
        rows = generate_dataset(spec, args.out, write_clouds=not args.manifest_only)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    print(f"{len(spec.types)} types, {len(rows)} clouds -> {Path(args.out) / 'manifest.csv'}")
    return EXIT_OK


def _load(args):
    try:
        return load_cloud(args.cloud, args.format)
    except (CloudError, ValueError, OSError) as exc:
        raise ValidationError(str(exc)) from exc


def _base(args, n: int) -> int:
    if args.seed is None:
        return 0
    return int(np.random.default_rng(args.seed).integers(n))


def cmd_skeletonize(args) -> int:
    cloud = _load(args)
    algo, *params = args.algo
    coords = cloud.points if cloud.points is not None and cloud.dim == 2 else None
    if algo in ("hopes", "hopes-derived", "simhopes"):
        f = build_filtration(cloud, args.filtration, args.max_scale)
        h = build_hopes(f, coords)
        if algo == "hopes":
            g = h
        else:
            gd = diagonal_gaps(h.meta["_pd1"])
            if algo == "hopes-derived":
                try:
                    k, l = (int(params[0]), int(params[1])) if params else (args.k, args.l)
                except (IndexError, ValueError) as exc:
                    raise ValidationError("hopes-derived takes two positive integers k l") from exc
                if k < 1 or l < 1:
                    raise ValidationError("k and l must be positive")
                g = derived_hopes(h, gd, k, l)
            else:
                if coords is None:
                    raise ValidationError("simhopes needs a planar coordinate cloud")
                g = simhopes(h, gd, args.simplify_eps)
    elif algo == "mapper":
        if params:
            raise ValidationError("mapper takes --t and --eps")
        g = mapper(cloud, MapperConfig(args.t, args.eps, base=_base(args, cloud.n)))
    elif algo == "alpha-reeb":
        if params:
            raise ValidationError("alpha-reeb takes --alpha and --graph-eps")
        g = alpha_reeb(cloud, args.alpha, args.graph_eps, base=_base(args, cloud.n))
    else:
        raise ValidationError(f"unknown algorithm {algo!r}")
    _write(args.output, g.to_json(_header(args, args.seed)) + "\n")
    print(f"{algo}: {g.n_vertices} vertices, {g.n_edges} edges, betti {g.betti()} -> {args.output}")
    if args.svg:
        if g.coords is None:
            raise ValidationError("SVG output needs a planar coordinate cloud")
        _write(args.svg, skeleton_svg(g, cloud.points))
    return EXIT_OK


def _diagram(args):
    cloud = _load(args)
    f = build_filtration(cloud, args.filtration, args.max_scale)
    return f, compute_persistence(f)


def cmd_diagram(args) -> int:
    f, res = _diagram(args)
    doc = {"header": _header(args, None), "filtration": f.kind,
           "H0": res.pd0.to_json(), "H1": res.pd1.to_json()}
    _write(args.output, json.dumps(doc, indent=2) + "\n")
    print(f"H1: {len(res.pd1)} dots -> {args.output}")
    if args.svg:
        _write(args.svg, diagram_svg(res.pd1))
    return EXIT_OK


def cmd_gaps(args) -> int:
    f, res = _diagram(args)
    rep = gap_report(res.pd1.finite(), args.k_max, args.l_max)
    doc = {"header": _header(args, None), "filtration": f.kind, "H1": res.pd1.to_json(), **rep}
    _write(args.output, json.dumps(doc, indent=2) + "\n")
    gd = diagonal_gaps(res.pd1)
    if gd.m:
        print(f"ds1 = {gd.ds(1):.6g}; vs11 = {rep['vertical'][0]['vs']:.6g} -> {args.output}")
    else:
        print(f"no dots -> {args.output}")
    if args.svg:
        _write(args.svg, diagram_svg(res.pd1, gd if gd.m else None))
    return EXIT_OK


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"line {n}: empty key")
        out[k] = v
    return out


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


BENCH_KEYS = {"patterns", "noises", "clouds", "density", "seed", "algorithms", "mapper_t", "mapper_eps",
              "reeb_alpha", "rms", "jobs", "manifest", "paper_grid"}


def cmd_benchmark(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text())
    except OSError as exc:
        raise ValidationError(str(exc)) from exc
    unknown = set(cfg) - BENCH_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        seed = int(cfg["seed"]) if "seed" in cfg else None
        clouds = int(cfg.get("clouds", 20))
        density = float(cfg.get("density", 100))
        mapper_t = _floats(cfg["mapper_t"]) if "mapper_t" in cfg else list(MAPPER_T_GRID)
        mapper_eps = _floats(cfg["mapper_eps"]) if "mapper_eps" in cfg else list(MAPPER_EPS_GRID)
        reeb = _floats(cfg["reeb_alpha"]) if "reeb_alpha" in cfg else list(REEB_ALPHA_GRID)
        jobs = int(cfg.get("jobs", 1))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    algorithms = [a.strip() for a in cfg.get("algorithms", "hopes,mapper,alpha-reeb").split(",") if a.strip()]
    bad = set(algorithms) - {"hopes", "mapper", "alpha-reeb"}
    if bad:
        raise ConfigError(f"unknown algorithms: {', '.join(sorted(bad))}")
    rms = cfg.get("rms", "mean")
    if rms not in ("mean", "sum"):
        raise ConfigError("rms must be mean or sum")
    if seed is None:
        seed = secrets.randbits(32)
        print(f"seed: {seed}")
    if "manifest" in cfg:
        source = cfg["manifest"]
    elif cfg.get("paper_grid", "").lower() in ("1", "true", "yes"):
        source = paper_grid(clouds, density, seed)
    else:
        if "patterns" not in cfg:
            raise ConfigError("config needs patterns=..., manifest=... or paper_grid=true")
        patterns = [p.strip() for p in cfg["patterns"].split(";") if p.strip()]
        try:
            noises = [NoiseModel.parse(n) for n in cfg.get("noises", "none").split(";") if n.strip()]
            source = DatasetSpec.product(patterns, noises, clouds_per_type=clouds, density=density, seed=seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    rep = run_benchmark(source, algorithms, [(t, e) for t in mapper_t for e in mapper_eps], reeb, rms, jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep.write_csv(out / "report.csv")
    rep.write_thresholds(out / "thresholds.csv")
    (out / "run.json").write_text(json.dumps(_header(args, seed) | {"benchmark_config": cfg}, indent=2) + "\n")
    for row in rep.summary():
        print(f"{row['algorithm']:>10} {row['pattern']:>12} {row['noise']:>14} betti {row['betti%']:5.1f}% "
              f"homeo {row['homeo%']:5.1f}% rms {row['rms']:.4g} {row['ms']:.1f} ms")
    return EXIT_OK


def cmd_render(args) -> int:
    try:
        g = SkeletonGraph.from_json(Path(args.skeleton).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise ValidationError(f"cannot read skeleton: {exc}") from exc
    pts = load_cloud(args.cloud).points if args.cloud else None
    if g.coords is None:
        raise ValidationError("skeleton has no coordinates")
    _write(args.output, skeleton_svg(g, pts))
    return EXIT_OK


# -----------------------------------------------------------------------------
# parser
# -----------------------------------------------------------------------------
def _cloud_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("cloud", help="cloud CSV")
    p.add_argument("--format", choices=["csv-coords", "csv-matrix"], default="csv-coords")
    p.add_argument("--filtration", choices=["auto", "alpha", "rips"], default="auto")
    p.add_argument("--max-scale", type=float, default=math.inf, help="Rips cap")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hopeskel", description="Point-cloud skeletons: HoPeS, Mapper, alpha-Reeb.")
    ap.add_argument("--version", action="version", version=f"hopeskel {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write synthetic clouds and a manifest")
    g.add_argument("--pattern", action="append", help="wheel:K, grid:K,L or hexagons:K (repeatable)")
    g.add_argument("--noise", action="append", help="uniform:MU, gaussian:SIGMA or none (repeatable)")
    g.add_argument("--clouds", type=int, default=20)
    g.add_argument("--density", type=float, default=100.0)
    g.add_argument("--seed", type=int)
    g.add_argument("--paper-grid", action="store_true", help="all 395 benchmark cloud types")
    g.add_argument("--manifest-only", action="store_true")
    g.add_argument("--out", default="dataset")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("skeletonize", help="compute a skeleton of one cloud")
    _cloud_args(s)
    s.add_argument("--algo", nargs="+", default=["hopes"], metavar="ALGO",
                   help="hopes | hopes-derived K L | simhopes | mapper | alpha-reeb")
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--l", type=int, default=1)
    s.add_argument("--simplify-eps", type=float, help="override the simplification scale")
    s.add_argument("--t", type=float, default=2.5, help="Mapper interval factor")
    s.add_argument("--eps", type=float, default=0.3, help="Mapper DBSCAN radius")
    s.add_argument("--alpha", type=float, default=0.3, help="alpha-Reeb scale")
    s.add_argument("--graph-eps", type=float, help="alpha-Reeb neighbourhood radius")
    s.add_argument("--seed", type=int, help="seeded base point for Mapper / alpha-Reeb (default: index 0)")
    s.add_argument("-o", "--output", default="skeleton.json")
    s.add_argument("--svg")
    s.set_defaults(func=cmd_skeletonize)

    d = sub.add_parser("diagram", help="persistence diagrams of a cloud")
    _cloud_args(d)
    d.add_argument("-o", "--output", default="diagram.json")
    d.add_argument("--svg")
    d.set_defaults(func=cmd_diagram)

    q = sub.add_parser("gaps", help="diagonal and vertical gaps of the H1 diagram")
    _cloud_args(q)
    q.add_argument("--k-max", type=int, default=3)
    q.add_argument("--l-max", type=int, default=3)
    q.add_argument("-o", "--output", default="gaps.json")
    q.add_argument("--svg")
    q.set_defaults(func=cmd_gaps)

    b = sub.add_parser("benchmark", help="run the measures over a dataset")
    b.add_argument("config", help="key=value config file")
    b.add_argument("--out", default="benchmark")
    b.set_defaults(func=cmd_benchmark)

    r = sub.add_parser("render", help="draw a skeleton JSON as SVG")
    r.add_argument("skeleton")
    r.add_argument("--cloud")
    r.add_argument("-o", "--output", default="skeleton.svg")
    r.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"hopeskel: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, CloudError) as exc:
        print(f"hopeskel: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"hopeskel: error: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
