"""Command-line entry point: ``gwtails <command> --preset NAME | --model FILE ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 hypothesis
violation. Every output file starts with provenance (tool version, model
hash, parameters); the only timestamp goes to the manifest echoed on stdout.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import direct, dynamics, karlin, left_tail, mc, right_tail
from .conjugacy import IterationConfig
from .errors import GWTailsError, ValidationError
from .pgf import RationalPGF, validate
from .presets import PRESETS, get_preset, preset_for
from .profile import DensityProfile, provenance_lines

__all__ = ["main", "run", "build_parser"]


class OutputExists(ValidationError):
    pass


# ---------------------------------------------------------------- helpers

def _load(args, check=True) -> RationalPGF:
    if args.preset:
        pr = get_preset(args.preset)
        return RationalPGF.from_coeffs(pr.p, pr.q, name=pr.name, check=check)
    path = Path(args.model)
    if not path.is_file():
        raise ValidationError(f"model file {path} does not exist", "cli", "load")
    try:
        data = json.loads(path.read_text())
        p, q = data["p"], data["q"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ValidationError(f"cannot read model {path}: expected JSON with keys p and q ({exc})",
                              "cli", "load") from None
    return RationalPGF.from_coeffs(p, q, name=path.stem, check=check)


def _target(args, name) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    if path.exists() and not args.force:
        raise OutputExists(f"{path} exists; pass --force to overwrite", "cli", "write")
    return path


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _provenance(model, args, params):
    return {"tool": "gwtails", "version": __version__, "command": args.command,
            "model": {"name": model.name, "hash": model.model_hash(), **model.to_json()},
            "parameters": params}


def _x_grid(args):
    if args.x_steps < 1 or not args.x_min > 0 or args.x_max < args.x_min:
        raise ValidationError("need x_min > 0, x_max >= x_min and x_steps >= 1", "cli", "x_grid")
    return np.linspace(args.x_min, args.x_max, args.x_steps)


def _iteration(args):
    return IterationConfig(t_max=args.t_max)


def _quadrature(args):
    if args.paper_scale:
        q = direct.QuadratureConfig.paper_scale()
        return direct.QuadratureConfig(args.y_max or q.y_max, args.nodes or q.n_nodes)
    q = direct.QuadratureConfig()
    return direct.QuadratureConfig(args.y_max or q.y_max, args.nodes or q.n_nodes)


def _left_config(model, args, cfg):
    """Preset defaults, else an automatic scale and line shift."""
    pr = preset_for(model)
    terms = args.terms or (pr.left_terms if pr else 20)
    harmonics = args.harmonics if args.harmonics is not None else (pr.left_harmonics if pr else 40)
    if args.y_shift is not None:
        y = args.y_shift
    elif pr:
        y = pr.y_shift
    else:
        theta = dynamics.critical_angle_estimate(model).theta
        y = karlin.auto_y_shift(model, theta, cfg)
    a = pr.kappa_scale if pr else None
    return left_tail.LeftTailConfig(terms, harmonics, y, a, args.karlin_nodes)


# ---------------------------------------------------------------- commands

def cmd_validate(args):
    model = _load(args, check=False)
    rep = validate(model)
    out = {"model": model.to_json(), "hash": model.model_hash(), **rep}
    if rep["valid"]:
        out.update(deg_gap=model.deg_gap, g2=model.g2, log_E_r=model.log_E_r)
    print(json.dumps(out, indent=2, sort_keys=True, default=_jsonable))
    return 0 if rep["valid"] else 2


def compute_profile(model, args, x):
    cfg = _iteration(args)
    prof = DensityProfile(x)
    params = {"x": [args.x_min, args.x_max, args.x_steps], "t_max": cfg.t_max}
    methods = ("integral", "right", "left") if args.method == "all" else (args.method,)
    if "integral" in methods:
        q = _quadrature(args)
        prof.p_integral = direct.density_integral(model, cfg, q, x)
        params.update(y_max=q.y_max, nodes=q.n_nodes)
    if "right" in methods:
        ps = right_tail.enumerate_poles(model, cfg, args.rmax, args.depth, args.asymptotic_only)
        rr = right_tail.density_right(model, ps, x)
        prof.p_right = rr.density
        params.update(rmax=args.rmax, depth=args.depth, asymptotic_only=args.asymptotic_only)
        prof.notes.update(poles=len(ps.records), depth_reached=ps.depth_reached,
                          depth_capped=ps.depth_capped,
                          right_truncation_max=float(rr.truncation.max()),
                          right_imag_max=float(np.abs(rr.imag_residual).max()))
    if "left" in methods:
        lcfg = _left_config(model, args, cfg)
        tabs = left_tail.build_tables(model, cfg, lcfg)
        lr = left_tail.density_left(model, tabs, x, strict=args.strict)
        prof.p_left = lr.density
        params.update(terms=lcfg.M_terms, harmonics=lcfg.n_harmonics, y_shift=lcfg.y_shift,
                      kappa_scale=tabs.kappa.a, karlin_nodes=lcfg.nodes, strict=args.strict)
        rel = lr.last_term / np.maximum(np.abs(lr.density), 1e-300)
        prof.notes.update(left_last_term_ratio_max=float(rel.max()))
    return prof, params


def cmd_density(args):
    model = _load(args)
    x = _x_grid(args)
    path = _target(args, f"density_{model.name}.csv")
    prof, params = compute_profile(model, args, x)
    params["method"] = args.method
    prof.to_csv(path, provenance_lines(model, "density", params))
    print(json.dumps({"output": str(path), "disagreement": prof.disagreement(), **prof.notes},
                     indent=2, sort_keys=True))
    return 0


def cmd_poles(args):
    model = _load(args)
    path = _target(args, f"poles_{model.name}.csv")
    cfg = _iteration(args)
    ps = right_tail.enumerate_poles(model, cfg, args.rmax, args.depth, args.asymptotic_only)
    params = {"rmax": args.rmax, "depth": args.depth, "asymptotic_only": args.asymptotic_only,
              "t_max": cfg.t_max}
    ps.to_csv(path, provenance_lines(model, "poles", params))
    summary = {"output": str(path), "poles": len(ps.records), "primary": len(ps.primary()),
               "depth_reached": ps.depth_reached, "depth_capped": ps.depth_capped,
               "frontier_margin": ps.frontier_margin,
               "max_cert_error": max((r.cert_error for r in ps.primary()), default=0.0)}
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_raster(args):
    model = _load(args)
    req = dynamics.RasterRequest(complex(args.center_re, args.center_im), args.width, args.height,
                                 args.nx, args.ny, args.raster_t_max)
    path = _target(args, f"raster_{model.name}.pgm")
    side = _target(args, f"raster_{model.name}.pgm.json")
    grid = dynamics.raster(model, req)
    counts = {n: int(np.sum(grid == c)) for n, c in
              (("captured", dynamics.CAPTURED), ("escaped", dynamics.ESCAPED),
               ("undecided", dynamics.UNDECIDED))}
    extra = {"provenance": _provenance(model, args, req.to_json()), "counts": counts}
    if args.angle:
        est = dynamics.critical_angle_estimate(model, t_max=args.raster_t_max)
        extra["critical_angle"] = est.to_json()
    dynamics.write_pgm(path, grid, req, extra)
    print(json.dumps({"output": str(path), "sidecar": str(side), **extra}, indent=2, sort_keys=True,
                     default=_jsonable))
    return 0


def cmd_karlin(args):
    model = _load(args)
    cfg = _iteration(args)
    lcfg = _left_config(model, args, cfg)
    path = _target(args, f"theta_{model.name}.csv")
    tab = karlin.theta_star(model, cfg, lcfg.M_terms, lcfg.n_harmonics, lcfg.y_shift, lcfg.nodes)
    params = {"m_max": lcfg.M_terms, "n_max": lcfg.n_harmonics, "y_shift": lcfg.y_shift,
              "nodes": lcfg.nodes, "t_max": cfg.t_max}
    tab.to_csv(path, provenance_lines(model, "karlin", params))
    print(json.dumps({"output": str(path), **params}, indent=2, sort_keys=True))
    return 0


def _mc_stats(model, args):
    cfg = _iteration(args)
    scfg = mc.SimulationConfig(args.generations, args.paths, rng_seed=args.seed)
    res = mc.simulate_w(model, scfg)
    x = np.linspace(0.0, 8.0, 801)
    q = _quadrature(args)
    samples = direct.fourier_samples(model, cfg, q)
    p = samples.density(x)
    stats = mc.compare(res.samples, x, {"p_integral": p})
    stats.update(cap_fraction=res.cap_fraction, cap_saturation=res.cap_saturation,
                 offspring_truncation=res.K, min_sample=float(res.samples.min()))
    params = {"generations": scfg.generations, "paths": scfg.paths, "seed": scfg.rng_seed,
              "population_cap": scfg.population_cap, "exact_limit": scfg.exact_limit,
              "y_max": q.y_max, "nodes": q.n_nodes}
    return res, stats, params


def cmd_mc(args):
    model = _load(args)
    path = _target(args, f"mc_{model.name}.json")
    spath = _target(args, f"mc_samples_{model.name}.csv") if args.samples else None
    res, stats, params = _mc_stats(model, args)
    _write_json(path, {"provenance": _provenance(model, args, params), "statistics": stats})
    if spath:
        with open(spath, "w") as fh:
            for line in provenance_lines(model, "mc", params):
                fh.write(f"# {line}\n")
            fh.write("w\n")
            for v in res.samples[: min(args.samples, 100_000)]:
                fh.write(f"{v!r}\n")
    print(json.dumps({"output": str(path), **stats}, indent=2, sort_keys=True, default=_jsonable))
    return 0


def cmd_compare(args):
    model = _load(args)
    x = _x_grid(args)
    args.method = "all"
    dpath = _target(args, f"density_{model.name}.csv")
    rpath = _target(args, f"compare_{model.name}.json")
    prof, dparams = compute_profile(model, args, x)
    res, stats, mparams = _mc_stats(model, args)
    prof.to_csv(dpath, provenance_lines(model, "compare", dparams))
    report = {"provenance": _provenance(model, args, {"density": dparams, "mc": mparams}),
              "disagreement": prof.disagreement(), "density_notes": prof.notes, "mc": stats}
    _write_json(rpath, report)
    print(json.dumps({"output": [str(dpath), str(rpath)], "disagreement": prof.disagreement(),
                      "mc_l1": stats["l1"], "mc_ks": stats.get("ks")}, indent=2, sort_keys=True))
    return 0


COMMANDS = {"validate": cmd_validate, "density": cmd_density, "poles": cmd_poles,
            "raster": cmd_raster, "karlin": cmd_karlin, "mc": cmd_mc, "compare": cmd_compare}


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="JSON file with coefficient lists p and q (lowest degree first)")
    src.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")
    common.add_argument("--t-max", type=int, default=150, help="cascade depth for Pi")
    common.add_argument("--seed", type=int, default=0)

    xgrid = argparse.ArgumentParser(add_help=False)
    xgrid.add_argument("--x-min", type=float, default=0.1)
    xgrid.add_argument("--x-max", type=float, default=3.0)
    xgrid.add_argument("--x-steps", type=int, default=30)

    quad = argparse.ArgumentParser(add_help=False)
    quad.add_argument("--y-max", type=float, default=None, help="Fourier cutoff (default 2e4)")
    quad.add_argument("--nodes", type=int, default=None, help="trapezoid intervals on [-y_max, y_max]")
    quad.add_argument("--paper-scale", action="store_true", help="y_max 2e5 and 2e7 nodes")

    poles = argparse.ArgumentParser(add_help=False)
    poles.add_argument("--rmax", type=float, default=500.0)
    poles.add_argument("--depth", type=int, default=40, help="preimage tree depth cap")
    poles.add_argument("--asymptotic-only", action="store_true")

    left = argparse.ArgumentParser(add_help=False)
    left.add_argument("--terms", type=int, default=None)
    left.add_argument("--harmonics", type=int, default=None)
    left.add_argument("--y-shift", type=float, default=None)
    left.add_argument("--karlin-nodes", type=int, default=10**6)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--paths", type=int, default=1_000_000)
    sim.add_argument("--generations", type=int, default=25)

    p = argparse.ArgumentParser(prog="gwtails", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gwtails {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a model and print its constants")
    d = sub.add_parser("density", parents=[common, xgrid, quad, poles, left], help="density profile CSV")
    d.add_argument("--method", choices=["integral", "right", "left", "all"], default="all")
    d.add_argument("--strict", action="store_true",
                   help="fail when the last left-tail term is not below 1e-6 of the sum")
    sub.add_parser("poles", parents=[common, poles], help="pole records CSV")
    r = sub.add_parser("raster", parents=[common], help="basin raster as a P5 graymap")
    r.add_argument("--center-re", type=float, default=0.0)
    r.add_argument("--center-im", type=float, default=0.0)
    r.add_argument("--width", type=float, default=4.0)
    r.add_argument("--height", type=float, default=4.0)
    r.add_argument("--nx", type=int, default=256)
    r.add_argument("--ny", type=int, default=256)
    r.add_argument("--raster-t-max", type=int, default=500)
    r.add_argument("--angle", action="store_true", help="also estimate the critical angle")
    sub.add_parser("karlin", parents=[common, left], help="Fourier table of K^m as CSV")
    m = sub.add_parser("mc", parents=[common, quad, sim], help="Monte Carlo statistics JSON")
    m.add_argument("--samples", type=int, default=0, help="also export this many samples (<= 1e5)")
    c = sub.add_parser("compare", parents=[common, xgrid, quad, poles, left, sim],
                       help="all methods plus Monte Carlo")
    c.add_argument("--strict", action="store_true")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    manifest = {"command": args.command, "argv": list(sys.argv[1:] if argv is None else argv),
                "started": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    print(json.dumps({"manifest": manifest}, sort_keys=True))
    try:
        return COMMANDS[args.command](args)
    except GWTailsError as exc:
        print(f"error {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error [cli.{args.command}] {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
