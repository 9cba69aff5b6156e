"""
Command-line entry point.

Every command reads a JSON config (``--config``), validates it against its
schema, writes JSON summaries and CSV tables into ``--out`` and prints the
summary on stdout. Exit codes: 0 success, 1 computation error (or a failed
``verify``), 2 configuration error; errors are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import exponents as ex
from .errors import ComputationError, ConfigError
from .flux import Flux
from .kinetic import (CONTRACTION_TOL, VelocityGrid, contraction_check, contraction_suite,
                      reconstruct_defect, singular_moment)
from .nondeg import DEFAULT_DELTAS, DEFAULT_LAMBDAS, DEFAULT_SPHERE_POINTS, DEFAULT_V_POINTS, analyze_flux
from .regnorm import estimate_exponent, joint_exponent
from .schemas import SCHEMAS
from .solver import GridSpec, SourceSpec, initial_data, solve, solve_many
from .verify import CHECKS, verify

COMMANDS = tuple(SCHEMAS)
EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG = 0, 1, 2
CSV_FMT = "%.17g"
GENERATOR = "numpy PCG64, child k of SeedSequence(seed).spawn(n)"


# {{{ io helpers

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, Fraction):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, obj):
    path.write_text(dumps(obj))


def write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([CSV_FMT % v if isinstance(v, (float, np.floating)) else v for v in row])


def load_config(path, command: str) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    validate(cfg, command)
    return cfg


def validate(cfg, command: str):
    validator = jsonschema.Draft202012Validator(SCHEMAS[command])
    err = jsonschema.exceptions.best_match(validator.iter_errors(cfg))
    if err is not None:
        raise err

# }}}


# {{{ shared builders

# decimal inputs with larger denominators (fitted profiles) are evaluated in floats
MAX_EXACT_DENOMINATOR = 10 ** 6


def _rational(x):
    if isinstance(x, str):
        return Fraction(x.replace(" ", ""))
    if isinstance(x, int):
        return Fraction(x)
    q = Fraction(str(x))
    return q if q.denominator <= MAX_EXACT_DENOMINATOR else float(x)


def _run(cfg, store_every=None):
    flux = Flux.from_dict(cfg["flux"])
    grid = GridSpec(**cfg["grid"])
    u0 = initial_data(cfg["u0"], grid)
    source = SourceSpec.from_dict(cfg.get("source", {"kind": "zero"}))
    return flux, grid, source, solve(flux, u0, source, grid, store_every)


def _field_rows(times, values):
    for t, row in zip(times, values):
        yield [float(t), *map(float, row)]

# }}}


# {{{ commands

def cmd_analyze_flux(cfg, out: Path, args) -> tuple[dict, int]:
    flux = Flux.from_dict(cfg["flux"])
    prof, table = analyze_flux(
        flux, cfg["interval"],
        delta_grid=cfg.get("delta_grid", DEFAULT_DELTAS),
        lambda_grid=cfg.get("lambda_grid", DEFAULT_LAMBDAS),
        sphere_points=cfg.get("sphere_points", DEFAULT_SPHERE_POINTS),
        v_points=cfg.get("v_points", DEFAULT_V_POINTS),
        directions=cfg.get("directions", "sweep"))
    result = {"flux": flux.to_dict(), "profile": prof.to_dict()}
    write_json(out / "profile.json", result)
    write_csv(out / "sublevel.csv", ["delta", "lambda", "measure"], table)
    return result, EXIT_OK


def cmd_exponents(cfg, out: Path, args) -> tuple[dict, int]:
    src = cfg.get("profile", cfg)
    a, b, k, t = (_rational(src[key]) for key in ("alpha", "beta", "kappa", "tau"))
    res = ex.scl_exponents(a, b, k, t)
    table = ex.exponent_table(a, b, k, t)
    if isinstance(res.s_star, Fraction):
        table["exact"] = {key: str(getattr(res, key))
                          for key in ("s_star", "r", "eta", "theta_alpha", "theta_beta")}
    if "general" in cfg:
        g = {key: _rational(v) for key, v in cfg["general"].items()}
        gen = ex.averaging_exponents(ex.AveragingInputs(a, b, k, t, **g))
        table["general"] = {"inputs": g, **gen.to_dict()}
        if isinstance(gen.s_star, Fraction):
            table["general"]["exact"] = {key: str(getattr(gen, key)) for key in ("s_star", "r", "eta")}
    write_json(out / "exponents.json", table)
    flat = [(key, float(v)) for key, v in sorted(table.items()) if isinstance(v, (int, float, Fraction))]
    write_csv(out / "exponents.csv", ["quantity", "value"], flat)
    return table, EXIT_OK


def cmd_solve(cfg, out: Path, args) -> tuple[dict, int]:
    flux, grid, source, fld = _run(cfg, cfg.get("store_every"))
    cols = ["t"] + [f"u_{i}" for i in range(grid.n_cells)]
    write_csv(out / "field.csv", cols, _field_rows(fld.times, fld.values))
    write_csv(out / "source_trace.csv", cols, _field_rows(fld.times, fld.source_trace))
    mass = fld.mass()
    meta = {"flux": flux.to_dict(), "grid": grid.to_dict(), "source_kind": source.kind,
            "n_steps": fld.n_steps, "stride": fld.stride, "n_slices": len(fld.times),
            "t_final": fld.times[-1], "mass_initial": mass[0], "mass_final": mass[-1],
            "u_min": fld.values.min(), "u_max": fld.values.max()}
    write_json(out / "field.json", meta)
    return meta, EXIT_OK


def cmd_defect(cfg, out: Path, args) -> tuple[dict, int]:
    flux, grid, source, fld = _run(cfg, 1)
    vg = cfg["vgrid"]
    if "v_lo" in vg or "v_hi" in vg:
        if not ("v_lo" in vg and "v_hi" in vg):
            raise ConfigError("give both v_lo and v_hi or neither")
        vgrid = VelocityGrid(vg["v_lo"], vg["v_hi"], vg["n_v"])
    else:
        vgrid = VelocityGrid.bracketing(float(fld.values.min()), float(fld.values.max()),
                                        vg["n_v"], vg.get("margin", 0.125))
    write_density = cfg.get("write_density", False)
    d = reconstruct_defect(fld, flux, vgrid, cfg.get("stencil", "upwind"), keep_density=write_density)
    moments = [{"v0": m["v0"], "alpha": m["alpha"], "value": singular_moment(d, m["v0"], m["alpha"])}
               for m in cfg.get("moments", [])]
    result = {**d.to_dict(), "moments": moments, "flux": flux.to_dict()}
    write_json(out / "defect.json", result)
    write_csv(out / "mu.csv", ["v", "mu"], zip(vgrid.centers.tolist(), d.mu.tolist()))
    if write_density:
        i0, _ = d.cell_window
        x, v = grid.centers, vgrid.centers
        rows = ((float(fld.times[k]), float(x[i0 + i]), float(v[j]), float(d.density[k, i, j]))
                for k in range(d.density.shape[0])
                for i in range(d.density.shape[1])
                for j in range(d.density.shape[2]))
        write_csv(out / "density.csv", ["t", "x", "v", "m"], rows)
    return result, EXIT_OK


def cmd_regularity(cfg, out: Path, args) -> tuple[dict, int]:
    _, _, _, fld = _run(cfg)
    ps = cfg.get("p", 1.0)
    ps = ps if isinstance(ps, list) else [ps]
    direction = cfg.get("direction", "space")
    dirs = ["space", "time"] if direction == "both" else [direction]
    fits, rows = [], []
    for p in ps:
        per_dir = {}
        for d in dirs:
            fit = estimate_exponent(fld, float(p), cfg.get("shifts"), d)
            per_dir[d] = fit
            fits.append(fit.to_dict())
            rows.extend((d, float(p), h, n) for h, n in zip(fit.shifts, fit.norms))
        if len(per_dir) == 2:
            fits[-1]["joint_s_hat"] = joint_exponent(per_dir["space"], per_dir["time"])
    result = {"fits": fits}
    write_json(out / "regularity.json", result)
    write_csv(out / "regularity.csv", ["direction", "p", "h", "norm"], rows)
    return result, EXIT_OK


def cmd_contraction(cfg, out: Path, args) -> tuple[dict, int]:
    flux = Flux.from_dict(cfg["flux"])
    tol = cfg.get("tol", CONTRACTION_TOL)
    if "random" in cfg:
        grid = GridSpec(**cfg["grid"]) if "grid" in cfg else None
        res = contraction_suite(flux, cfg["random"]["n_pairs"], args.seed, grid)
        deficits = [r.deficit for r in res]
        result = {"seed": args.seed, "generator": GENERATOR, "pairs": [r.to_dict(tol) for r in res],
                  "min_deficit": min(deficits), "pass": all(r.passed(tol) for r in res)}
    else:
        grid = GridSpec(**cfg["grid"])
        u0s = [initial_data(cfg[k], grid) for k in ("u0_1", "u0_2")]
        sources = [SourceSpec.from_dict(cfg.get(k, {"kind": "zero"})) for k in ("source_1", "source_2")]
        r1, r2 = solve_many(flux, u0s, sources, grid, store_every=1)
        result = contraction_check(r1, r2).to_dict(tol)
    write_json(out / "contraction.json", result)
    return result, EXIT_OK


def cmd_verify(cfg, out: Path, args) -> tuple[dict, int]:
    tier = args.tier or cfg.get("tier", "fast")
    only = args.only or cfg.get("only")
    if only:
        unknown = [n for n in only if n not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; known: {list(CHECKS)}")
    checks = verify(tier, only, args.seed, echo=lambda s: print(s, file=sys.stderr))
    ok = all(c.passed for c in checks)
    result = {"tier": tier, "seed": args.seed, "all_pass": ok, "checks": [c.to_dict() for c in checks]}
    write_json(out / "verify.json", result)
    return result, EXIT_OK if ok else EXIT_COMPUTE


HANDLERS = {
    "analyze-flux": cmd_analyze_flux,
    "exponents": cmd_exponents,
    "solve": cmd_solve,
    "defect": cmd_defect,
    "regularity": cmd_regularity,
    "contraction": cmd_contraction,
    "verify": cmd_verify,
}

# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sclreg", description="Regularity exponents and kinetic diagnostics for forced scalar conservation laws.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "verify", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized suites (u64)")
        if name == "verify":
            p.add_argument("--tier", choices=("fast", "full"), default=None)
            p.add_argument("--only", nargs="+", default=None, help=f"subset of {list(CHECKS)}")
    return parser


def _report(kind: str, message: str, **extra) -> None:
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True), file=sys.stderr)


def run(command: str, config_path=None, out=".", seed: int = 0, tier=None, only=None) -> int:
    """Programmatic equivalent of ``sclreg <command> --config <path> ...``."""
    args = argparse.Namespace(command=command, config=config_path, out=out, seed=seed, tier=tier, only=only)
    return _dispatch(args)


def _dispatch(args) -> int:
    try:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg = load_config(args.config, args.command) if args.config else {}
        if not args.config:
            validate(cfg, args.command)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        result, code = HANDLERS[args.command](cfg, out, args)
    except jsonschema.ValidationError as e:
        if e.validator == "oneOf" and e.context:
            # report the closest alternative, e.g. the first missing key
            required = [c for c in e.context if c.validator == "required"]
            e = required[0] if required else e.context[0]
        extra = {"path": list(e.absolute_path)}
        if e.validator == "required":
            missing = [k for k in e.validator_value if k not in e.instance]
            extra["key"] = missing[0] if missing else None
        elif e.validator == "additionalProperties":
            extra["key"] = sorted(set(e.instance) - set(e.schema.get("properties", {})))
        _report("config", e.message, **extra)
        return EXIT_CONFIG
    except ComputationError as e:
        _report("computation", str(e), type=type(e).__name__)
        return EXIT_COMPUTE
    except (ValueError, KeyError, TypeError) as e:
        _report("config", str(e), type=type(e).__name__)
        return EXIT_CONFIG
    sys.stdout.write(dumps(result))
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return _dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
