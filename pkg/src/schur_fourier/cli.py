"""Command-line driver: ``schur-fourier <command> --config cfg.json [--seed S] [--out path]``.

Every command reads a JSON config, writes one JSON record per line (or CSV
with ``--format csv``) and embeds the config hash and library version in each
record.  Floats are printed with 17 significant digits so identical inputs
give byte-identical output.

Exit status: 0 on success, 2 for invalid configs, 3 for numerical failures
(an ``error`` record is still written).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from typing import Callable

import jsonschema
import numpy as np
from scipy.special import gamma

from . import __version__, fourier, functionals, geometry, laws, schur
from .errors import ConfigError, SchurFourierError

# --- schemas -----------------------------------------------------------------

_FAMILY_OBJ = {"type": "object", "required": ["family"],
               "properties": {"family": {"type": "string"}, "dim": {"type": "integer", "minimum": 1}}}
_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_VECS = {"type": "array", "items": _VEC, "minItems": 1}
_QUAD = {"type": "object", "properties": {
    "tail_eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "rel_tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "max_levels": {"type": "integer", "minimum": 1},
    "initial_radius": {"type": "number", "exclusiveMinimum": 0}}, "additionalProperties": False}
_GRID = {"type": "object", "required": ["kind", "n", "points"], "properties": {
    "kind": {"enum": ["sphere", "simplex_sqrt"]},
    "n": {"type": "integer", "minimum": 1}, "points": {"type": "integer", "minimum": 1}}}
_POS = {"type": "number", "exclusiveMinimum": 0}
_COUNT = {"type": "integer", "minimum": 1}
_SEED = {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1}

_FUNCTIONAL = {"type": "object", "required": ["kind"], "properties": {
    "kind": {"enum": ["bochner", "section", "block_section", "laplace_mc", "moment_mc"]},
    "law": _FAMILY_OBJ, "q": _POS, "p": {"type": "number"}, "lambda": _POS, "N": _COUNT,
    "nu": {"type": "object", "required": ["weights", "atoms"]},
    "body": _FAMILY_OBJ, "quad": _QUAD}}

SCHEMAS = {
    "condition": {"required": ["law", "q"], "properties": {
        "law": _FAMILY_OBJ, "q": {"oneOf": [_POS, {"type": "array", "items": _POS, "minItems": 1}]},
        "directions": _VECS, "r_grid": {"oneOf": [
            {"type": "array", "items": _POS, "minItems": 3},
            {"type": "object", "required": ["min", "max", "points"],
             "properties": {"min": _POS, "max": _POS, "points": {"type": "integer", "minimum": 3}}}]},
        "tol": _POS}},
    "section": {"required": ["law"], "properties": {
        "law": _FAMILY_OBJ, "weights": _VECS, "grid": _GRID,
        "t": {"oneOf": [{"type": "number"}, _VEC]}, "frames": {"type": "array", "items": _VECS},
        "quad": _QUAD}},
    "schur-test": {"required": ["functional", "test"], "properties": {
        "functional": _FUNCTIONAL, "test": {"enum": ["schur", "midpoint", "ostrowski"]},
        "n": {"type": "integer", "minimum": 2}, "trials": _COUNT,
        "mode": {"enum": ["convex", "concave"]}, "tol": _POS, "points": _VECS,
        "fd_step": _POS}},
    "moments": {"required": ["law", "op"], "properties": {
        "law": _FAMILY_OBJ, "body": _FAMILY_OBJ, "op": {"enum": ["moment", "laplace", "probe"]},
        "q": _POS, "p": {"type": "number"}, "lambda": _POS, "l": _POS, "weights": _VECS,
        "pairs": {"oneOf": [{"type": "array", "items": _VECS},
                            {"type": "object", "required": ["n", "count"],
                             "properties": {"n": {"type": "integer", "minimum": 2}, "count": _COUNT}}]},
        "N": _COUNT}},
    "khinchin": {"required": ["law", "p", "n"], "properties": {
        "law": _FAMILY_OBJ, "p": {"type": "number", "exclusiveMinimum": -1, "maximum": 2},
        "n": _COUNT, "trials": _COUNT, "N": _COUNT, "thetas": _VECS}},
    "pball": {"required": ["op", "p", "n"], "properties": {
        "op": {"enum": ["volume", "cone", "uniform", "section"]}, "body": _FAMILY_OBJ,
        "p": _POS, "n": _COUNT, "d": _COUNT, "vol_k": _POS, "count": _COUNT,
        "thetas": _VECS, "batch_out": {"type": "string"},
        "batch_format": {"enum": ["csv", "binary"]}, "quad": _QUAD}},
    "uniform-ball-moments": {"required": ["body", "p", "n", "l"], "properties": {
        "body": _FAMILY_OBJ, "norm": _FAMILY_OBJ, "p": _POS, "n": {"type": "integer", "minimum": 2},
        "l": _POS, "weights": _VECS,
        "pairs": {"oneOf": [{"type": "array", "items": _VECS},
                            {"type": "object", "required": ["count"], "properties": {"count": _COUNT}}]},
        "N": _COUNT}},
}
for _s in SCHEMAS.values():
    _s["type"] = "object"
    _s["properties"]["seed"] = _SEED

STOCHASTIC = {"moments", "khinchin", "uniform-ball-moments"}


# --- serialisation --------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, floats with 17 significant digits, non-finite as null."""
    obj = _plain(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(k) + ":" + dumps(obj[k]) for k in sorted(obj)) + "}"
    if isinstance(obj, list):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    return json.dumps(obj)


def config_hash(command: str, config: dict) -> str:
    return hashlib.sha256(dumps({"command": command, "config": config}).encode()).hexdigest()


def _flatten(rec: dict, prefix: str = "") -> dict:
    out = {}
    for k in sorted(rec):
        v = rec[k]
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = dumps(v)
        elif isinstance(v, float):
            out[key] = format(v, ".17g") if math.isfinite(v) else ""
        else:
            out[key] = "" if v is None else v
    return out


def write_records(records: list, stream, fmt: str) -> None:
    records = [_plain(r) for r in records]
    if fmt == "jsonl":
        for r in records:
            stream.write(dumps(r) + "\n")
        return
    rows = [_flatten(r) for r in records]
    cols = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    stream.write(buf.getvalue())


# --- helpers -------------------------------------------------------------------

def _law(cfg):
    return laws.law_from_dict(cfg["law"])


def _quad(cfg):
    return fourier.QuadratureSpec.from_dict(cfg.get("quad"))


def _grid_points(grid: dict, seed: int) -> list:
    rng = np.random.default_rng(seed)
    n, k = grid["n"], grid["points"]
    if grid["kind"] == "sphere":
        g = rng.standard_normal((k, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return list(g)
    return list(np.sqrt(rng.dirichlet(np.ones(n), size=k)))


def _pairs(spec, seed: int, n_default: int | None = None) -> list:
    if isinstance(spec, dict):
        n = spec.get("n", n_default)
        return schur.random_simplex_pairs(n, spec["count"], seed)
    return [(np.asarray(a, dtype=float), np.asarray(b, dtype=float)) for a, b in spec]


def _block_section_fn(p: float, n: int, body: geometry.StarBody, quad) -> Callable:
    """a -> |B_p^n(K) ∩ θ^⊥| with θ = sqrt(a), d = dim K."""
    law = laws.ExpPower(p, body)
    d = body.dim
    Z = body.volume() * gamma(1 + d / p)

    def f(a):
        a = np.asarray(a, dtype=float)
        return geometry.block_section_volume(Z ** n * fourier.section_zero(law, np.sqrt(a), quad), n, d, p)

    return f


def build_functional(spec: dict, seed: int) -> Callable:
    """Named functionals of a weight vector for the schur-test command."""
    kind = spec["kind"]
    quad = fourier.QuadratureSpec.from_dict(spec.get("quad"))
    if kind == "block_section":
        body = geometry.body_from_dict(spec.get("body", {"family": "Euclidean", "dim": 1}))
        return lambda a: _block_section_fn(float(spec["p"]), len(a), body, quad)(a)
    law = laws.law_from_dict(spec["law"])
    q = float(spec.get("q", 2.0))
    if kind == "bochner":
        nu = functionals.SpectralMeasure(spec["nu"]["weights"], spec["nu"]["atoms"])
        return lambda a: functionals.h_functional_bochner(law, nu, a, q)
    if kind == "section":
        return lambda a: fourier.section_zero(law, np.asarray(a, dtype=float) ** (1 / q), quad)
    N = int(spec.get("N", 100_000))
    if kind == "laplace_mc":
        return lambda a: functionals.laplace_mc(law, a, q, float(spec.get("p", 1.0)),
                                                float(spec.get("lambda", 1.0)), seed, N).estimate
    body = geometry.body_from_dict(spec["body"]) if "body" in spec else None
    return lambda a: functionals.moment_mc(law, a, q, float(spec.get("p", 1.0)), body, seed, N).estimate


# --- commands ------------------------------------------------------------------

def cmd_condition(cfg, seed):
    law = _law(cfg)
    qs = cfg["q"] if isinstance(cfg["q"], list) else [cfg["q"]]
    rg = cfg.get("r_grid")
    if isinstance(rg, dict):
        rg = np.geomspace(rg["min"], rg["max"], rg["points"])
    out = []
    for q in qs:
        v = fourier.condition_check(law, float(q), cfg.get("directions"), rg, float(cfg.get("tol", 1e-9)),
                                    seed=seed or 0)
        out.append({"inputs": {"law": law.to_dict(), "q": q}, "result": v.to_dict()})
    return out


def cmd_section(cfg, seed):
    law, quad = _law(cfg), _quad(cfg)
    out = []
    if "frames" in cfg:
        for frame in cfg["frames"]:
            val = fourier.codim_section(law, np.asarray(frame, dtype=float), quad)
            out.append({"inputs": {"frame": frame}, "result": {"value": val}})
        return out
    ys = list(cfg.get("weights", []))
    if "grid" in cfg:
        ys += _grid_points(cfg["grid"], seed or 0)
    if not ys:
        raise ConfigError("section needs 'weights', 'grid' or 'frames'")
    t = cfg.get("t", 0.0)
    for y in ys:
        val = fourier.section_at(law, y, t, quad)
        out.append({"inputs": {"y": list(np.asarray(y, dtype=float)), "t": t}, "result": {"value": val}})
    return out


def cmd_schur_test(cfg, seed):
    seed = seed or 0
    f = build_functional(cfg["functional"], seed)
    test = cfg["test"]
    tol = float(cfg.get("tol", 1e-9))
    n = int(cfg.get("n", 3))
    if test == "schur":
        rep = schur.test_schur(f, n, int(cfg.get("trials", 100)), tol, seed, cfg.get("mode", "convex"))
        return [{"inputs": {"test": test, "n": n}, "result": rep.to_dict()}]
    if test == "midpoint":
        pairs = schur.random_simplex_pairs(n, int(cfg.get("trials", 50)), seed)
        rep = schur.test_log_convex_midpoint(f, pairs, tol)
        return [{"inputs": {"test": test, "n": n}, "result": rep.to_dict()}]
    points = cfg.get("points") or [schur.random_comparable_pair(n, seed + k).y
                                   for k in range(int(cfg.get("trials", 20)))]
    out = []
    for pt in points:
        pt = np.asarray(pt, dtype=float)
        rep = schur.schur_ostrowski_check(f, pt, cfg.get("fd_step"), tol, cfg.get("mode", "convex"))
        out.append({"inputs": {"test": test, "point": pt}, "result": rep.to_dict()})
    return out


def cmd_moments(cfg, seed):
    law = _law(cfg)
    op = cfg["op"]
    q = float(cfg.get("q", 2.0))
    N = int(cfg.get("N", 100_000))
    body = geometry.body_from_dict(cfg["body"]) if "body" in cfg else None
    if op == "probe":
        if body is None:
            body = geometry.Euclidean(law.dim)
        pairs = _pairs(cfg.get("pairs", {"n": 3, "count": 10}), seed)
        rep = functionals.neg_moment_logconvexity_probe(law, body, float(cfg["l"]), pairs, q, seed, N)
        return [{"inputs": {"op": op, "l": cfg["l"], "q": q}, "result": rep.to_dict(),
                 "verdict": "pass" if rep.violations == 0 else "fail"}]
    out = []
    for a in cfg.get("weights", [[1.0]]):
        if op == "moment":
            est = functionals.moment_mc(law, a, q, float(cfg.get("p", 1.0)), body, seed, N)
        else:
            est = functionals.laplace_mc(law, a, q, float(cfg.get("p", 1.0)), float(cfg.get("lambda", 1.0)),
                                         seed, N)
        out.append({"inputs": {"op": op, "a": a, "q": q, "p": cfg.get("p", 1.0)},
                    "estimate": est.estimate, "stderr": est.stderr, "result": est.to_dict()})
    return out


def cmd_khinchin(cfg, seed):
    law = _law(cfg)
    p, n = float(cfg["p"]), int(cfg["n"])
    consts = functionals.khinchin_constants(law, p)
    rep = functionals.khinchin_verify(law, p, n, int(cfg.get("trials", 100)), seed,
                                      int(cfg.get("N", 100_000)), cfg.get("thetas"))
    summary = rep.to_dict()
    trials = summary.pop("trials")
    out = [{"inputs": {"p": p, "n": n}, "result": {"c_gauss": consts.c_gauss, "c_self": consts.c_self,
                                                   **summary},
            "verdict": "pass" if rep.violations == 0 else "fail"}]
    out += [{"inputs": {"theta": t["theta"]}, "result": {k: v for k, v in t.items() if k != "theta"}}
            for t in trials]
    return out


def cmd_pball(cfg, seed):
    op, p, n = cfg["op"], float(cfg["p"]), int(cfg["n"])
    body = geometry.body_from_dict(cfg.get("body", {"family": "Euclidean", "dim": int(cfg.get("d", 1))}))
    d = body.dim
    if op == "volume":
        vol_k = float(cfg.get("vol_k", body.volume()))
        return [{"inputs": {"n": n, "d": d, "p": p, "vol_k": vol_k},
                 "result": {"volume": geometry.bpn_volume(n, d, p, vol_k)}}]
    if op == "section":
        f = _block_section_fn(p, n, body, _quad(cfg))
        out = []
        for th in cfg.get("thetas", [[1.0] + [0.0] * (n - 1)]):
            th = np.asarray(th, dtype=float)
            th = th / np.linalg.norm(th)
            out.append({"inputs": {"theta": th}, "result": {"section": f(th ** 2)}})
        return out
    if seed is None:
        raise ConfigError("sampling needs a seed")
    count = int(cfg.get("count", 10_000))
    if op == "cone":
        smp = geometry.sample_cone_bpnk(body, p, n, seed, count)
        pts, stat, name = smp.directions, smp.radius_p, "radius_p"
        # correlation of ||X||^p with the first coordinate of the direction
        corr = float(np.corrcoef(stat, pts[:, 0, 0])[0, 1])
        expect = n * d / p
    else:
        smp = geometry.sample_uniform_bpnk(body, p, n, seed, count)
        pts, stat, name = smp.points, smp.norm_p, "norm_p"
        corr = None
        expect = n * d / (n * d + p)
    if "batch_out" in cfg:
        flat = pts.reshape(count, -1)
        if cfg.get("batch_format", "csv") == "binary":
            geometry.write_batch_binary(flat, cfg["batch_out"])
        else:
            geometry.write_batch_csv(flat, cfg["batch_out"])
    res = {f"mean_{name}": float(stat.mean()), f"var_{name}": float(stat.var(ddof=1)),
           "stderr": float(stat.std(ddof=1) / math.sqrt(count)), "expected_mean": expect}
    if corr is not None:
        res["corr_radius_direction"] = corr
    return [{"inputs": {"op": op, "n": n, "d": d, "p": p, "count": count}, "result": res}]


def cmd_uniform_ball_moments(cfg, seed):
    body = geometry.body_from_dict(cfg["body"])
    p, n, l = float(cfg["p"]), int(cfg["n"]), float(cfg["l"])
    d = body.dim
    if not 0 < l < d:
        raise ConfigError(f"l must lie in (0, {d})")
    norm_body = geometry.body_from_dict(cfg.get("norm", {"family": "Euclidean", "dim": d}))
    N = int(cfg.get("N", 100_000))
    Y = geometry.sample_uniform_bpnk(body, p, n, seed, N).points  # (N, n, d)

    def values(a):
        s = np.einsum("i,mid->md", np.sqrt(np.asarray(a, dtype=float)), Y)
        return norm_body.norm(s) ** (-l)

    out = []
    for a in cfg.get("weights", []):
        v = values(a)
        out.append({"inputs": {"a": a}, "estimate": float(v.mean()),
                    "stderr": float(v.std(ddof=1) / math.sqrt(N))})
    if "pairs" in cfg:
        viol, pairs = 0, _pairs(cfg["pairs"], seed, n)
        for a, b in pairs:
            va, vb, vm = values(a), values(b), values((a + b) / 2)
            m = np.array([vm.mean(), va.mean(), vb.mean()])
            y = vm / m[0] - 0.5 * va / m[1] - 0.5 * vb / m[2]
            se = float(y.std(ddof=1) / math.sqrt(N))
            gap = float(math.log(m[0]) - 0.5 * math.log(m[1] * m[2]))
            bad = gap > functionals.CI_MULT * se
            viol += bad
            out.append({"inputs": {"a": a, "b": b}, "result": {"log_gap": gap, "stderr": se},
                        "verdict": "fail" if bad else "pass"})
        out.append({"inputs": {"pairs": len(pairs)}, "result": {"violations": int(viol)},
                    "verdict": "pass" if viol == 0 else "fail"})
    return out


COMMANDS = {
    "condition": cmd_condition,
    "section": cmd_section,
    "schur-test": cmd_schur_test,
    "moments": cmd_moments,
    "khinchin": cmd_khinchin,
    "pball": cmd_pball,
    "uniform-ball-moments": cmd_uniform_ball_moments,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schur-fourier", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config file ('-' for stdin)")
        sp.add_argument("--seed", type=int, default=None, help="u64 seed (overrides config)")
        sp.add_argument("--out", default="-", help="output path (default stdout)")
        sp.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
        sp.add_argument("--quiet", action="store_true", help="suppress the stderr summary")
    return ap


def _load_config(path: str) -> dict:
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    return json.loads(text)


def run(command: str, config: dict, seed: int | None = None) -> list:
    """Validate ``config`` and run ``command``; returns the output records."""
    jsonschema.validate(config, SCHEMAS[command])
    if seed is None:
        seed = config.get("seed")
    if command in STOCHASTIC and seed is None:
        raise ConfigError(f"'{command}' is stochastic and needs a seed")
    effective = dict(config)
    if seed is not None:
        effective["seed"] = int(seed)
    digest = config_hash(command, effective)
    records = COMMANDS[command](config, None if seed is None else int(seed))
    for r in records:
        r["command"] = command
        r["config_sha256"] = digest
        r["version"] = __version__
    return records


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    records, status = [], 0
    try:
        config = _load_config(args.config)
        records = run(args.command, config, args.seed)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError, ConfigError, KeyError,
            TypeError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"schur-fourier: invalid config: {msg}", file=sys.stderr)
        return 2
    except (SchurFourierError, ArithmeticError, ValueError) as exc:
        records = [{"command": args.command, "version": __version__,
                    "error": {"type": type(exc).__name__, "message": str(exc)}}]
        status = 3
    if args.out == "-":
        write_records(records, sys.stdout, args.format)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_records(records, fh, args.format)
    if not args.quiet and status == 0:
        print(f"schur-fourier {args.command}: {len(records)} record(s)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
