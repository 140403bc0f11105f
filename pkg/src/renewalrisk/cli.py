"""Experiment harness: JSON config in, CSV out.

Subcommands
    simulate            MC estimates of the discounted-claims box probability
    asymptotic          quadrature evaluation of the local approximation
    compare             both, with ratios, over a (t, x) grid
    renewal             renewal function and tilted measures on a grid
    copula-check        C-volume sampling, h/g bounds, E h_i(theta) = 1
    counterexample      breakpoint table, witnesses, self-convolution ratios
    verify-conditions   conditional/asymptotic ratio scans along x
    lemma33             n-arrival box event vs sum-of-pairs expectation

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
All numeric CSV fields use shortest round-trip decimal representation,
and outputs are byte-identical for identical (config, seed) regardless
of --threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .asymptotics import Box2, theorem_rhs, uniformity_scan
from .copulas import (
    DependenceSpec,
    FrankTri,
    Independent,
    NestedFrankProduct,
    SarmanovFGM,
    bounds_over_horizon,
    condition_ratio_scan,
    mean_h_check,
)
from .counterexample import N_MAX_LIMIT, CounterexampleDensity, CounterexampleF
from .marginals import Deterministic, Exponential, Marginal, Pareto, Weibull
from .renewal import renewal_function, tilted_measure
from .simulate import (
    CompoundPoisson,
    Linear,
    ModelConfig,
    lemma33_check,
    simulate_discounted_claims,
)

__all__ = ["main", "parse_config", "ConfigError"]

EXIT_CONFIG, EXIT_RUNTIME = 2, 3


class ConfigError(ValueError):
    """Configuration rejected; the message carries the offending path."""


def _get(doc: dict, key: str, path: str, required: bool = True, default=None):
    if key not in doc:
        if required:
            raise ConfigError(f"{path}.{key}: required field missing")
        return default
    return doc[key]


def _num(doc: dict, key: str, path: str, required: bool = True, default=None):
    val = _get(doc, key, path, required, default)
    if val is default and not required:
        return default
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    return float(val)


def parse_marginal(doc, path: str) -> Marginal:
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object with a 'family' field")
    family = _get(doc, "family", path)
    try:
        if family == "pareto":
            return Pareto(_num(doc, "alpha", path))
        if family == "weibull":
            return Weibull(_num(doc, "shape", path), _num(doc, "scale", path, required=False, default=1.0))
        if family == "exponential":
            return Exponential(_num(doc, "rate", path))
        if family == "deterministic":
            return Deterministic(_num(doc, "value", path))
        if family == "counterexample":
            n_max = int(_num(doc, "n_max", path, required=False, default=N_MAX_LIMIT))
            return CounterexampleF(n_max)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(
        f"{path}.family: unknown family {family!r} "
        "(expected pareto|weibull|exponential|deterministic|counterexample)"
    )


def parse_dependence(doc, f1, f2, g, path: str) -> DependenceSpec:
    kind = _get(doc, "kind", path)
    try:
        if kind == "independent":
            return Independent(f1, f2, g)
        if kind == "frank-tri":
            return FrankTri(f1, f2, g, _num(doc, "gamma", path))
        if kind == "nested-frank-product":
            gamma = _num(doc, "gamma", path)
            spec = NestedFrankProduct(f1, f2, g, gamma)
            if gamma >= 1:
                print(
                    f"warning: {path}.gamma = {gamma}: the nested-product "
                    "structure needs 0 < gamma < 1 for a positive lower "
                    "bound of the cross-conditional weight (and is not a "
                    "valid copula beyond 1)",
                    file=sys.stderr,
                )
            return spec
        if kind == "sarmanov-fgm":
            return SarmanovFGM(
                f1, f2, g,
                _num(doc, "g12", path), _num(doc, "g13", path), _num(doc, "g23", path),
            )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(
        f"{path}.kind: unknown dependence {kind!r} "
        "(expected independent|frank-tri|nested-frank-product|sarmanov-fgm)"
    )


def parse_premium(doc, path: str):
    kind = _get(doc, "kind", path)
    try:
        if kind == "linear":
            return Linear(_num(doc, "rate", path))
        if kind == "compound-poisson":
            return CompoundPoisson(_num(doc, "rate", path), parse_marginal(_get(doc, "jump", path), f"{path}.jump"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.kind: unknown premium {kind!r} (expected linear|compound-poisson)")


EXPERIMENTS = (
    "simulate", "asymptotic", "compare", "renewal",
    "copula-check", "counterexample", "verify-conditions", "lemma33",
)


def parse_config(doc: dict) -> dict:
    """Validate the JSON document into a plain dict of typed pieces."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    model_doc = _get(doc, "model", "config")
    f1 = parse_marginal(_get(model_doc, "f1", "config.model"), "config.model.f1")
    f2 = parse_marginal(_get(model_doc, "f2", "config.model"), "config.model.f2")
    g = parse_marginal(_get(model_doc, "g", "config.model"), "config.model.g")
    dep = parse_dependence(_get(model_doc, "dependence", "config.model"), f1, f2, g, "config.model.dependence")
    prem_doc = _get(model_doc, "premiums", "config.model", required=False, default=None)
    if prem_doc is None:
        premiums = (Linear(0.0), Linear(0.0))
    else:
        if not isinstance(prem_doc, list) or len(prem_doc) != 2:
            raise ConfigError("config.model.premiums: expected a list of exactly two premium objects")
        premiums = tuple(parse_premium(p, f"config.model.premiums[{i}]") for i, p in enumerate(prem_doc))
    try:
        model = ModelConfig(
            dependence=dep,
            t_max=_num(model_doc, "t_max", "config.model"),
            r=_num(model_doc, "r", "config.model", required=False, default=0.0),
            premiums=premiums,
            seed=int(_num(model_doc, "seed", "config.model", required=False, default=0)),
            batch_size=int(_num(model_doc, "batch_size", "config.model", required=False, default=2_000_000)),
        )
    except ValueError as exc:
        raise ConfigError(f"config.model: {exc}") from exc

    experiment = _get(doc, "experiment", "config")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"config.experiment: unknown experiment {experiment!r} (expected one of {', '.join(EXPERIMENTS)})")

    grids = _get(doc, "grids", "config", required=False, default={})
    for name in ("t_grid", "x_grid", "s_grid"):
        if name in grids:
            vals = grids[name]
            if not isinstance(vals, list) or not vals or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals
            ):
                raise ConfigError(f"config.grids.{name}: expected a nonempty list of numbers")
    if "t_grid" in grids and any(t <= 0 or t > model.t_max for t in grids["t_grid"]):
        raise ConfigError(f"config.grids.t_grid: values must lie in (0, t_max={model.t_max}]")

    return {
        "model": model,
        "experiment": experiment,
        "grids": grids,
        "box": doc.get("box"),
        "n": doc.get("n", 2),
        "n_paths": int(_num(doc, "n_paths", "config", required=False, default=1_000_000)),
        "n_boxes": int(_num(doc, "n_boxes", "config", required=False, default=100_000)),
        "renewal_step": _num(doc, "renewal_step", "config", required=False, default=model.t_max / 2000),
        "counterexample_n_max": int(_num(doc, "counterexample_n_max", "config", required=False, default=N_MAX_LIMIT)),
        "output_path": doc.get("output_path", "-"),
    }


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header, rows):
    out = sys.stdout if path == "-" else open(path, "w", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if out is not sys.stdout:
            out.close()


def _square_boxes(cfg):
    grids = cfg["grids"]
    if cfg["box"] is not None:
        b = cfg["box"]
        return [Box2(_num(b, "x1", "config.box"), _num(b, "x2", "config.box"),
                     _num(b, "d1", "config.box"), _num(b, "d2", "config.box"))]
    if "x_grid" not in grids:
        raise ConfigError("config: need either box or grids.x_grid")
    d = _num(grids, "d", "config.grids", required=False, default=1.0)
    return [Box2(x, x, d, d) for x in grids["x_grid"]]


def _tilted_triplet(cfg):
    model = cfg["model"]
    grid = renewal_function(model.g_dist, model.t_max, cfg["renewal_step"])
    dep = model.dependence
    t1 = tilted_measure(grid, lambda u: np.asarray(dep.h_func(1, u)) * np.ones_like(u), kind="h1")
    t2 = tilted_measure(grid, lambda u: np.asarray(dep.h_func(2, u)) * np.ones_like(u), kind="h2")
    tj = tilted_measure(grid, lambda u: np.asarray(dep.g_func(u)) * np.ones_like(u), kind="g")
    return grid, (t1, t2, tj)


SCHEMA = ["t", "x1", "x2", "d1", "d2", "r", "asymptotic_total", "cross_term",
          "diagonal_term", "empirical", "empirical_se", "ratio"]


def run(cfg: dict, threads: int = 1) -> None:
    model: ModelConfig = cfg["model"]
    experiment = cfg["experiment"]
    out = cfg["output_path"]
    grids = cfg["grids"]

    if experiment == "renewal":
        grid, (t1, t2, tj) = _tilted_triplet(cfg)
        rows = zip(grid.times, grid.lambda_values, t1.values, t2.values, tj.values)
        _write_csv(out, ["t", "lambda", "tilted_h1", "tilted_h2", "tilted_g"],
                   ([float(a), float(b), float(c), float(d), float(e)] for a, b, c, d, e in rows))
        return

    if experiment == "counterexample":
        dens = CounterexampleDensity(cfg["counterexample_n_max"])
        tab = dens.table
        rows = []
        for n in range(1, tab.n_max + 1):
            conv = dens.self_convolution_ratio(float(tab.a[n])) if n >= 2 else None
            mid = dens.middle_part_ratio(float(tab.a[n])) if n >= 2 else None
            rows.append([n, float(tab.a[n]), float(tab.b[n]), float(tab.mid[n]), int(tab.m[n]),
                         dens.almost_decreasing_witness(n), conv, mid])
        _write_csv(out, ["n", "a", "b", "mid", "m", "witness", "self_conv_ratio_at_a", "middle_part_ratio_at_a"], rows)
        return

    if experiment == "copula-check":
        dep = model.dependence
        rng = np.random.default_rng(model.seed)
        n_boxes = cfg["n_boxes"]
        lo = rng.random((n_boxes, 3))
        hi = lo + rng.random((n_boxes, 3)) * (1.0 - lo)
        min_vol = float(dep.c_volumes(lo, hi).min())
        report = bounds_over_horizon(dep, model.t_max)
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
        rows = [
            ["min_c_volume", min_vol],
            ["mean_h1_minus_1", mean_h_check(dep, 1) - 1.0],
            ["mean_h2_minus_1", mean_h_check(dep, 2) - 1.0],
            ["b_lower", report.b_lower], ["b_upper", report.b_upper],
            ["d_lower", report.d_lower], ["d_upper", report.d_upper],
            ["a_lower", report.a_lower], ["a_upper", report.a_upper],
            ["c1", report.c1], ["c2", report.c2], ["c3", report.c3],
        ]
        _write_csv(out, ["metric", "value"], rows)
        return

    if experiment == "verify-conditions":
        if "s_grid" not in grids or "x_grid" not in grids:
            raise ConfigError("config.grids: verify-conditions needs s_grid and x_grid")
        d = _num(grids, "d", "config.grids", required=False, default=1.0)
        report = bounds_over_horizon(model.dependence, model.t_max)
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
        rows = []
        for condition in (1, 2, 3):
            for i in (1, 2) if condition != 2 else (1,):
                devs = condition_ratio_scan(model.dependence, i, np.asarray(grids["s_grid"]),
                                            grids["x_grid"], d, condition=condition)
                for x, dev in zip(grids["x_grid"], devs):
                    rows.append([condition, i, float(x), float(dev)])
        _write_csv(out, ["condition", "claim", "x", "max_deviation"], rows)
        return

    if experiment == "lemma33":
        if "t_grid" not in grids:
            raise ConfigError("config.grids: lemma33 needs t_grid")
        boxes = _square_boxes(cfg)
        rows = []
        for t in grids["t_grid"]:
            for box in boxes:
                lhs, rhs, ratio = lemma33_check(model, cfg["n"], t, box, cfg["n_paths"], threads=threads)
                rows.append([t, box.x1, box.x2, box.d1, box.d2, cfg["n"],
                             lhs.value, lhs.std_error, lhs.hits,
                             rhs.value, rhs.std_error, rhs.hits, ratio])
        _write_csv(out, ["t", "x1", "x2", "d1", "d2", "n", "lhs", "lhs_se", "lhs_hits",
                         "rhs", "rhs_se", "rhs_hits", "ratio"], rows)
        return

    # the remaining experiments share the (t, x) scan schema
    if "t_grid" not in grids:
        raise ConfigError(f"config.grids: {experiment} needs t_grid")
    boxes = _square_boxes(cfg)
    rows = []
    if experiment == "simulate":
        for box in boxes:
            for t in grids["t_grid"]:
                est = simulate_discounted_claims(model, t, box, cfg["n_paths"], threads=threads)
                rows.append([t, box.x1, box.x2, box.d1, box.d2, model.r,
                             None, None, None, est.value, est.std_error, None])
    elif experiment == "asymptotic":
        _, (t1, t2, tj) = _tilted_triplet(cfg)
        for box in boxes:
            for t in grids["t_grid"]:
                val = theorem_rhs(model.f1, model.f2, box, model.r, t, t1, t2, tj)
                rows.append([t, box.x1, box.x2, box.d1, box.d2, model.r,
                             val.total, val.cross_term, val.diagonal_term, None, None, None])
    else:  # compare
        _, triplet = _tilted_triplet(cfg)
        x_grid = [b.x1 for b in boxes]
        d = boxes[0].d1
        scan = uniformity_scan(model, grids["t_grid"], x_grid, d, triplet, cfg["n_paths"], threads=threads)
        rows = [[rrow[c] for c in SCHEMA] for rrow in scan]
    _write_csv(out, SCHEMA, rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="renewalrisk", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("experiment", choices=EXPERIMENTS, nargs="?",
                        help="override the experiment named in the config")
    parser.add_argument("--config", required=True, help="path to the JSON configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for simulation batches")
    parser.add_argument("--out", default=None, help="override the config output path ('-' for stdout)")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.experiment:
            doc["experiment"] = args.experiment
        if args.seed is not None:
            doc.setdefault("model", {})["seed"] = args.seed
        cfg = parse_config(doc)
        if args.out is not None:
            cfg["output_path"] = args.out
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        run(cfg, threads=max(1, args.threads))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - harness boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
