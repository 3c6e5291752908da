"""Command-line front end: run benchmark studies, draw sample designs,
fit surrogates and interrogate saved models."""
from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .basis import build_multi_index_set
from .bench import (
    SCHEMES,
    SOLVERS,
    StudyConfig,
    make_design,
    run_study,
    summarize,
    write_records_csv,
    write_success_csv,
    write_summary_csv,
)
from .models import PROBLEM_NAMES, get_problem
from .surrogate import fit as fit_surrogate
from .surrogate import load_model, moments, predict, save_model

_STUDY_KEYS = {
    "problem": str,
    "schemes": "list",
    "grid": "grid",
    "repetitions": int,
    "thresholds": "floats",
    "solver": str,
    "seed": int,
    "n_test": int,
    "n_ref": int,
    "n_freq": int,
    "pool_factor": int,
    "jobs": int,
}

# desk-scale study presets; the electrode preset trims the frequency
# grid to 64 points (128 QOIs) to bound runtime
PRESETS = {
    "ishigami-fig3": dict(
        problem="ishigami",
        schemes=("random", "lhs-std", "lhs-mm", "lhs-phip", "lhs-sc-ese"),
        grid=tuple(range(16, 61, 4)),
        repetitions=30,
    ),
    "rosenbrock-fig5": dict(
        problem="rosenbrock6",
        schemes=("random", "co", "mc", "mc-cc", "d", "d-coh"),
        grid=tuple(range(40, 129, 8)),
        repetitions=30,
    ),
    "lpp-fig7": dict(
        problem="lpp30",
        schemes=("random", "co", "mc", "mc-cc"),
        grid=tuple(range(100, 221, 10)),
        repetitions=30,
    ),
    "electrode-fig9-reduced": dict(
        problem="electrode",
        schemes=("random", "lhs-sc-ese", "co"),
        grid=tuple(range(24, 69, 4)),
        repetitions=30,
        n_freq=64,
        n_ref=1_000_000,
    ),
}


class ConfigError(ValueError):
    pass


def _parse_grid(text: str):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid range must be start:stop:step, got {text!r}")
        start, stop, step = (int(p) for p in parts)
        return tuple(range(start, stop + 1, step))
    return tuple(int(tok) for tok in text.split(","))


def _parse_study_section(section) -> dict:
    values = {}
    for key in section:
        if key not in _STUDY_KEYS:
            raise ConfigError(f"unknown config key {key!r} in [study]")
        kind = _STUDY_KEYS[key]
        raw = section[key]
        try:
            if kind == "list":
                values[key] = tuple(tok.strip() for tok in raw.split(",") if tok.strip())
            elif kind == "grid":
                values[key] = _parse_grid(raw)
            elif kind == "floats":
                values[key] = tuple(float(tok) for tok in raw.split(","))
            else:
                values[key] = kind(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return values


def load_study_config(path) -> StudyConfig:
    """Parse an INI-style study config; unknown sections or keys are a
    hard error."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    sections = set(parser.sections())
    if sections != {"study"}:
        raise ConfigError(f"config must contain exactly a [study] section, got {sorted(sections)}")
    values = _parse_study_section(parser["study"])
    for required in ("problem", "schemes", "grid"):
        if required not in values:
            raise ConfigError(f"missing required config key {required!r}")
    try:
        return StudyConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def preset_config(name: str, **overrides) -> StudyConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    values = dict(PRESETS[name])
    values.update(overrides)
    return StudyConfig(**values)


def _config_echo(config: StudyConfig) -> dict:
    return {
        "problem": config.problem,
        "schemes": list(config.schemes),
        "grid": list(config.grid),
        "repetitions": config.repetitions,
        "thresholds": list(config.thresholds),
        "solver": config.solver,
        "seed": config.seed,
        "n_test": config.n_test,
        "n_ref": config.n_ref,
        "n_freq": config.n_freq,
        "pool_factor": config.pool_factor,
        "jobs": config.jobs,
    }


def cmd_bench(args) -> int:
    try:
        if args.preset:
            overrides = {}
            if args.seed is not None:
                overrides["seed"] = args.seed
            if args.jobs is not None:
                overrides["jobs"] = args.jobs
            if args.full_frequencies:
                overrides["n_freq"] = 1000
            config = preset_config(args.preset, **overrides)
        elif args.config:
            config = load_study_config(args.config)
            replace = {}
            if args.seed is not None:
                replace["seed"] = args.seed
            if args.jobs is not None:
                replace["jobs"] = args.jobs
            if replace:
                config = StudyConfig(**{**_config_echo(config), **replace,
                                        "schemes": config.schemes,
                                        "grid": config.grid,
                                        "thresholds": config.thresholds})
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if not args.preset and not args.config:
        print("config error: either --config or --preset is required", file=sys.stderr)
        return 1

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "gpcbench",
        "version": __version__,
        "config": _config_echo(config),
        "seed": config.seed,
        "status": "ok",
        "outputs": [],
    }
    started = time.time()
    try:
        records = run_study(config)
        rows = summarize(records, config.thresholds, baseline_scheme=config.schemes[0])
        paths = {
            "records": out_dir / "records.csv",
            "summary": out_dir / "summary.csv",
            "success_rates": out_dir / "success_rates.csv",
        }
        write_records_csv(records, paths["records"])
        write_summary_csv(rows, paths["summary"])
        write_success_csv(records, config.thresholds, paths["success_rates"])
        manifest["outputs"] = [str(p) for p in paths.values()]
    except Exception as exc:  # noqa: BLE001 - partial outputs must be recorded
        manifest["status"] = "failed"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        manifest["elapsed_s"] = time.time() - started
        with open(out_dir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=1)
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    manifest["elapsed_s"] = time.time() - started
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    return 0


def _basis_for_args(args):
    if args.problem:
        problem = get_problem(args.problem, n_freq=args.n_freq)
        d = problem.spec.d
        p = args.order if args.order is not None else problem.order
        p_i = args.interaction_order if args.interaction_order is not None else problem.interaction_order
        return build_multi_index_set(d, p, p_i)
    if args.dimension is None or args.order is None:
        raise ConfigError("scheme needs a basis: give --problem or both -d and -p")
    p_i = args.interaction_order if args.interaction_order is not None else args.order
    return build_multi_index_set(args.dimension, args.order, p_i)


def cmd_sample(args) -> int:
    try:
        if args.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {args.scheme!r}")
        needs_basis = args.scheme in ("co", "mc", "mc-cc", "d", "d-coh")
        if needs_basis:
            basis = _basis_for_args(args)
        else:
            if args.dimension is None:
                raise ConfigError("-d is required")
            basis = build_multi_index_set(args.dimension, 1, 1)
        design = make_design(args.scheme, args.m, basis, args.seed)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    d = design.points.shape[1]
    greedy = args.scheme in ("mc", "mc-cc", "d", "d-coh")
    weighted = not np.allclose(design.weights, 1.0)
    cols = (["order"] if greedy else []) + [f"x{k + 1}" for k in range(d)]
    if weighted:
        cols.append("weight")
    with open(args.out, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(design.m):
            row = ([str(i)] if greedy else []) + [f"{v:.17g}" for v in design.points[i]]
            if weighted:
                row.append(f"{design.weights[i]:.17g}")
            fh.write(",".join(row) + "\n")
    return 0


def cmd_fit(args) -> int:
    try:
        problem = get_problem(args.problem, n_freq=args.n_freq)
        basis = build_multi_index_set(
            problem.spec.d,
            args.order if args.order is not None else problem.order,
            args.interaction_order if args.interaction_order is not None else problem.interaction_order,
        )
        if args.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {args.scheme!r}")
        if args.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {args.solver!r}")
        design = make_design(args.scheme, args.m, basis, args.seed)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        y = problem.evaluate(problem.spec.from_unit(design.points))
        model = fit_surrogate(design, y, basis, problem.spec,
                              solver=args.solver, seed=args.seed)
        save_model(model, args.out)
    except (ValueError, np.linalg.LinAlgError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


def _read_points_csv(path) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline()
        try:
            [float(tok) for tok in first.split(",")]
            skip = 0
        except ValueError:
            skip = 1
    return np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=skip))


def cmd_predict(args) -> int:
    try:
        model = load_model(args.model)
        points = _read_points_csv(args.points)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    bad = [i for i in range(points.shape[0]) if not model.spec.contains(points[i])]
    if bad:
        for i in bad:
            print(f"row {i}: point outside model domain", file=sys.stderr)
        return 2
    try:
        values = predict(model, points)
    except ValueError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    with open(args.out, "w") as fh:
        fh.write(",".join(f"y{q + 1}" for q in range(values.shape[1])) + "\n")
        for row in values:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return 0


def cmd_moments(args) -> int:
    try:
        model = load_model(args.model)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    mean, std = moments(model)
    print("qoi,mean,std")
    for q in range(mean.shape[0]):
        print(f"{q},{mean[q]:.6g},{std[q]:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpcbench")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bench = sub.add_parser("bench", help="run a convergence study")
    p_bench.add_argument("--config", help="INI study config")
    p_bench.add_argument("--preset", choices=sorted(PRESETS))
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--jobs", type=int, default=None)
    p_bench.add_argument("--full-frequencies", action="store_true",
                         help="electrode preset: use the full 1000-point frequency grid")
    p_bench.set_defaults(func=cmd_bench)

    p_sample = sub.add_parser("sample", help="draw one sample design")
    p_sample.add_argument("scheme", choices=SCHEMES)
    p_sample.add_argument("-m", type=int, required=True, help="sample count")
    p_sample.add_argument("-d", "--dimension", type=int)
    p_sample.add_argument("-p", "--order", type=int)
    p_sample.add_argument("--interaction-order", type=int)
    p_sample.add_argument("--problem", choices=PROBLEM_NAMES)
    p_sample.add_argument("--n-freq", type=int, default=1000)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("-o", "--out", required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_fit = sub.add_parser("fit", help="fit a surrogate on a fresh design")
    p_fit.add_argument("--problem", required=True, choices=PROBLEM_NAMES)
    p_fit.add_argument("--scheme", default="random", choices=SCHEMES)
    p_fit.add_argument("-m", type=int, required=True)
    p_fit.add_argument("--solver", default="lars", choices=SOLVERS)
    p_fit.add_argument("-p", "--order", type=int)
    p_fit.add_argument("--interaction-order", type=int)
    p_fit.add_argument("--n-freq", type=int, default=1000)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("-o", "--out", required=True, help="model JSON path")
    p_fit.set_defaults(func=cmd_fit)

    p_predict = sub.add_parser("predict", help="evaluate a saved model")
    p_predict.add_argument("--model", required=True)
    p_predict.add_argument("--points", required=True, help="CSV of physical points")
    p_predict.add_argument("-o", "--out", required=True)
    p_predict.set_defaults(func=cmd_predict)

    p_moments = sub.add_parser("moments", help="print mean and std per QOI")
    p_moments.add_argument("--model", required=True)
    p_moments.set_defaults(func=cmd_moments)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
