"""Command-line interface.

Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
3 bound violation found by ``verify``.
"""
import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    attainable_rhs,
    find_optimal,
    heisenberg_rhs,
    random_measurement_product,
    spin_gamma_residual,
    tradeoff_report,
)
from .config import load_config, load_povm
from .errors import ConfigError, SearchFailedError
from .experiments import (
    EstimationRun,
    Sampler,
    ScatterConfig,
    boundary_curves,
    curves_to_csv,
    dataset_to_csv,
    evaluate_povm,
    read_dataset_csv,
    scatter_scan,
    simulate_estimation,
    verify_bounds,
)
from .measurements import mix, projection_of

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_VIOLATION = 3


def _emit(args, payload, lines):
    if args.json:
        print(json.dumps(payload, indent=2, default=_jsonable))
    else:
        for line in lines:
            print(line)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(f"not JSON serializable: {type(v)}")


def _num(v):
    """JSON has no infinity; encode it as a string."""
    return "inf" if isinstance(v, float) and math.isinf(v) else v


def cmd_bounds(args, cfg):
    povm = load_povm(args.povm) if args.povm else cfg.povm
    q1 = args.q1 if args.q1 is not None else (cfg.q1 if cfg.q1 is not None else 0.5)
    if povm is None:
        rep = random_measurement_product(cfg.state, cfg.x1, cfg.x2, q1)
        source = f"random measurement of X1/X2 with q1={q1}"
    else:
        if povm.dim != cfg.d:
            raise ConfigError(f"POVM dimension {povm.dim} does not match state dimension {cfg.d}")
        rep = tradeoff_report(cfg.state, cfg.x1, cfg.x2, povm)
        source = "POVM file"
    payload = {k: _num(v) for k, v in rep.as_dict().items()}
    payload["measurement"] = source
    _emit(args, payload, [f"measurement: {source}"] + [f"{k}: {v}" for k, v in rep.as_dict().items()])
    return EXIT_OK


def cmd_optimal(args, cfg):
    q1 = args.q1 if args.q1 is not None else cfg.q1
    try:
        opt = find_optimal(cfg.state, cfg.x1, cfg.x2, q1=q1)
    except SearchFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    payload = {
        "gammas": list(opt.gammas),
        "q1": opt.q1,
        "A": opt.A,
        "residual": opt.residual,
        "cross_term": opt.cross_term,
        "product": _num(opt.product),
        "rhs_attainable": opt.rhs,
        "Y1": opt.Y1.matrix,
        "Y2": opt.Y2.matrix,
    }
    if cfg.spin_angles is not None and all(math.isfinite(g) for g in opt.gammas):
        phi = cfg.spin_angles[1] - cfg.spin_angles[0]
        if 0.0 < phi < math.pi:
            payload["angle_condition_residual"] = spin_gamma_residual(*opt.gammas, phi)
    lines = [f"{k}: {v}" for k, v in payload.items() if k not in ("Y1", "Y2", "A")]
    lines.append(f"A: {np.array2string(np.asarray(opt.A), precision=12)}")
    _emit(args, payload, lines)
    return EXIT_OK


def _scan_config(args, cfg):
    sampler = cfg.sampler
    if args.sampler:
        sampler = Sampler(args.sampler, outcomes=sampler.outcomes, rank=sampler.rank)
    return ScatterConfig(
        cfg.state,
        cfg.x1,
        cfg.x2,
        sampler=sampler,
        n_samples=args.n if args.n is not None else cfg.n,
        seed=args.seed if args.seed is not None else cfg.seed,
    )


def cmd_scan(args, cfg):
    sc = _scan_config(args, cfg)
    rows = scatter_scan(sc, threads=args.threads)
    out = args.out or cfg.output
    if out:
        with open(out, "w", newline="") as fh:
            dataset_to_csv(rows, fh)
    else:
        sys.stdout.write(dataset_to_csv(rows))
    rep = verify_bounds(rows)
    summary = {
        "rows": len(rows),
        "sampler": sc.sampler.kind,
        "seed": sc.seed,
        "violations_heisenberg": len(rep.heisenberg),
        "violations_attainable": len(rep.attainable),
        "min_product": _num(min(r.product for r in rows)),
        "rhs_heisenberg": rows[0].rhs_heisenberg,
        "rhs_attainable": rows[0].rhs_attainable,
        "output": out,
    }
    if out:
        _emit(args, summary, [f"{k}: {v}" for k, v in summary.items()])
    else:
        print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def cmd_curves(args, cfg):
    res = args.resolution or cfg.resolution
    curves = boundary_curves(cfg.state, cfg.x1, cfg.x2, resolution=res)
    out = args.out or cfg.output
    if out:
        with open(out, "w", newline="") as fh:
            curves_to_csv(curves, fh)
        payload = {cid: {"rhs": c.rhs, "degenerate": c.degenerate} for cid, c in curves.items()}
        _emit(args, payload, [f"{cid}: rhs={c.rhs} degenerate={c.degenerate}" for cid, c in curves.items()])
    else:
        sys.stdout.write(curves_to_csv(curves))
    return EXIT_OK


def _estimation_povm(kind, cfg, target, q1):
    if kind == "projection":
        return projection_of(target)
    if kind == "random":
        return mix(projection_of(cfg.x1), projection_of(cfg.x2), q1)
    if kind == "optimal":
        return find_optimal(cfg.state, cfg.x1, cfg.x2, q1=cfg.q1).povm
    if cfg.povm is None:
        raise ConfigError("estimation.measurement = 'povm' needs a 'povm' file in the config")
    return cfg.povm


def cmd_simulate(args, cfg):
    est = cfg.estimation
    target = (cfg.x1, cfg.x2)[est.get("observable", 0)]
    kind = est.get("measurement", "random")
    povm = _estimation_povm(kind, cfg, target, cfg.q1 if cfg.q1 is not None else 0.5)
    run = EstimationRun(
        n=args.n if args.n is not None else est.get("n", 10_000),
        trials=est.get("trials", 2000),
        estimator=est.get("estimator", "maximum-likelihood"),
    )
    seed = args.seed if args.seed is not None else est.get("seed", cfg.seed)
    try:
        filled = simulate_estimation(cfg.state, target, povm, run, seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {**filled.as_dict(), "measurement": kind, "seed": seed}
    payload["ratio"] = filled.empirical_nvar / filled.predicted_nvar
    print(json.dumps(payload, indent=2, default=_jsonable))
    return EXIT_OK


def cmd_verify(args, cfg_path):
    target = Path(args.target)
    if target.suffix.lower() == ".csv":
        try:
            with open(target, newline="") as fh:
                rows = read_dataset_csv(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read dataset {target}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"malformed dataset {target}: {exc}") from exc
    else:
        if cfg_path is None:
            raise ConfigError("verifying a POVM file requires --config for the state and observables")
        cfg = load_config(cfg_path)
        povm = load_povm(target)
        if povm.dim != cfg.d:
            raise ConfigError(f"POVM dimension {povm.dim} does not match state dimension {cfg.d}")
        rows = [evaluate_povm(0, cfg.state, cfg.x1, cfg.x2, povm)]
    rep = verify_bounds(rows)
    payload = rep.as_dict()
    lines = [
        f"rows: {rep.n_rows}",
        f"violations (commutator bound): {len(rep.heisenberg)}",
        f"violations (attainable bound): {len(rep.attainable)}",
    ]
    if rep.heisenberg or rep.attainable:
        lines.append(f"violating indices: {sorted(set(rep.heisenberg) | set(rep.attainable))[:20]}")
    _emit(args, payload, lines)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quantum-tradeoff",
        description="Measurement-error trade-offs from Fisher information.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, needs_config=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=needs_config, help="JSON run configuration")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = add("bounds", "errors of a POVM (or the random X1/X2 measurement) against both bounds")
    p.add_argument("--povm", help="serialized POVM to evaluate")
    p.add_argument("--q1", type=float, help="weight of X1 in the random measurement")

    p = add("optimal", "search for the measurement attaining the attainable bound")
    p.add_argument("--q1", type=float, help="fix the mixing weight")

    p = add("scan", "Monte Carlo scan over random POVMs, written as CSV")
    p.add_argument("--n", type=int, help="number of sampled POVMs")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.add_argument("--sampler", choices=("all", "noisy", "random_mixture", "trivial"))
    p.add_argument("--threads", type=int, default=1)

    p = add("curves", "bound curves in the normalized-error plane, written as CSV")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")

    p = add("simulate", "finite-sample estimator simulation, JSON report")
    p.add_argument("--n", type=int, help="samples per trial")
    p.add_argument("--seed", type=int)

    p = add("verify", "check a dataset CSV or a POVM file for bound violations", needs_config=False)
    p.add_argument("target", help="dataset CSV or POVM JSON")
    return parser


COMMANDS = {
    "bounds": cmd_bounds,
    "optimal": cmd_optimal,
    "scan": cmd_scan,
    "curves": cmd_curves,
    "simulate": cmd_simulate,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            return cmd_verify(args, args.config)
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    sys.exit(run())
