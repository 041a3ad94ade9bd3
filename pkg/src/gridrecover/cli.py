"""Command-line entry point: ``generate``, ``recover``, ``sweep`` and ``opta``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .acquisition import read_observations_csv, write_observations_csv
from .bsvt import BsvtConfig, bsvt_recover, write_trace_csv
from .harness import ExperimentConfig, draw_cell, opta_curve, run_sweep, save_sweep
from .lmmse import LmmseModel, lmmse_recover
from .opta import write_bound_csv
from .sampling import write_mask_csv
from .source import load_source, mismatch_covariance, write_matrix_csv
from .svt import SvtConfig, svt_recover

log = logging.getLogger("gridrecover")


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.base_seed = args.seed
    return cfg


def cmd_generate(args) -> int:
    cfg = _config(args)
    if args.gamma is not None:
        cfg.gammas = [float(args.gamma)]
        cfg.validate()
    out = Path(args.out or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    spec = cfg.source()
    cell = draw_cell(cfg, spec, 0, args.repeat)
    write_matrix_csv(out / "truth.csv", cell.truth)
    write_mask_csv(out / "mask.csv", cell.obs.mask)
    write_observations_csv(out / "observations.csv", cell.obs)
    write_matrix_csv(out / "covariance.csv", spec.covariance)
    write_matrix_csv(out / "mean.csv", spec.mean)
    print(f"gamma={cfg.gammas[0]:g} observed={cell.obs.mask.n_observed} -> {out}")
    return 0


def _model(args, obs) -> LmmseModel:
    if args.covariance:
        spec = load_source(args.covariance, args.mean)
    else:
        spec = _config(args).source()
    cov = spec.covariance
    if args.smr is not None:
        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
        cov = mismatch_covariance(cov, args.smr, rng, args.mismatch_mode)
    return LmmseModel(spec.mean, cov, obs.noise_variance)


def cmd_recover(args) -> int:
    obs = read_observations_csv(args.observations)
    if args.method == "svt":
        res = svt_recover(obs, SvtConfig(tau=args.tau, max_iterations=args.max_iter))
        estimate, info = res.estimate, f"iterations={res.iterations} converged={res.converged}"
    elif args.method == "lmmse":
        estimate, info = lmmse_recover(obs, _model(args, obs)), "closed form"
    else:
        res = bsvt_recover(obs, BsvtConfig(_model(args, obs), max_iterations=args.max_iter))
        if args.trace:
            write_trace_csv(args.trace, res)
        estimate, info = res.estimate, f"iterations={res.iterations} converged={res.converged}"
    write_matrix_csv(args.out, estimate)
    print(f"{args.method}: {info} -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    results, bound = run_sweep(cfg, threads=args.threads)
    paths = save_sweep(cfg, results, bound, args.out)
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_opta(args) -> int:
    cfg = _config(args)
    curve = opta_curve(cfg)
    out = Path(args.out) if args.out else Path(cfg.output) / "opta.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_bound_csv(out, curve)
    print(f"opta: {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridrecover", description="Missing-data recovery for state-variable matrices.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat TOML experiment config")
        sp.add_argument("--seed", type=int, help="override base_seed")
        sp.add_argument("--out", help="output path")

    g = sub.add_parser("generate", help="draw truth, mask and observations to CSV")
    common(g)
    g.add_argument("--gamma", type=float, help="missing ratio (default: first of the config grid)")
    g.add_argument("--repeat", type=int, default=0)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("recover", help="recover one observation file")
    common(r)
    r.add_argument("--method", choices=("lmmse", "svt", "bsvt"), required=True)
    r.add_argument("--observations", required=True)
    r.add_argument("--covariance", help="covariance CSV (default: config source)")
    r.add_argument("--mean", help="mean CSV, one value per line or one row")
    r.add_argument("--smr", type=float, help="perturb the covariance at this SMR")
    r.add_argument("--mismatch-mode", default="normalized", choices=("normalized", "squared"))
    r.add_argument("--tau", type=float, help="SVT threshold (default 5N)")
    r.add_argument("--max-iter", type=int, default=500)
    r.add_argument("--trace", help="BSVT per-iteration diagnostic CSV")
    r.set_defaults(func=cmd_recover)

    s = sub.add_parser("sweep", help="run a Monte-Carlo sweep")
    common(s)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("opta", help="write the OPTA bound curve")
    common(o)
    o.set_defaults(func=cmd_opta)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "recover" and not args.out:
        raise SystemExit("recover: --out is required")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
