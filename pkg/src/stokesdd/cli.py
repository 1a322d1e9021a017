"""Command-line entry point: ser / rate sweeps, the covariance calibration
oracle, and a channel-estimation demo."""

from __future__ import annotations

import argparse
import os
import sys

from .config import SEED_ENV_VAR, ExperimentConfig
from .experiments import (
    channel_estimation_demo,
    covariance_calibration,
    emit_plot_script,
    run_rate_experiment,
    run_ser_experiment,
    write_csv,
)

_OVERRIDES = (
    ("n_rings", int),
    ("n_phases", int),
    ("osnr_start_db", float),
    ("osnr_stop_db", float),
    ("osnr_step_db", float),
    ("symbols_per_block", int),
    ("blocks", int),
    ("seed", int),
    ("receiver_variant", str),
    ("channel_mode", str),
    ("training_repeats", int),
    ("detection_mode", str),
    ("n_samples", int),
    ("n_bins", int),
    ("n_channels", int),
    ("rate_context", str),
    ("workers", int),
)


def _add_experiment_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--out", help="output CSV path (default <experiment>.csv)")
    parser.add_argument(
        "--plot-script",
        action="store_true",
        help="also emit a standalone matplotlib script next to the CSV",
    )
    for name, typ in _OVERRIDES:
        parser.add_argument(f"--{name.replace('_', '-')}", type=typ, dest=name)


def _build_config(args: argparse.Namespace, experiment: str) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {"experiment": experiment}
    for name, _ in _OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if "seed" not in overrides and not args.config and SEED_ENV_VAR in os.environ:
        overrides["seed"] = int(os.environ[SEED_ENV_VAR])
    cfg = cfg.replaced(**overrides)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stokesdd",
        description="Dual-polarization direct-detection link simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, desc in (
        ("ser", "per-dimension symbol-error-rate sweep"),
        ("rate", "inter-slot phase achievable-rate sweep"),
    ):
        p = sub.add_parser(name, help=desc)
        _add_experiment_args(p)

    p = sub.add_parser("calibrate-cov", help="Monte Carlo check of the closed-form statistics")
    p.add_argument("--configs", type=int, default=100)
    p.add_argument("--draws", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("estimate-channel-demo", help="training-based channel estimation demo")
    p.add_argument("--osnr-db", type=float, default=20.0)
    p.add_argument("--repeats", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)

    args = parser.parse_args(argv)

    if args.command in ("ser", "rate"):
        cfg = _build_config(args, args.command)
        rows = run_ser_experiment(cfg) if args.command == "ser" else run_rate_experiment(cfg)
        out = args.out or f"{args.command}.csv"
        write_csv(rows, out)
        print(f"wrote {out} ({len(rows) - 1} rows)")
        if args.plot_script:
            print("wrote", emit_plot_script(out, args.command))
        return 0

    default_seed = int(os.environ.get(SEED_ENV_VAR, "0"))
    if args.command == "calibrate-cov":
        seed = args.seed if args.seed is not None else default_seed
        cal = covariance_calibration(args.configs, args.draws, seed)
        print(
            f"configs={cal.n_configs} draws={cal.n_draws}\n"
            f"max relative deviation, per-slot mean:  {cal.max_rel_dev_mean_123:.5f}\n"
            f"max relative deviation, per-slot cov:   {cal.max_rel_dev_cov_123:.5f}\n"
            f"max relative deviation, delayed mean:   {cal.max_rel_dev_mean_4:.5f}\n"
            f"max relative deviation, delayed cov:    {cal.max_rel_dev_cov_4:.5f}\n"
            f"worst: {cal.worst:.5f}"
        )
        return 0

    if args.command == "estimate-channel-demo":
        seed = args.seed if args.seed is not None else default_seed
        report = channel_estimation_demo(args.osnr_db, args.repeats, seed)
        for key, value in report.items():
            print(f"{key}: {value}")
        return 0

    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
