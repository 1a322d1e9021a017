#!/usr/bin/env python3
"""Inter-slot phase achievable rate over OSNR for a few ring/PSK alphabets.

One CSV (plus plot script) per alphabet.
"""

import argparse

from stokesdd.config import ExperimentConfig
from stokesdd.experiments import emit_plot_script, run_rate_experiment, write_csv

ALPHABETS = ((1, 4), (2, 4), (2, 8))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-samples", type=int, default=400_000)
    parser.add_argument("--n-bins", type=int, default=32)
    parser.add_argument("--n-channels", type=int, default=20)
    args = parser.parse_args()

    for n_rings, n_phases in ALPHABETS:
        cfg = ExperimentConfig(
            experiment="rate",
            n_rings=n_rings,
            n_phases=n_phases,
            osnr_start_db=8.0,
            osnr_stop_db=26.0,
            osnr_step_db=2.0,
            seed=args.seed,
            n_samples=args.n_samples,
            n_bins=args.n_bins,
            n_channels=args.n_channels,
        )
        out = f"rate_{n_rings}ring_{n_phases}psk.csv"
        write_csv(run_rate_experiment(cfg), out)
        print("wrote", out)
        print("wrote", emit_plot_script(out, "rate"))


if __name__ == "__main__":
    main()
