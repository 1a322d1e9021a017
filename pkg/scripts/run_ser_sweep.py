#!/usr/bin/env python3
"""Per-dimension SER sweep for the 2-ring/4-PSK alphabet, 10-26 dB.

Writes a CSV plus a standalone plot script. Decision-directed by default;
pass --detection-mode genie to isolate the inter-slot stage.
"""

import argparse

from stokesdd.config import ExperimentConfig
from stokesdd.experiments import emit_plot_script, run_ser_experiment, write_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--symbols-per-block", type=int, default=10_000)
    parser.add_argument("--blocks", type=int, default=10)
    parser.add_argument("--detection-mode", default="decision-directed")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="ser_2ring_4psk.csv")
    args = parser.parse_args()

    cfg = ExperimentConfig(
        n_rings=2,
        n_phases=4,
        osnr_start_db=10.0,
        osnr_stop_db=26.0,
        osnr_step_db=2.0,
        symbols_per_block=args.symbols_per_block,
        blocks=args.blocks,
        seed=args.seed,
        detection_mode=args.detection_mode,
        workers=args.workers,
    )
    write_csv(run_ser_experiment(cfg), args.out)
    print("wrote", args.out)
    print("wrote", emit_plot_script(args.out, "ser"))


if __name__ == "__main__":
    main()
