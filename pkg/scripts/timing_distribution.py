"""30-pair SPI verification time distribution: per-trial CSV plus summary.

    python scripts/timing_distribution.py [--trials 100] [--seed 1] [--out timing.csv]
"""

import argparse

from ondr.harness import ScenarioConfig, emit_report, run_scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=30)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()
    report = run_scenario(ScenarioConfig(pairs=args.pairs, trials=args.trials, seed=args.seed,
                                         thresholds=(0.4, 0.5, 0.6, 1.0), histogram_bin=0.02))
    print(emit_report(report), end="")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(emit_report(report, "csv"))


if __name__ == "__main__":
    main()
