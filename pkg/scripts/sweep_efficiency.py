"""Recognition efficiency against reader distance and miss floor for a 60-tag panel.

Prints one row per (distance, p_base) with efficiency and median inventory time.
"""

import argparse

from ondr.harness import LinkConfig, ScenarioConfig, run_scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--distances", type=float, nargs="+", default=[10, 30, 60, 90, 110, 120])
    ap.add_argument("--p-base", type=float, nargs="+", default=[0.0, 0.01, 0.05])
    args = ap.parse_args()
    print(f"{'dist_cm':>8} {'p_base':>7} {'eff':>6} {'p50_s':>8}")
    for d in args.distances:
        for p in args.p_base:
            cfg = ScenarioConfig(mode="inventory_only", trials=args.trials, tag_distance=d,
                                 link=LinkConfig(p_base=p))
            r = run_scenario(cfg)
            print(f"{d:8.1f} {p:7.3f} {r.efficiency:6.3f} {r.quantile(0.5):8.4f}")


if __name__ == "__main__":
    main()
