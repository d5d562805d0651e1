"""Run the figure presets and write a markdown report for each.

Example: python3 scripts/reproduce_figures.py --M 200 --out runs
"""

import argparse
from pathlib import Path

from dynepovm.experiments import PRESETS, preset, run_experiment
from dynepovm.report import build_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs")
    ap.add_argument("--M", type=int, help="ensemble size override")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("names", nargs="*", default=sorted(PRESETS))
    args = ap.parse_args()
    for name in args.names:
        cfg = preset(name)
        updates = {"workers": args.workers}
        if args.M and cfg.kind == "povm":
            updates["M"] = args.M
        run = run_experiment(cfg.replace(**updates), Path(args.out) / name)
        if cfg.kind == "povm":
            (run / "report.md").write_text(build_report(run) + "\n")
        print(f"{name}: {run}")


if __name__ == "__main__":
    main()
