"""Command line interface: run, phasespace, report, presets."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiments import (
    PRESETS,
    ConfigError,
    ExperimentConfig,
    StateConfig,
    preset,
    run_experiment,
)
from .povm import PositivityError
from .report import build_report

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
log = logging.getLogger("dynepovm")


def _load(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        cfg = ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["noise"] = {**cfg.to_dict()["noise"], "seed": args.seed}
    if args.workers is not None:
        updates["workers"] = args.workers
    if getattr(args, "M", None) is not None:
        updates["M"] = args.M
    return cfg.replace(**updates) if updates else cfg


def _parse_state(text: str) -> StateConfig:
    kind, _, arg = text.partition(":")
    if kind == "vacuum":
        return StateConfig("vacuum")
    if kind == "fock":
        return StateConfig("fock", n=int(arg or 4))
    if kind == "squeezed":
        return StateConfig("squeezed", s=float(arg or 0.25))
    raise ConfigError(f"state must be vacuum, fock:N or squeezed:S, got {text!r}")


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out or f"runs/{cfg.name}")
    run_experiment(cfg, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_phasespace(args) -> int:
    base = preset("fig1") if not args.config else ExperimentConfig.load(args.config)
    grid = {**base.to_dict()["grid"], "n_q": args.n, "n_p": args.n,
            "q_min": -args.extent, "q_max": args.extent, "p_min": -args.extent, "p_max": args.extent}
    state = _parse_state(args.state).__dict__
    cfg = base.replace(kind="phasespace", state=state, grid=grid)
    out = Path(args.out or "runs/phasespace")
    run_experiment(cfg, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    run = Path(args.run_dir)
    if not (run / "summary.csv").exists():
        raise ConfigError(f"{run} has no summary.csv")
    text = build_report(run)
    (run / "report.md").write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.name:
        print(json.dumps(preset(args.name).to_dict(), indent=2))
    else:
        for name, cfg in PRESETS.items():
            print(f"{name:10s} {cfg.kind}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynepovm", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config or preset")
    r.add_argument("--config", type=Path)
    r.add_argument("--preset", choices=sorted(PRESETS))
    r.add_argument("--seed", type=int)
    r.add_argument("--M", type=int, help="override ensemble size")
    r.add_argument("--out")
    r.add_argument("--workers", type=int, help="process count (results do not depend on it)")
    r.set_defaults(func=cmd_run)

    ph = sub.add_parser("phasespace", help="Wigner / Husimi maps and marginals")
    ph.add_argument("--state", default="fock:4", help="vacuum | fock:N | squeezed:S")
    ph.add_argument("--config", type=Path)
    ph.add_argument("--extent", type=float, default=6.0)
    ph.add_argument("--n", type=int, default=201)
    ph.add_argument("--out")
    ph.set_defaults(func=cmd_phasespace)

    rep = sub.add_parser("report", help="summarize a run directory")
    rep.add_argument("run_dir")
    rep.set_defaults(func=cmd_report)

    pr = sub.add_parser("presets", help="list presets or print one as JSON")
    pr.add_argument("name", nargs="?")
    pr.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (PositivityError, FloatingPointError) as exc:
        log.error("numerical tolerance failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
