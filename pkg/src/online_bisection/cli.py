"""Command-line entry point: ``online-bisection {run,batch,scaling,verify-lemmas}``."""
from __future__ import annotations

import argparse
import sys

from .config import ExperimentConfig, load_config
from .errors import BisectionError, ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _t_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value experiment file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="CSV output path (overrides output_path)")
    common.add_argument("--quiet", action="store_true", help="suppress the summary")

    parser = argparse.ArgumentParser(prog="online-bisection", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="online run, one CSV row per query")
    sub.add_parser("batch", parents=[common], help="online run then frozen-hypothesis evaluation")
    sc = sub.add_parser("scaling", parents=[common], help="ln-ln slope of average error vs T")
    sc.add_argument("--t-list", type=_t_list, default=[10_000, 100_000, 1_000_000])
    sc.add_argument("--seeds", type=int, default=1, help="seeds averaged per horizon")
    sc.add_argument("--no-shrink", action="store_true", help="ablation: never shrink the hypercube")
    vl = sub.add_parser("verify-lemmas", parents=[common], help="Monte Carlo lemma checks")
    vl.add_argument("--chernoff-trials", type=int, default=100_000)
    vl.add_argument("--cut-trials", type=int, default=10_000)
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_path"] = args.out
    return cfg.with_(**changes) if changes else cfg


def _say(args, *lines):
    if not args.quiet:
        for line in lines:
            print(line)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    from . import harness, verify

    try:
        if args.command == "run":
            s = harness.write_run_csv(cfg, cfg.output_path)
            _say(args, f"wrote {cfg.T} rows to {cfg.output_path}",
                 f"avg_error={s.avg_error:.6g} final_side={s.final_side:.6g} phases={s.phases} "
                 f"oracle_calls={s.oracle_calls} converged={s.converged} contained={s.contained}")
        elif args.command == "batch":
            r = harness.run_batch(cfg)
            _say(args, f"mean_abs_error={r.mean_abs_error:.6g} bound={r.bound:.6g} "
                       f"bound_satisfied={r.bound_satisfied} final_side={r.final_side:.6g} "
                       f"converged={r.converged} eval_oracle_calls={r.eval_oracle_calls}")
        elif args.command == "scaling":
            r = harness.run_scaling(cfg, args.t_list, shrink_enabled=not args.no_shrink,
                                    n_seeds=args.seeds)
            lines = [f"T={T} avg_error={e:.6g}" for T, e in zip(r.T_list, r.avg_errors)]
            _say(args, *lines, f"slope={r.slope:.6f}")
        else:
            reports = verify.run_lemma_suite(seed=cfg.seed, chernoff_trials=args.chernoff_trials,
                                             cut_trials=args.cut_trials)
            for rep in reports:
                print(rep.line())
            if not all(rep.passed for rep in reports):
                return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BisectionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
