"""Command-line entry point: ``lfrl train | eval | plot-data | config``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import RunConfig, default_config_toml, load_config
from .errors import ConfigError, LfrlError, NonFiniteGradient
from .harness import cmd_eval, cmd_plot_data, cmd_train


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lfrl", description="Leader-following lane-keeping simulator and PPO harness.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML run configuration")
        sp.add_argument("--out", help="output directory (env LFRL_OUT overrides the config value)")

    t = sub.add_parser("train", help="train one PPO policy per seed")
    common(t)
    g = t.add_mutually_exclusive_group()
    g.add_argument("--seeds", type=int, help="train seeds 0..N-1")
    g.add_argument("--seed", type=int, help="train a single seed")
    t.add_argument("--steps", type=int, help="environment steps per seed")

    e = sub.add_parser("eval", help="evaluate the DRL policy and/or the IDM+PD baseline")
    common(e)
    e.add_argument("--agent", choices=["drl", "baseline", "both"])
    e.add_argument("--leader", choices=["ou", "scripted"])
    e.add_argument("--episodes", type=int)
    e.add_argument("--checkpoint", help="policy checkpoint (drl agent only)")
    e.add_argument("--seed", type=int, help="first evaluation episode seed")

    pd = sub.add_parser("plot-data", help="plot-ready CSVs from episode logs and learning curves")
    common(pd)
    pd.add_argument("inputs", nargs="+", help="episode logs, curve.csv files or directories containing them")

    c = sub.add_parser("config", help="print the default configuration with provenance comments")
    c.add_argument("--config", help="render this file's resolved values instead of the defaults")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.command == "config":
            sys.stdout.write(default_config_toml(cfg))
            return 0
        if args.command == "train":
            seeds = list(range(args.seeds)) if args.seeds else ([args.seed] if args.seed is not None else None)
            res = cmd_train(cfg, seeds, args.steps, args.out)
            for seed, info in res["seeds"].items():
                print(f"seed {seed}: {info['dir']} (best iter {info['best_iter']}, validation {info['best_score']})")
            print(f"best checkpoint: {res['best_checkpoint']} (seed {res['best_seed']})")
        elif args.command == "eval":
            if args.episodes is not None and args.episodes < 1:
                raise ConfigError("--episodes must be >= 1")
            res = cmd_eval(cfg, args.agent, args.leader, args.episodes, args.checkpoint, args.seed, args.out)
            sys.stdout.write(res["table"])
            for name, rep in res["reports"].items():
                print(f"{name}: collisions {rep.collisions}/{rep.episodes}")
        elif args.command == "plot-data":
            res = cmd_plot_data(cfg, args.inputs, args.out)
            print(f"wrote {len(res['files'])} files ({res['ttc_samples']} TTC, {res['headway_samples']} headway samples)")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteGradient as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3
    except (LfrlError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
