"""Command-line entry point: ``train``, ``evaluate`` and ``inspect``."""

import argparse
import logging
import sys

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint
from .config import ConfigError, load_config, parse_overrides
from .train import evaluate, run

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pendulum-rl", description="DDPG / PPO on the pendulum swing-up task")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every episode/season")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    train = sub.add_parser("train", help="train an agent")
    train.add_argument("--algo", choices=("ddpg", "ppo"))
    train.add_argument("--method", choices=("clip", "penalty"))
    train.add_argument("--seed", type=int)
    train.add_argument("--config", help="flat 'key = value' config file")
    train.add_argument("--out", help="output directory")
    train.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key (repeatable)")

    ev = sub.add_parser("evaluate", help="greedy rollouts from a checkpoint")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--episodes", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)

    insp = sub.add_parser("inspect", help="print checkpoint metadata")
    insp.add_argument("--checkpoint", required=True)
    return parser


def _cmd_train(args) -> int:
    extra = {}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        extra[key.strip()] = value
    overrides = parse_overrides(extra)
    overrides.update(algo=args.algo, method=args.method, seed=args.seed, output_dir=args.out)
    config = load_config(args.config, **overrides)
    if not config.output_dir:
        raise UsageError("an output directory is required (--out or output_dir in config)")
    run_log = run(config)
    last = run_log.rows[-1] if run_log.rows else {}
    print(f"{config.algo}: {len(run_log.rows)} rows, solved_at={run_log.solved_at}, "
          f"last={last}")
    print(f"outputs written to {config.output_dir}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    if args.episodes < 1:
        raise UsageError("--episodes must be >= 1")
    agent, _ = load_checkpoint(args.checkpoint)
    totals = evaluate(agent, args.episodes, seed=args.seed)
    print(f"mean_reward = {np.mean(totals):.6f} over {len(totals)} episodes "
          f"(min {np.min(totals):.3f}, max {np.max(totals):.3f})")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    agent, config = load_checkpoint(args.checkpoint)
    print(f"algo = {config.algo}")
    if config.algo == "ppo":
        print(f"method = {agent.method}")
        print(f"beta = {agent.beta!r}")
        print(f"std = {agent.std.tolist()}")
    print(f"seed = {config.seed}")
    for name, net in agent.networks().items():
        count = sum(p.size for p in net.params)
        print(f"{name}: dims={net.layer_dims} output={net.output_activation} params={count}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    handlers = {"train": _cmd_train, "evaluate": _cmd_evaluate, "inspect": _cmd_inspect}
    try:
        return handlers[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CheckpointError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
