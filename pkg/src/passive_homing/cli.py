"""Command-line entry point: train, eval, compare, dump and calibrate"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from .config import dump_provenance, dump_resolved_config, resolve_run_config
from .dependencies import get_settings
from .errors import HomingError
from .evaluation import (
    DEFAULT_THRUST_SWEEP,
    build_guidance,
    compare,
    format_calibration,
    format_comparison,
    run_campaign,
    summary_row,
    thrust_sweep,
    trajectory_dump,
)
from .models import RunConfig
from .ppo import train
from .presets import PRESET_NAMES
from .storage.reports import (
    read_report,
    run_basename,
    write_calibration,
    write_comparison,
    write_episodes,
    write_report,
    write_trajectory,
)

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.yaml"
COMPARE_PROVENANCE_NAME = "compare_provenance.yaml"

EXIT_OK = 0
EXIT_FAILURE = 1


def _run_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="YAML run document")
    parent.add_argument("--seed", type=int, help="Master seed")
    parent.add_argument("--threads", type=int, help="Episode worker processes")
    parent.add_argument("--out", type=Path, help="Output directory")
    parent.add_argument("--preset", choices=PRESET_NAMES, help="Scenario preset")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passive-homing",
        description="Angle-only terminal homing: RL training and guidance benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_flags = _run_flags()

    p_train = sub.add_parser(
        "train", parents=[run_flags], help="Train a policy with PPO"
    )
    p_train.add_argument("--batches", type=int, help="Number of 30-episode batches")

    p_eval = sub.add_parser(
        "eval", parents=[run_flags], help="Run a Monte Carlo campaign"
    )
    p_eval.add_argument("--episodes", type=int, help="Number of episodes")
    p_eval.add_argument("--guidance", choices=("rl", "zem", "pn"))
    p_eval.add_argument("--checkpoint", type=Path, help="Policy checkpoint for rl")

    p_compare = sub.add_parser("compare", help="Tabulate campaign reports")
    p_compare.add_argument("reports", nargs="+", type=Path, help="Report JSON files")
    p_compare.add_argument("--out", type=Path, help="Directory for the table files")

    p_dump = sub.add_parser("dump", parents=[run_flags], help="Dump one trajectory")
    p_dump.add_argument("--guidance", choices=("rl", "zem", "pn"))
    p_dump.add_argument("--checkpoint", type=Path, help="Policy checkpoint for rl")
    p_dump.add_argument(
        "--episode-seed", type=int, help="Episode seed (default: --seed)"
    )

    p_calibrate = sub.add_parser(
        "calibrate", parents=[run_flags], help="Sweep thruster thrust under ZEM"
    )
    p_calibrate.add_argument("--episodes", type=int, help="Episodes per thrust")
    p_calibrate.add_argument(
        "--thrust",
        type=float,
        nargs="+",
        default=list(DEFAULT_THRUST_SWEEP),
        help="Per-thruster thrusts to try (N)",
    )
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, Any] = {
        "master_seed": args.seed,
        "thread_count": args.threads,
        "output_dir": args.out,
        "preset": args.preset,
        "n_episodes": getattr(args, "episodes", None),
        "guidance": getattr(args, "guidance", None),
        "checkpoint": getattr(args, "checkpoint", None),
        "total_batches": getattr(args, "batches", None),
    }
    return resolve_run_config(args.config, get_settings(), overrides)


def _provenance(config: RunConfig, command: str) -> Path:
    return dump_resolved_config(
        config,
        config.output_dir / RESOLVED_CONFIG_NAME,
        {"command": command, "master_seed": config.master_seed},
    )


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve(args)
    _provenance(config, "train")
    result = train(config, config.output_dir)
    print(
        f"Trained {len(result.rows)} batches; best hit rate "
        f"{100 * result.best_hit_rate:.1f}% at batch {result.best_batch}"
    )
    if result.aborted_batches:
        print(f"Aborted updates at batches {result.aborted_batches}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _resolve(args)
    _provenance(config, "eval")
    report = run_campaign(config)
    stem = run_basename("campaign", report.guidance, report.preset, config.master_seed)
    write_report(config.output_dir / f"{stem}.json", report)
    write_episodes(config.output_dir / f"{stem}_episodes.csv", report.episodes)
    print(summary_row(report))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    if len(args.reports) < 2:
        print("error: compare needs at least two report files", file=sys.stderr)
        return EXIT_FAILURE
    reports = [read_report(path) for path in args.reports]
    rows = compare(reports)
    table = format_comparison(rows)
    print(table, end="")
    if args.out is not None:
        write_comparison(
            args.out / "comparison.txt", args.out / "comparison.csv", rows, table
        )
        dump_provenance(
            args.out / COMPARE_PROVENANCE_NAME,
            {"command": "compare", "reports": [str(p) for p in args.reports]},
        )
    return EXIT_OK


def cmd_dump_trajectory(args: argparse.Namespace) -> int:
    config = _resolve(args)
    seed = args.episode_seed if args.episode_seed is not None else config.master_seed
    _provenance(config, "dump")
    guidance = build_guidance(config)
    rows = trajectory_dump(config, seed, guidance)
    stem = run_basename("trajectory", guidance.name, config.campaign.preset, seed)
    path = write_trajectory(config.output_dir / f"{stem}.csv", rows)
    print(f"Wrote {len(rows)} rows to {path}")
    return EXIT_OK



def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _resolve(args)
    _provenance(config, "calibrate")
    rows = thrust_sweep(config, args.thrust)
    table = format_calibration(rows)
    print(table, end="")
    stem = run_basename(
        "calibration", "zem", config.campaign.preset, config.master_seed
    )
    write_calibration(config.output_dir / f"{stem}.csv", rows)
    (config.output_dir / f"{stem}.txt").write_text(table, encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "dump": cmd_dump_trajectory,
    "calibrate": cmd_calibrate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and run a subcommand

    Returns:
        0 when every requested output was written, 1 otherwise
    """
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (HomingError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
