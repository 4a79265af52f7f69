import argparse
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger

from kvark import fmt as LOG_FORMAT
from kvark._common._exceptions.kvark_exception import BaseKvarkException, StageError
from kvark._core.harness.experiment import (
    ArtifactLayout,
    bench,
    recompute_report,
    run_estimate,
    run_excite,
    run_experiment,
    run_simulate,
    run_train,
)
from kvark._core.harness.io import load_trajectory, save_document
from kvark._core.models.experiment import ExperimentConfig

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "_common" / "configs" / "default.toml"
COMMANDS = ["excite", "simulate", "train", "estimate", "bench", "report", "run"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Kvark: sensorless external-torque estimation experiments"
    )
    parser.add_argument("command", choices=COMMANDS, help="Pipeline stage to execute")
    parser.add_argument(
        "--config", type=Path, default=DEFAULT_CONFIG, help="Experiment TOML file"
    )
    parser.add_argument("--seed", type=int, default=None, help="Master seed (u64)")
    parser.add_argument("--out", type=Path, default=None, help="Output directory")
    parser.add_argument(
        "--trajectory",
        type=Path,
        default=None,
        help="SampledTrajectory CSV for `estimate` instead of <out>/evaluation.csv",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.from_toml(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.out is not None:
        config = config.with_output_dir(args.out)
    return config


def execute(args: argparse.Namespace) -> None:
    if args.command == "report":
        report = recompute_report(args.out or ExperimentConfig.from_toml(args.config).output_dir)
        for name, metrics in report.observers.items():
            logger.info(f"{name}: joint RMSE {metrics.joint_rmse}")
        return

    config = load_config(args)
    layout = ArtifactLayout(config.output_dir)
    if args.command in ("excite", "simulate", "train", "estimate"):
        layout.root.mkdir(parents=True, exist_ok=True)
        save_document(config, layout.config)

    if args.command == "excite":
        run_excite(config, layout)
    elif args.command == "simulate":
        run_simulate(config, layout)
    elif args.command == "train":
        run_train(config, layout)
    elif args.command == "estimate":
        evaluation = load_trajectory(args.trajectory) if args.trajectory else None
        run_estimate(config, layout, evaluation)
    elif args.command == "bench":
        result = bench(config)
        logger.info(f"Mean RMSE per observer: {result.mean_rmse}")
    elif args.command == "run":
        run_experiment(config)


def main(argv: Optional[List[str]] = None) -> None:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logger.remove()
        logger.add(sys.stderr, level="DEBUG", format=LOG_FORMAT)
    try:
        execute(args)
    except BaseKvarkException as e:
        tagged = e.message if isinstance(e, StageError) else f"[{args.command}] {e.message}"
        print(tagged, file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
