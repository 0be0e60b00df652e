"""Main application entry point for the Hermite network Schrödinger solver"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path
sys.path.append(str(Path(__file__).parent))

from src.config.config import Config, ExperimentConfig, load_config, validate_config
from src.errors import ConfigError, NumericalFailure
from src.hermite.hermite import HermiteBasis
from src.output import artifacts
from src.pipeline.experiment_builder import ExperimentBuilder
from src.state.run_state import ComparisonReport, format_value

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class HermiteSchrodingerLab:
    """Main application: one configured experiment"""

    def __init__(self, config: ExperimentConfig):
        """
        Initialize the lab

        Args:
            config: Validated experiment configuration
        """
        print(f"🚀 Initializing {config.problem} experiment (seed {config.seed})...")
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.builder = ExperimentBuilder(config)
        self.builder.build()
        print("✅ Experiment ready!\n")

    def dump_basis(self) -> List[Path]:
        """Write H̃_n(x0), the roots of H_{N+1} and their modified weights"""
        N = self.config.expansion_degree
        x0 = self.config.basis_point
        print(f"📐 Hermite basis up to degree {N} at x = {x0}")
        basis = HermiteBasis(N)
        written = [
            artifacts.write_indexed(self.output_dir / "basis_values.csv", basis.values(x0)),
            artifacts.write_indexed(self.output_dir / "basis_roots.csv", basis.roots(N + 1)),
            artifacts.write_indexed(self.output_dir / "basis_weights.csv", basis.weights(N + 1)),
        ]
        for path in written:
            print(f"📄 {path}")
        return written

    def run(self, mode: str) -> ComparisonReport:
        """
        Run the experiment in the given mode

        Args:
            mode: solve, train or compare

        Returns:
            The comparison report
        """
        print(f"🤔 Running {mode}...")
        report = self.builder.run(mode)
        for result in report.results:
            summary = f"{result.method} (seed {result.seed})"
            if result.final_loss is not None:
                summary += f": final loss {format_value(result.final_loss)}"
            if result.eval_mse is not None:
                summary += f", evaluation MSE {format_value(result.eval_mse)}"
            print(f"📊 {summary}")
        claim = report.claim_holds()
        if claim is not None:
            print(f"⚖️  Hermite network vs sigmoid baseline: {'PASS' if claim else 'FAIL'}")
        print(f"✅ Report: {self.output_dir / 'report.txt'}\n")
        return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hermite-nn",
        description="Hermite-function networks and collocation for the 2D Schrödinger equation",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("basis", "dump Hermite roots, values and quadrature weights"),
        ("solve", "pure Hermite collocation"),
        ("train", "train the configured method"),
        ("compare", "Hermite network against the sigmoid baseline over the comparison seeds"),
    ):
        command = commands.add_parser(name, help=help_text)
        command.add_argument("--config", help="key = value experiment file")
        command.add_argument("--out", help="output directory (overrides the config)")
        command.add_argument("--seed", type=int, help="random seed (overrides the config)")
    return parser


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates = {}
    if args.out is not None:
        updates["output_dir"] = args.out
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.command == "solve":
        updates["method"] = "collocation"
    return validate_config({**config.model_dump(), **updates})


def main(argv: Optional[List[str]] = None) -> int:
    """Main function; returns the process exit code"""
    args = build_parser().parse_args(argv)
    Config.setup_logging()

    try:
        config = _apply_overrides(load_config(args.config), args)
        lab = HermiteSchrodingerLab(config)
        if args.command == "basis":
            lab.dump_basis()
        else:
            lab.run(args.command)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
