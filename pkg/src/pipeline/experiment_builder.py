"""Experiment builder: routes a run to its method nodes and writes the report"""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional

from src.config.config import ExperimentConfig
from src.errors import NumericalFailure
from src.node.method_nodes import MethodNodes
from src.output import artifacts
from src.problems.problems import energy_levels
from src.state.run_state import ComparisonReport, RunState

logger = logging.getLogger(__name__)

RunMode = Literal["train", "solve", "compare"]
Node = Callable[[RunState], Dict]


class ExperimentBuilder:
    """Builds and runs the experiment workflow for one configuration"""

    def __init__(self, config: ExperimentConfig):
        """
        Initialize the experiment builder

        Args:
            config: Validated experiment configuration
        """
        self.config = config
        self.problem = config.build_problem()
        self.nodes = MethodNodes(self.problem)
        self.routes: Optional[Dict[str, Node]] = None

    def _decide_methods(self, mode: RunMode) -> List[str]:
        """Methods a mode runs, in order"""
        if mode == "compare":
            return ["hermite_nn", "pinn"]
        if mode == "solve":
            return ["collocation"]
        return [self.config.method]

    def build(self) -> Dict[str, Node]:
        """Register one node per method"""
        self.routes = {
            "hermite_nn": self.nodes.train_hermite_nn,
            "pinn": self.nodes.train_pinn,
            "collocation": self.nodes.solve_collocation,
        }
        return self.routes

    def _run_seed(
        self, report: ComparisonReport, seed: int, methods: List[str], out_dir: Path, split: bool
    ) -> RunState:
        state = RunState(
            config=self.config,
            seed=seed,
            root=self.config.output_dir,
            out_dir=str(out_dir),
            split_methods=split,
        )
        for method in methods:
            state = state.model_copy(update=self.routes[method](state))
            report.results.append(state.results[-1])
            report.files.extend(state.results[-1].files)
        return state

    def _write_side_by_side(self, report: ComparisonReport, state: RunState, seed_dir: Path) -> None:
        root = Path(self.config.output_dir)
        for path in (
            artifacts.write_side_by_side(seed_dir / "mse_history.csv", state.histories),
            artifacts.emit_loss_curve(state.histories, seed_dir / "loss_curve.svg"),
        ):
            report.files.append(path.relative_to(root).as_posix())

    def run(self, mode: RunMode = "train") -> ComparisonReport:
        """
        Execute the workflow for the configured seed, or every comparison seed.

        Returns:
            ComparisonReport; also written to report.txt

        Raises:
            NumericalFailure: after report.txt names the failing iteration
        """
        if self.routes is None:
            self.build()

        root = Path(self.config.output_dir)
        root.mkdir(parents=True, exist_ok=True)
        methods = self._decide_methods(mode)
        report = ComparisonReport(problem=self.problem.name, mode=mode)
        logger.info("---RUN: %s on %s with %s---", mode, self.problem.name, ", ".join(methods))

        levels = artifacts.write_csv(
            root / "energy_levels.csv",
            ["nx", "ny", "energy"],
            energy_levels(self.problem, self.config.energy_levels),
        )
        report.files.append(levels.relative_to(root).as_posix())

        try:
            if mode == "compare":
                for seed in self.config.compare_seeds:
                    seed_dir = root / f"seed_{seed}"
                    state = self._run_seed(report, seed, methods, seed_dir, split=True)
                    self._write_side_by_side(report, state, seed_dir)
            else:
                self._run_seed(report, self.config.seed, methods, root, split=False)
        except NumericalFailure as exc:
            report.failure = str(exc)
            report.failed_iteration = exc.iteration
            self._finish(report, root)
            raise

        self._finish(report, root)
        return report

    def _finish(self, report: ComparisonReport, root: Path) -> None:
        # wall times change from run to run, so they stay out of report.txt
        timings = "".join(
            f"{r.method} seed={r.seed}: {r.wall_time:.3f}s\n" for r in report.results
        )
        artifacts.write_text(root / "timings.txt", timings)
        report.files.append("timings.txt")
        artifacts.write_text(root / "report.txt", report.render())
        logger.info("report written to %s", root / "report.txt")
        for method in sorted({r.method for r in report.results}):
            median = report.median_eval_mse(method)
            if median is not None:
                logger.info("%s median evaluation MSE %.6e", method, median)


def run_experiment(config: ExperimentConfig, mode: RunMode = "train") -> ComparisonReport:
    """Build and run one experiment"""
    return ExperimentBuilder(config).run(mode)
