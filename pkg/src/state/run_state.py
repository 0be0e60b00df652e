"""State models flowing through the experiment pipeline"""

import statistics
from typing import Dict, List, Optional

from pydantic import BaseModel

from src.config.config import ExperimentConfig


def format_value(value: float) -> str:
    """17 significant digits, the format shared by every CSV and the report"""
    return format(float(value), ".17g")


class MethodResult(BaseModel):
    """Outcome of one method on one seed"""

    method: str
    seed: int
    architecture: List[int] = []
    iterations_run: int = 0
    stopped_early: bool = False
    final_loss: Optional[float] = None
    initial_loss: Optional[float] = None
    eval_mse: Optional[float] = None
    wall_time: float = 0.0
    history_path: Optional[str] = None
    files: List[str] = []
    # collocation extras: condition, residual norm, energies
    metrics: Dict[str, float] = {}


class RunState(BaseModel):
    """State object passed from node to node"""

    config: ExperimentConfig
    seed: int
    root: str
    out_dir: str
    # compare mode gives each method its own subdirectory
    split_methods: bool = False
    results: List[MethodResult] = []
    files: List[str] = []
    histories: Dict[str, List[float]] = {}


class ComparisonReport(BaseModel):
    """Summary of an experiment; only lists files that were actually written"""

    problem: str
    mode: str
    results: List[MethodResult] = []
    files: List[str] = []
    failure: Optional[str] = None
    failed_iteration: Optional[int] = None

    def median_final_loss(self, method: str) -> Optional[float]:
        losses = [r.final_loss for r in self.results if r.method == method and r.final_loss is not None]
        return statistics.median(losses) if losses else None

    def median_eval_mse(self, method: str) -> Optional[float]:
        values = [r.eval_mse for r in self.results if r.method == method and r.eval_mse is not None]
        return statistics.median(values) if values else None

    def claim_holds(self) -> Optional[bool]:
        """Hermite network median evaluation MSE at most the sigmoid baseline's"""
        hermite, pinn = self.median_eval_mse("hermite_nn"), self.median_eval_mse("pinn")
        if hermite is None or pinn is None:
            return None
        return hermite <= pinn

    def render(self) -> str:
        """Text of report.txt; wall times are kept out so reruns give identical bytes"""
        lines = [f"problem: {self.problem}", f"mode: {self.mode}"]
        if self.failure:
            lines.append(f"FAILURE: {self.failure}")
            if self.failed_iteration is not None:
                lines.append(f"failed iteration: {self.failed_iteration}")

        for result in self.results:
            lines.append("")
            lines.append(f"[{result.method} seed={result.seed}]")
            if result.architecture:
                lines.append("architecture: " + ",".join(str(n) for n in result.architecture))
            if result.history_path is not None:
                lines.append(f"iterations: {result.iterations_run}")
                lines.append(f"stopped early: {'yes' if result.stopped_early else 'no'}")
                lines.append(f"history: {result.history_path}")
            if result.initial_loss is not None:
                lines.append(f"initial loss: {format_value(result.initial_loss)}")
            if result.final_loss is not None:
                lines.append(f"final loss: {format_value(result.final_loss)}")
            if result.eval_mse is not None:
                lines.append(f"evaluation mse: {format_value(result.eval_mse)}")
            for key in sorted(result.metrics):
                lines.append(f"{key}: {format_value(result.metrics[key])}")

        methods = sorted({r.method for r in self.results})
        if self.mode == "compare" and methods:
            lines.append("")
            lines.append("[median over seeds]")
            for method in methods:
                final = self.median_final_loss(method)
                evaluation = self.median_eval_mse(method)
                lines.append(
                    f"{method}: final loss {format_value(final) if final is not None else 'n/a'}"
                    f", evaluation mse {format_value(evaluation) if evaluation is not None else 'n/a'}"
                )
            claim = self.claim_holds()
            if claim is not None:
                lines.append(
                    "claim (hermite_nn median mse <= pinn median mse): "
                    + ("PASS" if claim else "FAIL")
                )

        if self.files:
            lines.append("")
            lines.append("[files]")
            lines.extend(self.files)
        return "\n".join(lines) + "\n"
