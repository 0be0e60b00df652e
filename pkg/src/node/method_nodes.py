"""Pipeline nodes, one per solution method"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from src.collocation.collocation import (
    CoordinateMap,
    HermiteExpansion2D,
    LinearOperator,
    assemble_system,
    build_grid,
    evaluate_expansion,
    solve_eigenpairs,
    solve_weights,
)
from src.errors import ConfigError
from src.hermite.hermite import eval_basis
from src.network.network import Activation, init_params
from src.output import artifacts
from src.problems.problems import Problem, energy_levels, hamiltonian_operator
from src.state.run_state import MethodResult, RunState
from src.train.trainer import evaluate_on_grid, mse, train, training_grid

logger = logging.getLogger(__name__)


class MethodNodes:
    """Contains node functions for the experiment workflow"""

    def __init__(self, problem: Problem):
        """
        Initialize method nodes

        Args:
            problem: Benchmark problem shared by every node
        """
        self.problem = problem

    def train_hermite_nn(self, state: RunState) -> Dict:
        """Hermite-activation network node"""
        return self._train_network(state, "hermite_nn")

    def train_pinn(self, state: RunState) -> Dict:
        """Sigmoid baseline node"""
        return self._train_network(state, "pinn")

    def solve_collocation(self, state: RunState) -> Dict:
        """
        Pure collocation node

        Args:
            state: Current run state

        Returns:
            State updates with the collocation result appended
        """
        config = state.config
        if config.collocation_operator == "schrodinger":
            logger.info("---NODE: Collocation eigen-solve (N=%d)---", config.expansion_degree)
            result = self._eigen_solve(state)
        elif config.collocation_target == "planted":
            logger.info("---NODE: Collocation recovery of H̃_%d---", config.planted_degree)
            result = self._planted_recovery(state)
        else:
            logger.info("---NODE: Collocation fit of the %s wave function---", self.problem.name)
            result = self._fit_problem(state)
        return self._updates(state, result)

    def _method_dir(self, state: RunState, method: str) -> Path:
        out = Path(state.out_dir)
        return out / method if state.split_methods else out

    def _relative(self, state: RunState, path: Path) -> str:
        return path.relative_to(state.root).as_posix()

    def _updates(self, state: RunState, result: MethodResult) -> Dict:
        return {
            "results": state.results + [result],
            "files": state.files + result.files,
        }

    def _network_updates(self, state: RunState, result: MethodResult, history: List[float]) -> Dict:
        updates = self._updates(state, result)
        updates["histories"] = {**state.histories, result.method: list(history)}
        return updates

    def _train_network(self, state: RunState, method: str) -> Dict:
        config = state.config
        seed = state.seed
        logger.info("---NODE: Training %s (seed %d)---", method, seed)

        if method == "hermite_nn":
            activation = Activation(kind="hermite", max_degree=config.hermite_degree)
        else:
            activation = Activation(kind="sigmoid")
        architecture = config.architecture(method)
        params = init_params(architecture, activation, seed)
        grid = training_grid(self.problem, config.basis_size)

        trace = train(self.problem, params, config.training_config(seed), grid)
        X, Y, actual, predicted = evaluate_on_grid(self.problem, trace.final_params, config.resolution)

        out = self._method_dir(state, method)
        written = [
            artifacts.write_history(out / "mse_history.csv", trace.loss_history),
            artifacts.write_wavefunction(out / "wavefunction.csv", X, Y, actual, predicted),
            artifacts.write_params(out / "params.csv", trace.final_params),
            artifacts.emit_loss_curve({method: trace.loss_history}, out / "loss_curve.svg"),
        ]
        if config.heatmap:
            written.append(
                artifacts.emit_heatmap(
                    predicted, out / "heatmap.svg", X[:, 0], Y[0, :],
                    title=f"{method} ψ, {self.problem.name}",
                )
            )

        result = MethodResult(
            method=method,
            seed=seed,
            architecture=architecture,
            iterations_run=len(trace.loss_history),
            stopped_early=trace.stopped_early,
            final_loss=trace.final_loss,
            initial_loss=trace.loss_history[0] if trace.loss_history else None,
            eval_mse=mse(predicted, actual),
            wall_time=trace.wall_time,
            history_path=self._relative(state, written[0]),
            files=[self._relative(state, p) for p in written],
        )
        return self._network_updates(state, result, trace.loss_history)

    def _planted_recovery(self, state: RunState) -> MethodResult:
        config = state.config
        N, degree = config.expansion_degree, config.planted_degree
        if degree > N:
            raise ConfigError(f"planted degree {degree} exceeds expansion degree {N}")

        grid = build_grid(N, dim=1)
        system = assemble_system(
            LinearOperator.identity(), grid, N, lambda x: eval_basis(degree, x)[degree]
        )
        solution = solve_weights(system)

        expected = np.zeros(N + 1)
        expected[degree] = 1.0
        xs = np.linspace(-5.0, 5.0, config.resolution)
        values = evaluate_expansion(solution.weights, xs)

        out = self._method_dir(state, "collocation")
        written = [
            artifacts.write_indexed(out / "weights.csv", solution.weights),
            artifacts.write_csv(out / "expansion_grid.csv", ["x", "value"], zip(xs, values)),
        ]
        return MethodResult(
            method="collocation",
            seed=state.seed,
            files=[self._relative(state, p) for p in written],
            metrics={
                "condition": solution.condition,
                "residual_norm": solution.residual_norm,
                "max_coefficient_error": float(np.max(np.abs(solution.weights - expected))),
            },
        )

    def _problem_map(self) -> CoordinateMap:
        c = self.problem.constants
        return CoordinateMap(scale=math.sqrt(c.m * c.omega / c.hbar))

    def _wall_spec(self, resolution: int) -> List[Tuple[Tuple[float, float], float]]:
        """Dirichlet α = 0 at the evaluation grid's wall points, corners once"""
        domain = self.problem.domain
        xs = np.linspace(domain.x_min, domain.x_max, resolution)
        ys = np.linspace(domain.y_min, domain.y_max, resolution)
        points = [(x, y) for x in (xs[0], xs[-1]) for y in ys]
        points += [(x, y) for x in xs[1:-1] for y in (ys[0], ys[-1])]
        return [((float(x), float(y)), 0.0) for x, y in points]

    def _grid_for_problem(self, M: int, boundary_spec=()):
        domain = self.problem.domain
        if self.problem.bounded:
            return build_grid(
                M, dim=2, boundary_spec=boundary_spec, domain=(domain.x_min, domain.x_max)
            )
        return build_grid(M, dim=2, coordinate_map=self._problem_map())

    def _fit_problem(self, state: RunState) -> MethodResult:
        config = state.config
        N, M = config.expansion_degree, config.basis_size
        if M < N:
            raise ConfigError(
                f"basis size M={M} gives too few nodes for expansion degree N={N}; need M >= N"
            )
        walls = self._wall_spec(config.resolution) if self.problem.bounded else ()
        grid = self._grid_for_problem(M, walls)
        system = assemble_system(
            LinearOperator.identity(), grid, N, self.problem.analytic_psi,
            boundary_weight=config.boundary_weight,
        )
        solution = solve_weights(system)
        expansion = HermiteExpansion2D(weights=solution.weights, coordinate_map=grid.coordinate_map)

        written, eval_mse = self._write_expansion(state, expansion, solution.weights)
        return MethodResult(
            method="collocation",
            seed=state.seed,
            eval_mse=eval_mse,
            files=[self._relative(state, p) for p in written],
            metrics={"condition": solution.condition, "residual_norm": solution.residual_norm},
        )

    def _eigen_solve(self, state: RunState) -> MethodResult:
        config = state.config
        if self.problem.bounded:
            raise ConfigError(
                "the collocation eigen-solve needs a whole-plane problem; "
                "Hermite functions do not vanish on the box walls"
            )
        N = config.expansion_degree
        # generalized eigenproblems need a square system: N+1 nodes per axis whatever M is
        grid = self._grid_for_problem(N)
        operator = hamiltonian_operator(self.problem, include_energy=False)
        solution = solve_eigenpairs(operator, grid, N)

        # the requested state is the eigenvalue closest to its analytic energy
        k = int(np.argmin(np.abs(solution.energies - self.problem.energy)))
        expansion = HermiteExpansion2D(weights=solution.weights[:, k], coordinate_map=grid.coordinate_map)
        X, Y = self.problem.domain.grid(config.resolution)
        if np.sum(expansion(X, Y) * self.problem.analytic_psi(X, Y)) < 0:
            expansion = HermiteExpansion2D(weights=-expansion.weights, coordinate_map=grid.coordinate_map)

        written, eval_mse = self._write_expansion(state, expansion, expansion.weights)
        levels = energy_levels(self.problem, min(config.energy_levels, len(solution.energies)))
        written.append(
            artifacts.write_csv(
                self._method_dir(state, "collocation") / "collocation_energies.csv",
                ["index", "nx", "ny", "computed", "analytic"],
                [
                    (i, nx, ny, computed, analytic)
                    for i, ((nx, ny, analytic), computed) in enumerate(zip(levels, solution.energies))
                ],
            )
        )
        energy = float(solution.energies[k])
        return MethodResult(
            method="collocation",
            seed=state.seed,
            eval_mse=eval_mse,
            files=[self._relative(state, p) for p in written],
            metrics={"energy": energy, "energy_error": abs(energy - self.problem.energy)},
        )

    def _write_expansion(
        self, state: RunState, expansion: HermiteExpansion2D, weights: np.ndarray
    ) -> Tuple[List[Path], float]:
        config = state.config
        X, Y = self.problem.domain.grid(config.resolution)
        values = expansion(X, Y)
        actual = np.asarray(self.problem.analytic_psi(X, Y), dtype=float)

        out = self._method_dir(state, "collocation")
        written = [
            artifacts.write_indexed(out / "weights.csv", weights),
            artifacts.write_csv(
                out / "expansion_grid.csv",
                ["x", "y", "value"],
                np.column_stack([X.ravel(), Y.ravel(), values.ravel()]),
            ),
        ]
        if config.heatmap:
            written.append(
                artifacts.emit_heatmap(
                    values, out / "heatmap.svg", X[:, 0], Y[0, :],
                    title=f"collocation ψ, {self.problem.name}",
                )
            )
        return written, mse(values, actual)
