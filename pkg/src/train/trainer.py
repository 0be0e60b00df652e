"""Losses and the training loop over Hermite-root collocation points"""

import logging
import time
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field

from src.collocation.collocation import CollocationGrid, build_grid
from src.errors import ConfigError, NumericalFailure
from src.network.network import NetworkModel, NetworkParams, backpropagate, forward
from src.problems.problems import (
    FD_STEP,
    Field as ProblemField,
    Problem,
    fd_stencil,
    schrodinger_residual,
    trial_solution,
)
from src.train.optimizers import AdamState, adam_step, sgd_step

logger = logging.getLogger(__name__)

DEFAULT_LEARNING_RATES = {"adam": 0.01, "sgd": 0.001}


class TrainingConfig(BaseModel):
    """Optimizer, batching and loss settings of one training run"""

    model_config = ConfigDict(extra="forbid")

    iterations: int = Field(1000, ge=0, description="Optimizer steps")
    learning_rate: Optional[float] = Field(
        None, gt=0, description="λ; None picks 0.01 for Adam and 0.001 for SGD"
    )
    optimizer: Literal["sgd", "adam"] = "adam"
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)
    batch: Literal["full", "stochastic"] = "full"
    batch_size: int = Field(32, ge=1, description="Points drawn per step in stochastic mode")
    loss_mode: Literal["supervised", "residual"] = "supervised"
    seed: int = Field(42, ge=0, description="RNG seed for initialization and batch draws")
    stop_tol: float = Field(0.0, ge=0, description="Stop once ||w_new - w|| falls below this")

    @property
    def rate(self) -> float:
        return self.learning_rate or DEFAULT_LEARNING_RATES[self.optimizer]


@dataclass
class TrainingTrace:
    """Loss per iteration, final parameters and timing of a run"""

    loss_history: List[float]
    final_params: NetworkParams
    wall_time: float
    seed: int
    stopped_early: bool = False

    @property
    def final_loss(self) -> Optional[float]:
        return self.loss_history[-1] if self.loss_history else None


def mse(predicted: ArrayLike, actual: ArrayLike) -> float:
    """Mean of the squared componentwise differences"""
    predicted = np.asarray(predicted, dtype=float).ravel()
    actual = np.asarray(actual, dtype=float).ravel()
    if predicted.shape != actual.shape:
        raise ConfigError(f"cannot compare {predicted.size} predictions with {actual.size} values")
    if predicted.size == 0:
        raise ConfigError("mse of empty grids")
    diff = predicted - actual
    return float(np.mean(diff * diff))


def residual_loss(model: ProblemField, problem: Problem, points: ArrayLike) -> float:
    """
    Mean squared Schrödinger residual of a model at the given points.

    The model is taken as the complete trial solution; train() composes the
    network with the problem's envelope before it gets here.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y = points[:, 0], points[:, 1]
    if not np.all(problem.domain.contains(x, y)):
        raise ConfigError(f"training points outside the {problem.name} domain")
    residual = schrodinger_residual(model, problem, x, y, mode="finite_difference")
    return float(np.mean(residual * residual))


def training_grid(problem: Problem, basis_size: int) -> CollocationGrid:
    """
    Tensor grid of Hermite roots of degree M+1 used as training points.

    Bounded problems get the roots mapped affinely into the box.
    """
    domain = problem.domain
    if problem.bounded:
        return build_grid(basis_size, dim=2, domain=(domain.x_min, domain.x_max))
    return build_grid(basis_size, dim=2)


def _supervised(
    problem: Problem, params: NetworkParams, points: np.ndarray, target: np.ndarray
) -> Tuple[float, np.ndarray]:
    x, y = points[:, 0], points[:, 1]
    trace = forward(params, points)
    envelope = problem.envelope(x, y)
    predicted = problem.offset(x, y) + envelope * trace.output
    loss = mse(predicted, target)
    delta = -2.0 * (target - predicted) / len(points) * envelope
    return loss, backpropagate(params, trace, delta).flatten()


def _residual(problem: Problem, params: NetworkParams, points: np.ndarray) -> Tuple[float, np.ndarray]:
    count = len(points)
    x, y = points[:, 0], points[:, 1]
    stencil = fd_stencil()
    shifted = np.concatenate([points + np.array([dx, dy]) for dx, dy, _ in stencil])
    weights = np.array([w for _, _, w in stencil])

    trace = forward(params, shifted)
    sx, sy = shifted[:, 0], shifted[:, 1]
    envelope = problem.envelope(sx, sy).reshape(len(stencil), count)
    g = problem.offset(sx, sy).reshape(len(stencil), count) + envelope * trace.output.reshape(
        len(stencil), count
    )

    # stencil[0] is the center point
    k = problem.kinetic_factor
    shift = problem.potential(x, y) - problem.energy
    residual = -k * (weights @ g) + shift * g[0]
    loss = float(np.mean(residual * residual))

    d_g = (2.0 / count) * residual[None, :] * (-k * weights[:, None])
    d_g[0] += (2.0 / count) * residual * shift
    delta = (d_g * envelope).ravel()
    return loss, backpropagate(params, trace, delta).flatten()


def _batch_indices(config: TrainingConfig, iteration: int, count: int) -> np.ndarray:
    if config.batch == "full":
        return np.arange(count)
    rng = np.random.default_rng([config.seed, iteration])
    return np.sort(rng.choice(count, size=config.batch_size, replace=False))


def train(
    problem: Problem,
    params: NetworkParams,
    config: TrainingConfig,
    grid: CollocationGrid,
) -> TrainingTrace:
    """
    Fit the trial solution h1 + h2·N to the problem on the grid's points.

    Args:
        problem: Benchmark problem (reference ψ for supervised mode, V and E for residual mode)
        params: Initial parameters, left untouched
        config: Training settings
        grid: 2D collocation grid whose points lie in the problem domain

    Returns:
        TrainingTrace with one loss per iteration actually run
    """
    if grid.dim != 2:
        raise ConfigError("training needs a 2D collocation grid")
    points = grid.nodes_2d
    x, y = points[:, 0], points[:, 1]
    margin = 2.0 * FD_STEP if config.loss_mode == "residual" else 0.0
    if not np.all(problem.domain.contains(x, y, margin=margin)):
        raise ConfigError(f"training points outside the {problem.name} domain")
    if config.batch == "stochastic" and config.batch_size > len(points):
        raise ConfigError(
            f"batch size {config.batch_size} exceeds the {len(points)} training points"
        )

    target = np.asarray(problem.analytic_psi(x, y), dtype=float)
    flat = params.flatten()
    state = AdamState.zeros(flat.size)
    history: List[float] = []
    stopped_early = False
    report_every = max(1, config.iterations // 10)
    start = time.perf_counter()

    for iteration in range(config.iterations):
        batch = _batch_indices(config, iteration, len(points))
        current = params.with_flat(flat)
        try:
            if config.loss_mode == "supervised":
                loss, grad = _supervised(problem, current, points[batch], target[batch])
            else:
                loss, grad = _residual(problem, current, points[batch])
        except NumericalFailure as exc:
            raise NumericalFailure(f"iteration {iteration}: {exc}", iteration=iteration) from exc
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            raise NumericalFailure(f"non-finite loss at iteration {iteration}", iteration=iteration)
        history.append(loss)

        if config.optimizer == "adam":
            updated, state = adam_step(
                state, flat, grad, config.rate, config.beta1, config.beta2, config.epsilon
            )
        else:
            updated = sgd_step(flat, grad, config.rate)
        step_norm = float(np.linalg.norm(updated - flat))
        flat = updated

        if iteration % report_every == 0:
            logger.debug("iteration %d loss %.6e", iteration, loss)
        if step_norm < config.stop_tol:
            stopped_early = True
            logger.info("update norm %.3e below tolerance at iteration %d", step_norm, iteration)
            break

    wall_time = time.perf_counter() - start
    logger.info(
        "trained %s network for %d iterations in %.2fs (final loss %s)",
        params.activation.kind,
        len(history),
        wall_time,
        f"{history[-1]:.6e}" if history else "n/a",
    )
    return TrainingTrace(
        loss_history=history,
        final_params=params.with_flat(flat),
        wall_time=wall_time,
        seed=config.seed,
        stopped_early=stopped_early,
    )


def evaluate_on_grid(
    problem: Problem, params: NetworkParams, resolution: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Analytic and predicted ψ on a uniform resolution×resolution grid of the domain.

    Returns:
        (X, Y, actual, predicted), each of shape (R, R)
    """
    if resolution < 1:
        raise ConfigError(f"evaluation resolution must be positive, got {resolution}")
    X, Y = problem.domain.grid(resolution)
    actual = np.asarray(problem.analytic_psi(X, Y), dtype=float)
    predicted = trial_solution(NetworkModel(params), problem, X, Y)
    return X, Y, actual, predicted
