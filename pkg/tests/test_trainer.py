from dataclasses import replace

import numpy as np
import pytest

from src.collocation.collocation import build_grid
from src.errors import ConfigError, NumericalFailure
from src.network.network import Activation, NetworkModel, init_params
from src.problems.problems import box_problem, oscillator_problem, trial_solution
from src.train.trainer import (
    TrainingConfig,
    _residual,
    evaluate_on_grid,
    mse,
    residual_loss,
    train,
    training_grid,
)


@pytest.fixture
def box():
    return box_problem()


def small_params(seed=0, kind="hermite"):
    return init_params([2, 6, 1], Activation(kind=kind, max_degree=5), seed=seed)


def test_mse():
    assert mse([1.0, 2.0], [1.0, 4.0]) == 2.0
    with pytest.raises(ConfigError):
        mse([1.0], [1.0, 2.0])


def test_default_learning_rates():
    assert TrainingConfig().rate == 0.01
    assert TrainingConfig(optimizer="sgd").rate == 0.001
    assert TrainingConfig(learning_rate=0.5).rate == 0.5


def test_training_config_rejects_unknown_fields():
    with pytest.raises(ValueError):
        TrainingConfig(momentum=0.9)


def test_box_training_grid_lies_inside(box):
    grid = training_grid(box, 9)
    assert grid.nodes_2d.shape == (100, 2)
    assert np.all((grid.nodes_2d > 0) & (grid.nodes_2d < 1))


def test_zero_iterations_leave_parameters_alone(box):
    params = small_params()
    trace = train(box, params, TrainingConfig(iterations=0), training_grid(box, 4))
    assert trace.loss_history == []
    assert trace.final_loss is None
    np.testing.assert_array_equal(trace.final_params.flatten(), params.flatten())


def test_history_has_one_loss_per_iteration(box):
    trace = train(box, small_params(), TrainingConfig(iterations=25), training_grid(box, 4))
    assert len(trace.loss_history) == 25
    assert trace.loss_history[-1] < trace.loss_history[0]
    assert not trace.stopped_early


def test_first_loss_is_the_initial_mse(box):
    params = small_params(seed=5)
    grid = training_grid(box, 4)
    trace = train(box, params, TrainingConfig(iterations=1), grid)
    x, y = grid.nodes_2d.T
    initial = mse(trial_solution(NetworkModel(params), box, x, y), box.analytic_psi(x, y))
    assert trace.loss_history[0] == initial


def test_stochastic_training_is_reproducible(box):
    config = TrainingConfig(iterations=20, batch="stochastic", batch_size=8, seed=11)
    grid = training_grid(box, 4)
    first = train(box, small_params(), config, grid)
    second = train(box, small_params(), config, grid)
    assert first.loss_history == second.loss_history
    np.testing.assert_array_equal(first.final_params.flatten(), second.final_params.flatten())


def test_batch_larger_than_grid_rejected(box):
    config = TrainingConfig(iterations=1, batch="stochastic", batch_size=26)
    with pytest.raises(ConfigError):
        train(box, small_params(), config, training_grid(box, 4))


def test_points_outside_domain_rejected(box):
    with pytest.raises(ConfigError):
        train(box, small_params(), TrainingConfig(iterations=1), build_grid(4, dim=2))


def test_one_dimensional_grid_rejected(box):
    with pytest.raises(ConfigError):
        train(box, small_params(), TrainingConfig(iterations=1), build_grid(4))


def test_stop_tolerance_ends_training(box):
    config = TrainingConfig(iterations=50, stop_tol=1e6)
    trace = train(box, small_params(), config, training_grid(box, 4))
    assert trace.stopped_early
    assert len(trace.loss_history) == 1


def test_divergence_reports_the_iteration(box):
    config = TrainingConfig(iterations=200, optimizer="sgd", learning_rate=1e30)
    with pytest.raises(NumericalFailure) as excinfo:
        train(box, small_params(kind="sigmoid"), config, training_grid(box, 4))
    assert excinfo.value.iteration is not None


@pytest.mark.parametrize("problem", [box_problem(), oscillator_problem()], ids=["box", "oscillator"])
def test_residual_gradient_matches_finite_differences(problem):
    params = small_params(seed=2)
    points = training_grid(problem, 3).nodes_2d[::3]
    loss, grad = _residual(problem, params, points)

    def loss_at(flat):
        current = params.with_flat(flat)
        return residual_loss(lambda x, y: trial_solution(NetworkModel(current), problem, x, y), problem, points)

    assert loss == pytest.approx(loss_at(params.flatten()), rel=1e-6)
    flat = params.flatten()
    h = 1e-4
    for i in range(0, flat.size, 2):
        up, down = flat.copy(), flat.copy()
        up[i] += h
        down[i] -= h
        numeric = (loss_at(up) - loss_at(down)) / (2 * h)
        assert abs(grad[i] - numeric) <= 1e-3 * max(abs(numeric), 1.0)


def test_residual_training_reduces_the_residual(box):
    config = TrainingConfig(iterations=60, loss_mode="residual", learning_rate=0.005)
    trace = train(box, small_params(seed=3), config, training_grid(box, 4))
    assert trace.loss_history[-1] < trace.loss_history[0]


def test_evaluate_on_grid_shapes(box):
    X, Y, actual, predicted = evaluate_on_grid(box, small_params(), 7)
    assert X.shape == Y.shape == actual.shape == predicted.shape == (7, 7)
    np.testing.assert_allclose(predicted[0, :], 0.0, atol=1e-15)


def test_box_example_training_reaches_target_accuracy(box):
    params = init_params([2, 15, 15, 1], Activation(kind="hermite", max_degree=5), seed=42)
    config = TrainingConfig(iterations=1000, optimizer="adam", learning_rate=0.01)
    trace = train(box, params, config, training_grid(box, 9))

    _, _, actual, before = evaluate_on_grid(box, params, 20)
    _, _, _, after = evaluate_on_grid(box, trace.final_params, 20)
    initial, final = mse(before, actual), mse(after, actual)
    assert final <= 1e-3
    assert final <= initial / 10


def test_small_step_sgd_never_increases_the_supervised_loss(box):
    bowl = replace(box, analytic_psi=lambda x, y: np.asarray(x) ** 2 + np.asarray(y) ** 2)
    params = init_params([2, 8, 1], Activation(kind="sigmoid"), seed=3)
    config = TrainingConfig(iterations=50, optimizer="sgd", learning_rate=1e-4)
    trace = train(bowl, params, config, training_grid(bowl, 6))
    assert len(trace.loss_history) == 50
    assert np.all(np.diff(trace.loss_history) <= 0.0)
    assert trace.loss_history[-1] < trace.loss_history[0]


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        TrainingConfig(seed=-1)
