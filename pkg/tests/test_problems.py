import math

import numpy as np
import pytest

from src.errors import ConfigError
from src.hermite.hermite import hermite_roots, quad_weights
from src.problems.problems import (
    FD_STEP,
    Domain,
    box_problem,
    build_problem,
    energy_levels,
    fd_stencil,
    oscillator_energy_1d,
    oscillator_problem,
    schrodinger_residual,
    trial_solution,
)


def interior_points(problem, count=100, seed=0):
    rng = np.random.default_rng(seed)
    d = problem.domain
    margin = 2 * FD_STEP
    x = rng.uniform(d.x_min + margin, d.x_max - margin, count)
    y = rng.uniform(d.y_min + margin, d.y_max - margin, count)
    return x, y


@pytest.mark.parametrize(
    "problem",
    [oscillator_problem(), oscillator_problem(nx=2, ny=1), box_problem(), box_problem(L=2.0, nx=2, ny=3)],
    ids=["oscillator", "oscillator-21", "box", "box-23"],
)
def test_analytic_reference_solves_its_equation(problem):
    x, y = interior_points(problem)
    residual = schrodinger_residual(problem.analytic_psi, problem, x, y)
    assert np.max(np.abs(residual)) < 1e-5
    exact = schrodinger_residual(problem.analytic_psi, problem, x, y, mode="analytic")
    assert np.max(np.abs(exact)) < 1e-10


def test_wrong_energy_leaves_a_residual():
    problem = box_problem()
    x, y = interior_points(problem, 10)
    residual = schrodinger_residual(problem.analytic_psi, problem.with_energy(problem.energy + 1.0), x, y)
    np.testing.assert_allclose(residual, -problem.analytic_psi(x, y), atol=1e-5)


def test_oscillator_ground_state_matches_gaussian():
    problem = oscillator_problem(m=2.0, hbar=1.0, omega=2.0)
    alpha = 2.0
    x, y = np.array([0.0, 0.3, -1.1]), np.array([0.0, -0.4, 0.5])
    expected = alpha / math.sqrt(math.pi) * np.exp(-0.5 * alpha**2 * (x * x + y * y))
    np.testing.assert_allclose(problem.analytic_psi(x, y), expected, rtol=1e-12)
    assert problem.energy == pytest.approx(2.0 + 1.0)


@pytest.mark.parametrize("nx,ny", [(0, 0), (1, 2), (3, 0)])
def test_oscillator_state_is_normalized(nx, ny):
    problem = oscillator_problem(nx=nx, ny=ny)
    nodes, weights = hermite_roots(20), quad_weights(20)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    mass = np.einsum("i,j,ij->", weights, weights, problem.analytic_psi(X, Y) ** 2)
    assert mass == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("L,nx,ny", [(1.0, 1, 1), (2.0, 2, 3), (0.5, 1, 4)])
def test_box_state_is_normalized(L, nx, ny):
    problem = box_problem(L=L, nx=nx, ny=ny)
    t, w = np.polynomial.legendre.leggauss(40)
    nodes, weights = L * (t + 1) / 2, L * w / 2
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    mass = np.einsum("i,j,ij->", weights, weights, problem.analytic_psi(X, Y) ** 2)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_oscillator_ground_state_symmetries():
    psi = oscillator_problem().analytic_psi
    assert psi(1.0, 2.0) == pytest.approx(psi(2.0, 1.0), rel=1e-14)
    assert psi(-1.0, 2.0) == pytest.approx(psi(1.0, 2.0), rel=1e-14)
    assert psi(1.0, -2.0) == pytest.approx(psi(1.0, 2.0), rel=1e-14)


def test_box_ground_state_mirror_symmetry():
    problem = box_problem(L=2.0)
    x = np.linspace(0.0, 2.0, 11)
    y = np.full_like(x, 0.7)
    np.testing.assert_allclose(problem.analytic_psi(x, y), problem.analytic_psi(2.0 - x, y), atol=1e-14)


def test_box_ground_state_peaks_in_the_center():
    problem = box_problem()
    assert problem.analytic_psi(0.5, 0.5) == pytest.approx(2.0)
    assert problem.energy == pytest.approx(math.pi**2)
    assert problem.bounded


def test_box_envelope_vanishes_on_the_walls():
    problem = box_problem(L=3.0)
    t = np.linspace(0.0, 3.0, 7)
    np.testing.assert_array_equal(problem.envelope(t, np.zeros_like(t)), 0.0)
    np.testing.assert_array_equal(problem.envelope(np.full_like(t, 3.0), t), 0.0)
    assert problem.envelope(1.5, 1.5) == pytest.approx(1.0)


def test_trial_solution_satisfies_walls_for_any_model():
    problem = box_problem()
    t = np.linspace(0.0, 1.0, 5)
    model = lambda x, y: 10.0 + x * y  # noqa: E731
    np.testing.assert_array_equal(trial_solution(model, problem, t, np.zeros_like(t)), 0.0)


def test_energy_levels_oscillator():
    levels = energy_levels(oscillator_problem(), 4)
    assert levels == [(0, 0, 2.0), (0, 1, 3.0), (1, 0, 3.0), (0, 2, 4.0)]


def test_energy_levels_box():
    unit = math.pi**2 / 2
    levels = energy_levels(box_problem(), 3)
    assert [(nx, ny) for nx, ny, _ in levels] == [(1, 1), (1, 2), (2, 1)]
    assert levels[1][2] == pytest.approx(5 * unit)


def test_oscillator_energy_1d():
    assert oscillator_energy_1d(0) == 0.5
    assert oscillator_energy_1d(3, hbar=2.0, omega=0.5) == pytest.approx(3.5)
    with pytest.raises(ConfigError):
        oscillator_energy_1d(-1)


def test_stencil_annihilates_quadratics():
    # the Laplacian of x² + 3y² is 8
    total = sum(w * ((0.4 + dx) ** 2 + 3 * (0.2 + dy) ** 2) for dx, dy, w in fd_stencil())
    assert total == pytest.approx(8.0, rel=1e-6)


def test_stencil_leaving_domain_rejected():
    problem = box_problem()
    with pytest.raises(ConfigError):
        schrodinger_residual(problem.analytic_psi, problem, np.array([0.0005]), np.array([0.5]))


def test_analytic_mode_needs_laplacian():
    problem = box_problem()
    with pytest.raises(ConfigError):
        schrodinger_residual(lambda x, y: x * y, problem, 0.5, 0.5, mode="analytic")


def test_domain_grid_includes_walls():
    X, Y = Domain(0.0, 2.0, -1.0, 1.0).grid(5)
    assert X.shape == (5, 5)
    assert X[0, 0] == 0.0 and X[-1, 0] == 2.0
    assert Y[0, 0] == -1.0 and Y[0, -1] == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(name="box", L=-1.0), dict(name="oscillator", m=0.0), dict(name="box", nx=0), dict(name="well")],
)
def test_invalid_problems_rejected(kwargs):
    with pytest.raises(ConfigError):
        build_problem(**kwargs)


def test_build_problem_defaults_to_ground_states():
    assert build_problem("box").modes == (1, 1)
    assert build_problem("oscillator").modes == (0, 0)
