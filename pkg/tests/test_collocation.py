import math

import numpy as np
import pytest

from src.collocation.collocation import (
    CoordinateMap,
    HermiteExpansion2D,
    LinearOperator,
    LinearSystem,
    assemble_system,
    build_grid,
    evaluate_expansion,
    interval_map,
    solve_eigenpairs,
    solve_weights,
)
from src.errors import ConfigError, NumericalFailure
from src.hermite.hermite import HermiteBasis, eval_basis, hermite_roots
from src.problems.problems import fd_laplacian, hamiltonian_operator, oscillator_problem


def planted(degree):
    return lambda x: eval_basis(degree, x)[degree]


def test_grid_nodes_are_hermite_roots():
    grid = build_grid(5)
    np.testing.assert_allclose(grid.nodes_1d, hermite_roots(6))
    assert grid.nodes_2d is None
    assert grid.interior_points.shape == (6,)


def test_tensor_grid_order():
    grid = build_grid(2, dim=2)
    roots = hermite_roots(3)
    assert grid.nodes_2d.shape == (9, 2)
    np.testing.assert_allclose(grid.nodes_2d[1], [roots[0], roots[1]])


def test_domain_map_keeps_nodes_inside():
    grid = build_grid(9, dim=2, domain=(0.0, 1.0))
    nodes = grid.nodes_1d
    spacing = 1.0 / len(nodes)
    assert nodes[0] == pytest.approx(spacing / 2)
    assert nodes[-1] == pytest.approx(1.0 - spacing / 2)
    assert np.all((grid.nodes_2d > 0) & (grid.nodes_2d < 1))


def test_interval_map_round_trip():
    cmap = interval_map(hermite_roots(4), -2.0, 3.0)
    x = np.array([-2.0, 0.5, 3.0])
    np.testing.assert_allclose(cmap.inverse(cmap(x)), x)


def test_coordinate_map_rejects_non_positive_scale():
    with pytest.raises(ConfigError):
        CoordinateMap(scale=0.0)


def test_boundary_node_on_interior_node_rejected():
    with pytest.raises(ConfigError):
        build_grid(2, boundary_spec=[(0.0, 1.0)])


def test_identity_recovers_planted_basis_function():
    N = 8
    system = assemble_system(LinearOperator.identity(), build_grid(N), N, planted(2))
    solution = solve_weights(system)
    expected = np.zeros(N + 1)
    expected[2] = 1.0
    assert np.max(np.abs(solution.weights - expected)) < 1e-10
    assert solution.residual_norm < 1e-12


def test_interpolation_error_shrinks_with_degree():
    x = np.linspace(-4.0, 4.0, 401)

    def target(z):
        return np.exp(-z * z / 2) * np.cos(z)

    errors = []
    for N in (2, 4, 8, 16):
        system = assemble_system(LinearOperator.identity(), build_grid(N), N, target)
        weights = solve_weights(system).weights
        errors.append(np.max(np.abs(evaluate_expansion(weights, x) - target(x))))
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))


def test_second_order_operator_with_boundary_row():
    N = 6
    # -u'' + u = f with u = H̃_3, using H̃_3'' = (x² - 7)·H̃_3
    operator = LinearOperator(c0=1.0, c2=-1.0)

    def source(x):
        u = eval_basis(3, x)[3]
        return -(x * x - 7) * u + u

    grid = build_grid(N, boundary_spec=[(0.3, float(eval_basis(3, 0.3)[3]))])
    system = assemble_system(operator, grid, N, source)
    assert system.matrix.shape == (N + 2, N + 1)
    assert system.interior_rows == N + 1
    weights = solve_weights(system).weights
    np.testing.assert_allclose(weights, np.eye(N + 1)[3], atol=1e-10)


def test_callable_coefficients_receive_physical_coordinates():
    N = 4
    seen = []

    def c0(x):
        seen.append(x.copy())
        return 1.0 + 0.0 * x

    grid = build_grid(N, coordinate_map=CoordinateMap(center=1.0, scale=2.0))
    assemble_system(LinearOperator(c0=c0), grid, N, planted(1))
    np.testing.assert_allclose(seen[0], grid.nodes_1d)


def test_source_values_must_match_rows():
    with pytest.raises(ConfigError):
        assemble_system(LinearOperator.identity(), build_grid(3), 3, np.zeros(3))


def test_2d_first_derivative_rejected():
    with pytest.raises(ConfigError):
        assemble_system(LinearOperator(c1=1.0), build_grid(2, dim=2), 2, lambda x, y: 0.0 * x)


def test_underdetermined_system_rejected():
    system = assemble_system(LinearOperator.identity(), build_grid(2), 5, lambda x: 0.0 * x)
    with pytest.raises(ConfigError):
        solve_weights(system)


def test_rank_deficient_system_reports_condition():
    matrix = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(NumericalFailure) as excinfo:
        solve_weights(LinearSystem(matrix=matrix, rhs=np.ones(3)))
    assert excinfo.value.condition is not None


def test_overdetermined_least_squares():
    matrix = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    solution = solve_weights(LinearSystem(matrix=matrix, rhs=np.array([1.0, 1.0, 0.0])))
    np.testing.assert_allclose(solution.weights, [1 / 3, 1 / 3])
    assert solution.residual_norm > 0


def test_2d_identity_recovers_tensor_function():
    N = 4
    grid = build_grid(N, dim=2)

    def source(x, y):
        return eval_basis(2, x)[1] * eval_basis(2, y)[2]

    weights = solve_weights(assemble_system(LinearOperator.identity(), grid, N, source)).weights
    expected = np.zeros((N + 1) ** 2)
    expected[1 * (N + 1) + 2] = 1.0
    np.testing.assert_allclose(weights, expected, atol=1e-10)


def test_expansion_laplacian_matches_finite_differences():
    rng = np.random.default_rng(3)
    expansion = HermiteExpansion2D(weights=rng.normal(size=16), coordinate_map=CoordinateMap(0.2, 1.3))
    x, y = rng.uniform(-1.5, 1.5, size=(2, 10))
    np.testing.assert_allclose(expansion.laplacian(x, y), fd_laplacian(expansion, x, y), atol=1e-5)
    assert expansion.degree == 3


def test_evaluate_expansion_rejects_non_square_weights():
    with pytest.raises(ConfigError):
        evaluate_expansion(np.ones(5), 0.0, 0.0)


def test_oscillator_eigenvalues():
    problem = oscillator_problem()
    N = 8
    grid = build_grid(N, dim=2)
    solution = solve_eigenpairs(hamiltonian_operator(problem, include_energy=False), grid, N)
    np.testing.assert_allclose(solution.energies[:6], [2.0, 3.0, 3.0, 4.0, 4.0, 4.0], atol=1e-8)

    ground = solution.weights[:, 0]
    assert ground[0] == pytest.approx(1 / math.sqrt(math.pi))
    np.testing.assert_allclose(ground[1:], 0.0, atol=1e-8)


def test_eigen_solve_needs_square_system():
    problem = oscillator_problem()
    with pytest.raises(ConfigError):
        solve_eigenpairs(hamiltonian_operator(problem, include_energy=False), build_grid(4, dim=2), 3)


def test_recovery_matches_quadrature_projection():
    N = 7
    basis = HermiteBasis(N)

    def target(x):
        values = eval_basis(N, x)
        return 0.3 * values[0] - 1.2 * values[4] + 0.05 * values[7]

    weights = solve_weights(assemble_system(LinearOperator.identity(), build_grid(N), N, target)).weights
    assert np.max(np.abs(weights - basis.project(target))) < 1e-10


def test_solve_is_linear_in_the_source():
    N = 6
    grid = build_grid(N)
    operator = LinearOperator(c0=1.0, c2=-1.0)

    def source(x):
        return np.exp(-x * x / 2) * np.sin(x)

    base = solve_weights(assemble_system(operator, grid, N, source)).weights
    scaled = solve_weights(assemble_system(operator, grid, N, lambda x: -3.5 * source(x))).weights
    np.testing.assert_allclose(scaled, -3.5 * base, rtol=0, atol=1e-12)


def test_boundary_weight_scales_the_boundary_rows():
    N = 4
    grid = build_grid(N, boundary_spec=[(3.5, 0.25)])
    plain = assemble_system(LinearOperator.identity(), grid, N, planted(1))
    heavy = assemble_system(LinearOperator.identity(), grid, N, planted(1), boundary_weight=10.0)
    np.testing.assert_array_equal(heavy.matrix[:-1], plain.matrix[:-1])
    np.testing.assert_allclose(heavy.matrix[-1], 10.0 * plain.matrix[-1])
    assert heavy.rhs[-1] == pytest.approx(2.5)


def test_boundary_weight_must_be_positive():
    with pytest.raises(ConfigError):
        assemble_system(LinearOperator.identity(), build_grid(2), 2, planted(0), boundary_weight=0.0)


def test_weighted_walls_pin_a_box_fit_to_zero():
    N, M = 6, 8
    walls = [((x, y), 0.0) for x in (0.0, 1.0) for y in np.linspace(0.0, 1.0, 9)]
    walls += [((x, y), 0.0) for x in np.linspace(0.0, 1.0, 9)[1:-1] for y in (0.0, 1.0)]
    grid = build_grid(M, dim=2, boundary_spec=walls, domain=(0.0, 1.0))

    def bump(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    system = assemble_system(LinearOperator.identity(), grid, N, bump, boundary_weight=1e3)
    assert system.matrix.shape == ((M + 1) ** 2 + 32, (N + 1) ** 2)
    expansion = HermiteExpansion2D(solve_weights(system).weights, grid.coordinate_map)
    points = grid.boundary_nodes
    assert np.max(np.abs(expansion(points[:, 0], points[:, 1]))) < 1e-3
