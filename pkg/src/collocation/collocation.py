"""Hermite collocation: grids, linear systems, least-squares and eigen solves"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from src.errors import ConfigError, NumericalFailure
from src.hermite.hermite import (
    SQRT_PI,
    eval_basis,
    eval_derivative_basis,
    eval_second_derivative_basis,
    hermite_roots,
)

logger = logging.getLogger(__name__)

# Systems whose 2-norm condition estimate exceeds this are rejected
MAX_CONDITION = 1e12

Coefficient = Union[float, Callable[..., ArrayLike]]


@dataclass(frozen=True)
class CoordinateMap:
    """Affine change of variable ξ = scale·(x - center) feeding the basis"""

    center: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.scale) or self.scale <= 0.0:
            raise ConfigError(f"coordinate scale must be positive, got {self.scale}")

    def __call__(self, x: ArrayLike) -> np.ndarray:
        return self.scale * (np.asarray(x, dtype=float) - self.center)

    def inverse(self, xi: ArrayLike) -> np.ndarray:
        return self.center + np.asarray(xi, dtype=float) / self.scale


def interval_map(nodes: np.ndarray, lo: float, hi: float) -> CoordinateMap:
    """
    Affine map placing Hermite nodes inside [lo, hi].

    The outermost nodes land half a mean node spacing inside each wall, so
    finite-difference stencils around them stay in the interval.
    """
    if not hi > lo:
        raise ConfigError(f"empty interval [{lo}, {hi}]")
    n = len(nodes)
    center = 0.5 * (lo + hi)
    if n == 1:
        return CoordinateMap(center=center, scale=1.0)
    span = float(nodes[-1] - nodes[0])
    return CoordinateMap(center=center, scale=n * span / ((hi - lo) * (n - 1)))


@dataclass(frozen=True)
class CollocationGrid:
    """Collocation nodes (roots of H_{M+1}) in physical coordinates"""

    nodes_1d: np.ndarray
    nodes_2d: Optional[np.ndarray]
    boundary_nodes: np.ndarray
    boundary_values: np.ndarray
    dim: int = 1
    coordinate_map: CoordinateMap = field(default_factory=CoordinateMap)

    @property
    def interior_points(self) -> np.ndarray:
        """(K,) nodes in 1D, (K, 2) points in 2D"""
        return self.nodes_1d if self.dim == 1 else self.nodes_2d


@dataclass(frozen=True)
class LinearOperator:
    """
    c0·u + c1·u' + c2·u'' with constant or callable coefficients.

    In 2D, u'' stands for the Laplacian and c1 must vanish. Callable
    coefficients receive the physical coordinates (x) or (x, y).
    """

    c0: Coefficient = 1.0
    c1: Coefficient = 0.0
    c2: Coefficient = 0.0

    @classmethod
    def identity(cls) -> "LinearOperator":
        return cls(c0=1.0)

    @classmethod
    def second_derivative(cls) -> "LinearOperator":
        return cls(c0=0.0, c2=1.0)


@dataclass(frozen=True)
class LinearSystem:
    """Collocation rows (interior residuals, then boundary values) and right-hand side"""

    matrix: np.ndarray
    rhs: np.ndarray
    interior_rows: Optional[int] = None
    dim: int = 1
    coordinate_map: CoordinateMap = field(default_factory=CoordinateMap)

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.rhs.shape[0]:
            raise ConfigError(
                f"matrix shape {self.matrix.shape} does not match rhs length {self.rhs.shape[0]}"
            )
        if not (np.all(np.isfinite(self.matrix)) and np.all(np.isfinite(self.rhs))):
            raise NumericalFailure("collocation system holds non-finite entries")


@dataclass(frozen=True)
class CollocationSolution:
    """Least-squares weights with the residual norm and condition estimate"""

    weights: np.ndarray
    residual_norm: float
    condition: float


@dataclass(frozen=True)
class EigenSolution:
    """Real eigenvalues (ascending) with L2-normalized expansion weights as columns"""

    energies: np.ndarray
    weights: np.ndarray


def _as_points(points: ArrayLike, dim: int) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    if dim == 1:
        return array.reshape(-1)
    return array.reshape(-1, 2)


def build_grid(
    basis_size: int,
    dim: int = 1,
    boundary_spec: Sequence[Tuple[object, float]] = (),
    domain: Optional[Tuple[float, float]] = None,
    coordinate_map: Optional[CoordinateMap] = None,
) -> CollocationGrid:
    """
    Build collocation nodes from the roots of H_{M+1}.

    Args:
        basis_size: M >= 1
        dim: 1, or 2 for the tensor-product square of the 1D nodes
        boundary_spec: (point, value) pairs where function values are imposed
        domain: Optional interval the nodes are mapped into (see interval_map)
        coordinate_map: Optional explicit map; nodes become its inverse image

    Returns:
        CollocationGrid in physical coordinates
    """
    if basis_size < 1:
        raise ConfigError(f"basis size must be at least 1, got {basis_size}")
    if dim not in (1, 2):
        raise ConfigError(f"grid dimension must be 1 or 2, got {dim}")
    if domain is not None and coordinate_map is not None:
        raise ConfigError("give either a domain or a coordinate map, not both")

    roots = np.asarray(hermite_roots(basis_size + 1))
    if domain is not None:
        coordinate_map = interval_map(roots, *domain)
    coordinate_map = coordinate_map or CoordinateMap()
    nodes_1d = coordinate_map.inverse(roots)

    nodes_2d = None
    if dim == 2:
        xx, yy = np.meshgrid(nodes_1d, nodes_1d, indexing="ij")
        nodes_2d = np.column_stack([xx.ravel(), yy.ravel()])

    boundary_nodes = _as_points([point for point, _ in boundary_spec], dim)
    boundary_values = np.asarray([value for _, value in boundary_spec], dtype=float)

    interior = nodes_1d if dim == 1 else nodes_2d
    for point in boundary_nodes:
        gaps = np.abs(interior - point)
        if dim == 2:
            gaps = gaps.max(axis=1)
        if np.any(gaps < 1e-12):
            raise ConfigError(f"boundary node {point} coincides with an interior node")

    return CollocationGrid(
        nodes_1d=nodes_1d,
        nodes_2d=nodes_2d,
        boundary_nodes=boundary_nodes,
        boundary_values=boundary_values,
        dim=dim,
        coordinate_map=coordinate_map,
    )


def _coefficient(c: Coefficient, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
    if callable(c):
        value = np.asarray(c(*coords), dtype=float)
    else:
        value = np.asarray(float(c))
    return np.broadcast_to(value, coords[0].shape)


def _basis_rows_1d(N: int, xi: np.ndarray, scale: float):
    return (
        eval_basis(N, xi).T,
        scale * eval_derivative_basis(N, xi).T,
        scale**2 * eval_second_derivative_basis(N, xi).T,
    )


def _tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (N+1, K) x (N+1, K) -> (K, (N+1)^2), column index n*(N+1) + m
    return np.einsum("np,mp->pnm", a, b).reshape(a.shape[1], -1)


def _basis_rows_2d(N: int, points: np.ndarray, cmap: CoordinateMap):
    xi, eta = cmap(points[:, 0]), cmap(points[:, 1])
    bx, by = eval_basis(N, xi), eval_basis(N, eta)
    laplacian = cmap.scale**2 * (
        _tensor(eval_second_derivative_basis(N, xi), by)
        + _tensor(bx, eval_second_derivative_basis(N, eta))
    )
    return _tensor(bx, by), laplacian


def _operator_rows(
    operator: LinearOperator, grid: CollocationGrid, N: int
) -> np.ndarray:
    cmap = grid.coordinate_map
    if grid.dim == 1:
        z = grid.nodes_1d
        values, first, second = _basis_rows_1d(N, cmap(z), cmap.scale)
        coords = (z,)
        c0, c1, c2 = (_coefficient(c, coords) for c in (operator.c0, operator.c1, operator.c2))
        return c0[:, None] * values + c1[:, None] * first + c2[:, None] * second

    if callable(operator.c1) or float(operator.c1) != 0.0:
        raise ConfigError("first-derivative terms are not defined for 2D operators")
    points = grid.nodes_2d
    values, laplacian = _basis_rows_2d(N, points, cmap)
    coords = (points[:, 0], points[:, 1])
    c0, c2 = _coefficient(operator.c0, coords), _coefficient(operator.c2, coords)
    return c0[:, None] * values + c2[:, None] * laplacian


def _boundary_rows(grid: CollocationGrid, N: int) -> np.ndarray:
    cmap = grid.coordinate_map
    count = len(grid.boundary_nodes)
    if grid.dim == 1:
        return eval_basis(N, cmap(grid.boundary_nodes)).T.reshape(count, N + 1)
    if count == 0:
        return np.zeros((0, (N + 1) ** 2))
    values, _ = _basis_rows_2d(N, grid.boundary_nodes, cmap)
    return values


def assemble_system(
    operator: LinearOperator,
    grid: CollocationGrid,
    N: int,
    source: Union[Callable[..., ArrayLike], ArrayLike],
    boundary_values: Optional[Sequence[float]] = None,
    boundary_weight: float = 1.0,
) -> LinearSystem:
    """
    Assemble the collocation rows L(H̃_n)(z_i) = f(z_i) and β-rows H̃_n(z_b) = α.

    Args:
        operator: Linear differential operator descriptor
        grid: Collocation grid (interior and boundary nodes)
        N: Expansion degree; 2D systems use the tensor basis H̃_n(x)H̃_m(y)
        source: f as a vectorized callable of the coordinates, or its values at the nodes
        boundary_values: α per boundary node; defaults to the grid's values
        boundary_weight: Factor on every β-row and its α; large values pin the
            least-squares fit to the boundary values

    Returns:
        LinearSystem with interior rows first
    """
    if N < 0:
        raise ConfigError(f"expansion degree must be non-negative, got {N}")
    rows = _operator_rows(operator, grid, N)

    points = grid.interior_points
    if callable(source):
        coords = (points,) if grid.dim == 1 else (points[:, 0], points[:, 1])
        rhs = np.broadcast_to(np.asarray(source(*coords), dtype=float), (len(points),))
    else:
        rhs = np.asarray(source, dtype=float).reshape(-1)
        if rhs.shape[0] != rows.shape[0]:
            raise ConfigError(
                f"source has {rhs.shape[0]} values for {rows.shape[0]} collocation rows"
            )

    alpha = grid.boundary_values if boundary_values is None else np.asarray(boundary_values, dtype=float)
    if alpha.shape[0] != len(grid.boundary_nodes):
        raise ConfigError(
            f"{alpha.shape[0]} boundary values for {len(grid.boundary_nodes)} boundary nodes"
        )

    if not math.isfinite(boundary_weight) or boundary_weight <= 0.0:
        raise ConfigError(f"boundary weight must be positive, got {boundary_weight}")

    matrix = np.vstack([rows, boundary_weight * _boundary_rows(grid, N)])
    return LinearSystem(
        matrix=matrix,
        rhs=np.concatenate([rhs, boundary_weight * alpha]),
        interior_rows=rows.shape[0],
        dim=grid.dim,
        coordinate_map=grid.coordinate_map,
    )


def solve_weights(system: LinearSystem) -> CollocationSolution:
    """
    Least-squares minimizer of ||A·W - rhs||_2 through a complete orthogonal factorization.

    Args:
        system: Assembled collocation system with at least as many rows as columns

    Returns:
        CollocationSolution with the weights, residual norm and condition estimate
    """
    rows, cols = system.matrix.shape
    if rows < cols:
        raise ConfigError(f"underdetermined system: {rows} rows for {cols} weights")
    condition = float(np.linalg.cond(system.matrix))
    if not math.isfinite(condition) or condition > MAX_CONDITION:
        raise NumericalFailure(
            f"collocation matrix is rank deficient (condition estimate {condition:.3e})",
            condition=condition,
        )
    weights, _, _, _ = linalg.lstsq(system.matrix, system.rhs, lapack_driver="gelsy")
    residual = float(np.linalg.norm(system.matrix @ weights - system.rhs))
    logger.debug(
        "solved %dx%d system, residual %.3e, condition %.3e", rows, cols, residual, condition
    )
    return CollocationSolution(weights=weights, residual_norm=residual, condition=condition)


def solve_eigenpairs(
    operator: LinearOperator, grid: CollocationGrid, N: int
) -> EigenSolution:
    """
    Collocate L·u = E·u on a square grid and solve the generalized eigenproblem A·W = E·B·W.

    Args:
        operator: Hamiltonian-type operator (without the energy shift)
        grid: Grid with exactly as many interior nodes as basis functions
        N: Expansion degree

    Returns:
        EigenSolution with real eigenvalues ascending; each weight column is
        scaled so the expansion has unit L2 norm in physical coordinates
    """
    a = _operator_rows(operator, grid, N)
    b = _operator_rows(LinearOperator.identity(), grid, N)
    if a.shape[0] != a.shape[1]:
        raise ConfigError(
            f"eigen collocation needs a square system, got {a.shape[0]} nodes for {a.shape[1]} weights"
        )
    try:
        eigenvalues, vectors = linalg.eig(a, b)
    except linalg.LinAlgError as exc:
        raise NumericalFailure("generalized eigen solve did not converge") from exc

    real = np.isfinite(eigenvalues) & (
        np.abs(eigenvalues.imag) <= 1e-8 * np.maximum(1.0, np.abs(eigenvalues.real))
    )
    if not np.any(real):
        raise NumericalFailure("generalized eigen solve produced no real eigenvalues")
    energies = eigenvalues.real[real]
    vectors = vectors.real[:, real]
    order = np.argsort(energies, kind="stable")
    energies, vectors = energies[order], vectors[:, order]

    # ||Σ w H̃(ξ)||² = √π^dim · ||w||² / scale^dim
    dim = grid.dim
    norms = np.linalg.norm(vectors, axis=0) * SQRT_PI ** (dim / 2) / grid.coordinate_map.scale ** (dim / 2)
    vectors = vectors / norms
    signs = np.sign(vectors[np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])])
    return EigenSolution(energies=energies, weights=vectors * signs)


def evaluate_expansion(
    W: ArrayLike,
    x: ArrayLike,
    y: Optional[ArrayLike] = None,
    coordinate_map: Optional[CoordinateMap] = None,
) -> np.ndarray:
    """
    Evaluate Σ w_n H̃_n(x), or Σ w_nm H̃_n(x)H̃_m(y) when y is given.

    Args:
        W: N+1 weights (1D) or (N+1)² tensor weights, index n*(N+1) + m (2D)
        x: Scalar or array of x coordinates
        y: Optional y coordinates, same shape as x
        coordinate_map: Optional change of variable applied to both coordinates

    Returns:
        Expansion values with the shape of x
    """
    W = np.asarray(W, dtype=float).reshape(-1)
    cmap = coordinate_map or CoordinateMap()
    if y is None:
        return np.tensordot(W, eval_basis(len(W) - 1, cmap(x)), axes=1)
    N = math.isqrt(len(W)) - 1
    if (N + 1) ** 2 != len(W):
        raise ConfigError(f"{len(W)} weights do not form a square tensor basis")
    bx, by = eval_basis(N, cmap(x)), eval_basis(N, cmap(y))
    return np.einsum("nm,n...,m...->...", W.reshape(N + 1, N + 1), bx, by)


@dataclass(frozen=True)
class HermiteExpansion2D:
    """Tensor Hermite expansion usable as a model with analytic derivatives"""

    weights: np.ndarray
    coordinate_map: CoordinateMap = field(default_factory=CoordinateMap)

    @property
    def degree(self) -> int:
        return math.isqrt(len(self.weights)) - 1

    def __call__(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        return evaluate_expansion(self.weights, x, y, self.coordinate_map)

    def laplacian(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        N, cmap = self.degree, self.coordinate_map
        xi, eta = cmap(x), cmap(y)
        W = np.asarray(self.weights, dtype=float).reshape(N + 1, N + 1)
        bx, by = eval_basis(N, xi), eval_basis(N, eta)
        dxx = eval_second_derivative_basis(N, xi)
        dyy = eval_second_derivative_basis(N, eta)
        total = np.einsum("nm,n...,m...->...", W, dxx, by) + np.einsum(
            "nm,n...,m...->...", W, bx, dyy
        )
        return cmap.scale**2 * total
