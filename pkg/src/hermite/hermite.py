"""Normalized Hermite functions: values, derivatives, roots and quadrature weights"""

import logging
import math
from functools import lru_cache
from typing import Callable, Dict

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, eigh_tridiagonal

from src.errors import ConfigError, NumericalFailure

logger = logging.getLogger(__name__)

# Highest degree whose roots and weights are supported
MAX_ROOT_DEGREE = 64
SQRT_PI = math.sqrt(math.pi)


def _check_degree(N: int) -> None:
    if int(N) != N or N < 0:
        raise ConfigError(f"Hermite degree must be a non-negative integer, got {N}")


def eval_basis(N: int, x: ArrayLike) -> np.ndarray:
    """
    Evaluate the normalized Hermite functions H̃_0..H̃_N.

    The three-term recurrence runs on the normalized functions themselves, so
    values stay bounded for every degree and every finite x.

    Args:
        N: Highest degree
        x: Scalar or array of evaluation points

    Returns:
        Array of shape (N+1,) + shape(x); row n holds H̃_n(x)
    """
    _check_degree(N)
    x = np.asarray(x, dtype=float)
    values = np.empty((N + 1,) + x.shape)
    values[0] = np.exp(-0.5 * x * x)
    if N >= 1:
        values[1] = math.sqrt(2.0) * x * values[0]
    for n in range(1, N):
        values[n + 1] = (
            x * math.sqrt(2.0 / (n + 1)) * values[n]
            - math.sqrt(n / (n + 1)) * values[n - 1]
        )
    return values


def _derivatives_from_values(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    derivs = np.empty_like(values)
    derivs[0] = -x * values[0]
    for n in range(1, values.shape[0]):
        derivs[n] = math.sqrt(2.0 * n) * values[n - 1] - x * values[n]
    return derivs


def eval_derivative_basis(N: int, x: ArrayLike) -> np.ndarray:
    """
    Evaluate H̃'_0..H̃'_N through H̃'_n = √(2n)·H̃_{n-1} - x·H̃_n.

    Args:
        N: Highest degree
        x: Scalar or array of evaluation points

    Returns:
        Array of shape (N+1,) + shape(x)
    """
    x = np.asarray(x, dtype=float)
    return _derivatives_from_values(eval_basis(N, x), x)


def eval_second_derivative_basis(N: int, x: ArrayLike) -> np.ndarray:
    """
    Evaluate H̃''_0..H̃''_N by applying the first-derivative identity twice:
    H̃''_n = √(2n)·H̃'_{n-1} - H̃_n - x·H̃'_n.

    Args:
        N: Highest degree
        x: Scalar or array of evaluation points

    Returns:
        Array of shape (N+1,) + shape(x)
    """
    x = np.asarray(x, dtype=float)
    values = eval_basis(N, x)
    derivs = _derivatives_from_values(values, x)
    second = np.empty_like(values)
    second[0] = -values[0] - x * derivs[0]
    for n in range(1, N + 1):
        second[n] = math.sqrt(2.0 * n) * derivs[n - 1] - values[n] - x * derivs[n]
    return second


@lru_cache(maxsize=None)
def _roots(n: int) -> np.ndarray:
    if n == 1:
        nodes = np.zeros(1)
    else:
        # Jacobi matrix of the weight e^{-x^2}: zero diagonal, off-diagonal sqrt(k/2)
        off_diagonal = np.sqrt(np.arange(1, n) / 2.0)
        try:
            nodes = eigh_tridiagonal(np.zeros(n), off_diagonal, eigvals_only=True)
        except LinAlgError as exc:
            raise NumericalFailure(
                f"Hermite root solve did not converge for degree {n}", degree=n
            ) from exc
        nodes = np.sort(nodes)

        # One Newton polish step
        values = eval_basis(n, nodes)
        slope = math.sqrt(2.0 * n) * values[n - 1] - nodes * values[n]
        nodes = nodes - values[n] / slope
        nodes = 0.5 * (nodes - nodes[::-1])

    if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0.0):
        raise NumericalFailure(
            f"Hermite roots of degree {n} are not finite and strictly increasing",
            degree=n,
        )
    nodes.setflags(write=False)
    return nodes


def hermite_roots(n: int) -> np.ndarray:
    """
    Roots of H_n, sorted ascending and exactly symmetric about zero.

    Args:
        n: Degree, 1 <= n <= MAX_ROOT_DEGREE

    Returns:
        Read-only array of n nodes
    """
    if int(n) != n or not 1 <= n <= MAX_ROOT_DEGREE:
        raise ConfigError(
            f"root degree must lie in [1, {MAX_ROOT_DEGREE}], got {n}"
        )
    return _roots(int(n))


@lru_cache(maxsize=None)
def _weights(n: int) -> np.ndarray:
    nodes = _roots(n)
    previous = eval_basis(n - 1, nodes)[n - 1]
    weights = SQRT_PI / (n * previous * previous)
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
        raise NumericalFailure(
            f"quadrature weights of degree {n} are not finite and positive", degree=n
        )
    weights.setflags(write=False)
    return weights


def quad_weights(n: int) -> np.ndarray:
    """
    Modified Gauss-Hermite weights w̃_i = √π / (n·H̃_{n-1}(x_i)²).

    Σ w̃_i f(x_i) integrates f = H̃_j·H̃_k exactly for j + k <= 2n - 1, without
    ever forming e^{x_i²}.

    Args:
        n: Number of nodes

    Returns:
        Read-only array of n positive weights aligned with hermite_roots(n)
    """
    hermite_roots(n)
    return _weights(int(n))


def deriv_inner_product(n: int, m: int) -> float:
    """Closed form of ∫ H̃'_n(x)·H̃'_m(x) dx over the real line"""
    _check_degree(n)
    _check_degree(m)
    if m == n:
        return (n + 0.5) * SQRT_PI
    if m == n - 2:
        return -math.sqrt(n * math.pi * (n - 1)) / 2.0
    if m == n + 2:
        return -math.sqrt(math.pi * (n + 1) * (n + 2)) / 2.0
    return 0.0


class HermiteBasis:
    """Hermite basis of degree N with nodes and weights cached at construction"""

    def __init__(self, max_degree: int):
        """
        Initialize the basis

        Args:
            max_degree: Truncation degree N; nodes and weights are cached for
                degrees 1..N+1 so the collocation nodes of H_{N+1} are available
        """
        _check_degree(max_degree)
        if max_degree + 1 > MAX_ROOT_DEGREE:
            raise ConfigError(
                f"basis degree {max_degree} needs roots of degree {max_degree + 1}, "
                f"above the supported {MAX_ROOT_DEGREE}"
            )
        self.max_degree = int(max_degree)
        self.roots_cache: Dict[int, np.ndarray] = {}
        self.weights_cache: Dict[int, np.ndarray] = {}
        for degree in range(1, self.max_degree + 2):
            self.roots_cache[degree] = hermite_roots(degree)
            self.weights_cache[degree] = quad_weights(degree)
        logger.debug("Hermite basis of degree %d ready", self.max_degree)

    def values(self, x: ArrayLike) -> np.ndarray:
        return eval_basis(self.max_degree, x)

    def derivatives(self, x: ArrayLike) -> np.ndarray:
        return eval_derivative_basis(self.max_degree, x)

    def second_derivatives(self, x: ArrayLike) -> np.ndarray:
        return eval_second_derivative_basis(self.max_degree, x)

    def roots(self, degree: int) -> np.ndarray:
        try:
            return self.roots_cache[degree]
        except KeyError:
            raise ConfigError(
                f"degree {degree} outside the cached range 1..{self.max_degree + 1}"
            ) from None

    def weights(self, degree: int) -> np.ndarray:
        try:
            return self.weights_cache[degree]
        except KeyError:
            raise ConfigError(
                f"degree {degree} outside the cached range 1..{self.max_degree + 1}"
            ) from None

    def project(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """
        Coefficients ⟨f, H̃_n⟩/√π for n = 0..N by quadrature on N+1 nodes.

        Args:
            f: Vectorized function of one variable

        Returns:
            Array of N+1 expansion coefficients
        """
        nodes = self.roots(self.max_degree + 1)
        weights = self.weights(self.max_degree + 1)
        samples = np.asarray(f(nodes), dtype=float)
        return self.values(nodes) @ (weights * samples) / SQRT_PI
