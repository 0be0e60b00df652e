"""Benchmark Schrödinger problems: 2D harmonic oscillator and 2D particle in a box"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.collocation.collocation import CoordinateMap, HermiteExpansion2D, LinearOperator
from src.errors import ConfigError

logger = logging.getLogger(__name__)

# Step of the central-difference Laplacian
FD_STEP = 1e-3
# Fourth-order five-point weights for f'' at offsets -2h..2h, times 1/(12 h²)
_FD_OFFSETS = (-2, -1, 0, 1, 2)
_FD_WEIGHTS = (-1.0, 16.0, -30.0, 16.0, -1.0)

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]
ResidualMode = Literal["analytic", "finite_difference"]


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box x_min <= x <= x_max, y_min <= y <= y_max"""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def contains(self, x: ArrayLike, y: ArrayLike, margin: float = 0.0) -> np.ndarray:
        x, y = np.asarray(x), np.asarray(y)
        return (
            (x >= self.x_min + margin)
            & (x <= self.x_max - margin)
            & (y >= self.y_min + margin)
            & (y <= self.y_max - margin)
        )

    def grid(self, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
        """Uniform resolution×resolution grid covering the box, walls included"""
        xs = np.linspace(self.x_min, self.x_max, resolution)
        ys = np.linspace(self.y_min, self.y_max, resolution)
        return np.meshgrid(xs, ys, indexing="ij")


@dataclass(frozen=True)
class PhysicalConstants:
    m: float = 1.0
    hbar: float = 1.0
    omega: float = 1.0
    v0: float = 1.0
    L: float = 1.0


@dataclass(frozen=True)
class SineMode:
    """(2/L)·sin(n_x·π·x/L)·sin(n_y·π·y/L) with its exact Laplacian"""

    L: float
    nx: int
    ny: int

    def __call__(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        kx, ky = self.nx * math.pi / self.L, self.ny * math.pi / self.L
        return (2.0 / self.L) * np.sin(kx * np.asarray(x)) * np.sin(ky * np.asarray(y))

    def laplacian(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        k2 = (self.nx**2 + self.ny**2) * (math.pi / self.L) ** 2
        return -k2 * self(x, y)


def _zero(x: ArrayLike, y: ArrayLike) -> np.ndarray:
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


@dataclass(frozen=True)
class Problem:
    """A 2D time-independent Schrödinger benchmark with its analytic reference"""

    name: str
    domain: Domain
    potential: Field
    analytic_psi: Field
    energy: float
    envelope: Field
    offset: Field = _zero
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    modes: Tuple[int, int] = (0, 0)
    bounded: bool = False

    @property
    def kinetic_factor(self) -> float:
        """ħ²/2m"""
        return self.constants.hbar**2 / (2.0 * self.constants.m)

    def with_energy(self, energy: float) -> "Problem":
        return replace(self, energy=float(energy))


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0.0):
            raise ConfigError(f"{name} must be positive, got {value}")


def oscillator_energy_1d(n: int, hbar: float = 1.0, omega: float = 1.0) -> float:
    """E_n = (n + 1/2)·ħω"""
    if n < 0:
        raise ConfigError(f"oscillator level must be non-negative, got {n}")
    return (n + 0.5) * hbar * omega


def oscillator_problem(
    m: float = 1.0,
    hbar: float = 1.0,
    omega: float = 1.0,
    v0: float = 1.0,
    nx: int = 0,
    ny: int = 0,
) -> Problem:
    """
    2D harmonic oscillator V = V0 + ½mω²(x² + y²) on [-5, 5]².

    The reference state is the separable eigenfunction u_nx(x)·u_ny(y) with
    u_n(x) = √α·π^{-1/4}·H̃_n(αx), α = √(mω/ħ); its energy is (nx+ny+1)ħω + V0.

    Args:
        m, hbar, omega, v0: Physical constants, all positive
        nx, ny: Quantum numbers of the reference state (ground state by default)

    Returns:
        Problem
    """
    _require_positive(m=m, hbar=hbar, omega=omega, v0=v0)
    if nx < 0 or ny < 0:
        raise ConfigError(f"oscillator modes must be non-negative, got ({nx}, {ny})")

    alpha = math.sqrt(m * omega / hbar)
    size = max(nx, ny) + 1
    weights = np.zeros((size, size))
    weights[nx, ny] = alpha / math.sqrt(math.pi)
    psi = HermiteExpansion2D(weights=weights.ravel(), coordinate_map=CoordinateMap(scale=alpha))

    def potential(x, y):
        x, y = np.asarray(x), np.asarray(y)
        return v0 + 0.5 * m * omega**2 * (x * x + y * y)

    def envelope(x, y):
        x, y = np.asarray(x), np.asarray(y)
        return np.exp(-0.5 * (x * x + y * y))

    return Problem(
        name="oscillator",
        domain=Domain(-5.0, 5.0, -5.0, 5.0),
        potential=potential,
        analytic_psi=psi,
        energy=(nx + ny + 1) * hbar * omega + v0,
        envelope=envelope,
        constants=PhysicalConstants(m=m, hbar=hbar, omega=omega, v0=v0),
        modes=(nx, ny),
        bounded=False,
    )


def box_problem(
    L: float = 1.0, nx: int = 1, ny: int = 1, m: float = 1.0, hbar: float = 1.0
) -> Problem:
    """
    Particle in the box [0, L]² with V = 0 inside and Dirichlet walls.

    Args:
        L: Side length
        nx, ny: Quantum numbers, both >= 1
        m, hbar: Physical constants

    Returns:
        Problem whose envelope x(L-x)y(L-y)/(L/2)⁴ peaks at 1 in the center
    """
    _require_positive(L=L, m=m, hbar=hbar)
    if nx < 1 or ny < 1:
        raise ConfigError(f"box modes must be at least 1, got ({nx}, {ny})")

    quarter = (L / 2.0) ** 4

    def envelope(x, y):
        x, y = np.asarray(x), np.asarray(y)
        return x * (L - x) * y * (L - y) / quarter

    return Problem(
        name="box",
        domain=Domain(0.0, L, 0.0, L),
        potential=_zero,
        analytic_psi=SineMode(L=L, nx=nx, ny=ny),
        energy=hbar**2 * math.pi**2 * (nx**2 + ny**2) / (2.0 * m * L**2),
        envelope=envelope,
        constants=PhysicalConstants(m=m, hbar=hbar, omega=0.0, v0=0.0, L=L),
        modes=(nx, ny),
        bounded=True,
    )


def energy_levels(problem: Problem, count: int) -> List[Tuple[int, int, float]]:
    """
    Lowest analytic 2D energies of the problem's spectrum.

    Args:
        problem: Oscillator or box problem
        count: Number of levels, degenerate states listed separately

    Returns:
        (n_x, n_y, energy) triples sorted by energy, then n_x
    """
    if count < 1:
        raise ConfigError(f"energy level count must be positive, got {count}")
    c = problem.constants
    if problem.bounded:
        unit = c.hbar**2 * math.pi**2 / (2.0 * c.m * c.L**2)
        states = [(i, j, unit * (i * i + j * j)) for i in range(1, count + 1) for j in range(1, count + 1)]
    else:
        states = [
            (i, j, (i + j + 1) * c.hbar * c.omega + c.v0)
            for i in range(count)
            for j in range(count)
        ]
    return sorted(states, key=lambda s: (s[2], s[0]))[:count]


def hamiltonian_operator(problem: Problem, include_energy: bool = True) -> LinearOperator:
    """-(ħ²/2m)∇² + V (- E when include_energy) as a collocation operator descriptor"""
    energy = problem.energy if include_energy else 0.0

    def c0(x, y):
        return problem.potential(x, y) - energy

    return LinearOperator(c0=c0, c2=-problem.kinetic_factor)


def fd_laplacian(model: Field, x: np.ndarray, y: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Fourth-order central-difference Laplacian of a vectorized model"""
    total = np.zeros(np.broadcast(x, y).shape)
    for offset, weight in zip(_FD_OFFSETS, _FD_WEIGHTS):
        if offset == 0:
            total = total + 2.0 * weight * model(x, y)
        else:
            total = total + weight * (model(x + offset * h, y) + model(x, y + offset * h))
    return total / (12.0 * h * h)


def fd_stencil(h: float = FD_STEP) -> List[Tuple[float, float, float]]:
    """
    (dx, dy, weight) terms of the Laplacian stencil, weights already divided by 12h².

    The center point appears once with the weight of both axes combined.
    """
    scale = 1.0 / (12.0 * h * h)
    terms = [(0.0, 0.0, 2.0 * _FD_WEIGHTS[2] * scale)]
    for offset, weight in zip(_FD_OFFSETS, _FD_WEIGHTS):
        if offset != 0:
            terms.append((offset * h, 0.0, weight * scale))
            terms.append((0.0, offset * h, weight * scale))
    return terms


def schrodinger_residual(
    model: Field,
    problem: Problem,
    x: ArrayLike,
    y: ArrayLike,
    mode: ResidualMode = "finite_difference",
) -> np.ndarray:
    """
    -(ħ²/2m)∇²ψ̄ + V·ψ̄ - E·ψ̄ at the given points.

    Args:
        model: Vectorized ψ̄(x, y); analytic mode needs a `laplacian` method
        problem: Problem supplying V, E and the constants
        x, y: Evaluation points
        mode: "finite_difference" (five-point stencil, h = 1e-3) or "analytic"

    Returns:
        Residual values with the broadcast shape of x and y
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if mode == "analytic":
        laplacian = getattr(model, "laplacian", None)
        if laplacian is None:
            raise ConfigError("analytic residuals need a model exposing laplacian(x, y)")
        lap = laplacian(x, y)
    elif mode == "finite_difference":
        if not np.all(problem.domain.contains(x, y, margin=2.0 * FD_STEP)):
            raise ConfigError(
                f"finite-difference stencil leaves the {problem.name} domain"
            )
        lap = fd_laplacian(model, x, y)
    else:
        raise ConfigError(f"unknown residual mode {mode!r}")
    values = model(x, y)
    return -problem.kinetic_factor * lap + (problem.potential(x, y) - problem.energy) * values


def trial_solution(model: Field, problem: Problem, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """g_t = h1 + h2·N: the problem's offset plus its envelope times the model"""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return problem.offset(x, y) + problem.envelope(x, y) * model(x, y)


def build_problem(
    name: str,
    m: float = 1.0,
    hbar: float = 1.0,
    omega: float = 1.0,
    v0: float = 1.0,
    L: float = 1.0,
    nx: Optional[int] = None,
    ny: Optional[int] = None,
) -> Problem:
    """Select a problem by name with optional mode overrides"""
    if name == "oscillator":
        return oscillator_problem(m, hbar, omega, v0, nx=nx or 0, ny=ny or 0)
    if name == "box":
        return box_problem(L, nx=1 if nx is None else nx, ny=1 if ny is None else ny, m=m, hbar=hbar)
    raise ConfigError(f"unknown problem {name!r}")
