"""Configuration module for the Hermite network experiments"""

import logging
import os
import sys
from typing import Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import ConfigError
from src.problems.problems import Problem, build_problem
from src.train.trainer import TrainingConfig

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class Config:
    """Defaults shared by the CLI and the experiment pipeline"""

    # Environment
    OUTPUT_DIR = os.getenv("HERMITE_NN_OUTPUT_DIR", "results")
    LOG_LEVEL = os.getenv("HERMITE_NN_LOG_LEVEL", "INFO")
    LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

    DEFAULT_SEED = 42
    COMPARE_SEEDS = [1, 2, 3, 4, 5]

    # Hidden layer sizes per problem and method
    ARCHITECTURES = {
        "oscillator": {"hermite_nn": [10] * 15, "pinn": [5] * 10},
        "box": {"hermite_nn": [15] * 5, "pinn": [18] * 5},
    }

    @classmethod
    def setup_logging(cls, level: Optional[str] = None) -> None:
        """Send log records to stderr, the diagnostic stream"""
        logging.basicConfig(
            level=(level or cls.LOG_LEVEL).upper(),
            format=cls.LOG_FORMAT,
            stream=sys.stderr,
        )

    @classmethod
    def hidden_sizes(cls, problem: str, method: str) -> List[int]:
        return list(cls.ARCHITECTURES[problem][method])


class ExperimentConfig(BaseModel):
    """Every knob of an experiment run; unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid")

    # Problem
    problem: Literal["oscillator", "box"] = Field("box", description="Benchmark problem")
    m: float = Field(1.0, gt=0, description="Particle mass")
    hbar: float = Field(1.0, gt=0, description="Reduced Planck constant")
    omega: float = Field(1.0, gt=0, description="Oscillator angular frequency")
    v0: float = Field(1.0, gt=0, description="Constant potential shift of the oscillator")
    L: float = Field(1.0, gt=0, description="Box side length")
    nx: Optional[int] = Field(None, ge=0, description="x quantum number; None = ground state")
    ny: Optional[int] = Field(None, ge=0, description="y quantum number; None = ground state")

    # Method and architecture
    method: Literal["hermite_nn", "pinn", "collocation"] = Field("hermite_nn")
    hidden_sizes: Optional[List[int]] = Field(
        None, description="Hermite network hidden widths; None = the problem's table default"
    )
    pinn_hidden_sizes: Optional[List[int]] = Field(
        None, description="Sigmoid baseline hidden widths; None = the problem's table default"
    )
    hermite_degree: int = Field(5, ge=0, le=63, description="Highest Hermite degree D of the activations")

    # Training
    iterations: int = Field(1000, ge=0)
    learning_rate: Optional[float] = Field(None, gt=0, description="None = optimizer default")
    optimizer: Literal["sgd", "adam"] = "adam"
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)
    batch: Literal["full", "stochastic"] = "full"
    batch_size: int = Field(32, ge=1)
    loss_mode: Literal["supervised", "residual"] = "supervised"
    stop_tol: float = Field(0.0, ge=0)

    # Grids and collocation
    basis_size: int = Field(9, ge=1, le=63, description="M: training nodes are the roots of H_{M+1}")
    expansion_degree: int = Field(8, ge=0, le=63, description="N of the collocation expansion")
    resolution: int = Field(20, ge=2, le=2000, description="R of the R×R evaluation grid")
    collocation_operator: Literal["identity", "schrodinger"] = "identity"
    collocation_target: Literal["problem", "planted"] = "problem"
    boundary_weight: float = Field(1e3, gt=0, description="Factor on the Dirichlet wall rows of box fits")
    planted_degree: int = Field(2, ge=0, description="Degree of the planted basis function")
    basis_point: float = Field(0.0, description="x at which the basis subcommand evaluates H̃_n")
    energy_levels: int = Field(6, ge=1, description="Analytic levels listed in energy_levels.csv")

    # Output and reproducibility
    compare_seeds: List[int] = Field(default_factory=lambda: list(Config.COMPARE_SEEDS))
    heatmap: bool = True
    output_dir: str = Field(default_factory=lambda: Config.OUTPUT_DIR)
    seed: int = Field(Config.DEFAULT_SEED, ge=0)

    @field_validator("hidden_sizes", "pinn_hidden_sizes", "compare_seeds", mode="before")
    @classmethod
    def _split_list(cls, value):
        if isinstance(value, str):
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("hidden_sizes", "pinn_hidden_sizes")
    @classmethod
    def _positive_widths(cls, value):
        if value is not None and (not value or min(value) < 1):
            raise ValueError("hidden widths must be positive integers")
        return value

    @field_validator("compare_seeds")
    @classmethod
    def _some_seeds(cls, value):
        if not value:
            raise ValueError("at least one comparison seed is required")
        if min(value) < 0:
            raise ValueError("comparison seeds must be non-negative")
        return value

    def build_problem(self) -> Problem:
        return build_problem(
            self.problem, self.m, self.hbar, self.omega, self.v0, self.L, self.nx, self.ny
        )

    def architecture(self, method: str) -> List[int]:
        """[2, hidden..., 1] for hermite_nn or pinn"""
        hidden = self.hidden_sizes if method == "hermite_nn" else self.pinn_hidden_sizes
        if hidden is None:
            hidden = Config.hidden_sizes(self.problem, method)
        return [2, *hidden, 1]

    def training_config(self, seed: Optional[int] = None) -> TrainingConfig:
        return TrainingConfig(
            iterations=self.iterations,
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            batch=self.batch,
            batch_size=self.batch_size,
            loss_mode=self.loss_mode,
            seed=self.seed if seed is None else seed,
            stop_tol=self.stop_tol,
        )


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse line-oriented `key = value` text with `#` comments.

    Args:
        text: Config file contents

    Returns:
        ExperimentConfig with defaults for every key not given

    Raises:
        ConfigError: naming the offending line
    """
    values: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in ExperimentConfig.model_fields:
            raise ConfigError(f"unknown key {key!r}", line=number)
        if key in values:
            logger.warning(
                "line %d: duplicate key %r overrides line %d", number, key, lines[key]
            )
        values[key] = value
        lines[key] = number

    return validate_config(values, lines)


def validate_config(
    values: Dict[str, object], lines: Optional[Dict[str, int]] = None
) -> ExperimentConfig:
    """Validate raw key/value pairs, turning the first pydantic error into a ConfigError"""
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else None
        raise ConfigError(f"{key}: {error['msg']}", line=(lines or {}).get(key)) from None


def load_config(path: Optional[str]) -> ExperimentConfig:
    """Read a config file, or return the defaults when no path is given"""
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_config(f.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config {path} is not UTF-8 text: {exc.reason} at byte {exc.start}") from None
