"""Parameter update rules: plain gradient descent and Adam"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.errors import ConfigError


def _same_shape(w: np.ndarray, g: np.ndarray) -> None:
    if w.shape != g.shape:
        raise ConfigError(f"parameter shape {w.shape} does not match gradient shape {g.shape}")


def sgd_step(w: ArrayLike, g: ArrayLike, lr: float) -> np.ndarray:
    """w_new = w - λ·g"""
    w, g = np.asarray(w, dtype=float), np.asarray(g, dtype=float)
    _same_shape(w, g)
    return w - lr * g


@dataclass(frozen=True)
class AdamState:
    """First and second moment estimates plus the number of steps taken"""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size), t=0)


def adam_step(
    state: AdamState,
    w: ArrayLike,
    g: ArrayLike,
    lr: float = 0.01,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[np.ndarray, AdamState]:
    """
    One Adam update with bias-corrected moments.

    Args:
        state: Moments and step count before this update
        w: Parameters
        g: Gradient at w
        lr: Step size λ
        beta1, beta2: Moment decay rates
        eps: Denominator guard

    Returns:
        (updated parameters, updated state)
    """
    w, g = np.asarray(w, dtype=float), np.asarray(g, dtype=float)
    _same_shape(w, g)
    if state.m.shape != w.shape or state.v.shape != w.shape:
        raise ConfigError("Adam moments do not match the parameter shape")
    m = beta1 * state.m + (1.0 - beta1) * g
    v = beta2 * state.v + (1.0 - beta2) * g * g
    t = state.t + 1
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    return w - lr * m_hat / (np.sqrt(v_hat) + eps), AdamState(m=m, v=v, t=t)
