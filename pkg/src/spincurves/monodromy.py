"""Monodromy classification of fourth-order linear ODEs with periodic
coefficients.

A coefficient triple is positive when every solution of
y'''' + c2 y'' + c1 y' + c0 y = 0 returns to itself after one period
(fundamental matrix = I) and negative when every solution flips sign
(fundamental matrix = -I).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

__all__ = ["CoefficientTriple", "monodromy_matrix", "classify_triple"]


@dataclass
class CoefficientTriple:
    c0: Callable[[float], float]
    c1: Callable[[float], float]
    c2: Callable[[float], float]

    def __post_init__(self):
        for name in ("c0", "c1", "c2"):
            f = getattr(self, name)
            for t in np.linspace(0.0, 1.0, 17):
                if abs(f(t + 1.0) - f(t)) > 1e-10:
                    raise ValueError(f"{name} is not 1-periodic at t={t}")

    @staticmethod
    def constant(c0: float, c1: float, c2: float) -> "CoefficientTriple":
        return CoefficientTriple(lambda t: c0, lambda t: c1, lambda t: c2)


def monodromy_matrix(triple: CoefficientTriple, t0: float = 0.0,
                     rtol: float = 1e-12, atol: float = 1e-12) -> np.ndarray:
    """Fundamental solution matrix over one period, Phi(t0+1) with Phi(t0)=I."""

    def rhs(t, y):
        Y = y.reshape(4, 4)
        A = np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [-triple.c0(t), -triple.c1(t), -triple.c2(t), 0.0],
            ]
        )
        return (A @ Y).ravel()

    sol = solve_ivp(rhs, (t0, t0 + 1.0), np.eye(4).ravel(), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol.y[:, -1].reshape(4, 4)


def classify_triple(triple: CoefficientTriple, tol: float = 1e-6
                    ) -> tuple[str, float]:
    """('positive'|'negative'|'neither', residual).

    The residual is the Frobenius distance to the matching sign of the
    identity, so borderline classifications are auditable."""
    Phi = monodromy_matrix(triple)
    rp = float(np.linalg.norm(Phi - np.eye(4)))
    rm = float(np.linalg.norm(Phi + np.eye(4)))
    if rp < tol:
        return "positive", rp
    if rm < tol:
        return "negative", rm
    return "neither", min(rp, rm)
