"""Bernstein-Bezier bases on the reference interval [0, 1] and Gauss rules."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DEGREE = 2


def _check(degree: int, index: int) -> None:
    if degree not in (0, 1, 2):
        raise ValueError(f"unsupported Bezier degree {degree}")
    if not 0 <= index <= degree:
        raise ValueError(f"basis index {index} out of range for degree {degree}")


def basis_eval(degree: int, index: int, lam):
    """Value of the Bezier polynomial ``B_index`` of the given degree at ``lam``.

    Works elementwise on arrays.
    """
    _check(degree, index)
    lam = np.asarray(lam, dtype=float)
    l1, l2 = 1.0 - lam, lam
    if degree == 0:
        val = np.ones_like(lam)
    elif degree == 1:
        val = l1 if index == 0 else l2
    else:
        val = (l1 * l1, 2.0 * l1 * l2, l2 * l2)[index]
    return val[()] if val.ndim == 0 else val


def basis_derivative(degree: int, index: int, lam):
    """Derivative with respect to the reference coordinate (divide by h for d/dx)."""
    _check(degree, index)
    lam = np.asarray(lam, dtype=float)
    if degree == 0:
        val = np.zeros_like(lam)
    elif degree == 1:
        val = np.full_like(lam, -1.0 if index == 0 else 1.0)
    else:
        val = (-2.0 * (1.0 - lam), 2.0 - 4.0 * lam, 2.0 * lam)[index]
    return val[()] if val.ndim == 0 else val


def basis_matrix(degree: int, lam) -> np.ndarray:
    """Values of all basis functions, shape ``(len(lam), degree + 1)``."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return np.stack([basis_eval(degree, i, lam) for i in range(degree + 1)], axis=-1)


def derivative_matrix(degree: int, lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return np.stack([basis_derivative(degree, i, lam) for i in range(degree + 1)], axis=-1)


def lumped_mass(degree: int, h: float) -> np.ndarray:
    """Exact integrals of the Bezier basis over an element of length ``h``.

    Every Bernstein polynomial of degree k integrates to 1/(k+1) on [0, 1].
    """
    _check(degree, 0)
    if h <= 0:
        raise ValueError("element length must be positive")
    return np.full(degree + 1, h / (degree + 1))


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def degree_of_exactness(self) -> int:
        return 2 * len(self.points) - 1

    def integrate(self, f, a: float = 0.0, b: float = 1.0) -> float:
        x = a + (b - a) * self.points
        return float((b - a) * np.dot(self.weights, f(x)))


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule mapped to [0, 1]; exact up to degree 2n-1."""
    if not 1 <= n <= 5:
        raise ValueError(f"gauss_rule supports 1..5 points, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    pts = 0.5 * (x + 1.0)
    wts = 0.5 * w
    pts.setflags(write=False)
    wts.setflags(write=False)
    return QuadratureRule(pts, wts)


# Exact for every integrand assembled here (highest degree is 6, velocity residual at r=1).
DEFAULT_RULE_POINTS = 5
