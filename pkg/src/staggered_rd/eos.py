"""Ideal-gas closure, state conversions and pointwise Euler fluxes.

Throughout the solver the energy unknown is the internal energy per unit
volume, ``rho * eps``; the helpers taking a *specific* internal energy say so
in their argument name.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateError


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    u: float
    p: float

    def __post_init__(self):
        if not (self.rho > 0 and self.p > 0):
            raise StateError(f"non-physical primitive state {self}")

    def to_conservative(self, gamma: float) -> "ConservativeState":
        rho, m, E = primitive_to_conservative(self.rho, self.u, self.p, gamma)
        return ConservativeState(float(rho), float(m), float(E))


@dataclass(frozen=True)
class ConservativeState:
    rho: float
    m: float
    E: float

    def __post_init__(self):
        if not self.rho > 0 or not self.E - 0.5 * self.m * self.m / self.rho > 0:
            raise StateError(f"non-physical conservative state {self}")

    def to_primitive(self, gamma: float) -> PrimitiveState:
        rho, u, p = conservative_to_primitive(self.rho, self.m, self.E, gamma)
        return PrimitiveState(float(rho), float(u), float(p))


def pressure(rho, e_specific, gamma):
    """p = (gamma - 1) rho eps, with eps the specific internal energy."""
    return (gamma - 1.0) * np.asarray(rho) * e_specific


def pressure_from_volumetric(e_vol, gamma):
    return (gamma - 1.0) * e_vol


def volumetric_energy(p, gamma):
    return p / (gamma - 1.0)


def primitive_to_conservative(rho, u, p, gamma):
    rho, u, p = np.asarray(rho, float), np.asarray(u, float), np.asarray(p, float)
    return rho, rho * u, p / (gamma - 1.0) + 0.5 * rho * u * u


def conservative_to_primitive(rho, m, E, gamma):
    rho, m, E = np.asarray(rho, float), np.asarray(m, float), np.asarray(E, float)
    u = m / rho
    return rho, u, (gamma - 1.0) * (E - 0.5 * m * u)


def flux_from_primitive(rho, u, p, gamma):
    """Euler flux (rho u, rho u^2 + p, (E + p) u) from primitive variables."""
    rho, u, p = np.asarray(rho, float), np.asarray(u, float), np.asarray(p, float)
    E = p / (gamma - 1.0) + 0.5 * rho * u * u
    return np.stack([rho * u, rho * u * u + p, (E + p) * u])


def euler_flux(state: ConservativeState | PrimitiveState, gamma: float) -> np.ndarray:
    if isinstance(state, ConservativeState):
        state = state.to_primitive(gamma)
    return flux_from_primitive(state.rho, state.u, state.p, gamma)


def sound_speed(rho, p, gamma):
    rho, p = np.asarray(rho, float), np.asarray(p, float)
    if np.any(rho <= 0) or np.any(p <= 0) or not (np.all(np.isfinite(rho)) and np.all(np.isfinite(p))):
        raise StateError("sound speed needs positive finite density and pressure")
    c = np.sqrt(gamma * p / rho)
    return c[()] if c.ndim == 0 else c


def wave_bound(rho, u, p, gamma) -> float:
    """max(|u| + c) over the given states."""
    return float(np.max(np.abs(u) + sound_speed(rho, p, gamma)))
