"""Time stepping: CFL control, the ordered corrected Euler update and DeC(2)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .correction import (
    CorrectionWeights,
    compute_weights,
    energy_correction,
    energy_target,
    identity_residues,
    momentum_correction,
    momentum_target,
)
from .basis import DEFAULT_RULE_POINTS, basis_matrix, gauss_rule
from .errors import BlowUpError, PositivityError
from .mesh import StaggeredField
from .residuals import (
    Blending,
    ElementResiduals,
    Stabilization,
    evaluate_residuals,
    wave_speed_bounds,
)
from .riemann import FluxChoice


class TimeScheme(str, Enum):
    EULER = "euler"
    DEC2 = "dec2"


@dataclass(frozen=True)
class SchemeConfig:
    flux: FluxChoice = FluxChoice.HLLC
    stabilization: Stabilization = Stabilization.JUMP
    blending: Blending = Blending.NONE
    correction: bool = True
    time_scheme: TimeScheme = TimeScheme.EULER
    cfl: float = 0.4
    theta: float = 0.1
    max_halvings: int = 5
    dt_max: float = math.inf
    mass_matrix: bool = True

    def __post_init__(self):
        object.__setattr__(self, "flux", FluxChoice(self.flux))
        object.__setattr__(self, "stabilization", Stabilization(self.stabilization))
        object.__setattr__(self, "blending", Blending(self.blending))
        object.__setattr__(self, "time_scheme", TimeScheme(self.time_scheme))
        if not self.cfl > 0:
            raise ValueError("cfl must be positive")


@dataclass
class StepInfo:
    dt: float
    r_u: np.ndarray
    r_e: np.ndarray
    residue_m: np.ndarray
    residue_e: np.ndarray
    weights: CorrectionWeights | None = None
    residuals: ElementResiduals | None = None


def compute_dt(fld: StaggeredField, cfl: float, t: float = 0.0, t_final: float | None = None, dt_max: float = math.inf) -> float:
    """dt = cfl * min_K (h_K / q) / alpha_K, clipped so the run lands on ``t_final``.

    ``q`` is the velocity degree, so h / q is the kinematic DOF spacing and the
    number is comparable across degrees (for K1T0 it is the usual h / alpha).
    """
    if not cfl > 0:
        raise ValueError("cfl must be positive")
    alpha = wave_speed_bounds(fld)
    h = fld.layout.mesh.h / fld.layout.vel_degree
    with np.errstate(divide="ignore"):
        ratio = np.where(alpha > 0, h / alpha, np.inf)
    dt = min(cfl * float(ratio.min()), dt_max)
    if not math.isfinite(dt):
        raise ValueError("all wave speeds vanish; configure dt_max")
    if t_final is not None:
        dt = min(dt, t_final - t)
    return dt


def evaluate(fld: StaggeredField, cfg: SchemeConfig, rho_star=None) -> ElementResiduals:
    return evaluate_residuals(fld, cfg.flux, cfg.stabilization, cfg.blending, cfg.theta, rho_star=rho_star)


def corrected_update(
    fld: StaggeredField, res: ElementResiduals, dt: float, correction: bool = True
) -> tuple[StaggeredField, StepInfo]:
    """One Euler-type pass from ``fld`` with the given residuals.

    Density first, then velocity with r_u (weights use the new density),
    then internal energy with r_e (weights use the new velocity).
    """
    L = fld.layout
    n = L.n
    new = fld.copy()
    new.rho = fld.rho - dt / L.thermo_mass * res.rho
    if np.any(new.rho <= 0):
        raise PositivityError("density became non-positive")

    target_m = momentum_target(res.faces)
    target_e = energy_target(res.faces)
    if correction:
        w = compute_weights(L, new.rho, fld.u)
        r_u = momentum_correction(w, res.u, res.rho, target_m)
    else:
        w = None
        r_u = np.zeros(n)
    psi_u = res.u + r_u[:, None]
    new.u = fld.u - dt / L.vel_mass * L.assemble(psi_u)

    if correction:
        w = compute_weights(L, new.rho, fld.u, fld.rho, new.u)
        r_e = energy_correction(w, res.e, psi_u, res.rho, target_e)
        psi_e = res.e + r_e[:, None]
        res_m, res_e = identity_residues(w, psi_u, psi_e, res.rho, target_m, target_e)
    else:
        r_e = np.zeros(n)
        psi_e = res.e
        res_m = res_e = np.full(n, np.nan)
    new.e = fld.e - dt / L.thermo_mass * psi_e

    if not new.is_finite():
        raise BlowUpError("non-finite degrees of freedom")
    if np.any(new.e <= 0):
        raise PositivityError("internal energy became non-positive")
    return new, StepInfo(dt, r_u, r_e, res_m, res_e, w, res)


def euler_step(fld: StaggeredField, dt: float, cfg: SchemeConfig) -> tuple[StaggeredField, StepInfo]:
    return corrected_update(fld, evaluate(fld, cfg), dt, cfg.correction)


def _local_mass(degree: int) -> np.ndarray:
    """Consistent Bezier mass matrix on [0, 1]."""
    rule = gauss_rule(DEFAULT_RULE_POINTS)
    B = basis_matrix(degree, rule.points)
    return (B * rule.weights[:, None]).T @ B


def mass_difference(fld: StaggeredField, cur: StaggeredField, dt: float):
    """(M - C)(U^(k) - U^n) / dt per element for rho, u and e.

    Each row sums to zero, so element totals are untouched.
    """
    L = fld.layout
    h = L.mesh.h[:, None]
    Mt = _local_mass(L.r) - np.eye(L.r + 1) / (L.r + 1)
    Mv = _local_mass(L.vel_degree) - np.eye(L.vel_degree + 1) / (L.vel_degree + 1)
    drho = cur.rho - fld.rho
    de = cur.e - fld.e
    du = cur.u_local - fld.u_local
    return h * (drho @ Mt) / dt, h * (du @ Mv) / dt, h * (de @ Mt) / dt


def dec_step(fld: StaggeredField, dt: float, cfg: SchemeConfig, passes: int = 2) -> tuple[StaggeredField, StepInfo]:
    """Deferred correction: an Euler prediction, then passes with half-sum residuals.

    Every pass restarts from ``fld`` and applies the conservation correction
    against the half-sum of the interface fluxes at U^n and the current iterate.
    The velocity residual of every iterate is divided by that iterate's own
    element mean density (the time-n mean would cost an order in dt).  With ``cfg.mass_matrix`` the correction passes also carry
    the difference between the consistent and the lumped mass matrix: more
    accurate in space, but then only first order in dt on a fixed mesh.
    """
    res_n = evaluate(fld, cfg)
    cur, info = corrected_update(fld, res_n, dt, cfg.correction)
    for _ in range(passes - 1):
        res = evaluate(cur, cfg).combine(res_n, 0.5)
        if cfg.mass_matrix:
            m_rho, m_u, m_e = mass_difference(fld, cur, dt)
            res.rho = res.rho + m_rho
            res.u = res.u + m_u
            res.e = res.e + m_e
        cur, info = corrected_update(fld, res, dt, cfg.correction)
    return cur, info


def step(fld: StaggeredField, dt: float, cfg: SchemeConfig) -> tuple[StaggeredField, StepInfo]:
    if cfg.time_scheme is TimeScheme.DEC2:
        return dec_step(fld, dt, cfg, passes=2)
    return euler_step(fld, dt, cfg)


@dataclass
class RunResult:
    field: StaggeredField
    t: float
    steps: int
    halvings: int = 0
    infos: list = field(default_factory=list)


StepCallback = Callable[[int, float, StaggeredField, StepInfo], None]


def advance(
    fld: StaggeredField,
    t_final: float,
    cfg: SchemeConfig,
    callback: StepCallback | None = None,
    max_steps: int | None = None,
    t0: float = 0.0,
) -> RunResult:
    """March to ``t_final``; a step failing positivity is retried with dt/2 up to ``cfg.max_halvings`` times."""
    t = t0
    nstep = 0
    total_halvings = 0
    cur = fld
    eps = 1e-14 * max(1.0, abs(t_final))
    while t < t_final - eps:
        if max_steps is not None and nstep >= max_steps:
            break
        try:
            dt = compute_dt(cur, cfg.cfl, t, t_final, cfg.dt_max)
        except PositivityError as exc:
            raise PositivityError(f"step {nstep}, t={t:.6g}: {exc}") from exc
        for attempt in range(cfg.max_halvings + 1):
            try:
                with np.errstate(all="ignore"):
                    new, info = step(cur, dt, cfg)
                break
            except PositivityError as exc:
                if attempt == cfg.max_halvings:
                    raise PositivityError(f"step {nstep}, t={t:.6g}: {exc} (after {attempt} halvings)") from exc
                dt *= 0.5
                total_halvings += 1
            except BlowUpError as exc:
                raise BlowUpError(f"step {nstep}, t={t:.6g}: {exc}", step=nstep, time=t) from exc
        t += dt
        nstep += 1
        cur = new
        if callback is not None:
            callback(nstep, t, cur, info)
    return RunResult(cur, t, nstep, total_halvings)
