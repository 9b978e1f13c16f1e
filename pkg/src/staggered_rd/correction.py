"""Element-level conservation correction for the non-conservative update.

The velocity and internal-energy residuals of the staggered scheme do not, by
themselves, produce a flux-form update of momentum and total energy.  Adding
one constant per element to each (``r_u`` to every kinematic residual of the
element, ``r_e`` to every internal-energy residual) restores the two discrete
identities

    sum_V  w_rho[V] Psi_u[V] + sum_E w_u[E] Phi_rho[E]                   = F_m(K)
    sum_E  Psi_e[E] + sum_V th_m[V] Psi_u[V] + 1/2 sum_E th_q2[E] Phi_rho[E] = F_E(K)

where ``F_m``, ``F_E`` are the momentum and total-energy fluxes through the
element boundary.  Summed over elements these telescope, which makes the
scheme locally conservative for ``rho u`` and ``E = e + rho u^2 / 2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PositivityError
from .mesh import SpaceLayout, StaggeredField
from .residuals import FaceData


@dataclass
class CorrectionWeights:
    """Weights of the conservation identities for one step.

    ``omega_rho_local[K, i]`` is int_K rho^{n+1} phi_V / |C_V| for the i-th
    kinematic DOF of K; ``omega_rho`` is its assembly over the elements sharing
    the DOF, gathered back per element.  The theta weights are only known once
    the new velocity is.
    """

    omega_rho_local: np.ndarray  # (n, r+2)
    omega_rho: np.ndarray  # (n, r+2), shared-element sum
    omega_u: np.ndarray  # (n, r+1)
    theta_m: np.ndarray | None = None  # (n, r+2), shared-element sum
    theta_q2: np.ndarray | None = None  # (n, r+1)


def _quad(layout: SpaceLayout, coeffs: np.ndarray, kinematic: bool) -> np.ndarray:
    return coeffs @ (layout.Bv if kinematic else layout.Bt).T


def compute_weights(layout: SpaceLayout, rho_new, u_old, rho_old=None, u_new=None) -> CorrectionWeights:
    """Correction weights from Bezier coefficients.

    ``rho_*`` are (n, r+1) element coefficients, ``u_*`` global kinematic
    coefficients.  The theta weights are filled in when ``rho_old`` and
    ``u_new`` are given.
    """
    vel_mass = layout.vel_mass
    dofs = layout.vel_dofs
    rq_new = _quad(layout, rho_new, False)
    uq_old = _quad(layout, u_old[dofs], True)

    omega_rho_local = layout.integrate_vel(rq_new) / vel_mass[dofs]
    omega_rho = layout.assemble(omega_rho_local)[dofs]
    if np.any(omega_rho_local <= 0) or np.any(omega_rho <= 0):
        raise PositivityError("density correction weights are not positive")
    omega_u = layout.integrate_thermo(uq_old) / layout.thermo_mass

    theta_m = theta_q2 = None
    if rho_old is not None and u_new is not None:
        rq_old = _quad(layout, rho_old, False)
        uq_new = _quad(layout, u_new[dofs], True)
        m_tilde = 0.5 * (rq_new * uq_new + rq_old * uq_old)
        theta_m = layout.assemble(layout.integrate_vel(m_tilde))[dofs] / vel_mass[dofs]
        theta_q2 = layout.integrate_thermo(uq_new * uq_old) / layout.thermo_mass
    return CorrectionWeights(omega_rho_local, omega_rho, omega_u, theta_m, theta_q2)


def momentum_target(faces: FaceData) -> np.ndarray:
    """Momentum flux through each element boundary, fhat_m(right) - fhat_m(left)."""
    f = faces.flux[1]
    return f[1:] - f[:-1]


def energy_target(faces: FaceData) -> np.ndarray:
    f = faces.flux[2]
    return f[1:] - f[:-1]


def momentum_balance(weights: CorrectionWeights, psi_u, phi_rho) -> np.ndarray:
    """Left-hand side of the momentum identity, per element."""
    return np.sum(weights.omega_rho * psi_u, axis=1) + np.sum(weights.omega_u * phi_rho, axis=1)


def energy_balance(weights: CorrectionWeights, psi_e, psi_u, phi_rho) -> np.ndarray:
    if weights.theta_m is None:
        raise ValueError("theta weights are not available before the velocity update")
    return (
        np.sum(psi_e, axis=1)
        + np.sum(weights.theta_m * psi_u, axis=1)
        + 0.5 * np.sum(weights.theta_q2 * phi_rho, axis=1)
    )


def momentum_correction(weights: CorrectionWeights, psi_u, phi_rho, target_m) -> np.ndarray:
    """Constant r_u per element such that psi_u + r_u satisfies the momentum identity."""
    wsum = weights.omega_rho.sum(axis=1)
    if np.any(wsum <= 0):
        raise PositivityError("sum of density weights is not positive")
    return (target_m - momentum_balance(weights, psi_u, phi_rho)) / wsum


def energy_correction(weights: CorrectionWeights, phi_e, psi_u_corrected, phi_rho, target_e) -> np.ndarray:
    """Constant r_e per element, split evenly over the element's energy DOFs."""
    k = phi_e.shape[1]
    return (target_e - energy_balance(weights, phi_e, psi_u_corrected, phi_rho)) / k


def identity_residues(weights, psi_u, psi_e, phi_rho, target_m, target_e, scale=None):
    """Relative per-element residues of the two identities.

    Normalised by the element flux scale (max of |target| and the magnitude
    of the balance terms), floored at 1 to avoid dividing by zero in
    uniform regions.
    """
    bal_m = momentum_balance(weights, psi_u, phi_rho)
    bal_e = energy_balance(weights, psi_e, psi_u, phi_rho)
    if scale is None:
        scale_m = np.maximum.reduce([np.abs(target_m), np.abs(bal_m), np.ones_like(bal_m)])
        scale_e = np.maximum.reduce([np.abs(target_e), np.abs(bal_e), np.ones_like(bal_e)])
    else:
        scale_m = scale_e = scale
    return np.abs(bal_m - target_m) / scale_m, np.abs(bal_e - target_e) / scale_e


@dataclass
class MasterIdentityReport:
    momentum_split: np.ndarray  # per element
    kinetic_split: np.ndarray  # pointwise identity for Delta(rho u^2), integrated per element
    max_residue: float


def verify_master_identities(before: StaggeredField, after: StaggeredField) -> MasterIdentityReport:
    """Check the algebraic splittings behind the correction for one completed step.

    * int_K Delta(rho u) = sum_V w_rho_K |C_V| Delta u_V + sum_E w_u |C_E| Delta rho_E
    * Delta(rho u^2) = (rho' u' + rho u) Delta u + u' u Delta rho, integrated over K

    Residues are relative to the magnitude of the integrated left-hand sides.
    """
    L = before.layout
    dofs = L.vel_dofs
    rq0, uq0, *_ = before.at_quadrature()
    rq1, uq1, *_ = after.at_quadrature()

    lhs = L.integrate(rq1 * uq1 - rq0 * uq0)
    w = compute_weights(L, after.rho, before.u)
    du = (after.u - before.u)[dofs]
    drho = after.rho - before.rho
    rhs = np.sum(w.omega_rho_local * L.vel_mass[dofs] * du, axis=1) + np.sum(w.omega_u * L.thermo_mass * drho, axis=1)
    scale_m = np.maximum(L.integrate(np.abs(rq1 * uq1) + np.abs(rq0 * uq0)), np.finfo(float).tiny)
    split = np.abs(lhs - rhs) / scale_m

    k_lhs = L.integrate(rq1 * uq1**2 - rq0 * uq0**2)
    k_rhs = L.integrate((rq1 * uq1 + rq0 * uq0) * (uq1 - uq0) + uq1 * uq0 * (rq1 - rq0))
    scale_k = np.maximum(L.integrate(rq1 * uq1**2 + rq0 * uq0**2), np.finfo(float).tiny)
    kin = np.abs(k_lhs - k_rhs) / scale_k
    return MasterIdentityReport(split, kin, float(max(split.max(initial=0.0), kin.max(initial=0.0))))


CORRECTION_CSV_HEADER = ("step", "element", "abs_ru", "abs_re", "residue_momentum", "residue_energy")


def write_correction_report(rows, path) -> None:
    """Rows of (step, element, |r_u|, |r_e|, momentum residue, energy residue) as CSV."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CORRECTION_CSV_HEADER)
            for row in rows:
                writer.writerow([row[0], row[1], *(repr(float(v)) for v in row[2:])])
    except OSError as exc:
        raise OSError(f"cannot write correction report to {path}: {exc}") from exc
