"""Element residuals of the staggered scheme.

All routines are vectorised over elements: a thermodynamic residual has shape
``(n, r+1)`` and a kinematic one ``(n, r+2)``, indexed by element and local
Bezier DOF.  Face quantities are indexed by mesh node, ``0..n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import basis_matrix, derivative_matrix
from .errors import PositivityError
from .mesh import StaggeredField
from .riemann import FluxChoice, face_flux


class Stabilization(str, Enum):
    NONE = "none"
    LLF = "llf"
    JUMP = "jump"


class Blending(str, Enum):
    NONE = "none"
    PROC1 = "proc1"
    PROC2 = "proc2"


@dataclass(frozen=True)
class FaceData:
    flux: np.ndarray  # (3, n+1): mass, momentum, total energy
    p_star: np.ndarray  # (n+1,)


@dataclass
class ElementResiduals:
    """Per-element, per-DOF residuals of one evaluation.

    ``u`` holds the stabilised (and possibly blended) velocity residual Psi^u
    before the conservation correction.
    """

    rho: np.ndarray
    u: np.ndarray
    e: np.ndarray
    faces: FaceData
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def totals(self) -> dict[str, np.ndarray]:
        return {"rho": self.rho.sum(axis=1), "u": self.u.sum(axis=1), "e": self.e.sum(axis=1)}

    def combine(self, other: "ElementResiduals", weight: float = 0.5) -> "ElementResiduals":
        """Convex combination ``weight * self + (1 - weight) * other`` (faces included)."""
        w, v = weight, 1.0 - weight
        faces = FaceData(w * self.faces.flux + v * other.faces.flux, w * self.faces.p_star + v * other.faces.p_star)
        return ElementResiduals(
            w * self.rho + v * other.rho,
            w * self.u + v * other.u,
            w * self.e + v * other.e,
            faces,
            np.maximum(self.alpha, other.alpha),
            np.maximum(self.beta, other.beta),
        )


def traces(fld: StaggeredField):
    """Left and right primitive states (rho, u, p) at each of the n+1 faces."""
    L = fld.layout
    rho_in_l, rho_in_r = fld.rho[:, 0], fld.rho[:, -1]
    p = fld.p
    p_in_l, p_in_r = p[:, 0], p[:, -1]
    ul = fld.u_local
    u_nodes = np.concatenate([ul[:, 0], ul[-1:, -1]])
    if L.mesh.periodic:
        rho_l = np.concatenate([rho_in_r[-1:], rho_in_r])
        p_l = np.concatenate([p_in_r[-1:], p_in_r])
        rho_r = np.concatenate([rho_in_l, rho_in_l[:1]])
        p_r = np.concatenate([p_in_l, p_in_l[:1]])
    else:
        # transmissive: the ghost state copies the interior trace
        rho_l = np.concatenate([rho_in_l[:1], rho_in_r])
        p_l = np.concatenate([p_in_l[:1], p_in_r])
        rho_r = np.concatenate([rho_in_l, rho_in_r[-1:]])
        p_r = np.concatenate([p_in_l, p_in_r[-1:]])
    return rho_l, u_nodes, p_l, rho_r, u_nodes, p_r


def compute_faces(fld: StaggeredField, choice=FluxChoice.HLLC) -> FaceData:
    rho_l, u_l, p_l, rho_r, u_r, p_r = traces(fld)
    if np.any(rho_l <= 0) or np.any(rho_r <= 0) or np.any(p_l <= 0) or np.any(p_r <= 0):
        raise PositivityError("non-positive density or pressure trace at a face")
    flux, p_star = face_flux(choice, rho_l, u_l, p_l, rho_r, u_r, p_r, fld.gamma)
    return FaceData(np.asarray(flux), np.asarray(p_star))


def wave_speed_bounds(fld: StaggeredField) -> np.ndarray:
    """alpha_K = max(|u| + c) over the element's endpoints and midpoint."""
    L = fld.layout
    lam = np.array([0.0, 0.5, 1.0])
    rho = fld.rho @ basis_matrix(L.r, lam).T
    p = fld.p @ basis_matrix(L.r, lam).T
    u = fld.u_local @ basis_matrix(L.vel_degree, lam).T
    if np.any(rho <= 0) or np.any(p <= 0):
        raise PositivityError("non-positive density or pressure inside an element")
    return np.max(np.abs(u) + np.sqrt(fld.gamma * p / rho), axis=1)


def density_residual(fld: StaggeredField, faces: FaceData) -> np.ndarray:
    """dG residual: -int phi' rho u dx + [fhat phi] over the two faces."""
    L = fld.layout
    rho, u, *_ = fld.at_quadrature()
    mass_flux = rho * u
    vol = (mass_flux * L.rule.weights[None, :]) @ L.dBt  # h cancels against 1/h of phi'
    f = faces.flux[0]
    out = -vol
    out[:, -1] += f[1:]
    out[:, 0] -= f[:-1]
    return out


def element_mean_density(fld: StaggeredField) -> np.ndarray:
    return fld.rho.mean(axis=1)  # Bezier coefficients average to the element mean


def velocity_residual_centered(fld: StaggeredField, faces: FaceData, rho_star=None) -> np.ndarray:
    """Psi^u from rho*_K Psi = int phi rho u u_x - int p phi' + [p* phi]."""
    L = fld.layout
    rho, u, e, ux, _ = fld.at_quadrature()
    if rho_star is None:
        rho_star = element_mean_density(fld)
    if np.any(rho_star <= 0):
        raise PositivityError("non-positive element-average density")
    p = (fld.gamma - 1.0) * e
    adv = L.integrate_vel(rho * u * ux)
    grad = (p * L.rule.weights[None, :]) @ L.dBv
    out = adv - grad
    ps = faces.p_star
    out[:, -1] += ps[1:]
    out[:, 0] -= ps[:-1]
    return out / rho_star[:, None]


def energy_residual(fld: StaggeredField) -> np.ndarray:
    """int phi (u e_x + (e + p) u_x) dx, e the volumetric internal energy."""
    L = fld.layout
    _, u, e, ux, ex = fld.at_quadrature()
    p = (fld.gamma - 1.0) * e
    return L.integrate_thermo(u * ex + (e + p) * ux)


def llf_dissipation(u_local: np.ndarray, alpha) -> np.ndarray:
    """alpha_K (u_sigma - mean of the element's velocity DOFs)."""
    u_local = np.asarray(u_local, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    # shifting by the first DOF makes equal values give exactly zero
    d = u_local - u_local[..., :1]
    d = d - d.mean(axis=-1, keepdims=True)
    return alpha * d if u_local.ndim == 1 else alpha[:, None] * d


def jump_stabilization(fld: StaggeredField, beta, theta: float = 0.1) -> np.ndarray:
    """Face penalty on the jump of du/dx, theta beta h^2 [phi'][u'], per element and DOF.

    The face coefficient averages the two neighbours.  Each element collects
    the term for the DOFs it owns; the shared vertex is split evenly, so the
    assembled residual is exactly the face penalty.  Transmissive boundary
    faces carry no jump.
    """
    L = fld.layout
    n, q = L.n, L.vel_degree
    h = L.mesh.h
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (n,))
    d0 = derivative_matrix(q, 0.0)[0]  # phi_i'(lambda=0)
    d1 = derivative_matrix(q, 1.0)[0]
    ul = fld.u_local
    du_right = ul @ d1 / h  # du/dx at the right end of each element
    du_left = ul @ d0 / h

    # interior faces between element k-1 (left) and k (right)
    if L.mesh.periodic:
        left = (np.arange(n) - 1) % n
        right = np.arange(n)
    else:
        left = np.arange(n - 1)
        right = np.arange(1, n)
    jump_u = du_left[right] - du_right[left]
    shared = d0[0] / h[right] - d1[-1] / h[left]  # [phi'] of the shared vertex

    jphi_left = -np.outer(1.0 / h[left], d1)
    jphi_left[:, -1] = 0.5 * shared
    jphi_right = np.outer(1.0 / h[right], d0)
    jphi_right[:, 0] = 0.5 * shared

    hf = 0.5 * (h[left] + h[right])
    coef = theta * 0.5 * (beta[left] + beta[right]) * hf * hf * jump_u
    out = np.zeros((n, q + 1))
    np.add.at(out, left, coef[:, None] * jphi_left)
    np.add.at(out, right, coef[:, None] * jphi_right)
    return out


def blend_procedure1(phi: np.ndarray) -> np.ndarray:
    """Total-preserving positive redistribution of per-DOF residuals (rows = elements)."""
    phi = np.asarray(phi, dtype=float)
    single = phi.ndim == 1
    phi2 = np.atleast_2d(phi)
    total = phi2.sum(axis=1, keepdims=True)
    nonzero = total != 0.0
    safe_total = np.where(nonzero, total, 1.0)
    x = np.maximum(phi2 / safe_total, 0.0)
    xs = x.sum(axis=1, keepdims=True)
    k = phi2.shape[1]
    # all contributions of the wrong sign: split the total evenly
    frac = np.where(xs > 0, x / np.where(xs > 0, xs, 1.0), 1.0 / k)
    out = np.where(nonzero, frac * total, 0.0)
    return out[0] if single else out


def blend_procedure2(phi_rho, phi_e, rho, e, alpha):
    """LLF-augmented thermodynamic residuals followed by the Procedure-1 map."""
    alpha = np.asarray(alpha, dtype=float)
    rho = np.asarray(rho, dtype=float)
    e = np.asarray(e, dtype=float)
    a = alpha[:, None] if rho.ndim == 2 else alpha
    axis = -1
    r_aug = np.asarray(phi_rho) + a * (rho - rho.mean(axis=axis, keepdims=True))
    e_aug = np.asarray(phi_e) + a * (e - e.mean(axis=axis, keepdims=True))
    return blend_procedure1(r_aug), blend_procedure1(e_aug)


def evaluate_residuals(
    fld: StaggeredField,
    flux=FluxChoice.HLLC,
    stabilization=Stabilization.JUMP,
    blending=Blending.NONE,
    theta: float = 0.1,
    beta=None,
    rho_star=None,
) -> ElementResiduals:
    """Assemble all element residuals for one state.

    ``rho_star`` overrides the element densities dividing the velocity
    residual (default: the element means of ``fld``).
    """
    stabilization = Stabilization(stabilization)
    blending = Blending(blending)
    faces = compute_faces(fld, flux)
    alpha = wave_speed_bounds(fld)
    beta = alpha if beta is None else np.broadcast_to(np.asarray(beta, float), alpha.shape)

    phi_rho = density_residual(fld, faces)
    psi_u = velocity_residual_centered(fld, faces, rho_star)
    phi_e = energy_residual(fld)

    if stabilization is Stabilization.LLF:
        psi_u = psi_u + llf_dissipation(fld.u_local, alpha)
    elif stabilization is Stabilization.JUMP:
        psi_u = psi_u + jump_stabilization(fld, beta, theta)

    if blending is Blending.PROC1:
        psi_u = blend_procedure1(psi_u)
    elif blending is Blending.PROC2:
        psi_u = blend_procedure1(psi_u)
        phi_rho, phi_e = blend_procedure2(phi_rho, phi_e, fld.rho, fld.e, alpha)

    return ElementResiduals(phi_rho, psi_u, phi_e, faces, alpha, beta)
