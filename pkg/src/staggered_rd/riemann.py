"""Interface Riemann solvers: exact (Godunov), HLLC and centered.

Each solver works on arrays of face states (one entry per face) and also has a
scalar entry point taking :class:`~staggered_rd.eos.PrimitiveState` objects.
Besides the numerical flux, every solver returns the interface pressure used
by the velocity residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .eos import PrimitiveState, flux_from_primitive
from .errors import ConvergenceError, StateError, VacuumError

PRESSURE_RTOL = 1e-12
MAX_ITERATIONS = 100


class FluxChoice(str, Enum):
    CENTERED = "centered"
    EXACT = "exact"
    HLLC = "hllc"


@dataclass(frozen=True)
class InterfaceSolution:
    p_star: float | np.ndarray
    u_star: float | np.ndarray
    flux: np.ndarray
    s_left: float | np.ndarray | None = None
    s_right: float | np.ndarray | None = None


def _validate(rho, p):
    if np.any(~np.isfinite(rho)) or np.any(~np.isfinite(p)) or np.any(rho <= 0) or np.any(p <= 0):
        raise StateError("Riemann solver needs positive finite density and pressure")


# -- exact solver -----------------------------------------------------------


def _pressure_function(p, rho, pk, c, gamma):
    """Toro's f_K(p) and its derivative for one side."""
    a = 2.0 / ((gamma + 1.0) * rho)
    b = (gamma - 1.0) / (gamma + 1.0) * pk
    shock = p > pk
    ps = np.where(shock, p, pk + 1.0)  # keep the unused branch finite
    q = np.sqrt(a / (ps + b))
    f_shock = (ps - pk) * q
    df_shock = q * (1.0 - 0.5 * (ps - pk) / (ps + b))
    pr = np.where(shock, pk, np.maximum(p, 0.0))
    z = (gamma - 1.0) / (2.0 * gamma)
    ratio = pr / pk
    f_rare = 2.0 * c / (gamma - 1.0) * (ratio**z - 1.0)
    with np.errstate(divide="ignore"):
        df_rare = np.where(pr > 0, ratio ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * c), np.inf)
    return np.where(shock, f_shock, f_rare), np.where(shock, df_shock, df_rare)


def star_state(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma, *, rtol=PRESSURE_RTOL, max_iter=MAX_ITERATIONS):
    """Star pressure and velocity for arrays of Riemann problems.

    Safeguarded Newton iteration with a bisection fallback, started from the
    two-rarefaction estimate. Vacuum-generating entries get ``p_star = 0`` and
    a NaN star velocity; the returned ``vacuum`` mask flags them.
    """
    rho_l, u_l, p_l, rho_r, u_r, p_r = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (rho_l, u_l, p_l, rho_r, u_r, p_r))
    )
    _validate(rho_l, p_l)
    _validate(rho_r, p_r)
    c_l = np.sqrt(gamma * p_l / rho_l)
    c_r = np.sqrt(gamma * p_r / rho_r)
    du = u_r - u_l
    vacuum = 2.0 * (c_l + c_r) / (gamma - 1.0) <= du

    def total(p):
        fl, dfl = _pressure_function(p, rho_l, p_l, c_l, gamma)
        fr, dfr = _pressure_function(p, rho_r, p_r, c_r, gamma)
        return fl + fr + du, dfl + dfr

    z = (gamma - 1.0) / (2.0 * gamma)
    num = np.maximum(c_l + c_r - 0.5 * (gamma - 1.0) * du, 0.0)
    p = (num / (c_l / p_l**z + c_r / p_r**z)) ** (1.0 / z)
    p = np.where(vacuum | (p <= 0), 0.5 * (p_l + p_r), p)

    lo = np.zeros_like(p)
    hi = np.maximum(np.maximum(p_l, p_r), p)
    for _ in range(200):
        f_hi, _ = total(hi)
        grow = (f_hi < 0) & ~vacuum
        if not grow.any():
            break
        hi = np.where(grow, 2.0 * hi, hi)

    done = vacuum.copy()
    for _ in range(max_iter):
        f, df = total(p)
        lo = np.where(f < 0, p, lo)
        hi = np.where(f > 0, p, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            p_new = p - f / df
        exact = f == 0
        bad = ~exact & (~np.isfinite(p_new) | (p_new <= lo) | (p_new >= hi))
        p_new = np.where(bad, 0.5 * (lo + hi), p_new)
        p_new = np.where(exact, p, p_new)
        converged = (np.abs(p_new - p) <= rtol * 0.5 * (p_new + p)) | exact
        p = np.where(done, p, p_new)
        done |= converged
        if done.all():
            break
    else:
        raise ConvergenceError(f"star pressure did not converge in {max_iter} iterations")

    fl, _ = _pressure_function(p, rho_l, p_l, c_l, gamma)
    fr, _ = _pressure_function(p, rho_r, p_r, c_r, gamma)
    u = 0.5 * (u_l + u_r) + 0.5 * (fr - fl)
    p = np.where(vacuum, 0.0, p)
    u = np.where(vacuum, np.nan, u)
    return p, u, vacuum


def sample_exact(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma, xi, p_star=None, u_star=None):
    """Self-similar exact solution (rho, u, p) at ``xi = x / t``.

    Inside a vacuum region density and pressure are zero and the velocity is
    NaN. Arguments broadcast.
    """
    rho_l, u_l, p_l, rho_r, u_r, p_r, xi = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (rho_l, u_l, p_l, rho_r, u_r, p_r, xi))
    )
    if p_star is None:
        p_star, u_star, vacuum = star_state(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma)
    else:
        p_star, u_star = np.broadcast_to(p_star, xi.shape), np.broadcast_to(u_star, xi.shape)
        vacuum = p_star <= 0
    g = gamma
    g1 = (g - 1.0) / (g + 1.0)
    c_l = np.sqrt(g * p_l / rho_l)
    c_r = np.sqrt(g * p_r / rho_r)

    # Left-going wave and the left star state.
    with np.errstate(invalid="ignore", divide="ignore"):
        ps = np.where(vacuum, p_l, p_star)
        us = np.where(vacuum, u_l + 2.0 * c_l / (g - 1.0), u_star)
        ratio_l = ps / p_l
        rho_sl_shock = rho_l * (ratio_l + g1) / (g1 * ratio_l + 1.0)
        rho_sl_rare = rho_l * ratio_l ** (1.0 / g)
        s_l = u_l - c_l * np.sqrt((g + 1.0) / (2.0 * g) * ratio_l + (g - 1.0) / (2.0 * g))
        c_sl = c_l * ratio_l ** ((g - 1.0) / (2.0 * g))
        head_l = u_l - c_l
        tail_l = np.where(vacuum, u_l + 2.0 * c_l / (g - 1.0), us - c_sl)
        fan_c_l = 2.0 / (g + 1.0) * (c_l + 0.5 * (g - 1.0) * (u_l - xi))
        fan_u_l = 2.0 / (g + 1.0) * (c_l + 0.5 * (g - 1.0) * u_l + xi)
        fan_rho_l = rho_l * np.maximum(fan_c_l / c_l, 0.0) ** (2.0 / (g - 1.0))
        fan_p_l = p_l * np.maximum(fan_c_l / c_l, 0.0) ** (2.0 * g / (g - 1.0))

        ratio_r = np.where(vacuum, 1.0, p_star / p_r)
        rho_sr_shock = rho_r * (ratio_r + g1) / (g1 * ratio_r + 1.0)
        rho_sr_rare = rho_r * ratio_r ** (1.0 / g)
        s_r = u_r + c_r * np.sqrt((g + 1.0) / (2.0 * g) * ratio_r + (g - 1.0) / (2.0 * g))
        c_sr = c_r * ratio_r ** ((g - 1.0) / (2.0 * g))
        head_r = u_r + c_r
        us_r = np.where(vacuum, u_r - 2.0 * c_r / (g - 1.0), u_star)
        tail_r = np.where(vacuum, u_r - 2.0 * c_r / (g - 1.0), us_r + c_sr)
        fan_c_r = 2.0 / (g + 1.0) * (c_r - 0.5 * (g - 1.0) * (u_r - xi))
        fan_u_r = 2.0 / (g + 1.0) * (-c_r + 0.5 * (g - 1.0) * u_r + xi)
        fan_rho_r = rho_r * np.maximum(fan_c_r / c_r, 0.0) ** (2.0 / (g - 1.0))
        fan_p_r = p_r * np.maximum(fan_c_r / c_r, 0.0) ** (2.0 * g / (g - 1.0))

    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    p = np.empty_like(xi)

    left_shock = ~vacuum & (p_star > p_l)
    right_shock = ~vacuum & (p_star > p_r)
    contact = np.where(vacuum, np.nan, u_star)
    on_left = np.where(vacuum, xi <= tail_l, xi <= contact)

    # Left of the contact.
    ls = on_left & left_shock
    lr = on_left & ~left_shock
    m = ls & (xi <= s_l)
    rho[m], u[m], p[m] = rho_l[m], u_l[m], p_l[m]
    m = ls & (xi > s_l)
    rho[m], u[m], p[m] = rho_sl_shock[m], us[m], ps[m]
    m = lr & (xi <= head_l)
    rho[m], u[m], p[m] = rho_l[m], u_l[m], p_l[m]
    m = lr & (xi > head_l) & (xi <= tail_l)
    rho[m], u[m], p[m] = fan_rho_l[m], fan_u_l[m], fan_p_l[m]
    m = lr & (xi > tail_l)
    rho[m], u[m], p[m] = rho_sl_rare[m], us[m], ps[m]

    # Right of the contact (or of the left vacuum front).
    on_right = ~on_left
    if vacuum.any():
        vac = on_right & vacuum & (xi < tail_r)
        rho[vac], u[vac], p[vac] = 0.0, np.nan, 0.0
        on_right = on_right & ~vac
    rs = on_right & right_shock
    rr = on_right & ~right_shock
    m = rs & (xi >= s_r)
    rho[m], u[m], p[m] = rho_r[m], u_r[m], p_r[m]
    m = rs & (xi < s_r)
    rho[m], u[m], p[m] = rho_sr_shock[m], us_r[m], p_star[m]
    m = rr & (xi >= head_r)
    rho[m], u[m], p[m] = rho_r[m], u_r[m], p_r[m]
    m = rr & (xi < head_r) & (xi >= tail_r)
    rho[m], u[m], p[m] = fan_rho_r[m], fan_u_r[m], fan_p_r[m]
    m = rr & (xi < tail_r)
    rho[m], u[m], p[m] = rho_sr_rare[m], us_r[m], np.where(vacuum, 0.0, p_star)[m]
    return rho, u, p


def exact_face_flux(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma):
    """Godunov flux and star pressure/velocity for arrays of faces."""
    p_star, u_star, vacuum = star_state(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma)
    rho, u, p = sample_exact(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma, 0.0, p_star, u_star)
    u = np.where(rho > 0, u, 0.0)
    return flux_from_primitive(rho, u, p, gamma), p_star, np.where(vacuum, 0.0, u_star)


@dataclass(frozen=True)
class ExactRiemannSolution(InterfaceSolution):
    left: PrimitiveState | None = None
    right: PrimitiveState | None = None
    gamma: float = 1.4

    def sample(self, xi):
        """Primitive (rho, u, p) at xi = x/t; arrays in, arrays out."""
        l, r = self.left, self.right
        rho, u, p = sample_exact(l.rho, l.u, l.p, r.rho, r.u, r.p, self.gamma, xi, self.p_star, self.u_star)
        if np.ndim(xi) == 0:
            return PrimitiveState(float(rho), float(u), float(p))
        return rho, u, p


def exact_riemann(left: PrimitiveState, right: PrimitiveState, gamma: float) -> ExactRiemannSolution:
    """Exact solution of the Riemann problem between two primitive states."""
    p_star, u_star, vacuum = star_state(left.rho, left.u, left.p, right.rho, right.u, right.p, gamma)
    if bool(vacuum):
        raise VacuumError(f"data {left} / {right} generate vacuum")
    p_star, u_star = float(p_star), float(u_star)
    rho, u, p = sample_exact(left.rho, left.u, left.p, right.rho, right.u, right.p, gamma, 0.0, p_star, u_star)
    return ExactRiemannSolution(
        p_star=p_star,
        u_star=u_star,
        flux=flux_from_primitive(float(rho), float(u), float(p), gamma),
        left=left,
        right=right,
        gamma=gamma,
    )


# -- HLLC -------------------------------------------------------------------


def hllc_face_flux(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma):
    """HLLC flux with Davis wave-speed bounds; returns (flux, p_star, s_m, s_l, s_r)."""
    rho_l, u_l, p_l, rho_r, u_r, p_r = (np.asarray(v, dtype=float) for v in (rho_l, u_l, p_l, rho_r, u_r, p_r))
    _validate(rho_l, p_l)
    _validate(rho_r, p_r)
    c_l = np.sqrt(gamma * p_l / rho_l)
    c_r = np.sqrt(gamma * p_r / rho_r)
    s_l = np.minimum(u_l - c_l, u_r - c_r)
    s_r = np.maximum(u_l + c_l, u_r + c_r)
    ml = rho_l * (s_l - u_l)
    mr = rho_r * (s_r - u_r)
    s_m = (p_r - p_l + ml * u_l - mr * u_r) / (ml - mr)
    p_star = p_l + ml * (s_m - u_l)

    E_l = p_l / (gamma - 1.0) + 0.5 * rho_l * u_l * u_l
    E_r = p_r / (gamma - 1.0) + 0.5 * rho_r * u_r * u_r
    U_l = np.stack([rho_l, rho_l * u_l, E_l])
    U_r = np.stack([rho_r, rho_r * u_r, E_r])
    F_l = flux_from_primitive(rho_l, u_l, p_l, gamma)
    F_r = flux_from_primitive(rho_r, u_r, p_r, gamma)

    def star(rho, u, p, E, s):
        fac = rho * (s - u) / (s - s_m)
        return np.stack([fac, fac * s_m, fac * (E / rho + (s_m - u) * (s_m + p / (rho * (s - u))))])

    with np.errstate(divide="ignore", invalid="ignore"):
        Us_l = star(rho_l, u_l, p_l, E_l, s_l)
        Us_r = star(rho_r, u_r, p_r, E_r, s_r)
    flux = np.where(
        0.0 <= s_l,
        F_l,
        np.where(
            0.0 <= s_m,
            F_l + s_l * (Us_l - U_l),
            np.where(0.0 <= s_r, F_r + s_r * (Us_r - U_r), F_r),
        ),
    )
    return flux, p_star, s_m, s_l, s_r


def hllc_flux(left: PrimitiveState, right: PrimitiveState, gamma: float) -> InterfaceSolution:
    flux, p_star, s_m, s_l, s_r = hllc_face_flux(left.rho, left.u, left.p, right.rho, right.u, right.p, gamma)
    return InterfaceSolution(float(p_star), float(s_m), flux, float(s_l), float(s_r))


# -- centered ---------------------------------------------------------------


def centered_face_flux(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma):
    f = 0.5 * (flux_from_primitive(rho_l, u_l, p_l, gamma) + flux_from_primitive(rho_r, u_r, p_r, gamma))
    return f, 0.5 * (np.asarray(p_l, float) + p_r), 0.5 * (np.asarray(u_l, float) + u_r)


def centered_flux(left: PrimitiveState, right: PrimitiveState, gamma: float) -> np.ndarray:
    return centered_face_flux(left.rho, left.u, left.p, right.rho, right.u, right.p, gamma)[0]


# -- dispatch ---------------------------------------------------------------


def face_flux(choice, rho_l, u_l, p_l, rho_r, u_r, p_r, gamma):
    """Numerical flux (shape (3, nfaces)) and interface pressure for the chosen solver."""
    choice = FluxChoice(choice)
    if choice is FluxChoice.HLLC:
        flux, p_star, *_ = hllc_face_flux(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma)
    elif choice is FluxChoice.EXACT:
        flux, p_star, _ = exact_face_flux(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma)
    else:
        _validate(np.asarray(rho_l), np.asarray(p_l))
        _validate(np.asarray(rho_r), np.asarray(p_r))
        flux, p_star, _ = centered_face_flux(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma)
    return flux, p_star


def interface_pressure(left: PrimitiveState, right: PrimitiveState, gamma: float, choice) -> float:
    _, p_star = face_flux(choice, left.rho, left.u, left.p, right.rho, right.u, right.p, gamma)
    return float(p_star)
