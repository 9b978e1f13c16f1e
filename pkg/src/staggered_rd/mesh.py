"""1D mesh and the staggered K(r+1)T(r) layout.

Velocity is globally continuous with Bezier degree ``r + 1``; density and
internal energy are discontinuous with degree ``r``.  Bezier coefficients are
stored: ``rho[j, i]`` is coefficient ``i`` in element ``j``, ``u[k]`` is the
coefficient of global kinematic DOF ``k``.  The energy unknown ``e`` is the
internal energy per unit volume, so ``p = (gamma - 1) e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property

import numpy as np

from .basis import DEFAULT_RULE_POINTS, basis_matrix, derivative_matrix, gauss_rule
from .errors import StateError


class Boundary(str, Enum):
    TRANSMISSIVE = "transmissive"
    PERIODIC = "periodic"
    REFLECTIVE = "reflective"


@dataclass(frozen=True)
class Mesh1D:
    nodes: np.ndarray
    boundary: Boundary = Boundary.TRANSMISSIVE

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise ValueError("mesh needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @classmethod
    def uniform(cls, a: float, b: float, n: int, boundary="transmissive") -> "Mesh1D":
        return cls(np.linspace(a, b, n + 1), Boundary(boundary))

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @cached_property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def length(self) -> float:
        return float(self.nodes[-1] - self.nodes[0])

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    def locate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Element index and reference coordinate of each point (right-continuous)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a, b = self.nodes[0], self.nodes[-1]
        tol = 1e-12 * (b - a)
        if np.any(x < a - tol) or np.any(x > b + tol):
            raise ValueError("point outside the mesh")
        j = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, self.n_elements - 1)
        lam = np.clip((x - self.nodes[j]) / self.h[j], 0.0, 1.0)
        return j, lam


@dataclass(frozen=True, eq=False)
class SpaceLayout:
    """DOF bookkeeping and quadrature tables for one mesh and degree ``r``.

    ``kin_degree`` overrides the velocity degree (default ``r + 1``); equal
    degrees give the K(r)T(r) pairings used in the stability experiment.
    """

    mesh: Mesh1D
    r: int
    quad_points: int = DEFAULT_RULE_POINTS
    kin_degree: int | None = None

    def __post_init__(self):
        if self.r not in (0, 1):
            raise ValueError(f"thermodynamic degree must be 0 or 1, got {self.r}")
        if self.kin_degree is not None and self.kin_degree not in (1, 2):
            raise ValueError(f"velocity degree must be 1 or 2, got {self.kin_degree}")

    @property
    def n(self) -> int:
        return self.mesh.n_elements

    @property
    def vel_degree(self) -> int:
        return self.r + 1 if self.kin_degree is None else self.kin_degree

    @property
    def n_vel_local(self) -> int:
        return self.vel_degree + 1

    @property
    def n_thermo_local(self) -> int:
        return self.r + 1

    @property
    def n_vel(self) -> int:
        q = self.vel_degree
        return self.n * q if self.mesh.periodic else self.n * q + 1

    @property
    def n_thermo(self) -> int:
        return self.n * (self.r + 1)

    @cached_property
    def vel_dofs(self) -> np.ndarray:
        """Global kinematic DOF index of each (element, local DOF), shape (n, r+2)."""
        q = self.vel_degree
        idx = np.arange(self.n)[:, None] * q + np.arange(q + 1)[None, :]
        if self.mesh.periodic:
            idx %= self.n_vel
        idx.setflags(write=False)
        return idx

    @cached_property
    def vel_elements(self) -> list[tuple[int, ...]]:
        """Elements sharing each kinematic DOF (one or two)."""
        owners: list[list[int]] = [[] for _ in range(self.n_vel)]
        for j, row in enumerate(self.vel_dofs):
            for k in row:
                if j not in owners[k]:
                    owners[k].append(j)
        return [tuple(o) for o in owners]

    @cached_property
    def vel_mass(self) -> np.ndarray:
        """Assembled lumped masses |C_sigma| of the kinematic DOFs."""
        local = self.mesh.h[:, None] / (self.vel_degree + 1) * np.ones(self.n_vel_local)
        return self.assemble(local)

    @cached_property
    def thermo_mass(self) -> np.ndarray:
        return self.mesh.h[:, None] / (self.r + 1) * np.ones(self.n_thermo_local)

    def assemble(self, local: np.ndarray) -> np.ndarray:
        """Sum per-element kinematic contributions (n, r+2) into global DOFs."""
        out = np.zeros(self.n_vel)
        np.add.at(out, self.vel_dofs, local)
        return out

    # quadrature tables on the reference element
    @cached_property
    def rule(self):
        return gauss_rule(self.quad_points)

    @cached_property
    def Bv(self) -> np.ndarray:
        return basis_matrix(self.vel_degree, self.rule.points)

    @cached_property
    def dBv(self) -> np.ndarray:
        return derivative_matrix(self.vel_degree, self.rule.points)

    @cached_property
    def Bt(self) -> np.ndarray:
        return basis_matrix(self.r, self.rule.points)

    @cached_property
    def dBt(self) -> np.ndarray:
        return derivative_matrix(self.r, self.rule.points)

    @cached_property
    def quad_x(self) -> np.ndarray:
        """Physical quadrature points, shape (n, nq)."""
        return self.mesh.nodes[:-1, None] + self.mesh.h[:, None] * self.rule.points[None, :]

    @cached_property
    def quad_w(self) -> np.ndarray:
        """Physical quadrature weights, shape (n, nq)."""
        return self.mesh.h[:, None] * self.rule.weights[None, :]

    def integrate_vel(self, values: np.ndarray) -> np.ndarray:
        """Per element, int_K f phi_sigma dx for f sampled at quadrature points; (n, r+2)."""
        return (values * self.quad_w) @ self.Bv

    def integrate_thermo(self, values: np.ndarray) -> np.ndarray:
        return (values * self.quad_w) @ self.Bt

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.sum(values * self.quad_w, axis=1)


def build_spaces(mesh: Mesh1D, r: int, kin_degree: int | None = None) -> SpaceLayout:
    if mesh.boundary is Boundary.REFLECTIVE:
        raise NotImplementedError("reflective boundaries are not implemented")
    return SpaceLayout(mesh, r, kin_degree=kin_degree)


@dataclass(eq=False)
class StaggeredField:
    layout: SpaceLayout
    rho: np.ndarray
    u: np.ndarray
    e: np.ndarray
    gamma: float = 1.4
    extra: dict = field(default_factory=dict, repr=False)

    def copy(self) -> "StaggeredField":
        return replace(self, rho=self.rho.copy(), u=self.u.copy(), e=self.e.copy(), extra={})

    @property
    def p(self) -> np.ndarray:
        return (self.gamma - 1.0) * self.e

    @property
    def u_local(self) -> np.ndarray:
        """Velocity coefficients gathered per element, shape (n, r+2)."""
        return self.u[self.layout.vel_dofs]

    def at_quadrature(self):
        """rho, u, e, du/dx, de/dx at quadrature points, each (n, nq)."""
        L = self.layout
        h = L.mesh.h[:, None]
        ul = self.u_local
        return (
            self.rho @ L.Bt.T,
            ul @ L.Bv.T,
            self.e @ L.Bt.T,
            ul @ L.dBv.T / h,
            self.e @ L.dBt.T / h,
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.e)))


def eval_field(fld: StaggeredField, which: str, x, side: str = "right"):
    """Evaluate ``rho``, ``u``, ``e`` (volumetric) or ``p`` at ``x``.

    ``side`` picks the one-sided limit of the discontinuous thermodynamic
    fields at element interfaces.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    L = fld.layout
    mesh = L.mesh
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    j, lam = mesh.locate(xa)
    if side == "left":
        at_node = (lam == 0.0) & (j > 0)
        j = np.where(at_node, j - 1, j)
        lam = np.where(at_node, 1.0, lam)
    if which == "u":
        coeffs = fld.u_local[j]
        deg = L.vel_degree
    elif which in ("rho", "e", "p"):
        src = {"rho": fld.rho, "e": fld.e, "p": fld.p}[which]
        coeffs = src[j]
        deg = L.r
    else:
        raise ValueError(f"unknown field {which!r}")
    vals = np.sum(coeffs * basis_matrix(deg, lam), axis=1)
    return float(vals[0]) if np.ndim(x) == 0 else vals


def _interp_coefficients(degree: int, points: np.ndarray) -> np.ndarray:
    """Matrix mapping point values at reference ``points`` to Bezier coefficients."""
    return np.linalg.inv(basis_matrix(degree, points))


def thermo_points(r: int) -> np.ndarray:
    """Interior interpolation points of the discontinuous space (avoids interface ambiguity)."""
    return (np.arange(r + 1) + 0.5) / (r + 1)


def vel_points(q: int) -> np.ndarray:
    return np.arange(q + 1) / q


def project_initial(rho0, u0, p0, layout: SpaceLayout, gamma: float = 1.4) -> StaggeredField:
    """Interpolate primitive initial data into Bezier coefficients."""
    mesh = layout.mesh
    x0, h = mesh.nodes[:-1, None], mesh.h[:, None]

    tp = thermo_points(layout.r)
    xt = x0 + h * tp[None, :]
    rho_pts = np.broadcast_to(np.asarray(rho0(xt), dtype=float), xt.shape)
    p_pts = np.broadcast_to(np.asarray(p0(xt), dtype=float), xt.shape)
    if np.any(rho_pts <= 0) or np.any(p_pts <= 0):
        raise StateError("initial density and pressure must be positive at every interpolation point")
    Mt = _interp_coefficients(layout.r, tp)
    rho = rho_pts @ Mt.T
    e = (p_pts / (gamma - 1.0)) @ Mt.T

    vp = vel_points(layout.vel_degree)
    xv = x0 + h * vp[None, :]
    u_pts = np.broadcast_to(np.asarray(u0(xv), dtype=float), xv.shape)
    u_loc = u_pts @ _interp_coefficients(layout.vel_degree, vp).T
    u = np.empty(layout.n_vel)
    # shared vertices get the same value from both sides: endpoint coefficients are point values
    u[layout.vel_dofs] = u_loc
    return StaggeredField(layout, np.ascontiguousarray(rho), u, np.ascontiguousarray(e), gamma)
