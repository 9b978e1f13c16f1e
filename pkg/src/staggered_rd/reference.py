"""Benchmark cases and their exact solutions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .eos import PrimitiveState
from .errors import ConvergenceError
from .mesh import Boundary, Mesh1D, StaggeredField, build_spaces, eval_field, project_initial
from .riemann import sample_exact, star_state

N_SAMPLES = 1000


@dataclass(frozen=True)
class BenchmarkCase:
    name: str
    domain: tuple[float, float]
    t_final: float
    cfl: float
    gamma: float
    boundary: Boundary
    reference: str  # "riemann" | "isentropic" | "none"
    left: PrimitiveState | None = None
    right: PrimitiveState | None = None
    x0: float | None = None
    rho0: Callable | None = None
    u0: Callable | None = None
    p0: Callable | None = None

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("final time must be positive")
        if self.reference == "riemann" and (self.left is None or self.right is None or self.x0 is None):
            raise ValueError("Riemann case needs left/right states and x0")

    def initial_functions(self):
        if self.rho0 is not None:
            return self.rho0, self.u0, self.p0
        left, right, x0 = self.left, self.right, self.x0

        def piecewise(a, b):
            # the average at the interface keeps symmetric data symmetric
            return lambda x: np.where(x < x0, a, np.where(x > x0, b, 0.5 * (a + b)))

        return piecewise(left.rho, right.rho), piecewise(left.u, right.u), piecewise(left.p, right.p)

    def mesh(self, n: int) -> Mesh1D:
        return Mesh1D.uniform(self.domain[0], self.domain[1], n, self.boundary)

    def initial_field(self, n: int, r: int, kin_degree: int | None = None) -> StaggeredField:
        layout = build_spaces(self.mesh(n), r, kin_degree)
        return project_initial(*self.initial_functions(), layout, self.gamma)

    def exact(self, x, t):
        """Exact primitive (rho, u, p) arrays at points ``x`` and time ``t``."""
        if self.reference == "riemann":
            return sample_riemann(self, x, t)
        if self.reference == "isentropic":
            rho, u = isentropic_exact(x, t, self.rho0, self.gamma, period=self.domain[1] - self.domain[0])
            return rho, u, rho**self.gamma
        raise ValueError(f"case {self.name!r} has no exact solution")


def _smooth_rho0(x):
    return 1.0 + 0.9 * np.sin(2.0 * np.pi * np.asarray(x, dtype=float))


def _riemann_case(name, left, right, x0, t_final, cfl):
    return BenchmarkCase(
        name=name,
        domain=(0.0, 1.0),
        t_final=t_final,
        cfl=cfl,
        gamma=1.4,
        boundary=Boundary.TRANSMISSIVE,
        reference="riemann",
        left=PrimitiveState(*left),
        right=PrimitiveState(*right),
        x0=x0,
    )


def builtin_cases() -> dict[str, BenchmarkCase]:
    return {
        "sod": _riemann_case("sod", (1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 0.5, 0.16, 0.4),
        "strong": _riemann_case("strong", (1.0, 0.0, 1000.0), (1.0, 0.0, 0.01), 0.5, 0.012, 0.4),
        "one23": _riemann_case("one23", (1.0, -2.0, 0.4), (1.0, 2.0, 0.4), 0.5, 0.15, 0.4),
        "severe": _riemann_case(
            "severe", (5.99924, 19.5975, 460.894), (5.992420, -6.19633, 46.0950), 0.8, 0.012, 0.1
        ),
        "smooth": BenchmarkCase(
            name="smooth",
            domain=(-1.0, 1.0),
            t_final=0.05,
            cfl=0.4,
            gamma=3.0,
            boundary=Boundary.PERIODIC,
            reference="isentropic",
            rho0=_smooth_rho0,
            u0=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            p0=lambda x: _smooth_rho0(x) ** 3.0,
        ),
    }


def get_case(name: str) -> BenchmarkCase:
    cases = builtin_cases()
    if name == "123":
        name = "one23"
    try:
        return cases[name]
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {sorted(cases)}") from None


def sample_riemann(case: BenchmarkCase, x, t):
    """Exact self-similar solution of a two-state case at time ``t > 0``.

    Points inside a vacuum region get zero density and pressure and NaN
    velocity.
    """
    if not t > 0:
        raise ValueError("sample_riemann needs t > 0")
    l, r = case.left, case.right
    x = np.asarray(x, dtype=float)
    xi = (x - case.x0) / t
    p_star, u_star, _ = star_state(l.rho, l.u, l.p, r.rho, r.u, r.p, case.gamma)
    return sample_exact(l.rho, l.u, l.p, r.rho, r.u, r.p, case.gamma, xi, p_star, u_star)


def isentropic_exact(x, t, rho0=_smooth_rho0, gamma=3.0, period=2.0, tol=1e-13, max_iter=100):
    """Characteristic solution of the gamma = 3 isentropic problem.

    Solves x + sqrt(3) rho0(x1) t - x1 = 0 and x - sqrt(3) rho0(x2) t - x2 = 0
    with damped Newton, then rho = (rho0(x1) + rho0(x2)) / 2 and
    u = sqrt(3) (rho - rho0(x1)).  Valid before characteristics cross.
    """
    if gamma != 3.0:
        raise ValueError("the closed-form characteristic solution needs gamma = 3")
    x = np.asarray(x, dtype=float)
    s3 = np.sqrt(3.0)
    eps = 1e-7

    def solve(sign):
        # root of g(y) = x + sign*sqrt(3) rho0(y) t - y
        y = x + sign * s3 * rho0(x) * t
        for _ in range(max_iter):
            g = x + sign * s3 * rho0(y) * t - y
            drho = (rho0(y + eps) - rho0(y - eps)) / (2 * eps)
            dg = sign * s3 * drho * t - 1.0
            step = g / dg
            # damping keeps the iterate within one period of the start
            step = np.clip(step, -0.25 * period, 0.25 * period)
            y = y - step
            if np.all(np.abs(g) < tol):
                return y
        g = x + sign * s3 * rho0(y) * t - y
        if np.all(np.abs(g) < 10 * tol):
            return y
        raise ConvergenceError("characteristic foot did not converge (after shock formation?)")

    x1 = solve(+1.0)
    x2 = solve(-1.0)
    r1, r2 = rho0(x1), rho0(x2)
    rho = 0.5 * (r1 + r2)
    return rho, s3 * (rho - r1)


def isentropic_feet(x, t, rho0=_smooth_rho0):
    """The characteristic feet (x1, x2) used by :func:`isentropic_exact` (for checks)."""
    x = np.asarray(x, dtype=float)
    s3 = np.sqrt(3.0)
    rho, u = isentropic_exact(x, t, rho0)
    # rho0(x1) = rho - u / sqrt(3), rho0(x2) = rho + u / sqrt(3)
    return x + s3 * (rho - u / s3) * t, x - s3 * (rho + u / s3) * t


def sample_points(domain, n_samples: int = N_SAMPLES) -> np.ndarray:
    """Cell-midpoint sample locations used for profiles and L1 norms."""
    a, b = domain
    return a + (np.arange(n_samples) + 0.5) * (b - a) / n_samples


def l1_error(fld: StaggeredField, reference: Callable, n_samples: int = N_SAMPLES) -> dict[str, float]:
    """Composite-midpoint L1 error of rho, u and p against ``reference(x) -> (rho, u, p)``."""
    mesh = fld.layout.mesh
    a, b = mesh.nodes[0], mesh.nodes[-1]
    x = sample_points((a, b), n_samples)
    dx = (b - a) / n_samples
    ref = reference(x)
    out = {}
    for name, exact in zip(("rho", "u", "p"), ref):
        num = eval_field(fld, name, x)
        out[name] = float(np.nansum(np.abs(num - exact)) * dx)
    return out


@dataclass(frozen=True)
class WaveStructure:
    """Exact wave pattern of a two-state case: star values and wave speeds.

    ``left_shock`` / ``right_shock`` are shock speeds, or None for a
    rarefaction on that side.
    """

    p_star: float
    u_star: float
    rho_star_left: float
    rho_star_right: float
    left_shock: float | None
    right_shock: float | None

    def positions(self, x0: float, t: float) -> dict[str, float]:
        out = {"contact": x0 + self.u_star * t}
        if self.left_shock is not None:
            out["left_shock"] = x0 + self.left_shock * t
        if self.right_shock is not None:
            out["right_shock"] = x0 + self.right_shock * t
        return out


def wave_structure(case: BenchmarkCase) -> WaveStructure:
    l, r, g = case.left, case.right, case.gamma
    p, u, vac = star_state(l.rho, l.u, l.p, r.rho, r.u, r.p, g)
    if bool(vac):
        raise ValueError(f"case {case.name!r} generates vacuum")
    p, u = float(p), float(u)
    gm = (g - 1.0) / (g + 1.0)

    def side(st, sign):
        c = np.sqrt(g * st.p / st.rho)
        ratio = p / st.p
        if ratio > 1.0:
            rho = st.rho * (ratio + gm) / (gm * ratio + 1.0)
            speed = st.u + sign * c * np.sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g))
            return float(rho), float(speed)
        return float(st.rho * ratio ** (1.0 / g)), None

    rho_l, s_l = side(l, -1.0)
    rho_r, s_r = side(r, +1.0)
    return WaveStructure(p, u, rho_l, rho_r, s_l, s_r)
