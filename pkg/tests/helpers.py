"""Field builders shared by the tests."""

from __future__ import annotations

import numpy as np

from staggered_rd.mesh import Mesh1D, StaggeredField, build_spaces, project_initial


def random_field(seed: int, n: int = 6, r: int = 1, periodic: bool = False, gamma: float = 1.4,
                 uniform: bool = False, kin_degree: int | None = None) -> StaggeredField:
    """Random positive Bezier coefficients on a (possibly non-uniform) mesh of [0, 1]."""
    rng = np.random.default_rng(seed)
    if uniform:
        nodes = np.linspace(0.0, 1.0, n + 1)
    else:
        w = rng.uniform(0.5, 1.5, n)
        nodes = np.concatenate([[0.0], np.cumsum(w) / w.sum()])
    mesh = Mesh1D(nodes, "periodic" if periodic else "transmissive")
    L = build_spaces(mesh, r, kin_degree)
    rho = rng.uniform(0.5, 2.0, (n, r + 1))
    e = rng.uniform(1.0, 3.0, (n, r + 1))
    u = rng.uniform(-1.0, 1.0, L.n_vel)
    return StaggeredField(L, rho, u, e, gamma)


def uniform_field(n: int = 10, r: int = 0, rho: float = 1.0, u: float = 0.0, p: float = 1.0,
                  gamma: float = 1.4, periodic: bool = False, a: float = 0.0, b: float = 1.0) -> StaggeredField:
    mesh = Mesh1D.uniform(a, b, n, "periodic" if periodic else "transmissive")

    def c(v):
        return lambda x: np.full_like(np.asarray(x, dtype=float), v)

    return project_initial(c(rho), c(u), c(p), build_spaces(mesh, r), gamma)


def contact_field(n: int = 20, r: int = 0) -> StaggeredField:
    """Stationary contact: u = 0, p = 1, density jump at x = 0.5."""
    mesh = Mesh1D.uniform(0.0, 1.0, n)
    return project_initial(
        lambda x: np.where(np.asarray(x) < 0.5, 1.0, 0.25),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        build_spaces(mesh, r),
    )
