import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from staggered_rd.errors import StateError
from staggered_rd.mesh import Mesh1D, build_spaces, eval_field, project_initial
from staggered_rd.reference import get_case


def const(c):
    return lambda x: np.full_like(np.asarray(x, dtype=float), c)


@pytest.mark.parametrize("n,r,boundary,n_vel,n_thermo", [
    (10, 0, "transmissive", 11, 10),
    (10, 1, "transmissive", 21, 20),
    (4, 0, "periodic", 4, 4),
    (4, 1, "periodic", 8, 8),
])
def test_dof_counts(n, r, boundary, n_vel, n_thermo):
    L = build_spaces(Mesh1D.uniform(0.0, 1.0, n, boundary), r)
    assert L.n_vel == n_vel
    assert L.n_thermo == n_thermo
    assert L.vel_mass.shape == (n_vel,)
    assert L.vel_mass.sum() == pytest.approx(1.0)
    assert L.thermo_mass.sum() == pytest.approx(1.0)


def test_shared_vertices():
    L = build_spaces(Mesh1D.uniform(0.0, 1.0, 3, "periodic"), 1)
    assert L.vel_dofs[-1, -1] == L.vel_dofs[0, 0] == 0
    assert L.vel_elements[0] == (0, 2)
    assert L.vel_elements[1] == (0,)


def test_mesh_validation():
    with pytest.raises(ValueError):
        Mesh1D(np.array([0.0, 0.5, 0.4]))
    with pytest.raises(ValueError):
        build_spaces(Mesh1D.uniform(0, 1, 4), 2)
    with pytest.raises(NotImplementedError):
        build_spaces(Mesh1D.uniform(0, 1, 4, "reflective"), 0)


@pytest.mark.parametrize("r", [0, 1])
def test_constants_project_and_evaluate_exactly(r):
    L = build_spaces(Mesh1D.uniform(-1.0, 2.0, 7), r)
    fld = project_initial(const(0.7), const(-0.3), const(2.0), L, 1.4)
    assert np.allclose(fld.rho, 0.7) and np.allclose(fld.u, -0.3) and np.allclose(fld.e, 5.0)
    x = np.linspace(-1.0, 2.0, 31)
    np.testing.assert_allclose(eval_field(fld, "rho", x), 0.7, rtol=1e-14)
    np.testing.assert_allclose(eval_field(fld, "u", x), -0.3, rtol=1e-14)
    np.testing.assert_allclose(eval_field(fld, "p", x), 2.0, rtol=1e-14)


def test_sod_projection_and_one_sided_values():
    case = get_case("sod")
    fld = case.initial_field(100, 0)
    assert np.all(fld.rho[:50] == 1.0) and np.all(fld.rho[50:] == 0.125)
    assert eval_field(fld, "rho", 0.5, side="left") == 1.0
    assert eval_field(fld, "rho", 0.5, side="right") == 0.125


@pytest.mark.parametrize("q", [1, 2])
def test_linear_velocity_reproduced(q):
    L = build_spaces(Mesh1D.uniform(0.0, 1.0, 5), q - 1)
    fld = project_initial(const(1.0), lambda x: 3.0 * x - 1.0, const(1.0), L)
    mid = (L.mesh.nodes[:-1] + L.mesh.nodes[1:]) / 2
    np.testing.assert_allclose(eval_field(fld, "u", mid), 3.0 * mid - 1.0, rtol=1e-13)


def test_smooth_density_at_quarter():
    # x = 0.25 is an interior interpolation point of its element for r = 1, n = 50
    fld = get_case("smooth").initial_field(50, 1)
    assert eval_field(fld, "rho", 0.25) == pytest.approx(1.9, abs=1e-12)


def test_quadratics_are_reproduced_by_r1_thermo_and_q2_velocity():
    L = build_spaces(Mesh1D.uniform(0.0, 1.0, 4), 1)
    fld = project_initial(lambda x: 1.0 + x, lambda x: x * x, lambda x: 2.0 - x, L)
    x = np.linspace(0, 1, 17)
    np.testing.assert_allclose(eval_field(fld, "rho", x), 1.0 + x, rtol=1e-13)
    np.testing.assert_allclose(eval_field(fld, "u", x), x * x, atol=1e-14)


def test_nonpositive_initial_data_rejected():
    L = build_spaces(Mesh1D.uniform(0.0, 1.0, 4), 0)
    with pytest.raises(StateError):
        project_initial(const(-1.0), const(0.0), const(1.0), L)


def test_eval_field_errors():
    fld = get_case("sod").initial_field(10, 0)
    with pytest.raises(ValueError):
        eval_field(fld, "rho", 1.5)
    with pytest.raises(ValueError):
        eval_field(fld, "T", 0.5)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 12), r=st.integers(0, 1), seed=st.integers(0, 2**31))
def test_quadrature_integrates_layout_products_exactly(n, r, seed):
    rng = np.random.default_rng(seed)
    nodes = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0.02, 0.98, n - 1)]))
    if np.any(np.diff(nodes) < 1e-3):
        return
    L = build_spaces(Mesh1D(nodes), r)
    # int_K of each basis function equals its lumped mass
    ones = np.ones((n, L.rule.points.size))
    np.testing.assert_allclose(L.integrate_vel(ones), L.mesh.h[:, None] / (L.vel_degree + 1) * np.ones((1, L.n_vel_local)), rtol=1e-13)
    np.testing.assert_allclose(L.integrate_thermo(ones), L.thermo_mass, rtol=1e-13)
