import numpy as np
import pytest

from staggered_rd.errors import ConvergenceError
from staggered_rd.reference import (
    builtin_cases,
    get_case,
    isentropic_exact,
    isentropic_feet,
    l1_error,
    sample_points,
    sample_riemann,
    wave_structure,
)

import oracles
from helpers import uniform_field


def test_builtin_cases_table():
    cases = builtin_cases()
    assert set(cases) == {"sod", "strong", "one23", "severe", "smooth"}
    assert get_case("123") is not None and get_case("123").name == "one23"
    sev = get_case("severe")
    assert (sev.x0, sev.t_final, sev.cfl) == (0.8, 0.012, 0.1)
    sm = get_case("smooth")
    assert sm.domain == (-1.0, 1.0) and sm.gamma == 3.0 and sm.boundary.value == "periodic"
    with pytest.raises(ValueError):
        get_case("nope")


def test_sod_regions():
    case = get_case("sod")
    rho, u, p = sample_riemann(case, np.array([0.0, 0.5 + 0.5 * 0.92745 * 0.16, 0.999]), 0.16)
    assert (rho[0], u[0], p[0]) == pytest.approx((1.0, 0.0, 1.0))
    assert rho[1] == pytest.approx(0.42632, abs=1e-5)
    assert u[1] == pytest.approx(0.92745, abs=1e-5)
    assert p[1] == pytest.approx(0.30313, abs=1e-5)
    assert (rho[2], u[2], p[2]) == pytest.approx((0.125, 0.0, 0.1))
    with pytest.raises(ValueError):
        sample_riemann(case, np.array([0.5]), 0.0)


def test_123_symmetry():
    case = get_case("one23")
    x = np.array([0.5])
    for t in (0.01, 0.15):
        _, u, _ = sample_riemann(case, x, t)
        assert u[0] == pytest.approx(0.0, abs=1e-13)
    xs = np.linspace(0.0, 1.0, 101)
    rho, u, p = sample_riemann(case, xs, 0.15)
    np.testing.assert_allclose(rho, rho[::-1], rtol=1e-12)
    np.testing.assert_allclose(u, -u[::-1], atol=1e-12)


def test_wave_structure_textbook_values():
    sod = wave_structure(get_case("sod"))
    assert sod.p_star == pytest.approx(0.30313, abs=1e-5)
    assert sod.right_shock == pytest.approx(1.75216, abs=1e-5)
    assert sod.rho_star_right == pytest.approx(0.26557, abs=1e-5)
    assert sod.left_shock is None
    sev = wave_structure(get_case("severe"))
    assert sev.p_star == pytest.approx(1691.64, rel=1e-5)
    assert sev.u_star == pytest.approx(8.68975, rel=1e-5)
    assert sev.rho_star_left == pytest.approx(14.2823, rel=1e-5)
    assert sev.rho_star_right == pytest.approx(31.0426, rel=1e-5)
    pos = sev.positions(0.8, 0.012)
    assert pos["left_shock"] < pos["contact"] < pos["right_shock"]
    with pytest.raises(ValueError):
        from staggered_rd.eos import PrimitiveState
        from staggered_rd.reference import BenchmarkCase

        vac = BenchmarkCase("vac", (0.0, 1.0), 0.1, 0.4, 1.4, "transmissive", "riemann",
                            PrimitiveState(1.0, -20.0, 0.4), PrimitiveState(1.0, 20.0, 0.4), 0.5)
        wave_structure(vac)


def test_rankine_hugoniot_across_sod_shock():
    case = get_case("sod")
    ws = wave_structure(case)
    s = ws.right_shock
    pre = np.array([0.125, 0.0, 0.1])
    post = np.array([ws.rho_star_right, ws.u_star, ws.p_star])

    def cons(q):
        return np.array([q[0], q[0] * q[1], q[2] / 0.4 + 0.5 * q[0] * q[1] ** 2])

    jump_f = oracles.euler_flux(*post, 1.4) - oracles.euler_flux(*pre, 1.4)
    np.testing.assert_allclose(jump_f, s * (cons(post) - cons(pre)), rtol=1e-10, atol=1e-12)


def test_isentropic_initial_time():
    x = np.linspace(-1, 1, 41)
    rho, u = isentropic_exact(x, 0.0)
    np.testing.assert_allclose(rho, 1.0 + 0.9 * np.sin(2 * np.pi * x), rtol=1e-14)
    np.testing.assert_allclose(u, 0.0, atol=1e-14)
    x1, x2 = isentropic_feet(x, 0.0)
    np.testing.assert_allclose(x1, x, atol=1e-14)
    np.testing.assert_allclose(x2, x, atol=1e-14)


def test_isentropic_feet_solve_their_equations():
    x = np.linspace(-1, 1, 57)
    t = 0.05
    x1, x2 = isentropic_feet(x, t)

    def rho0(y):
        return 1.0 + 0.9 * np.sin(2 * np.pi * y)

    assert np.max(np.abs(x + np.sqrt(3) * rho0(x1) * t - x1)) < 1e-12
    assert np.max(np.abs(x - np.sqrt(3) * rho0(x2) * t - x2)) < 1e-12


def test_isentropic_mass_conserved_at_report_time():
    # 20-point Gauss per cell on 200 cells of the periodic domain
    edges = np.linspace(-1, 1, 201)
    total = sum(oracles.quad(lambda x: isentropic_exact(x, 0.025)[0], a, b) for a, b in zip(edges[:-1], edges[1:]))
    assert total == pytest.approx(2.0, abs=1e-10)


def test_isentropic_requires_gamma_3_and_fails_after_shock():
    with pytest.raises(ValueError):
        isentropic_exact(np.zeros(1), 0.01, gamma=1.4)
    with pytest.raises(ConvergenceError):
        isentropic_exact(np.linspace(-1, 1, 400), 0.5)


def test_l1_error_examples():
    fld = uniform_field(n=10, r=0, rho=1.0, u=0.0, p=1.0, a=0.0, b=2.0)
    same = l1_error(fld, lambda x: (np.ones_like(x), np.zeros_like(x), np.ones_like(x)))
    assert same == {"rho": 0.0, "u": 0.0, "p": 0.0}
    off = l1_error(fld, lambda x: (np.ones_like(x) + 0.01, np.zeros_like(x), np.ones_like(x)))
    assert off["rho"] == pytest.approx(0.01 * 2.0, rel=1e-12)


def test_sample_points_are_midpoints():
    x = sample_points((0.0, 1.0), 1000)
    assert len(x) == 1000 and x[0] == pytest.approx(0.0005) and x[-1] == pytest.approx(0.9995)


def test_smooth_errors_decrease_over_refinement():
    from staggered_rd.timestepping import SchemeConfig, advance

    case = get_case("smooth")
    errs = []
    for n in (50, 100, 200, 400):
        res = advance(case.initial_field(n, 1), case.t_final, SchemeConfig(time_scheme="dec2"))
        errs.append(l1_error(res.field, lambda x: case.exact(x, res.t))["rho"])
    assert all(a > b for a, b in zip(errs, errs[1:]))
