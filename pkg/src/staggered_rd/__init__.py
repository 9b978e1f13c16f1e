"""Staggered residual-distribution schemes for the 1D Euler equations.

Velocity lives in a continuous Bezier space one degree above the
discontinuous density and internal-energy spaces; an element-level
correction restores conservation of momentum and total energy.
"""

from .basis import basis_eval, basis_derivative, gauss_rule, lumped_mass
from .correction import compute_weights, energy_correction, momentum_correction, verify_master_identities
from .diagnostics import ConservationLedger, conservation_totals, weak_bv, write_profile, write_series
from .eos import ConservativeState, GasModel, PrimitiveState
from .errors import BlowUpError, ConfigError, ConvergenceError, PositivityError, StateError, VacuumError
from .mesh import Boundary, Mesh1D, SpaceLayout, StaggeredField, build_spaces, eval_field, project_initial
from .reference import BenchmarkCase, builtin_cases, get_case, isentropic_exact, l1_error, sample_riemann
from .residuals import Blending, ElementResiduals, Stabilization, evaluate_residuals
from .riemann import FluxChoice, exact_riemann, face_flux, hllc_flux
from .timestepping import SchemeConfig, TimeScheme, advance, compute_dt, dec_step, euler_step, step

__version__ = "0.1.0"

__all__ = [
    "basis_eval", "basis_derivative", "gauss_rule", "lumped_mass",
    "compute_weights", "energy_correction", "momentum_correction", "verify_master_identities",
    "ConservationLedger", "conservation_totals", "weak_bv", "write_profile", "write_series",
    "ConservativeState", "GasModel", "PrimitiveState",
    "BlowUpError", "ConfigError", "ConvergenceError", "PositivityError", "StateError", "VacuumError",
    "Boundary", "Mesh1D", "SpaceLayout", "StaggeredField", "build_spaces", "eval_field", "project_initial",
    "BenchmarkCase", "builtin_cases", "get_case", "isentropic_exact", "l1_error", "sample_riemann",
    "Blending", "ElementResiduals", "Stabilization", "evaluate_residuals",
    "FluxChoice", "exact_riemann", "face_flux", "hllc_flux",
    "SchemeConfig", "TimeScheme", "advance", "compute_dt", "dec_step", "euler_step", "step",
]
