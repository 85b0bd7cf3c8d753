"""Numerical laboratory for Harnack inequalities of the normalized
infinity-Laplacian with absorption and gradient terms."""

__version__ = "0.1.0"

from .errors import (ArgumentError, ConfigError, DivergenceError, DomainError,
                     GeometryError, HarnackLabError, PreconditionError,
                     StencilError)
from .grid import (DomainShape, Grid2D, GridFunction, barrier_v, barrier_w,
                   disk_grid, rectangle_grid, stencil_extrema)
from .growth import (GrowthProfile, antiderivative, ap1_log_limit,
                     ap1_tail_check, ap2_estimate, build_profile,
                     growth_constant, phi, psi, psi_value, psi_zero_plus,
                     q_bound, script_FG, verify_limit_psi)
from .harnack import (ChainReport, HarnackReport, ball_harnack, chain_harnack,
                      coefficient_fields, r0_constant)
from .nonlinearity import (ConditionReport, NonlinearityPair, ScalarFunction,
                           check_C1_C2, check_C3_C4, check_condition_P,
                           check_g_zero, check_KO, evaluate, h_epsilon_value,
                           h_value, verify_dif_monotonicity)
from .radial import RadialSolution, radial_extension, solve_ivp, verify_Ra, verify_lo_ul
from .solver import (PDEProblem, SolveResult, check_comparison,
                     check_global_bound, coefficient_problem, dirichlet_values,
                     nonlinear_problem, prolong, residual, solve_dirichlet)
