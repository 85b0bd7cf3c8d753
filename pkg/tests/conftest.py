import numpy as np
import pytest

from harnacklab.grid import rectangle_grid
from harnacklab.growth import build_profile
from harnacklab.nonlinearity import NonlinearityPair, ScalarFunction
from harnacklab.solver import nonlinear_problem, solve_dirichlet

# high-precision constants computed once with mpmath (30 digits)
BLOWUP_INTEGRAL = 1.31102877714605989817558005216     # int_1^inf ds/sqrt(s^4-1)
PSI1_T3 = 5.24411510858423959270232020862             # 4 * BLOWUP_INTEGRAL
PSI1_2T3 = 3.7081493546027438169079437509             # 2*sqrt(2) * BLOWUP_INTEGRAL
COSH1 = 1.54308063481524377847790562076


@pytest.fixture(scope="session")
def zero_fn():
    return ScalarFunction.zero()


@pytest.fixture(scope="session")
def pair_t3(zero_fn):
    return NonlinearityPair(ScalarFunction.power(1.0, 3.0, odd=True), zero_fn, 0.0)


@pytest.fixture(scope="session")
def pair_2t3(zero_fn):
    return NonlinearityPair(ScalarFunction.power(2.0, 3.0, odd=True), zero_fn, 0.0)


@pytest.fixture(scope="session")
def pair_lin(zero_fn):
    return NonlinearityPair(ScalarFunction.power(1.0, 1.0, odd=True), zero_fn, 0.0)


@pytest.fixture(scope="session")
def profile_t3(pair_t3):
    return build_profile(pair_t3, t_lo=1e-2, t_hi=1e4)


@pytest.fixture(scope="session")
def profile_2t3(pair_2t3):
    return build_profile(pair_2t3, t_lo=1e-2, t_hi=1e4)


@pytest.fixture(scope="session", autouse=True)
def warm_numba(zero_fn):
    """Compile the Gauss-Seidel kernel once before timing-sensitive tests."""
    pair = NonlinearityPair(zero_fn, zero_fn, 0.0)
    g = rectangle_grid((0, 0), (1, 1), 16)
    prob = nonlinear_problem(g, pair, 1.0)
    solve_dirichlet(prob, tol=1e-6, max_iter=50)
