import math

import numpy as np
import pytest

from conftest import BLOWUP_INTEGRAL, COSH1
from harnacklab.errors import ArgumentError, DomainError, PreconditionError
from harnacklab.grid import rectangle_grid, GridFunction
from harnacklab.growth import build_profile
from harnacklab.nonlinearity import NonlinearityPair, ScalarFunction
from harnacklab.radial import (RadialSolution, radial_extension, solve_ivp,
                               verify_Ra, verify_lo_ul)

ZERO = ScalarFunction.zero()


@pytest.fixture(scope="module")
def cosh_solution(pair_lin):
    return solve_ivp(pair_lin, 1.0, r_max=3.0)


@pytest.fixture(scope="module")
def blowup_solution(pair_2t3):
    return solve_ivp(pair_2t3, 1.0)


class TestSolveIvp:
    def test_cosh_oracle(self, cosh_solution):
        sol = cosh_solution
        assert sol.status == "reached_rmax"
        r, p = sol.nodes[:, 0], sol.nodes[:, 1]
        assert np.max(np.abs(p - np.cosh(r))) <= 1e-8

    def test_blowup_bracket(self, blowup_solution):
        sol = blowup_solution
        assert sol.status in ("reached_cap", "blew_up")
        lo, hi = sol.R_bracket
        assert lo <= BLOWUP_INTEGRAL <= hi
        assert hi - lo <= 1e-3

    def test_rest_point_constant(self):
        sol = solve_ivp(NonlinearityPair(ZERO, ZERO, 0.0), 1.0)
        assert sol.status == "reached_rmax"
        assert sol.degenerate_rest_point
        np.testing.assert_allclose(sol.nodes[:, 1], 1.0)

    def test_bad_initial_value(self, pair_2t3):
        with pytest.raises(ArgumentError):
            solve_ivp(pair_2t3, 0.0)

    def test_nodes_monotone(self, blowup_solution):
        nodes = blowup_solution.nodes
        assert np.all(np.diff(nodes[:, 0]) >= 0)
        assert np.all(np.diff(nodes[:, 1]) >= -1e-12)
        scale = np.maximum(np.abs(nodes[:-1, 2]), 1.0)
        assert np.all(np.diff(nodes[:, 2]) >= -1e-10 * scale)

    def test_energy_identity(self, blowup_solution):
        # g = 0: phi'^2 = 2 (F(phi) - F(a)) exactly, F = t^4/2
        nodes = blowup_solution.nodes
        frak = (nodes[:, 1] ** 4 - 1.0) / 2.0
        dev = np.abs(nodes[:, 2] ** 2 - 2 * frak) / np.maximum(2 * frak, 1.0)
        assert np.max(dev) <= 1e-9

    def test_step_halving_stability(self, pair_2t3):
        a = solve_ivp(pair_2t3, 1.0)
        b = solve_ivp(pair_2t3, 1.0, rtol=5e-12, max_step=0.025)
        width = a.R_bracket[1] - a.R_bracket[0]
        assert abs(a.R_bracket[1] - b.R_bracket[1]) <= max(width, 1e-6)

    def test_gradient_branch_energy(self):
        # f = 0, g = t, q = 0: phi'' = phi, and phi'^2 >= 2 G-diff holds
        pair = NonlinearityPair(ZERO, ScalarFunction.power(1.0, 1.0, odd=True), 0.0)
        sol = solve_ivp(pair, 1.0, r_max=3.0)
        nodes = sol.nodes[sol.nodes[:, 1] > 1.0]
        gdiff = (nodes[:, 1] ** 2 - 1.0) / 2.0
        assert np.all(nodes[:, 2] ** 2 >= 2 * gdiff * (1 - 1e-9))


class TestVerifyLoUl:
    def test_blowup_ratio_sqrt_two(self, blowup_solution, profile_2t3):
        rep = verify_lo_ul(blowup_solution, profile_2t3)
        assert rep["passed"]
        # phi' = sqrt(2 F-diff): the ratio to sqrt(F-diff) is sqrt(2) = 2 sqrt(2) C(0)
        assert rep["min_lo_slack"] == pytest.approx(2 * math.sqrt(2), rel=1e-6)

    def test_cosh_ratio_sqrt_two(self, cosh_solution, pair_lin):
        prof = build_profile(pair_lin, t_lo=0.1, t_hi=10.0)
        rep = verify_lo_ul(cosh_solution, prof)
        assert rep["passed"]
        assert rep["min_lo_slack"] == pytest.approx(2 * math.sqrt(2), rel=1e-6)

    def test_gradient_only_branch(self):
        pair = NonlinearityPair(ZERO, ScalarFunction.power(1.0, 1.0, odd=True), 0.0)
        prof = build_profile(pair, t_lo=0.1, t_hi=100.0)
        sol = solve_ivp(pair, 1.0, r_max=3.0)
        rep = verify_lo_ul(sol, prof)
        assert rep["passed"]

    def test_rest_point_vacuous(self):
        pair = NonlinearityPair(ZERO, ZERO, 0.0)
        prof_pair = NonlinearityPair(ScalarFunction.power(1.0, 3.0, odd=True), ZERO, 0.0)
        sol = solve_ivp(pair, 1.0)
        rep = verify_lo_ul(sol, build_profile(prof_pair, t_lo=0.1, t_hi=10.0))
        assert rep["vacuous"] and rep["passed"]


class TestVerifyRa:
    def test_family_sweep(self, pair_2t3, profile_2t3):
        for a in (1.0, 2.0, 4.0, 8.0):
            sol = solve_ivp(pair_2t3, a)
            rep = verify_Ra(sol, profile_2t3)
            assert rep["passed"]
            # both sides scale like 1/a
            assert rep["psi_a"] * a == pytest.approx(3.70814935460274, rel=1e-6)

    def test_divergent_distance_integral_is_error(self, pair_lin):
        prof = build_profile(pair_lin, t_lo=0.1, t_hi=10.0)
        sol = solve_ivp(pair_lin, 1.0, r_max=2.0)
        with pytest.raises(PreconditionError):
            verify_Ra(sol, prof)

    def test_no_blowup_inconclusive(self, pair_2t3, profile_2t3):
        sol = solve_ivp(pair_2t3, 1.0, r_max=0.5)
        assert sol.status == "reached_rmax"
        rep = verify_Ra(sol, profile_2t3)
        assert rep["inconclusive"]


class TestRadialExtension:
    def test_center_value(self, blowup_solution):
        assert radial_extension(blowup_solution, (0.5, -0.2), (0.5, -0.2)) == 1.0

    def test_cosh_value(self, cosh_solution):
        val = radial_extension(cosh_solution, (0.0, 0.0), (1.0, 0.0))
        assert val == pytest.approx(COSH1, abs=1e-5)

    def test_radial_symmetry(self, cosh_solution):
        a = radial_extension(cosh_solution, (0.0, 0.0), (0.6, 0.8))
        b = radial_extension(cosh_solution, (0.0, 0.0), (-1.0, 0.0))
        assert a == pytest.approx(b, rel=1e-12)

    def test_outside_existence_ball(self, blowup_solution):
        with pytest.raises(DomainError):
            radial_extension(blowup_solution, (0.0, 0.0), (2.0, 0.0))

    def test_save_round_trip(self, blowup_solution, tmp_path):
        path = tmp_path / "radial.dat"
        blowup_solution.save(str(path))
        header = path.read_text().splitlines()[0]
        assert "a=1" in header and "status=reached_cap" in header
        data = np.loadtxt(path)
        assert data.shape == blowup_solution.nodes.shape


class TestStencilConsistencyAtCenter:
    def test_operator_approaches_initial_absorption(self, pair_2t3, blowup_solution):
        """Discrete circle operator of the radial extension at its center."""
        from harnacklab.grid import stencil_extrema
        center = (0.0, 0.0)
        errs = []
        for n in (33, 65, 129):
            g = rectangle_grid((-0.25, -0.25), (0.25, 0.25), n, band=4)
            rho = 3 * g.spacing
            u = GridFunction.from_function(
                g, lambda X, Y: _radial_field(blowup_solution, X, Y))
            i = j = n // 2
            mx, mn, _ = stencil_extrema(u, (i, j), rho)
            op = (mx + mn - 2 * u.values[i, j]) / rho ** 2
            errs.append(abs(op - 2.0))     # f(a) = 2 at a = 1
        assert errs[-1] <= 0.05 * 2.0
        assert errs[-1] <= errs[0]


def _radial_field(sol, X, Y):
    dist = np.hypot(X, Y)
    return sol.interpolant()(np.minimum(dist, sol.max_radius))
