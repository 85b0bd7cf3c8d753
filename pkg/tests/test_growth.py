import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import BLOWUP_INTEGRAL, PSI1_2T3, PSI1_T3
from harnacklab.errors import ArgumentError, DomainError, PreconditionError
from harnacklab.growth import (antiderivative, ap1_log_limit, ap1_tail_check,
                               ap2_estimate, build_profile, dump_profile,
                               growth_constant, load_profile_table,
                               phi, psi, psi_value, q_bound, script_FG,
                               verify_limit_psi)
from harnacklab.nonlinearity import NonlinearityPair, ScalarFunction

ZERO = ScalarFunction.zero()
T3 = ScalarFunction.power(1.0, 3.0, odd=True)
T1 = ScalarFunction.power(1.0, 1.0, odd=True)


def _offset_pair():
    """Cubic absorption with a gradient term bounded away from zero at 0+."""
    g = ScalarFunction.piecewise_linear([(0.0, 1.0), (1.0, 2.0)])
    return NonlinearityPair(T3, g, 0.0)


class TestGrowthConstant:
    def test_half_on_pde_range(self):
        for q in (0.0, 0.25, 0.5, 1.0):
            assert growth_constant(q) == 0.5

    def test_above_one(self):
        q = 1.5
        assert growth_constant(q) == pytest.approx(0.5 * 0.5 ** 2.0)


class TestAntiderivative:
    def test_cubic(self):
        assert antiderivative(T3, 2.0) == pytest.approx(4.0, rel=1e-12)

    def test_zero(self):
        assert antiderivative(ZERO, 7.3) == 0.0

    def test_exp_closed_form_oracle(self):
        val = antiderivative(ScalarFunction.exp_minus_one(1.0), 1.0)
        assert val == pytest.approx(math.e - 2.0, rel=1e-12)

    def test_piecewise_linear_exact(self):
        fn = ScalarFunction.piecewise_linear([(0.0, 0.0), (1.0, 2.0), (3.0, 4.0)])
        # hand integral: 1 + 2*2 + (2+4)/2*... segments: [0,1]:1, [1,3]:6 -> at t=2: 1 + (2+3)/2 = 3.5
        assert antiderivative(fn, 2.0) == pytest.approx(3.5)

    def test_negative_integrand_rejected(self):
        dipping = ScalarFunction.piecewise_linear([(0.0, 0.0), (1.0, -2.0)])
        with pytest.raises(DomainError):
            antiderivative(dipping, 1.0)


class TestScriptFG:
    def test_identity_case(self, profile_t3):
        assert script_FG(profile_t3, 1.0, 1.0) == (0.0, 0.0)

    def test_cubic_closed_form(self, profile_t3):
        F, G = script_FG(profile_t3, 2.0, 1.0)
        assert F == pytest.approx(15.0 / 4.0, rel=1e-9)
        assert G == 0.0

    def test_with_gradient_term(self):
        prof = build_profile(NonlinearityPair(T3, T1, 1.0), t_lo=0.1, t_hi=100)
        F, G = script_FG(prof, 3.0, 1.0)
        assert F == pytest.approx(20.0, rel=1e-9)
        assert G == pytest.approx(4.0, rel=1e-9)

    def test_order_enforced(self, profile_t3):
        with pytest.raises(ArgumentError):
            script_FG(profile_t3, 1.0, 2.0)


class TestPsi:
    def test_oracle_value(self, pair_t3):
        ev = psi_value(pair_t3, 1.0)
        assert ev.value == pytest.approx(PSI1_T3, rel=1e-6)
        assert not ev.divergent

    def test_scaling_identity(self, pair_t3):
        base = psi_value(pair_t3, 1.0).value
        for t in (2.0, 4.0):
            assert psi_value(pair_t3, t).value * t == pytest.approx(base, rel=1e-8)

    def test_divergent_flag(self, pair_lin):
        prof = build_profile(pair_lin, t_lo=0.1, t_hi=10.0)
        assert math.isinf(psi(prof, 1.0))

    def test_scaling_family_matrix(self):
        for c, gamma in ((1.0, 3.0), (2.0, 3.0), (0.5, 2.0), (1.0, 1.5)):
            pair = NonlinearityPair(ScalarFunction.power(c, gamma, odd=True), ZERO, 0.0)
            vals = [psi_value(pair, t).value * t ** ((gamma - 1) / 2)
                    for t in (1.0, 2.0, 4.0)]
            assert max(vals) / min(vals) == pytest.approx(1.0, rel=1e-6)

    def test_error_bound_honest_under_tol_halving(self, pair_t3):
        v1 = psi_value(pair_t3, 1.0, tol=1e-7)
        v2 = psi_value(pair_t3, 1.0, tol=5e-8)
        assert abs(v1.value - v2.value) <= max(v1.error, 1e-12 * v1.value)


class TestPsiZeroPlus:
    def test_power_divergent(self, profile_t3):
        assert math.isinf(profile_t3.psi_zero_plus)

    def test_exp_divergent(self):
        pair = NonlinearityPair(ScalarFunction.exp_minus_one(1.0, odd=True), ZERO, 0.0)
        prof = build_profile(pair, t_lo=1e-2, t_hi=60.0)
        assert math.isinf(prof.psi_zero_plus)

    def test_positive_gradient_offset_finite(self):
        # g(0+) = 1 > 0 with q = 0: integrand ~ s^(-1/2) near zero, and the
        # cubic absorption keeps the Keller-Osserman tail convergent
        pair = _offset_pair()
        prof = build_profile(pair, t_lo=1e-3, t_hi=1e3)
        zp = prof.psi_zero_plus
        assert math.isfinite(zp)
        # closed forms F = s^4/4, G = s + s^2/2 feed an independent oracle
        def integrand(s):
            return 1.0 / (math.sqrt(s ** 4 / 4.0) + math.sqrt(s + s * s / 2.0))
        val, _ = quad(integrand, 0.0, np.inf, limit=400)
        assert zp == pytest.approx(val / prof.C_q, rel=1e-4)


class TestPhi:
    def test_round_trip(self, profile_t3):
        val = profile_t3.psi(2.0)
        assert phi(profile_t3, val) == pytest.approx(2.0, rel=1e-6)

    def test_known_point(self, profile_t3):
        assert phi(profile_t3, PSI1_T3) == pytest.approx(1.0, rel=1e-5)

    def test_monotone(self, profile_t3):
        assert phi(profile_t3, 0.5) > phi(profile_t3, 1.0)

    def test_argument_errors(self, profile_t3):
        with pytest.raises(ArgumentError):
            phi(profile_t3, 0.0)

    def test_beyond_range_domain_error(self):
        prof = build_profile(_offset_pair(), t_lo=1e-3, t_hi=1e3)
        with pytest.raises(DomainError):
            phi(prof, prof.psi_zero_plus * 1.01)

    def test_round_trip_table(self, profile_t3):
        for t, v in zip(profile_t3.psi_t[::4], profile_t3.psi_values[::4]):
            assert phi(profile_t3, v) == pytest.approx(t, rel=1e-6)


class TestQBound:
    def test_zero_beyond_finite_limit(self):
        prof = build_profile(_offset_pair(), t_lo=1e-3, t_hi=1e3)
        assert q_bound(prof, prof.psi_zero_plus) == 0.0
        assert q_bound(prof, prof.psi_zero_plus * 3.0) == 0.0

    def test_power_value(self, profile_t3):
        assert q_bound(profile_t3, 1.0) == pytest.approx(PSI1_T3, rel=1e-5)

    def test_non_increasing(self, profile_t3):
        rs = np.geomspace(0.05, 20.0, 12)
        vals = [q_bound(profile_t3, float(r)) for r in rs]
        assert np.all(np.diff(vals) <= 1e-9 * np.abs(np.array(vals[:-1])))


class TestLimitPsi:
    def test_power_decay(self, profile_t3):
        assert verify_limit_psi(profile_t3, [1.0, 10.0, 100.0, 1000.0])

    def test_gradient_pair(self):
        prof = build_profile(NonlinearityPair(T3, T3, 1.0), t_lo=0.1, t_hi=1e3)
        assert verify_limit_psi(prof, [1.0, 10.0, 100.0, 1000.0])

    def test_ko_failure_is_error_not_false(self, pair_lin):
        prof = build_profile(pair_lin, t_lo=0.1, t_hi=10.0)
        with pytest.raises(PreconditionError):
            verify_limit_psi(prof, [1.0, 10.0])


class TestAppendixEstimates:
    def test_tail_check_identity_h(self):
        h = lambda s: np.asarray(s, float)
        rep = ap1_tail_check(h, 1.0, 2.0, 2.0)
        assert rep.passed
        assert rep.lhs == pytest.approx(1.0, rel=1e-6)
        assert rep.rhs == pytest.approx(2.0 * math.log(2.0), rel=1e-12)

    def test_tail_check_identity_h_farther(self):
        h = lambda s: np.asarray(s, float)
        rep = ap1_tail_check(h, 10.0, 2.0, 2.0)
        assert rep.passed
        assert rep.lhs == pytest.approx(0.1, rel=1e-6)

    def test_tail_check_sqrt_h(self):
        h = lambda s: np.sqrt(np.asarray(s, float))
        rep = ap1_tail_check(h, 1.0, 4.0, 2.0)
        assert rep.passed
        assert rep.lhs == pytest.approx(2.0, rel=1e-6)
        assert rep.rhs == pytest.approx(2.0 * math.log(4.0) / 1.0, rel=1e-12)
        assert rep.p == pytest.approx(0.5)

    def test_log_limit(self):
        assert ap1_log_limit(lambda s: np.asarray(s, float),
                             np.geomspace(10, 1e4, 8))
        assert ap1_log_limit(lambda s: np.sqrt(np.asarray(s, float)),
                             np.geomspace(10, 1e4, 8))
        with pytest.raises(PreconditionError):
            ap1_log_limit(lambda s: np.ones_like(np.asarray(s, float)),
                          np.geomspace(10, 1e4, 8))

    def test_ap2_power_constant(self, profile_t3):
        rep = ap2_estimate(profile_t3, np.geomspace(1e-2, 1.0, 16))
        assert rep.C_estimate == pytest.approx(PSI1_T3, rel=1e-2)
        scaled = [row[3] for row in rep.rows]
        assert max(scaled) / min(scaled) == pytest.approx(1.0, rel=1e-2)

    def test_ap2_zero_g_any_subunit_q(self):
        prof = build_profile(NonlinearityPair(T3, ZERO, 0.5), t_lo=1e-2, t_hi=1e4)
        rep = ap2_estimate(prof, np.geomspace(1e-2, 1.0, 8))
        assert rep.C_estimate == pytest.approx(PSI1_T3, rel=1e-2)

    def test_ap2_q1_bounded(self):
        prof = build_profile(NonlinearityPair(T3, T1, 1.0), t_lo=0.1, t_hi=1e4)
        zp_cap = prof.psi(0.5)
        rep = ap2_estimate(prof, np.geomspace(1e-3, min(zp_cap, 1.0), 12))
        assert math.isfinite(rep.C_estimate)
        assert all(row[3] <= rep.C_estimate + 1e-12 for row in rep.rows)


class TestProfileSerialization:
    def test_dump_and_reload(self, profile_t3, tmp_path):
        paths = dump_profile(profile_t3, str(tmp_path))
        assert len(paths) == 3
        header, t, v = load_profile_table(str(tmp_path / "profile_psi.dat"))
        assert "q=0" in header and "C_q=0.5" in header
        np.testing.assert_allclose(t, profile_t3.psi_t, rtol=1e-8)
        np.testing.assert_allclose(v, profile_t3.psi_values, rtol=1e-8)
        _, s, F = load_profile_table(str(tmp_path / "profile_F.dat"))
        assert np.all(np.diff(F) >= 0)

    def test_tables_monotone(self, profile_t3):
        assert np.all(np.diff(profile_t3.F_table) >= 0)
        assert np.all(np.diff(profile_t3.G_table) >= 0)
        assert np.all(np.diff(profile_t3.psi_values) < 0)
