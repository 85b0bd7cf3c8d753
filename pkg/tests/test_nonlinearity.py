import numpy as np
import pytest

from harnacklab.errors import ArgumentError, DomainError, PreconditionError
from harnacklab.nonlinearity import (NonlinearityPair, ScalarFunction,
                                     check_C1_C2, check_C3_C4,
                                     check_condition_P, check_g_zero, check_KO,
                                     evaluate, h_epsilon_value, h_value,
                                     random_monotone_piecewise_pair,
                                     verify_dif_monotonicity)

ZERO = ScalarFunction.zero()
T3 = ScalarFunction.power(1.0, 3.0, odd=True)
T1 = ScalarFunction.power(1.0, 1.0, odd=True)


class TestEvaluate:
    def test_power(self):
        assert evaluate(ScalarFunction.power(1.0, 3.0), 2.0) == 8.0

    def test_piecewise_linear_interpolates(self):
        fn = ScalarFunction.piecewise_linear([(0.0, 0.0), (1.0, 1.0)])
        assert evaluate(fn, 0.5) == pytest.approx(0.5)

    def test_odd_extension(self):
        assert evaluate(T3, -2.0) == -8.0

    def test_odd_extension_coherence(self):
        fns = [T3, ScalarFunction.exp_minus_one(2.0, odd=True),
               ScalarFunction.log_plus_one(1.5, odd=True),
               ScalarFunction.piecewise_linear([(0, 0), (1, 2), (3, 7)], odd=True)]
        t = np.geomspace(1e-3, 5.0, 40)
        for fn in fns:
            np.testing.assert_allclose(fn(-t), -fn(t), rtol=0, atol=0)

    def test_tabulated_out_of_range(self):
        fn = ScalarFunction.tabulated([0.0, 1.0, 2.0], [0.0, 1.0, 4.0])
        assert evaluate(fn, 1.5) == pytest.approx(2.5)
        with pytest.raises(DomainError):
            evaluate(fn, 3.0)

    def test_nonincreasing_knots_rejected(self):
        with pytest.raises(ArgumentError):
            ScalarFunction.piecewise_linear([(0.0, 0.0), (0.0, 1.0)])

    def test_noninteger_power_negative_argument(self):
        fn = ScalarFunction.power(1.0, 2.5)
        with pytest.raises(DomainError):
            evaluate(fn, -1.0)


class TestConditionP:
    def test_strictly_increasing_f(self):
        rep = check_condition_P(NonlinearityPair(T3, T1, 0.0), np.geomspace(0.1, 10, 32))
        assert rep.verdict == "pass"

    def test_zero_f_fails_sign(self):
        rep = check_condition_P(NonlinearityPair(ZERO, T1, 0.0),
                                np.array([1.0, 2.0, 3.0]))
        assert rep.verdict == "fail"
        part = next(p for p in rep.parts if p.condition_id == "P_a")
        t, v = part.evidence[0]
        assert t == 1.0 and v == 0.0

    def test_zero_g_passes_with_strict_f(self):
        rep = check_condition_P(NonlinearityPair(T1, ZERO, 0.0),
                                np.geomspace(0.1, 10, 32))
        assert rep.verdict == "pass"

    def test_empty_grid(self):
        with pytest.raises(ArgumentError):
            check_condition_P(NonlinearityPair(T3, ZERO, 0.0), np.array([]))

    def test_fail_witness_reevaluates(self):
        pair = NonlinearityPair(ZERO, T1, 0.0)
        rep = check_condition_P(pair, np.array([1.0, 2.0]))
        part = next(p for p in rep.parts if p.verdict == "fail")
        t, v = part.evidence[0]
        assert pair.f(t) == v
        assert not v > 0          # the recorded violation still violates


class TestH:
    def test_f_only(self):
        assert h_value(NonlinearityPair(T3, ZERO, 0.0), 4.0) == pytest.approx(4.0)

    def test_g_only(self):
        assert h_value(NonlinearityPair(ZERO, T1, 0.0), 8.0) == pytest.approx(1.0)

    def test_both_q1(self):
        assert h_value(NonlinearityPair(T3, T1, 1.0), 9.0) == pytest.approx(18.0)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            h_value(NonlinearityPair(T3, ZERO, 0.0), 0.0)
        dipping = ScalarFunction.piecewise_linear([(0.0, 0.0), (1.0, -1.0)])
        with pytest.raises(DomainError):
            h_value(NonlinearityPair(dipping, ZERO, 0.0), 1.0)

    def test_h_eps_values(self):
        pair = NonlinearityPair(T3, ZERO, 0.0)
        assert h_epsilon_value(pair, 0.0, 1.0) == 0.0
        assert h_epsilon_value(pair, 1.0, 1.0) == pytest.approx(np.sqrt(0.5))
        g_shift = ScalarFunction.piecewise_linear([(0.0, 1.0), (1.0, 2.0)])
        pair2 = NonlinearityPair(ZERO, g_shift, 0.0)
        assert h_epsilon_value(pair2, 0.0, 0.01) == pytest.approx(10.0)
        with pytest.raises(ArgumentError):
            h_epsilon_value(pair, 1.0, 0.0)


class TestC1C2:
    def test_cubic_ratio_two(self):
        rep = check_C1_C2(NonlinearityPair(T3, ZERO, 0.0), 2.0, (1.0, 1e4))
        assert rep.verdict == "pass"
        c2 = next(p for p in rep.parts if p.condition_id == "C2")
        assert c2.parameters["min_ratio"] == pytest.approx(2.0, rel=1e-9)

    def test_constant_h_fails(self):
        rep = check_C1_C2(NonlinearityPair(T1, ZERO, 0.0), 2.0, (1.0, 1e4))
        c2 = next(p for p in rep.parts if p.condition_id == "C2")
        assert c2.verdict == "fail"
        assert c2.parameters["min_ratio"] == pytest.approx(1.0, abs=1e-12)

    def test_exponential_passes(self):
        pair = NonlinearityPair(ScalarFunction.exp_minus_one(1.0, odd=True), ZERO, 0.0)
        rep = check_C1_C2(pair, 2.0, (10.0, 200.0))
        assert rep.verdict == "pass"
        # independent oracle: h(2t)/h(t) = sqrt((e^t + 1)/2) >> 1 on the window
        t = 10.0
        oracle = np.sqrt((np.exp(t) + 1) / 2)
        c2 = next(p for p in rep.parts if p.condition_id == "C2")
        assert c2.parameters["min_ratio"] >= oracle * 0.9

    def test_window_validation(self):
        with pytest.raises(ArgumentError):
            check_C1_C2(NonlinearityPair(T3, ZERO, 0.0), 2.0, (10.0, 15.0))


class TestC3C4:
    def test_cubic_with_linear_gradient_term(self):
        pair = NonlinearityPair(T3, T1, 1.0)
        rep = check_C3_C4(pair, (10.0, 1e4))
        assert rep.verdict == "pass"
        # oracle: the ratio t/(log t * t^(3/2)) decays monotonically
        ts = np.array([10.0, 1e2, 1e3, 1e4])
        ratio = ts / (np.log(ts) * ts ** 1.5)
        assert np.all(np.diff(ratio) < 0)

    def test_exponential_gradient_term_fails(self):
        pair = NonlinearityPair(T3, ScalarFunction.exp_minus_one(1.0, odd=True), 1.0)
        rep = check_C3_C4(pair, (10.0, 200.0))
        c4 = next(p for p in rep.parts if p.condition_id == "C4")
        assert c4.verdict == "fail"
        assert c4.evidence          # witness recorded

    def test_bounded_f_fails(self):
        const = ScalarFunction.piecewise_linear([(0.0, 1.0), (1.0, 1.0)])
        rep = check_C3_C4(NonlinearityPair(const, T1, 1.0), (10.0, 1e4))
        c3 = next(p for p in rep.parts if p.condition_id == "C3")
        assert c3.verdict == "fail"
        assert c3.evidence

    def test_requires_q_one(self):
        with pytest.raises(ArgumentError):
            check_C3_C4(NonlinearityPair(T3, T1, 0.5), (10.0, 1e4))


class TestKO:
    def test_cubic_converges_to_two(self):
        rep = check_KO(NonlinearityPair(T3, ZERO, 0.0))
        assert rep.verdict == "pass"
        assert rep.parameters["value"] == pytest.approx(2.0, rel=1e-4)

    def test_linear_fails_harmonic_tail(self):
        rep = check_KO(NonlinearityPair(T1, ZERO, 0.0))
        assert rep.verdict == "fail"
        assert rep.parameters["slope"] == pytest.approx(-1.0, abs=0.02)

    def test_gradient_only_q1(self):
        rep = check_KO(NonlinearityPair(ZERO, T3, 1.0))
        assert rep.verdict == "pass"
        assert rep.parameters["value"] == pytest.approx(4.0 / 3.0, rel=1e-4)

    def test_both_zero_fails_with_witness(self):
        rep = check_KO(NonlinearityPair(ZERO, ZERO, 0.0))
        assert rep.verdict == "fail"
        assert rep.evidence


class TestGZero:
    def test_linear_passes(self):
        assert check_g_zero(NonlinearityPair(T3, T1, 0.0)).verdict == "pass"

    def test_shifted_fails_with_witness(self):
        g = ScalarFunction.piecewise_linear([(0.0, 1.0), (1.0, 2.0)])
        rep = check_g_zero(NonlinearityPair(T3, g, 0.5))
        assert rep.verdict == "fail"
        assert rep.evidence[0] == (0.0, 1.0)

    def test_zero_passes_any_subunit_q(self):
        assert check_g_zero(NonlinearityPair(T3, ZERO, 0.9)).verdict == "pass"

    def test_q_one_rejected(self):
        with pytest.raises(ArgumentError):
            check_g_zero(NonlinearityPair(T3, T1, 1.0))


class TestDifMonotonicity:
    GRID = np.geomspace(1e-3, 1e3, 200)

    def test_cubic_sweep(self):
        rep = verify_dif_monotonicity(NonlinearityPair(T3, ZERO, 0.0),
                                      [0.1, 1.0, 10.0], self.GRID)
        assert rep.verdict == "pass"

    def test_random_monotone_pairs(self):
        rng = np.random.default_rng(20240811)
        grid = np.geomspace(1e-3, 10.0, 120)
        for k in range(100):
            q = (0.0, 0.5, 1.0)[k % 3]
            pair = random_monotone_piecewise_pair(rng, q, grid=grid)
            rep = verify_dif_monotonicity(pair, [0.01, 0.3, 2.0], grid)
            assert rep.verdict == "pass"

    def test_zero_pair_vacuous(self):
        rep = verify_dif_monotonicity(NonlinearityPair(ZERO, ZERO, 0.0),
                                      [1.0], self.GRID)
        assert rep.verdict == "pass"

    def test_hypothesis_violation_raises(self):
        const = ScalarFunction.piecewise_linear([(0.0, 1.0), (1.0, 1.0)])
        with pytest.raises(PreconditionError):
            verify_dif_monotonicity(NonlinearityPair(const, ZERO, 0.0),
                                    [1.0], self.GRID)

    def test_bad_eps(self):
        with pytest.raises(ArgumentError):
            verify_dif_monotonicity(NonlinearityPair(T3, ZERO, 0.0),
                                    [-1.0], self.GRID)
