import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre

from phononprobe import couplings
from phononprobe.errors import DomainError, PrecisionError

ETAS = [0.1, 0.5, 1.0, 2.0, 3.0]


def _rel_close(a, b, rtol=1e-10, atol=1e-12):
    return np.all(np.abs(a - b) <= np.maximum(rtol * np.abs(b), atol))


class TestDiagonals:
    @pytest.mark.parametrize("kind", ["f0", "f1"])
    def test_eta_zero_is_identity(self, kind):
        np.testing.assert_array_equal(couplings.coupling_diag(0.0, 8, kind).values, np.ones(8))

    @pytest.mark.parametrize("kind", ["f0", "f1"])
    @pytest.mark.parametrize("eta", ETAS)
    def test_vacuum_entry(self, kind, eta):
        v = couplings.coupling_diag(eta, 4, kind)[0]
        assert abs(v - math.exp(-eta ** 2 / 2)) < 1e-14

    def test_f0_three_term_example(self):
        # l = 0, 1, 2 terms of the defining sum at n = 2
        assert couplings.f0_diag(0.5, 8)[2] == pytest.approx(math.exp(-0.125) * 0.53125, rel=1e-14)

    def test_f1_two_term_example(self):
        assert couplings.f1_diag(0.5, 8)[1] == pytest.approx(math.exp(-0.125) * 0.875, rel=1e-14)

    def test_oracle_examples(self):
        o = couplings.laguerre_oracle(0.5, 8, "f0")
        assert o[1] == pytest.approx(math.exp(-0.125) * 0.75, rel=1e-14)
        x = 0.25
        assert o[2] == pytest.approx(math.exp(-0.125) * (1 - 2 * x + x * x / 2), rel=1e-14)
        assert couplings.laguerre_oracle(1.7, 3, "f1")[0] == pytest.approx(math.exp(-1.7 ** 2 / 2))

    @pytest.mark.parametrize("kind", ["f0", "f1"])
    @pytest.mark.parametrize("eta", ETAS)
    def test_against_oracle(self, kind, eta):
        fast = couplings.coupling_diag(eta, 200, kind).values
        ref = couplings.laguerre_oracle(eta, 200, kind).values
        assert _rel_close(fast, ref)

    @pytest.mark.parametrize("kind", ["f0", "f1"])
    @pytest.mark.parametrize("eta", [0.3, 1.1])
    def test_against_literal_series(self, kind, eta):
        fast = couplings.coupling_diag(eta, 16, kind).values
        slow = np.array([couplings.literal_series(eta, n, kind) for n in range(16)])
        assert _rel_close(fast, slow, rtol=1e-11)

    def test_oracle_uses_laguerre_identity(self):
        # independent of the library: scipy's generalized Laguerre directly
        eta, n = 0.8, np.arange(30)
        ref = np.exp(-eta ** 2 / 2) * eval_genlaguerre(n, 1, eta ** 2) / (n + 1)
        np.testing.assert_allclose(couplings.f1_diag(eta, 30).values, ref, rtol=1e-12)

    def test_negative_eta(self):
        with pytest.raises(DomainError):
            couplings.f0_diag(-0.1, 4)
        with pytest.raises(DomainError):
            couplings.laguerre_oracle(-0.1, 4)

    @pytest.mark.parametrize("kind", ["f0", "f1"])
    def test_bounded(self, kind):
        for eta in [0.0, 0.05, 0.3, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0]:
            assert np.max(np.abs(couplings.coupling_diag(eta, 300, kind).values)) <= 1 + 1e-12

    def test_ld_expansion_residual(self):
        # the expansion includes the exp(-eta^2/2) prefactor
        eta = 0.05
        n = np.arange(6)
        f = couplings.f0_diag(eta, 6).values
        approx = math.exp(-eta ** 2 / 2) * (1 - eta ** 2 * n + eta ** 4 * n ** 2 / 4)
        assert np.max(np.abs(f - approx)) <= 1e-4


class TestCombinatorics:
    def test_examples(self):
        assert couplings.a_pm(3, 3) == 1
        assert couplings.a_pm(2, 3) == 3
        assert couplings.a_pm(1, 3) == 2

    def test_domain(self):
        for p, m in [(0, 3), (4, 3), (-1, 2)]:
            with pytest.raises(DomainError):
                couplings.a_pm(p, m)

    def test_diagonal_is_one(self):
        assert all(couplings.a_pm(m, m) == 1 for m in range(1, 30))

    def test_falling_factorial_identity(self):
        for m in range(1, 11):
            for n in range(16):
                lhs = math.perm(n, m)
                rhs = sum((-1) ** (m - p) * couplings.a_pm(p, m) * n ** p for p in range(1, m + 1))
                assert lhs == rhs and isinstance(rhs, int)

    def test_elementary_symmetric_definition(self):
        from itertools import combinations

        for m in range(1, 8):
            for p in range(1, m + 1):
                esp = sum(math.prod(c) for c in combinations(range(1, m), m - p))
                assert couplings.a_pm(p, m) == esp

    def test_large_arguments_exact(self):
        # c(m, 1) = (m-1)! exactly, well past 64-bit range
        assert couplings.a_pm(1, 40) == math.factorial(39)


class TestTaylor:
    def test_c0(self):
        c = couplings.taylor_coeffs([1.0], [0.3], 2, 20)
        assert c[0] == pytest.approx(math.exp(-0.045), abs=1e-15)

    def test_c1_series(self):
        eta = 0.3
        c = couplings.taylor_coeffs([1.0], [eta], 2, 20)
        x = eta ** 2
        ref = -math.exp(-x / 2) * sum(
            float(Fraction(couplings.a_pm(1, m), math.factorial(m) ** 2)) * x ** m
            for m in range(1, 21)
        )
        assert c[1] == pytest.approx(ref, rel=1e-14)
        # leading behaviour -eta^2 e^{-eta^2/2}
        assert c[1] == pytest.approx(-x * math.exp(-x / 2) * (1 + x / 4), rel=1e-3)

    def test_zero_weights(self):
        c = couplings.taylor_coeffs([0.0, 0.0, 0.0], [0.2, 0.5, 0.9], 3)
        np.testing.assert_array_equal(c.c, np.zeros(4))

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            couplings.taylor_coeffs([1.0, 2.0], [0.3], 2)
        with pytest.raises(DomainError):
            couplings.combined_diag([1.0, 2.0], [0.3], 4)

    def test_tail_violation_names_eta(self):
        with pytest.raises(PrecisionError, match="eta=2.5"):
            couplings.taylor_coeffs([1.0], [2.5], 2, m_max=4)

    @pytest.mark.parametrize("eta", [0.1, 0.3, 0.5])
    def test_series_reproduces_f0(self, eta):
        c = couplings.taylor_coeffs([1.0], [eta], 12)
        n = np.arange(6)
        f = couplings.f0_diag(eta, 6).values
        # tail bound of the dropped orders: sum_{p>12} |c_p| n^p is negligible here
        assert np.max(np.abs(c.evaluate(n) - f)) < 1e-12

    @pytest.mark.parametrize("eta", [0.2, 0.5])
    def test_series_reproduces_f1(self, eta):
        c = couplings.taylor_coeffs([1.0], [eta], 12, kind="f1")
        n = np.arange(6)
        assert np.max(np.abs(c.evaluate(n) - couplings.f1_diag(eta, 6).values)) < 1e-12

    def test_default_m_max_capped(self):
        assert couplings.default_m_max(50.0) == couplings.M_MAX_CAP


class TestCombined:
    def test_single_laser(self):
        np.testing.assert_array_equal(couplings.combined_diag([1.0], [0.4], 10),
                                      couplings.f0_diag(0.4, 10).values)

    def test_equal_split(self):
        np.testing.assert_allclose(couplings.combined_diag([0.5, 0.5], [0.4, 0.4], 10),
                                   couplings.f0_diag(0.4, 10).values, rtol=1e-15)

    def test_linear_monomial(self):
        etas = np.array([0.3, 0.6])
        m = np.array([couplings.per_laser_coeffs(e, 1) for e in etas]).T
        w = np.linalg.solve(m, [0.0, 1.0])
        d = 6
        vals = couplings.combined_diag(w, etas, d)
        c = couplings.taylor_coeffs(w, etas, 30)
        n = np.arange(d)
        uncontrolled = np.polynomial.polynomial.polyval(n, np.r_[0, 0, c.c[2:]])
        np.testing.assert_allclose(vals - n, uncontrolled, atol=1e-10)
        bound = np.polynomial.polynomial.polyval(n, np.r_[0, 0, np.abs(c.c[2:])])
        assert np.all(np.abs(vals - n) <= bound + 1e-12)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(0.05, 1.2), min_size=1, max_size=4),
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.floats(-2, 2),
    st.floats(-2, 2),
)
def test_taylor_linear_in_weights(etas, w1, w2, a, b):
    k = len(etas)
    w1, w2 = np.array(w1[:k]), np.array(w2[:k])
    c = lambda w: couplings.taylor_coeffs(w, etas, 3, m_max=40).c
    lhs = c(a * w1 + b * w2)
    rhs = a * c(w1) + b * c(w2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * max(1.0, np.max(np.abs(lhs)))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 4), st.integers(1, 120), st.sampled_from(["f0", "f1"]))
def test_oracle_agreement_property(eta, d, kind):
    fast = couplings.coupling_diag(eta, d, kind).values
    ref = couplings.laguerre_oracle(eta, d, kind).values
    assert _rel_close(fast, ref)
    assert np.all(np.abs(fast) <= 1 + 1e-12)
