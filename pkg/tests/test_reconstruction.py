import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phononprobe import fock, reconstruction
from phononprobe.errors import DomainError, IllConditionedError, InconsistencyError
from phononprobe.reconstruction import MomentVector


def test_fock3_point_mass():
    m = [fock.number_moment(fock.fock_state(3, 6), p) for p in range(6)]
    est = reconstruction.moments_to_distribution(m)
    np.testing.assert_allclose(est.probs, [0, 0, 0, 1, 0, 0], atol=1e-9)
    assert abs(est.probs.sum() - 1) < 1e-9


def test_uniform_on_two():
    est = reconstruction.moments_to_distribution([1, 0.5, 0.5], support=3)
    np.testing.assert_allclose(est.probs, [0.5, 0.5, 0.0], atol=1e-12)


def test_coherent_truncated():
    coh = fock.coherent_state(1.0, 7)
    m = [fock.number_moment(coh, p) for p in range(7)]
    est = reconstruction.moments_to_distribution(m)
    assert np.max(np.abs(est.probs - coh.populations)) <= 1e-6 * est.condition_number


def test_forward_examples():
    np.testing.assert_array_equal(reconstruction.distribution_to_moments([1, 0, 0], 4).values,
                                  [1, 0, 0, 0, 0])
    np.testing.assert_allclose(reconstruction.distribution_to_moments([0.5, 0.5], 2).values,
                               [1, 0.5, 0.5])


def test_invalid_inputs():
    with pytest.raises(DomainError):
        reconstruction.distribution_to_moments([0.6, 0.6], 2)
    with pytest.raises(DomainError):
        reconstruction.distribution_to_moments([1.2, -0.2], 2)
    with pytest.raises(DomainError):
        MomentVector([0.9, 0.1])
    with pytest.raises(DomainError):
        reconstruction.moments_to_distribution([1, 0.5, 0.5], support=4)


def test_refuses_large_support():
    m = reconstruction.distribution_to_moments(np.ones(14) / 14, 13)
    with pytest.raises(IllConditionedError):
        reconstruction.moments_to_distribution(m)


def test_inconsistent_moments():
    # <n^2> < <n>^2 is impossible for any distribution
    with pytest.raises(InconsistencyError):
        reconstruction.moments_to_distribution([1, 1.0, 0.5])


def test_condition_number_k6():
    est = reconstruction.moments_to_distribution(
        reconstruction.distribution_to_moments(np.ones(7) / 7, 6))
    assert est.condition_number == pytest.approx(np.linalg.cond(reconstruction.moment_matrix(6)))
    assert 1e6 < est.condition_number < 1e7


def test_clipping_records_negativity():
    p = np.array([0.5, 0.5, 0.0])
    m = reconstruction.distribution_to_moments(p, 2).values + np.array([0, 0, -1e-8])
    est = reconstruction.moments_to_distribution(m)
    assert est.negativity > 0
    assert np.all(est.probs >= 0) and abs(est.probs.sum() - 1) < 1e-12
    assert est.raw.min() < 0


@st.composite
def distributions(draw):
    k = draw(st.integers(0, 6))
    w = np.array(draw(st.lists(st.floats(0, 1), min_size=k + 1, max_size=k + 1)))
    if w.sum() < 1e-3:
        w[0] = 1.0
    return w / w.sum()


@settings(max_examples=80, deadline=None)
@given(distributions())
def test_round_trip(p):
    m = reconstruction.distribution_to_moments(p, len(p) - 1)
    est = reconstruction.moments_to_distribution(m)
    assert np.max(np.abs(est.probs - p)) < 1e-9


@settings(max_examples=50, deadline=None)
@given(distributions())
def test_shift_adds_one_to_mean(p):
    shifted = np.r_[0.0, p]
    m = reconstruction.distribution_to_moments(p, 1).values
    ms = reconstruction.distribution_to_moments(shifted, 1).values
    assert ms[1] == pytest.approx(m[1] + 1, abs=1e-14)
