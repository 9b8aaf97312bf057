"""Phonon distribution from a finite set of number moments.

On a bounded support ``{0, ..., K}`` the moments ``m_p = sum_n n^p p(n)``,
``p = 0 ... K``, form a square (transposed Vandermonde) system.  Its
condition number grows factorially with ``K``, so supports beyond
``K = 12`` are refused.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IllConditionedError, InconsistencyError

MAX_SUPPORT_K = 12


@dataclass(frozen=True, eq=False)
class MomentVector:
    values: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if abs(v[0] - 1.0) > 1e-9:
            raise DomainError(f"zeroth moment must be 1, got {v[0]}")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class DistributionEstimate:
    probs: np.ndarray
    condition_number: float
    negativity: float
    raw: np.ndarray


def moment_matrix(k):
    """``V[p, n] = n^p`` for ``p, n = 0 ... k`` (with ``0^0 = 1``)."""
    n = np.arange(k + 1, dtype=float)
    return n[None, :] ** np.arange(k + 1)[:, None]


def distribution_to_moments(p, p_max):
    """``m_q = sum_n n^q p(n)`` for ``q = 0 ... p_max``."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise DomainError("distribution must be nonnegative and sum to 1")
    n = np.arange(len(p), dtype=float)
    return MomentVector(np.array([np.dot(n ** q, p) for q in range(p_max + 1)]))


def moments_to_distribution(m, support=None, tol=1e-6):
    """Solve for ``p(n)`` on ``{0, ..., K}`` from ``K + 1`` moments.

    Entries slightly below zero (above ``-tol - cond * eps``) are clipped and
    the result renormalized; ``negativity`` keeps the most negative raw
    entry.  Anything more negative means the moments are not those of a
    distribution on the assumed support.
    """
    if not isinstance(m, MomentVector):
        m = MomentVector(m)
    size = len(m) if support is None else int(support)
    if size != len(m):
        raise DomainError(f"support size {size} must equal the number of moments {len(m)}")
    k = size - 1
    if k > MAX_SUPPORT_K:
        raise IllConditionedError(
            f"support 0..{k} is beyond the reliable range (K <= {MAX_SUPPORT_K})"
        )
    v = moment_matrix(k)
    cond = float(np.linalg.cond(v))
    raw = np.linalg.solve(v, m.values)
    limit = tol + cond * np.finfo(float).eps
    most_negative = float(min(raw.min(), 0.0))
    if most_negative < -limit:
        raise InconsistencyError(
            f"recovered probability {most_negative:.3e} is negative beyond tolerance "
            f"{limit:.3e}; moments are incompatible with support 0..{k}"
        )
    probs = np.clip(raw, 0.0, None)
    probs /= probs.sum()
    return DistributionEstimate(probs, cond, -most_negative, raw)
