"""Nonlinear carrier/sideband couplings and their Taylor coefficients.

The carrier coupling of a single laser is diagonal in the Fock basis with
entries

    f0(n; eta) = exp(-eta^2/2) * sum_l (-eta^2)^l / l!^2 * n!/(n-l)!
               = exp(-eta^2/2) * L_n(eta^2)

and the first red sideband uses

    f1(n; eta) = exp(-eta^2/2) * sum_l (-eta^2)^l / (l! (l+1)!) * n!/(n-l)!
               = exp(-eta^2/2) * L_n^1(eta^2) / (n + 1).

Several simultaneous lasers give a weighted sum of these diagonals, whose
expansion in powers of ``n`` has coefficients ``c_p`` that are linear in the
laser weights.  The unsigned Stirling numbers of the first kind convert the
falling factorials ``n!/(n-m)!`` into powers of ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, PrecisionError

KINDS = ("f0", "f1")
M_MAX_CAP = 60
TAIL_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class CouplingDiag:
    """Diagonal of ``f0`` or ``f1`` in the Fock basis."""

    values: np.ndarray
    eta: float
    kind: str

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True, eq=False)
class TaylorCoeffs:
    """Coefficients ``c_p`` of ``sum_j w_j f(n; eta_j) = sum_p c_p n^p``."""

    c: np.ndarray
    p_max: int
    m_max: int
    kind: str = "f0"

    def __getitem__(self, p):
        return self.c[p]

    def __len__(self):
        return len(self.c)

    def evaluate(self, n):
        """Truncated power series ``sum_p c_p n^p``."""
        n = np.asarray(n, dtype=float)
        return np.polynomial.polynomial.polyval(n, self.c)


def _check_eta(eta):
    if not np.isfinite(eta) or eta < 0:
        raise DomainError(f"Lamb-Dicke parameter must be >= 0, got {eta}")


def _check_kind(kind):
    if kind not in KINDS:
        raise DomainError(f"coupling kind must be one of {KINDS}, got {kind!r}")


def _laguerre_scaled(alpha, x, d):
    """``exp(-x/2) L_n^alpha(x)`` for n < d via the upward three-term recurrence.

    The exponential prefactor is applied to the seed values so intermediate
    values stay bounded by the final ones.
    """
    out = np.empty(d)
    out[0] = math.exp(-x / 2)
    if d > 1:
        out[1] = out[0] * (1 + alpha - x)
    for n in range(1, d - 1):
        out[n + 1] = ((2 * n + 1 + alpha - x) * out[n] - (n + alpha) * out[n - 1]) / (n + 1)
    return out


def f0_diag(eta, d):
    """Carrier coupling diagonal ``f0(n; eta)`` for ``n = 0 ... d-1``."""
    _check_eta(eta)
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    return CouplingDiag(_laguerre_scaled(0, eta * eta, d), float(eta), "f0")


def f1_diag(eta, d):
    """First-sideband coupling diagonal ``f1(n; eta)`` for ``n = 0 ... d-1``."""
    _check_eta(eta)
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    x = eta * eta
    # g_n = exp(-x/2) L_n^1(x) / (n+1) obeys its own recurrence.
    g = np.empty(d)
    g[0] = math.exp(-x / 2)
    if d > 1:
        g[1] = g[0] * (2 - x) / 2
    for n in range(1, d - 1):
        g[n + 1] = ((2 * n + 2 - x) * g[n] - n * g[n - 1]) / (n + 2)
    return CouplingDiag(g, float(eta), "f1")


def coupling_diag(eta, d, kind="f0"):
    _check_kind(kind)
    return f0_diag(eta, d) if kind == "f0" else f1_diag(eta, d)


def laguerre_oracle(eta, d, kind="f0"):
    """Same diagonals as :func:`f0_diag` / :func:`f1_diag` from scipy's Laguerre.

    Independent cross-check; uses ``scipy.special.eval_genlaguerre``.
    """
    _check_eta(eta)
    _check_kind(kind)
    n = np.arange(d)
    x = eta * eta
    if kind == "f0":
        vals = special.eval_genlaguerre(n, 0, x)
    else:
        vals = special.eval_genlaguerre(n, 1, x) / (n + 1)
    return CouplingDiag(np.exp(-x / 2) * vals, float(eta), kind)


def literal_series(eta, n, kind="f0"):
    """Direct finite sum of the defining series, in exact rational arithmetic.

    Slow reference path, intended for ``n <= 15``.
    """
    _check_eta(eta)
    _check_kind(kind)
    x = Fraction(eta) ** 2
    total = Fraction(0)
    for l in range(n + 1):
        den = math.factorial(l) * math.factorial(l + (kind == "f1"))
        total += (-x) ** l * math.perm(n, l) / den
    return math.exp(-float(x) / 2) * float(total)


@lru_cache(maxsize=None)
def _stirling_row(m):
    if m == 0:
        return (1,)
    prev = _stirling_row(m - 1) + (0,)
    row = [0] * (m + 1)
    for p in range(1, m + 1):
        row[p] = prev[p - 1] + (m - 1) * prev[p]
    return tuple(row)


def stirling1(m, p):
    """Unsigned Stirling number of the first kind ``c(m, p)`` (exact int)."""
    if m < 0 or p < 0:
        raise DomainError("Stirling indices must be nonnegative")
    if p > m:
        return 0
    for k in range(0, m, 200):  # keep the recursion depth bounded
        _stirling_row(k)
    return _stirling_row(m)[p]


def a_pm(p, m):
    """Coefficient ``a_p^m`` in ``n!/(n-m)! = sum_p (-1)^(m-p) a_p^m n^p``.

    Equals 1 for ``p == m`` and otherwise the elementary symmetric polynomial
    of degree ``m - p`` in ``1, ..., m-1``.
    """
    if int(p) != p or int(m) != m:
        raise DomainError("a_pm indices must be integers")
    if not 1 <= p <= m:
        raise DomainError(f"a_pm requires 1 <= p <= m, got p={p}, m={m}")
    return stirling1(int(m), int(p))


def _series_den(m, kind):
    return math.factorial(m) * math.factorial(m + (kind == "f1"))


def default_m_max(eta_max, p_max=0):
    """Smallest ``m >= p_max`` with ``eta^(2m) / m! < 1e-16``, capped at 60.

    ``a_p^m <= m!`` so this bounds every inner-series term beyond ``m``.
    """
    x = eta_max * eta_max
    m = max(int(p_max), 1)
    while m < M_MAX_CAP and x ** m / math.factorial(m) >= 1e-16:
        m += 1
    return max(m, int(p_max))


def _inner_series(p, eta, m_lo, m_hi, kind):
    x = eta * eta
    return sum(stirling1(m, p) / _series_den(m, kind) * x ** m for m in range(m_lo, m_hi + 1))


def _check_tail(p, eta, m_max, kind):
    tail = _inner_series(p, eta, m_max + 1, m_max + 60, kind)
    if tail > TAIL_TOL:
        raise PrecisionError(
            f"inner series for p={p} truncated at m_max={m_max} drops {tail:.3e} "
            f"for eta={eta}; increase m_max"
        )


def per_laser_coeffs(eta, p_max, m_max=None, kind="f0", check_tail=True):
    """Coefficients ``c_0 ... c_{p_max}`` of a single unit-weight laser."""
    _check_eta(eta)
    _check_kind(kind)
    if m_max is None:
        m_max = default_m_max(eta, p_max)
    if m_max < p_max:
        raise DomainError(f"m_max={m_max} must be >= p_max={p_max}")
    pref = math.exp(-eta * eta / 2)
    out = np.empty(p_max + 1)
    out[0] = pref
    for p in range(1, p_max + 1):
        if check_tail:
            _check_tail(p, eta, m_max, kind)
        out[p] = (-1) ** p * pref * _inner_series(p, eta, p, m_max, kind)
    return out


def taylor_coeffs(weights, etas, p_max, m_max=None, kind="f0"):
    """Power-series coefficients of ``sum_j w_j f_kind(n; eta_j)``.

    ``c_0 = sum_j w_j exp(-eta_j^2/2)`` and for ``p >= 1``
    ``c_p = (-1)^p sum_j w_j exp(-eta_j^2/2) sum_{m=p}^{m_max} a_p^m eta_j^(2m)/m!^2``
    (``m! (m+1)!`` in the denominator for ``kind="f1"``).
    """
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    e = np.atleast_1d(np.asarray(etas, dtype=float))
    if w.shape != e.shape or w.ndim != 1 or len(w) == 0:
        raise DomainError(f"weights {w.shape} and etas {e.shape} must be equal-length vectors")
    if m_max is None:
        m_max = default_m_max(float(e.max()), p_max)
    c = np.zeros(p_max + 1)
    for wj, ej in zip(w, e):
        c += wj * per_laser_coeffs(ej, p_max, m_max, kind)
    return TaylorCoeffs(c, int(p_max), int(m_max), kind)


def combined_diag(weights, etas, d, kind="f0"):
    """Pointwise ``sum_j w_j f_kind(n; eta_j)`` for ``n < d``.

    For ``kind="f1"`` the weights are the effective products
    ``u_j = (Omega_j / Omega_L) * eta_j``, so the same call serves carrier and
    sideband engineering.
    """
    _check_kind(kind)
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    e = np.atleast_1d(np.asarray(etas, dtype=float))
    if w.shape != e.shape or w.ndim != 1:
        raise DomainError(f"weights {w.shape} and etas {e.shape} must be equal-length vectors")
    out = np.zeros(d)
    for wj, ej in zip(w, e):
        out += wj * coupling_diag(ej, d, kind).values
    return out
