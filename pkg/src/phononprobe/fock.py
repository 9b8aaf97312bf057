"""Truncated Fock-space states, operators and expectation values.

All density matrices live on a finite basis ``|0>, ..., |d-1>``.  Joint
internal/motional states use internal-major ordering: the first ``d`` basis
vectors are ``|g>|n>`` and the next ``d`` are ``|e>|n>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationWarning

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIGEN_FLOOR = -1e-10
TAIL_WARN = 1e-8

GROUND, EXCITED = 0, 1


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def check_density_matrix(matrix, what="state"):
    """Raise :class:`DomainError` unless ``matrix`` is a valid density matrix."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"{what}: expected a square matrix, got shape {m.shape}")
    herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if herm > HERMITIAN_TOL:
        raise DomainError(f"{what}: not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise DomainError(f"{what}: trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
    if lo < EIGEN_FLOOR:
        raise DomainError(f"{what}: negative eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class FockBasis:
    """Truncated single-mode Fock basis ``n = 0 ... dim-1``."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"Fock dimension must be an integer >= 2, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def levels(self):
        return np.arange(self.dim)


@dataclass(frozen=True, eq=False)
class MotionalState:
    """Density operator of the motional mode on a truncated Fock basis."""

    basis: FockBasis
    matrix: np.ndarray
    check: bool = True

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise DomainError(
                f"matrix shape {m.shape} does not match basis dimension {self.basis.dim}"
            )
        object.__setattr__(self, "matrix", m)
        if self.check:
            check_density_matrix(m, "MotionalState")

    @classmethod
    def from_matrix(cls, matrix, check=True):
        matrix = np.asarray(matrix)
        return cls(FockBasis(matrix.shape[0]), matrix, check=check)

    @property
    def dim(self):
        return self.basis.dim

    @property
    def populations(self):
        """Phonon-number distribution ``p(n) = <n|rho|n>``."""
        return np.real(np.diag(self.matrix)).copy()

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class ProbeState:
    """Internal superposition ``(|g> + sign * exp(i phase) |e>) / sqrt(2)``."""

    sign: int = 1
    phase: float = 0.0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError(f"probe sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, "phase", float(self.phase) % (2 * np.pi))

    def ket(self):
        return np.array([1.0, self.sign * np.exp(1j * self.phase)]) / np.sqrt(2)

    def density_matrix(self):
        k = self.ket()
        return np.outer(k, k.conj())


@dataclass(frozen=True, eq=False)
class HybridState:
    """Joint internal x motional density matrix (internal-major ordering)."""

    basis: FockBasis
    matrix: np.ndarray
    check: bool = True

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.basis.dim
        if m.shape != (2 * d, 2 * d):
            raise DomainError(f"hybrid matrix shape {m.shape} does not match 2*{d}")
        object.__setattr__(self, "matrix", m)
        if self.check:
            check_density_matrix(m, "HybridState")

    @property
    def dim(self):
        return self.basis.dim

    def with_matrix(self, matrix):
        """Same basis, new matrix (unchecked; used for evolved states)."""
        return HybridState(self.basis, matrix, check=False)

    def block(self, row, col):
        """Motional block ``<row|rho|col>`` for internal indices 0 (g) / 1 (e)."""
        d = self.basis.dim
        return self.matrix[row * d:(row + 1) * d, col * d:(col + 1) * d]

    def internal_state(self):
        """Partial trace over the motion, a 2x2 matrix in the {g, e} basis."""
        d = self.basis.dim
        return np.einsum("anbn->ab", self.matrix.reshape(2, d, 2, d))

    def motional_state(self):
        """Partial trace over the internal levels."""
        d = self.basis.dim
        m = np.einsum("aman->mn", self.matrix.reshape(2, d, 2, d))
        return MotionalState(self.basis, m, check=False)


# -- operators -------------------------------------------------------------

def number_op(d):
    return np.diag(np.arange(d, dtype=float))


def destroy(d):
    """Annihilation operator truncated to ``d`` levels."""
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def create(d):
    return destroy(d).T.copy()


def excited_projector(d):
    """``|e><e| (x) 1`` on the hybrid space."""
    return np.kron(np.diag([0.0, 1.0]), np.eye(d))


# internal two-level operators in the {g, e} basis
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]])  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()
SIGMA_X = SIGMA_PLUS + SIGMA_MINUS
SIGMA_Y = np.array([[0.0, 1j], [-1j, 0.0]])  # -i|e><g| + i|g><e|
SIGMA_Z = np.diag([-1.0, 1.0])


# -- state factories -------------------------------------------------------

def fock_state(n, d):
    """Pure number state ``|n><n|``."""
    basis = FockBasis(d)
    if int(n) != n or not 0 <= n < d:
        raise DomainError(f"Fock level {n} outside basis 0..{d - 1}")
    m = np.zeros((d, d), dtype=complex)
    m[int(n), int(n)] = 1.0
    return MotionalState(basis, m, check=False)


def _warn_tail(tail, what):
    if tail > TAIL_WARN:
        warnings.warn(
            f"{what}: {tail:.3e} of the probability lies beyond the truncation "
            "and was removed by renormalization",
            TruncationWarning,
            stacklevel=3,
        )


def coherent_amplitudes(alpha, d):
    """Unnormalized truncated coherent-state amplitudes."""
    c = np.empty(d, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, d):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def coherent_state(alpha, d):
    """Coherent state ``|alpha>`` truncated to ``d`` levels and renormalized.

    Emits :class:`TruncationWarning` when more than 1e-8 of the Poisson weight
    falls outside the basis.
    """
    basis = FockBasis(d)
    c = coherent_amplitudes(complex(alpha), d)
    norm = float(np.vdot(c, c).real)
    _warn_tail(1.0 - norm, f"coherent_state(alpha={alpha}, d={d})")
    c /= np.sqrt(norm)
    return MotionalState(basis, np.outer(c, c.conj()), check=False)


def thermal_state(nbar, d):
    """Thermal (geometric) phonon distribution with mean ``nbar``."""
    basis = FockBasis(d)
    if nbar < 0:
        raise DomainError(f"mean phonon number must be >= 0, got {nbar}")
    if nbar == 0:
        return fock_state(0, d)
    ratio = nbar / (nbar + 1.0)
    p = ratio ** np.arange(d) / (nbar + 1.0)
    _warn_tail(1.0 - p.sum(), f"thermal_state(nbar={nbar}, d={d})")
    p /= p.sum()
    return MotionalState(basis, np.diag(p).astype(complex), check=False)


def mixed_state(populations):
    """Diagonal state from an arbitrary (normalized) phonon distribution."""
    p = np.asarray(populations, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1) > TRACE_TOL:
        raise DomainError("populations must be nonnegative and sum to 1")
    return MotionalState(FockBasis(len(p)), np.diag(p).astype(complex))


def random_state(d, rank=None, rng=None):
    """Random density matrix of the given rank (Hilbert-Schmidt-like ensemble)."""
    rng = np.random.default_rng(rng)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T) / np.trace(m).real
    return MotionalState(FockBasis(d), m)


# -- expectation values ----------------------------------------------------

def expect(state, op):
    """``Tr[rho Op]`` for a state and either a matrix or a diagonal vector."""
    rho = state.matrix
    op = np.asarray(op)
    dim = rho.shape[0]
    if op.ndim == 1:
        if op.shape[0] != dim:
            raise DomainError(f"operator diagonal of length {op.shape[0]} vs state dim {dim}")
        return complex(np.dot(np.diag(rho), op))
    if op.shape != rho.shape:
        raise DomainError(f"operator shape {op.shape} vs state shape {rho.shape}")
    return complex(np.einsum("ij,ji->", rho, op))


def number_moment(state, p):
    """``<n^p> = sum_n n^p rho_nn``; the reference value for every protocol."""
    if int(p) != p or p < 0:
        raise DomainError(f"moment order must be a nonnegative integer, got {p}")
    n = np.arange(state.dim, dtype=float)
    return float(np.dot(n ** int(p), state.populations))


def leakage(state, k_tail):
    """Population held in the top ``k_tail`` Fock levels of the basis."""
    if not 0 < k_tail < state.dim:
        raise DomainError(f"k_tail must lie in (0, {state.dim}), got {k_tail}")
    return float(state.populations[-k_tail:].sum())


def hybrid_product(probe, motional):
    """Product state ``|probe><probe| (x) rho_f``."""
    m = np.kron(probe.density_matrix(), motional.matrix)
    return HybridState(motional.basis, m, check=False)


def excited_population(rho):
    """Trace of the ``|e>`` block of a hybrid state."""
    return float(np.trace(rho.block(EXCITED, EXCITED)).real)


def factorial_moment(state, k):
    """``<n (n-1) ... (n-k+1)>``."""
    n = np.arange(state.dim)
    ff = np.array([math.perm(int(x), k) for x in n], dtype=float)
    return float(np.dot(ff, state.populations))
