"""Chain of N two-level ions sharing N collective motional modes.

A single carrier laser couples every ion through the product coupling
``F(n_1, ..., n_N) = prod_j f0(n_j; eta_j)``.  Preparing ion ``k`` in
``|+-_phi>`` and measuring only its excited population gives

    d(P_e)_k/dtau |_0 = -+ sin(phi) <F>

regardless of the internal state of the other ions.

Ordering is internal-major: ion 0 is the most significant internal bit,
followed by the modes with mode 0 most significant.  Mode frequencies do
not enter the interaction-picture dynamics; they are stored for
bookkeeping only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import couplings
from .dynamics import InteractionHamiltonian, evolve
from .errors import DomainError, ResourceError
from .fock import SIGMA_X, check_density_matrix

DEFAULT_DIM_CAP = 4096


@dataclass(frozen=True, eq=False)
class ChainConfig:
    n_ions: int
    mode_dims: tuple
    mode_etas: tuple
    mode_frequencies: tuple | None = None
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if self.n_ions < 1:
            raise DomainError("need at least one ion")
        dims = tuple(int(x) for x in self.mode_dims)
        etas = tuple(float(x) for x in self.mode_etas)
        if len(dims) != self.n_ions or len(etas) != self.n_ions:
            raise DomainError(
                f"{self.n_ions} ions need {self.n_ions} modes; got {len(dims)} dims, "
                f"{len(etas)} etas"
            )
        if any(x < 2 for x in dims) or any(e < 0 for e in etas):
            raise DomainError("mode dims must be >= 2 and etas >= 0")
        object.__setattr__(self, "mode_dims", dims)
        object.__setattr__(self, "mode_etas", etas)

    @property
    def internal_dim(self):
        return 2 ** self.n_ions

    @property
    def mode_dim(self):
        return int(np.prod(self.mode_dims))

    @property
    def total_dim(self):
        return self.internal_dim * self.mode_dim


@dataclass(frozen=True, eq=False)
class ChainState:
    """Density matrix over ``2^N (x) prod(mode_dims)``."""

    config: ChainConfig
    matrix: np.ndarray
    check: bool = True

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.config.total_dim
        if m.shape != (n, n):
            raise DomainError(f"chain matrix shape {m.shape}, expected {(n, n)}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.check:
            check_density_matrix(m, "ChainState")

    def with_matrix(self, matrix):
        return ChainState(self.config, matrix, check=False)

    def ion_excited_population(self, k):
        _check_ion(self.config, k)
        diag = np.real(np.diag(self.matrix)).reshape(self.config.internal_dim, -1).sum(axis=1)
        bits = (np.arange(self.config.internal_dim) >> (self.config.n_ions - 1 - k)) & 1
        return float(diag[bits == 1].sum())


def _check_ion(config, k):
    if int(k) != k or not 0 <= k < config.n_ions:
        raise DomainError(f"ion index {k} outside 0..{config.n_ions - 1}")


def _check_size(config):
    if config.total_dim > config.dim_cap:
        raise ResourceError(
            f"chain Hilbert space has dimension {config.total_dim} > cap {config.dim_cap}",
            size=config.total_dim,
        )


def collective_coupling(config):
    """Diagonal of ``prod_j f0(n_j; eta_j)`` over the joint mode space."""
    diags = [couplings.f0_diag(e, d).values for e, d in zip(config.mode_etas, config.mode_dims)]
    return reduce(np.multiply.outer, diags).ravel()


def _ion_operator(op, k, n_ions):
    mats = [np.eye(2)] * n_ions
    mats[k] = op
    return reduce(np.kron, mats)


def build_chain_carrier(config):
    """``(sum_k s+_k + s-_k) (x) F`` as the coefficient of ``tau = Omega_L t/2``."""
    _check_size(config)
    sx = sum(_ion_operator(SIGMA_X, k, config.n_ions) for k in range(config.n_ions))
    m = np.kron(sx, np.diag(collective_coupling(config)))
    return InteractionHamiltonian(m, "carrier", None)


def _as_matrix(x, n, what):
    m = np.asarray(getattr(x, "matrix", x), dtype=complex)
    if m.shape != (n, n):
        raise DomainError(f"{what} has shape {m.shape}, expected {(n, n)}")
    return m


def product_modes(*states):
    """Joint motional density matrix ``rho_1 (x) rho_2 (x) ...``."""
    return reduce(np.kron, [np.asarray(getattr(s, "matrix", s)) for s in states])


def chain_initial_state(config, k, probe, rho_a, rho_f):
    """``rho_k (x) rho_A (x) rho_f`` with ``rho_k`` placed at ion ``k``."""
    _check_ion(config, k)
    n = config.n_ions
    others = 2 ** (n - 1)
    ra = np.eye(1) if rho_a is None and n == 1 else _as_matrix(rho_a, others, "rho_A")
    rf = _as_matrix(rho_f, config.mode_dim, "rho_f")
    # (ion k, other ions...) ordering, then move ion k into place
    internal = np.kron(probe.density_matrix(), ra).reshape((2,) * (2 * n))
    order = list(range(1, n))
    order.insert(k, 0)
    perm = order + [n + i for i in order]
    internal = internal.transpose(perm).reshape(2 ** n, 2 ** n)
    return ChainState(config, np.kron(internal, rf), check=False)


def collective_mean(config, rho_f):
    """``<F>`` over the joint motional state."""
    rf = _as_matrix(rho_f, config.mode_dim, "rho_f")
    return float(np.real(np.dot(np.diag(rf), collective_coupling(config))))


def collective_slope(config, k, probe, rho_a, rho_f):
    """Analytic ``d(P_e)_k/dtau`` at zero: ``-sign sin(phi) <F>``.

    ``rho_a`` is validated but, as the result shows, never enters.
    """
    _check_ion(config, k)
    if config.n_ions > 1:
        check_density_matrix(_as_matrix(rho_a, 2 ** (config.n_ions - 1), "rho_A"), "rho_A")
    return -probe.sign * np.sin(probe.phase) * collective_mean(config, rho_f)


def simulated_collective_slope(config, k, probe, rho_a, rho_f, step=1e-4, h=None):
    """Central-difference slope of ion ``k``'s excited population under the chain carrier."""
    h = build_chain_carrier(config) if h is None else h
    rho0 = chain_initial_state(config, k, probe, rho_a, rho_f)
    plus = evolve(h, rho0, step).ion_excited_population(k)
    minus = evolve(h, rho0, -step).ion_excited_population(k)
    return (plus - minus) / (2 * step)
