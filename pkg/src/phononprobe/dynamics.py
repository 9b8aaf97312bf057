"""Interaction-picture Hamiltonians, exact evolution and initial slopes.

Hamiltonians are stored as the coefficient of the dimensionless time ``tau``
(hbar = 1).  For the carrier and for several sideband lasers
``tau = Omega_L t / 2``; for a single sideband laser the convention
``tau = eta Omega_L t / 2`` is the default, which removes the explicit
``eta`` from the coupling.  The convention in force is recorded on the
:class:`DriveSet`.

Carrier:        H = (s+ + s-) (x) F0(n)
Red sideband:   H = i s+ (x) F1(n) a  - i s- (x) a^dag F1(n)
Blue sideband:  H = i s+ (x) a^dag F1(n) - i s- (x) F1(n) a
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import couplings
from .errors import DomainError
from .fock import (
    EXCITED,
    GROUND,
    create,
    destroy,
    excited_population,
    excited_projector,
)

__all__ = [
    "DriveSet",
    "InteractionHamiltonian",
    "build_carrier",
    "build_sideband",
    "build_hamiltonian",
    "evolve",
    "excited_population",
    "analytic_slope",
    "ehrenfest_slope",
    "finite_difference_slope",
    "effective_coupling",
]

DRIVE_KINDS = ("carrier", "red_sideband", "blue_sideband")
TIME_CONVENTIONS = {
    "omega": "tau = Omega_L t / 2",
    "eta_omega": "tau = eta Omega_L t / 2 (single sideband laser)",
}


@dataclass(frozen=True, eq=False)
class DriveSet:
    """Simultaneous lasers of one kind.

    Parameters
    ----------
    kind : {"carrier", "red_sideband", "blue_sideband"}
    weights : array_like
        Rabi-frequency ratios ``Omega_j / Omega_L``; negative entries mean a
        pi-shifted laser phase.
    etas : array_like
        Lamb-Dicke parameter of each laser.
    time_convention : {"omega", "eta_omega"}, optional
        Defaults to ``"eta_omega"`` for a single sideband laser and
        ``"omega"`` otherwise.
    scale : float
        Known multiplier carried from the engineering step: the coupling the
        drives realize is the engineered target divided by ``scale``.
    """

    kind: str
    weights: np.ndarray
    etas: np.ndarray
    time_convention: str | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in DRIVE_KINDS:
            raise DomainError(f"drive kind must be one of {DRIVE_KINDS}, got {self.kind!r}")
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        e = np.atleast_1d(np.asarray(self.etas, dtype=float))
        if w.shape != e.shape or w.ndim != 1 or len(w) == 0:
            raise DomainError(f"weights {w.shape} and etas {e.shape} must be equal-length vectors")
        if np.any(e < 0):
            raise DomainError("Lamb-Dicke parameters must be >= 0")
        tc = self.time_convention
        if tc is None:
            tc = "eta_omega" if self.is_sideband and len(w) == 1 else "omega"
        if tc not in TIME_CONVENTIONS:
            raise DomainError(f"unknown time convention {tc!r}")
        if tc == "eta_omega" and not (self.is_sideband and len(w) == 1):
            raise DomainError("the eta-scaled time convention applies to a single sideband laser")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "etas", e)
        object.__setattr__(self, "time_convention", tc)
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def single(cls, kind, eta, weight=1.0, **kw):
        return cls(kind, [weight], [eta], **kw)

    @property
    def is_sideband(self):
        return self.kind != "carrier"

    @property
    def n_lasers(self):
        return len(self.weights)

    def describe_time(self):
        return TIME_CONVENTIONS[self.time_convention]


def effective_coupling(drives, d):
    """Diagonal of ``F0`` (carrier) or ``F1`` (sideband) realized by ``drives``."""
    if not drives.is_sideband:
        return couplings.combined_diag(drives.weights, drives.etas, d, "f0")
    if drives.time_convention == "eta_omega":
        return drives.weights[0] * couplings.f1_diag(drives.etas[0], d).values
    return couplings.combined_diag(drives.weights * drives.etas, drives.etas, d, "f1")


@dataclass(frozen=True, eq=False)
class InteractionHamiltonian:
    """Hermitian generator of ``exp(-i H tau)`` on the hybrid space."""

    matrix: np.ndarray
    kind: str
    drives: DriveSet | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        herm = np.max(np.abs(m - m.conj().T))
        if herm > 1e-13:
            raise DomainError(f"Hamiltonian is not Hermitian (deviation {herm:.2e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @cached_property
    def eig(self):
        """Cached eigendecomposition ``(energies, vectors)``."""
        return np.linalg.eigh(self.matrix)

    def propagator(self, tau):
        vals, vecs = self.eig
        return (vecs * np.exp(-1j * vals * tau)) @ vecs.conj().T


def _internal_block(op_eg, d):
    """``|e><g| (x) op_eg + h.c.`` in internal-major ordering."""
    h = np.zeros((2 * d, 2 * d), dtype=complex)
    h[EXCITED * d:(EXCITED + 1) * d, GROUND * d:(GROUND + 1) * d] = op_eg
    h[GROUND * d:(GROUND + 1) * d, EXCITED * d:(EXCITED + 1) * d] = op_eg.conj().T
    return h


def build_carrier(drives, d):
    """``(s+ + s-) (x) diag(F0)``; a single unit-weight laser gives ``f0(n; eta)``."""
    if drives.kind != "carrier":
        raise DomainError(f"build_carrier needs carrier drives, got {drives.kind}")
    f = effective_coupling(drives, d)
    return InteractionHamiltonian(_internal_block(np.diag(f).astype(complex), d), "carrier", drives)


def build_sideband(drives, d):
    """First red or blue sideband coupling, keeping the explicit ``i`` phase."""
    if not drives.is_sideband:
        raise DomainError(f"build_sideband needs sideband drives, got {drives.kind}")
    f = np.diag(effective_coupling(drives, d))
    if drives.kind == "red_sideband":
        op = 1j * f @ destroy(d)
    else:
        op = 1j * create(d) @ f
    return InteractionHamiltonian(_internal_block(op, d), drives.kind, drives)


def build_hamiltonian(drives, d):
    return build_sideband(drives, d) if drives.is_sideband else build_carrier(drives, d)


def evolve(h, rho0, tau):
    """``U rho U^dag`` with ``U = exp(-i H tau)``; negative ``tau`` allowed."""
    if h.dim != rho0.matrix.shape[0]:
        raise DomainError(f"Hamiltonian dim {h.dim} vs state dim {rho0.matrix.shape[0]}")
    if tau == 0:
        return rho0
    u = h.propagator(tau)
    m = u @ rho0.matrix @ u.conj().T
    m = 0.5 * (m + m.conj().T)
    return rho0.with_matrix(m)


def analytic_slope(probe, rho_f, drives):
    """Closed-form ``dP_e/dtau`` at ``tau = 0`` for ``|probe><probe| (x) rho_f``.

    Carrier: ``-sign sin(phi) <F0>``.
    Red sideband: ``sign * Re(exp(-i phi) <F1 a>)``, i.e.
    ``sign/2 <F1 a e^{-i phi} + a^dag F1 e^{i phi}>``.
    Blue sideband: the same with ``a^dag F1`` in place of ``F1 a``.
    """
    d = rho_f.dim
    f = effective_coupling(drives, d)
    rho = rho_f.matrix
    if drives.kind == "carrier":
        mean_f = float(np.real(np.dot(np.diag(rho), f)))
        return -probe.sign * np.sin(probe.phase) * mean_f
    a = destroy(d)
    op = np.diag(f) @ a if drives.kind == "red_sideband" else create(d) @ np.diag(f)
    mean = np.einsum("ij,ji->", rho, op)
    return float(probe.sign * np.real(np.exp(-1j * probe.phase) * mean))


def ehrenfest_slope(rho, h, projector=None):
    """``-i Tr[rho [P, H]]`` with ``P = |e><e| (x) 1`` unless given."""
    if projector is None:
        projector = excited_projector(h.dim // 2)
    comm = projector @ h.matrix - h.matrix @ projector
    return float(np.real(-1j * np.einsum("ij,ji->", rho.matrix, comm)))


def finite_difference_slope(h, rho0, step, population=excited_population):
    """Central difference ``[P(step) - P(-step)] / (2 step)``."""
    plus = population(evolve(h, rho0, step))
    minus = population(evolve(h, rho0, -step))
    return (plus - minus) / (2 * step)
