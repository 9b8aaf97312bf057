"""Phonon-number moments and quadratures of a trapped ion from short-time probe slopes.

The package is organised bottom-up:

``fock``
    truncated Fock-space states and operators;
``couplings``
    the nonlinear carrier/sideband couplings ``f0``, ``f1`` and their
    Lamb-Dicke power series;
``engineering``
    Rabi-frequency weights that make a multi-laser coupling match a target
    polynomial in the phonon number;
``dynamics``
    interaction Hamiltonians, evolution and initial-slope identities;
``protocols``
    measurement recipes for moments, Fano-Mandel ``Q`` and quadratures;
``multi_ion``
    collective readout in an ``N``-ion chain;
``reconstruction``
    phonon distributions from finitely many moments;
``cli``
    JSON scenario runner.
"""

__version__ = "0.1.0"

from . import couplings, dynamics, engineering, fock, multi_ion, protocols, reconstruction
from .couplings import (
    CouplingDiag,
    TaylorCoeffs,
    a_pm,
    combined_diag,
    f0_diag,
    f1_diag,
    laguerre_oracle,
    taylor_coeffs,
)
from .dynamics import DriveSet, InteractionHamiltonian, analytic_slope, build_hamiltonian, evolve
from .engineering import (
    EngineeringProblem,
    EngineeringSolution,
    engineer_monomial,
    residual_bound,
    solve_weights,
    verify_monomial,
)
from .errors import (
    DomainError,
    IllConditionedError,
    InconsistencyError,
    PhononProbeError,
    PrecisionError,
    ResourceError,
    SingularityError,
    TruncationWarning,
    UndefinedError,
)
from .fock import (
    FockBasis,
    HybridState,
    MotionalState,
    ProbeState,
    coherent_state,
    fock_state,
    number_moment,
    thermal_state,
)
from .multi_ion import ChainConfig, collective_slope, simulated_collective_slope
from .protocols import (
    MeasurementPlan,
    estimate_slope,
    fano_mandel,
    moment_engineered,
    moments_two_eta,
    quadrature_measure,
)
from .reconstruction import MomentVector, moments_to_distribution

__all__ = [name for name in dir() if not name.startswith("_")]
