"""Choose laser weights that shape the combined coupling's power series.

With ``N`` simultaneous lasers of distinct Lamb-Dicke parameters the first
``N`` Taylor coefficients of ``F(n) = sum_j w_j f(n; eta_j)`` are a linear
function ``c = M w`` of the weights, so any ``N`` of them can be dialled in.
Setting ``c = e_p`` turns ``F`` into ``n^p`` up to an uncontrolled tail that
starts at ``n^N``.

Weights may be negative; physically that is a laser phase shifted by pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import couplings
from .errors import DomainError, IllConditionedError, SingularityError

MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class EngineeringProblem:
    """Target coefficients ``c_0 ... c_{N-1}`` for lasers at ``etas``."""

    etas: np.ndarray
    target: np.ndarray
    m_max: int | None = None
    kind: str = "f0"

    def __post_init__(self):
        etas = np.atleast_1d(np.asarray(self.etas, dtype=float))
        target = np.atleast_1d(np.asarray(self.target, dtype=float))
        if etas.ndim != 1 or len(etas) == 0:
            raise DomainError("etas must be a non-empty vector")
        if target.shape != etas.shape:
            raise DomainError(
                f"need one target coefficient per laser: {len(target)} targets, {len(etas)} etas"
            )
        if np.any(etas <= 0):
            raise DomainError("Lamb-Dicke parameters must be strictly positive")
        _check_distinct(etas)
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "target", target)

    @property
    def n_lasers(self):
        return len(self.etas)


@dataclass(frozen=True, eq=False)
class EngineeringSolution:
    """Solved weights plus the bookkeeping needed to use them physically.

    ``weights`` solve ``M w = target`` exactly.  Physical Rabi-frequency ratios
    ``omega_ratio`` are the same vector divided by ``scale`` (the signed entry
    of largest magnitude), so a drive built from ``omega_ratio`` realizes the
    target divided by ``scale``.  For ``kind="f1"`` the weights are effective
    products ``Omega_j eta_j / Omega_L`` and ``omega_ratio`` undoes the eta.
    """

    weights: np.ndarray
    omega_ratio: np.ndarray
    scale: float
    condition_number: float
    etas: np.ndarray
    target: np.ndarray
    kind: str = "f0"
    m_max: int = 0
    residual_profile: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def needs_phase_flip(self):
        """Lasers whose Rabi frequency must be negative (pi phase offset)."""
        return np.flatnonzero(self.omega_ratio < 0)

    def drive_set(self, kind=None):
        """Drives realizing this solution with ``max |Omega_j| = Omega_L``."""
        from .dynamics import DriveSet

        if kind is None:
            kind = "carrier" if self.kind == "f0" else "red_sideband"
        return DriveSet(kind, self.omega_ratio, self.etas, time_convention="omega",
                        scale=self.scale)


def _check_distinct(etas):
    s = np.sort(etas)
    if len(s) > 1 and np.any(np.diff(s) == 0):
        raise SingularityError(f"repeated Lamb-Dicke parameters {etas} make the system singular")


def equispaced_etas(n_lasers, eta_max):
    """``n_lasers`` values equispaced on ``[eta_max / n_lasers, eta_max]``."""
    if n_lasers < 1 or eta_max <= 0:
        raise DomainError("need n_lasers >= 1 and eta_max > 0")
    return eta_max * np.arange(1, n_lasers + 1) / n_lasers


def coefficient_matrix(etas, p_max=None, m_max=None, kind="f0"):
    """Matrix ``M`` with ``c = M @ w`` for coefficients ``c_0 ... c_{p_max-1}``.

    ``p_max`` is the number of rows and defaults to the number of lasers.
    """
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    _check_distinct(etas)
    rows = len(etas) if p_max is None else int(p_max)
    if m_max is None:
        m_max = couplings.default_m_max(float(etas.max()), rows - 1)
    cols = [couplings.per_laser_coeffs(e, rows - 1, m_max, kind) for e in etas]
    return np.column_stack(cols)


def _full_pivot_solve(a, b):
    """Gaussian elimination with complete pivoting."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = len(b)
    perm = np.arange(n)
    for k in range(n):
        sub = np.abs(a[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        if a[i, j] == 0.0:
            raise SingularityError("coefficient matrix is singular")
        a[[k, i]] = a[[i, k]]
        b[[k, i]] = b[[i, k]]
        a[:, [k, j]] = a[:, [j, k]]
        perm[[k, j]] = perm[[j, k]]
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(f, a[k, k:])
        b[k + 1:] -= f * b[k]
    y = np.empty(n)
    for k in range(n - 1, -1, -1):
        y[k] = (b[k] - a[k, k + 1:] @ y[k + 1:]) / a[k, k]
    x = np.empty(n)
    x[perm] = y
    return x


def solve_linear(m, rhs):
    """Dense solve with complete pivoting and one step of iterative refinement."""
    x = _full_pivot_solve(m, rhs)
    r = rhs - m @ x
    return x + _full_pivot_solve(m, r)


def solve_weights(problem, d=None):
    """Solve for the weights realizing ``problem.target``.

    Parameters
    ----------
    problem : EngineeringProblem
    d : int, optional
        If given, the residual profile ``|F(n) - sum_p t_p n^p|`` is
        evaluated for ``n < d``.

    Raises
    ------
    SingularityError
        Repeated Lamb-Dicke parameters or an exactly singular matrix.
    IllConditionedError
        Condition number above 1e12; respace the etas.
    """
    m = coefficient_matrix(problem.etas, None, problem.m_max, problem.kind)
    cond = float(np.linalg.cond(m))
    if not np.isfinite(cond):
        raise SingularityError("coefficient matrix is singular")
    if cond > MAX_CONDITION:
        raise IllConditionedError(
            f"condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}; "
            "spread the Lamb-Dicke parameters further apart",
            condition_number=cond,
        )
    w = solve_linear(m, problem.target)
    physical = w / problem.etas if problem.kind == "f1" else w.copy()
    if np.all(physical == 0):
        scale = 0.0
        ratio = np.zeros_like(physical)
    else:
        scale = float(physical[np.argmax(np.abs(physical))])
        ratio = physical / scale
    m_max = problem.m_max
    if m_max is None:
        m_max = couplings.default_m_max(float(problem.etas.max()), len(w) - 1)
    profile = np.zeros(0)
    if d is not None:
        profile = residual_profile(w, problem.etas, problem.target, d, problem.kind)
    return EngineeringSolution(
        weights=w,
        omega_ratio=ratio,
        scale=scale,
        condition_number=cond,
        etas=problem.etas,
        target=problem.target,
        kind=problem.kind,
        m_max=int(m_max),
        residual_profile=profile,
    )


def engineer_monomial(p, etas, kind="f0", m_max=None, d=None):
    """Weights making the combined coupling equal ``n^p`` up to order ``N``."""
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if not 0 <= p < len(etas):
        raise DomainError(f"monomial order {p} must be below the number of lasers {len(etas)}")
    target = np.zeros(len(etas))
    target[p] = 1.0
    return solve_weights(EngineeringProblem(etas, target, m_max, kind), d=d)


def residual_profile(weights, etas, target, d, kind="f0"):
    """``|F(n) - sum_p target_p n^p|`` for ``n < d``."""
    f = couplings.combined_diag(weights, etas, d, kind)
    poly = np.polynomial.polynomial.polyval(np.arange(d, dtype=float), target)
    return np.abs(f - poly)


def residual_bound(n_lasers, eta_max, nbar_proxy, order_p=None):
    """Rough size of the uncontrolled ``n^N`` term: ``e^{-eta^2/2} eta^{2N}/N!^2 nbar^N``.

    ``order_p`` is accepted for interface symmetry and does not enter the
    estimate.  The estimate ignores how large the solved weights are, so
    for strongly ill-conditioned systems it can undershoot; use
    :func:`verify_monomial` for a hard check.
    """
    if n_lasers < 1 or eta_max < 0:
        raise DomainError("need n_lasers >= 1 and eta_max >= 0")
    n = int(n_lasers)
    return (math.exp(-eta_max ** 2 / 2) * eta_max ** (2 * n) / math.factorial(n) ** 2
            * nbar_proxy ** n)


@dataclass(frozen=True, eq=False)
class MonomialReport:
    p: int
    profile: np.ndarray
    max_residual: float
    n_checked: int
    dynamics_profile: np.ndarray | None = None
    dynamics_max_deviation: float | None = None


def verify_monomial(solution, etas, d, p, k_guard=2, through_dynamics=True):
    """Check how closely the engineered coupling matches ``n^p``.

    The direct check evaluates the combined coupling for ``n < d - k_guard``.
    The dynamics check prepares ``|+_{pi/2}> (x) |n><n|``, builds the physical
    carrier Hamiltonian from ``omega_ratio`` and converts its exact initial
    slope back to ``F(n)`` via ``-slope * scale``.
    """
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    n_checked = d - k_guard
    prof = residual_profile(solution.weights, etas, solution.target, d,
                            solution.kind)[:n_checked]
    dyn_prof = None
    dyn_dev = None
    if through_dynamics and solution.kind == "f0" and solution.scale != 0:
        from . import dynamics, fock

        h = dynamics.build_carrier(solution.drive_set(), d)
        probe = fock.ProbeState(+1, np.pi / 2)
        f_dyn = np.array([
            -dynamics.ehrenfest_slope(fock.hybrid_product(probe, fock.fock_state(n, d)), h)
            * solution.scale
            for n in range(n_checked)
        ])
        poly = np.polynomial.polynomial.polyval(np.arange(n_checked, dtype=float),
                                                solution.target)
        dyn_prof = np.abs(f_dyn - poly)
        dyn_dev = float(np.max(np.abs(dyn_prof - prof)))
    return MonomialReport(p, prof, float(prof.max()), n_checked, dyn_prof, dyn_dev)
