"""End-to-end measurement recipes built on the initial excited-state slope.

Every recipe prepares ``|+-_phi> (x) rho_f``, drives the ion for a short
time and reads ``dP_e/dtau`` at ``tau = 0``:

* carrier drives give ``-+ sin(phi) <F0(n)>``, from which phonon-number
  moments follow (two Lamb-Dicke parameters, or engineered monomials);
* sideband drives give ``+- <X_phi>``-type quadratures.

Slopes are either exact (commutator at ``tau = 0``) or fitted from a
simulated population curve with optional binomial shot noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, engineering
from .errors import DomainError, PrecisionError, SingularityError, UndefinedError
from .fock import (
    ProbeState,
    destroy,
    excited_population,
    hybrid_product,
    leakage,
)

LEAKAGE_LIMIT = 1e-8
MAX_TAU = 0.2
SLOPE_METHODS = ("exact_analytic", "fit_noiseless", "fit_shots")
MOMENT_ROUTES = ("two_eta", "engineered", "oracle")


def default_tau_grid():
    return np.geomspace(0.01, 0.15, 8)


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    """How the initial slope is obtained.

    ``shots_per_point`` is ``"exact"`` (commutator at ``tau = 0``, no fit),
    ``"noiseless"`` (fit to exact populations on ``tau_grid``) or a positive
    number of binomial shots per grid point.  Randomness is keyed on
    ``(seed, point index)`` so results do not depend on evaluation order.
    """

    tau_grid: np.ndarray = field(default_factory=default_tau_grid)
    shots_per_point: int | str = "exact"
    seed: int = 0
    fit_order: int = 2

    def __post_init__(self):
        grid = np.atleast_1d(np.asarray(self.tau_grid, dtype=float))
        if grid.ndim != 1 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise DomainError("tau_grid must be strictly increasing positive times")
        if grid.max() > MAX_TAU:
            raise DomainError(f"tau_grid max {grid.max()} exceeds {MAX_TAU}")
        if self.fit_order not in (1, 2):
            raise DomainError(f"fit_order must be 1 or 2, got {self.fit_order}")
        shots = self.shots_per_point
        if isinstance(shots, str):
            if shots not in ("exact", "noiseless"):
                raise DomainError(f"unknown shots sentinel {shots!r}")
        elif int(shots) != shots or shots < 1:
            raise DomainError(f"shots_per_point must be >= 1, got {shots}")
        else:
            shots = int(shots)
        object.__setattr__(self, "tau_grid", grid)
        object.__setattr__(self, "shots_per_point", shots)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def method(self):
        if self.shots_per_point == "exact":
            return "exact_analytic"
        if self.shots_per_point == "noiseless":
            return "fit_noiseless"
        return "fit_shots"

    def replace(self, **kw):
        fields = dict(tau_grid=self.tau_grid, shots_per_point=self.shots_per_point,
                      seed=self.seed, fit_order=self.fit_order)
        fields.update(kw)
        return MeasurementPlan(**fields)


EXACT = MeasurementPlan()


@dataclass(frozen=True)
class SlopeEstimate:
    value: float
    stderr: float
    method: str

    def __post_init__(self):
        if self.method not in SLOPE_METHODS:
            raise DomainError(f"unknown slope method {self.method!r}")
        if self.stderr < 0 or (self.method == "exact_analytic" and self.stderr != 0):
            raise DomainError("exact slopes carry zero standard error")


@dataclass(frozen=True)
class MomentEstimate:
    """Estimate of ``<n^p>``; ``budget`` splits ``stderr`` into labelled parts."""

    p: int
    value: float
    stderr: float
    route: str
    budget: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.route not in MOMENT_ROUTES:
            raise DomainError(f"unknown moment route {self.route!r}")


@dataclass(frozen=True)
class FanoMandel:
    value: float
    stderr: float


@dataclass(frozen=True)
class QuadratureEstimate:
    """``<X_phi>``; ``flatness`` is ``max |F1(n) - 1|`` over populated levels."""

    phi: float
    value: float
    stderr: float
    flatness: float
    method: str = "exact_analytic"


def point_rng(seed, index):
    """Counter-style generator for grid point ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def _pinned_fit(tau, y, order, weights=None):
    """Least squares for ``y = sum_{k=1}^{order} b_k tau^k`` (no intercept)."""
    x = np.column_stack([tau ** k for k in range(1, order + 1)])
    w = np.ones_like(tau) if weights is None else weights
    xtw = x.T * w
    cov_unscaled = np.linalg.inv(xtw @ x)
    coef = cov_unscaled @ (xtw @ y)
    return coef, cov_unscaled, x


def estimate_slope(h, probe, rho_f, plan=EXACT, check_leakage=True):
    """``dP_e/dtau`` at ``tau = 0`` for ``|probe><probe| (x) rho_f`` under ``h``.

    Fits pin the intercept at the exact initial population (1/2) and use a
    binomial variance model ``P(1-P)/shots`` evaluated on a first-pass fit.
    """
    if check_leakage and rho_f.dim > 2:
        leak = leakage(rho_f, 2)
        if leak >= LEAKAGE_LIMIT:
            raise PrecisionError(
                f"{leak:.2e} of the population sits in the top two Fock levels; "
                "enlarge the truncation"
            )
    rho0 = hybrid_product(probe, rho_f)
    if plan.method == "exact_analytic":
        return SlopeEstimate(dynamics.ehrenfest_slope(rho0, h), 0.0, "exact_analytic")
    tau = plan.tau_grid
    if len(tau) < plan.fit_order:
        raise DomainError(f"{len(tau)} grid points cannot support a fit of order {plan.fit_order}")
    p0 = excited_population(rho0)
    pops = np.array([excited_population(dynamics.evolve(h, rho0, t)) for t in tau])
    if plan.method == "fit_noiseless":
        coef, cov, x = _pinned_fit(tau, pops - p0, plan.fit_order)
        dof = len(tau) - plan.fit_order
        s2 = float(np.sum((pops - p0 - x @ coef) ** 2) / dof) if dof > 0 else 0.0
        return SlopeEstimate(float(coef[0]), math.sqrt(s2 * cov[0, 0]), "fit_noiseless")
    shots = plan.shots_per_point
    clipped = np.clip(pops, 0.0, 1.0)
    counts = np.array([point_rng(plan.seed, k).binomial(shots, q) for k, q in enumerate(clipped)])
    freq = counts / shots
    coef, _, x = _pinned_fit(tau, freq - p0, plan.fit_order)
    model = np.clip(p0 + x @ coef, 1.0 / shots, 1.0 - 1.0 / shots)
    var = model * (1.0 - model) / shots
    coef, cov, _ = _pinned_fit(tau, freq - p0, plan.fit_order, 1.0 / var)
    return SlopeEstimate(float(coef[0]), math.sqrt(cov[0, 0]), "fit_shots")


# -- phonon-number moments -------------------------------------------------

def carrier_mean_from_slope(slope, probe):
    """Invert ``slope = -sign sin(phi) <F0>`` for ``<F0>``."""
    s = math.sin(probe.phase)
    if abs(s) < 1e-12:
        raise UndefinedError("sin(phi) = 0: the carrier slope carries no information")
    return -slope / (probe.sign * s)


def measure_f0_mean(rho_f, eta, plan=EXACT, probe=ProbeState(+1, np.pi / 2)):
    """``<f0(n; eta)>`` (value, stderr) from a single-laser carrier slope."""
    h = dynamics.build_carrier(dynamics.DriveSet.single("carrier", eta), rho_f.dim)
    est = estimate_slope(h, probe, rho_f, plan)
    k = abs(math.sin(probe.phase))
    return carrier_mean_from_slope(est.value, probe), est.stderr / k


def moments_two_eta(f0_mean_1, eta1, f0_mean_2, eta2, stderr1=0.0, stderr2=0.0,
                    model="factorial"):
    """``<n>`` and ``<n^2>`` from ``<f0>`` measured at two Lamb-Dicke parameters.

    ``model="truncated"`` solves ``<f0(eta_i)> = 1 - eta_i^2 <n> + eta_i^4/4 <n^2>``
    literally.  That relation drops the ``exp(-eta^2/2)`` prefactor (an
    ``O(eta^2)`` constant) and treats the falling factorial ``n(n-1)`` as
    ``n^2``, so it is biased at the same order as the signal.

    ``model="factorial"`` (default) first divides out ``exp(-eta_i^2/2)`` and
    solves for ``<n>`` and ``<n(n-1)>``, whose coefficients ``-eta^2`` and
    ``eta^4/4`` are exact; the remaining bias comes from
    ``eta^6 <n(n-1)(n-2)>/36``.  Then ``<n^2> = <n(n-1)> + <n>``.

    Standard errors propagate linearly and the two inputs are treated as
    independent.
    """
    if eta1 <= 0 or eta2 <= 0:
        raise SingularityError("Lamb-Dicke parameters must be positive")
    if eta1 == eta2:
        raise SingularityError("the two Lamb-Dicke parameters must differ")
    if model not in ("factorial", "truncated"):
        raise DomainError(f"unknown model {model!r}")
    etas = np.array([eta1, eta2], dtype=float)
    f = np.array([f0_mean_1, f0_mean_2], dtype=float)
    sf = np.array([stderr1, stderr2], dtype=float)
    if model == "factorial":
        pref = np.exp(etas ** 2 / 2)
        f = f * pref
        sf = sf * pref
    a = np.column_stack([-etas ** 2, etas ** 4 / 4])
    ainv = np.linalg.inv(a)
    x = ainv @ (f - 1.0)
    jac = ainv.copy()
    if model == "factorial":
        x[1] += x[0]
        jac[1] += jac[0]
    errs = np.sqrt((jac ** 2) @ (sf ** 2))
    return (
        MomentEstimate(1, float(x[0]), float(errs[0]), "two_eta"),
        MomentEstimate(2, float(x[1]), float(errs[1]), "two_eta"),
    )


def fano_mandel(n1, n2):
    """``Q = (<n^2> - <n>^2) / <n>`` with first-order error propagation."""
    m1, m2 = n1.value, n2.value
    if m1 <= 0:
        raise UndefinedError(f"Fano-Mandel parameter undefined for <n> = {m1}")
    q = (m2 - m1 ** 2) / m1
    dq1 = -m2 / m1 ** 2 - 1.0
    dq2 = 1.0 / m1
    return FanoMandel(q, math.hypot(dq1 * n1.stderr, dq2 * n2.stderr))


def default_support(rho_f, tail=1e-12):
    """Smallest ``n_s`` with less than ``tail`` population above level ``n_s``."""
    pops = rho_f.populations
    above = np.cumsum(pops[::-1])[::-1]  # above[n] = sum_{k>=n} p_k
    idx = np.flatnonzero(above >= tail)
    return int(idx.max()) if len(idx) else 0


def moment_engineered(rho_f, p, etas, plan=EXACT, n_support=None, tolerance=None,
                      m_max=None):
    """``<n^p>`` from one carrier slope with engineered ``F0(n) = n^p``.

    The probe is ``|+_{pi/2}>``.  The reported ``stderr`` is the sum of the
    parts recorded in ``budget``:

    ``statistical``
        fit standard error times the engineering scale;
    ``engineering``
        ``max |F0(n) - n^p|`` for ``n <= n_support``, a hard bound on the
        uncontrolled series tail for states supported on those levels;
    ``truncation``
        top-two-level population times ``(d-1)^p``;
    ``numerical``
        a floating-point floor for cancellation between large weights.

    ``n_support`` defaults to the level above which less than 1e-12 of the
    simulated population lies.
    """
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    sol = engineering.engineer_monomial(p, etas, "f0", m_max=m_max)
    d = rho_f.dim
    if n_support is None:
        n_support = default_support(rho_f)
    n_support = min(int(n_support), d - 1)
    prof = engineering.residual_profile(sol.weights, etas, sol.target, d)
    eng = float(prof[:n_support + 1].max())
    if tolerance is not None and eng > tolerance:
        raise PrecisionError(
            f"engineered residual {eng:.3e} over n <= {n_support} exceeds tolerance {tolerance:.3e}"
        )
    drives = sol.drive_set()
    h = dynamics.build_carrier(drives, d)
    probe = ProbeState(+1, np.pi / 2)
    est = estimate_slope(h, probe, rho_f, plan)
    value = -est.value * sol.scale
    stat = est.stderr * abs(sol.scale)
    trunc = leakage(rho_f, 2) * float(d - 1) ** p if d > 2 else 0.0
    # float cancellation between large signed weights
    numerical = 64 * np.finfo(float).eps * (np.abs(sol.weights).sum() + abs(value))
    budget = {
        "statistical": stat,
        "engineering": eng,
        "truncation": trunc,
        "numerical": float(numerical),
        "scale": sol.scale,
        "condition_number": sol.condition_number,
        "n_support": n_support,
        "ld_estimate": engineering.residual_bound(len(etas), float(etas.max()),
                                                     float(n_support), p),
    }
    total = stat + eng + trunc + float(numerical)
    return MomentEstimate(int(p), float(value), total, "engineered", budget)


# -- quadratures -----------------------------------------------------------

def generalized_quadrature_oracle(rho_f, fdiag, phi):
    """``1/2 <F(n) a e^{-i phi} + a^dag F(n) e^{i phi}>`` by direct trace.

    ``fdiag`` is a scalar or a diagonal of length ``rho_f.dim``.
    """
    d = rho_f.dim
    f = np.broadcast_to(np.asarray(fdiag, dtype=float), (d,))
    op = np.diag(f) @ destroy(d)
    mean = np.einsum("ij,ji->", rho_f.matrix, op)
    return float(np.real(np.exp(-1j * phi) * mean))


def quadrature_oracle(rho_f, phi):
    """Linear quadrature ``<X_phi> = Re(e^{-i phi} <a>)``."""
    return generalized_quadrature_oracle(rho_f, 1.0, phi)


def sideband_flatness(rho_f, drives, populated=1e-10):
    """``max |scale * F1(n) - 1|`` over levels coupled by populated states."""
    f = dynamics.effective_coupling(drives, rho_f.dim) * drives.scale
    occ = np.flatnonzero(rho_f.populations > populated)
    top = int(occ.max()) if len(occ) else 0
    return float(np.max(np.abs(f[:max(top, 1)] - 1.0)))


def quadrature_measure(rho_f, phi, drives, plan=EXACT, sign=+1, flat_tol=1e-2):
    """``<X_phi>`` from a sideband slope: ``slope = +- <X_phi>`` when ``F1 ~ 1``.

    Accepted drives: a single laser with ``eta <= 0.1`` (Lamb-Dicke regime),
    or any drive set whose scaled ``F1`` is within ``flat_tol`` of 1 over the
    populated levels.  A blue sideband measures the quadrature at ``-phi``;
    the returned ``phi`` says which one was measured.
    """
    if not drives.is_sideband:
        raise DomainError("quadrature measurement needs sideband drives")
    flat = sideband_flatness(rho_f, drives)
    ld_single = drives.n_lasers == 1 and drives.etas[0] <= 0.1
    if not ld_single and flat > flat_tol:
        raise PrecisionError(
            f"F1 deviates from 1 by {flat:.3e} over the populated levels (tolerance {flat_tol})"
        )
    h = dynamics.build_sideband(drives, rho_f.dim)
    est = estimate_slope(h, ProbeState(sign, phi), rho_f, plan)
    measured_phi = phi if drives.kind == "red_sideband" else -phi
    return QuadratureEstimate(
        float(measured_phi) % (2 * np.pi),
        sign * est.value * drives.scale,
        est.stderr * abs(drives.scale),
        flat,
        est.method,
    )


def position_momentum(rho_f, drives, plan=EXACT, **kw):
    """``(<x>/<x0>, <p>/<p0>)`` from quadratures at ``phi = 0`` and ``pi/2``."""
    x = quadrature_measure(rho_f, 0.0, drives, plan, **kw)
    p = quadrature_measure(rho_f, np.pi / 2, drives, plan, **kw)
    return 2 * x.value, 2 * p.value


def fit_quadrature_sweep(phis, values):
    """Fit ``A cos(theta - phi)``; returns ``(A, theta, max_abs_residual)``."""
    phis = np.asarray(phis, dtype=float)
    values = np.asarray(values, dtype=float)
    x = np.column_stack([np.cos(phis), np.sin(phis)])
    (a, b), *_ = np.linalg.lstsq(x, values, rcond=None)
    resid = values - x @ np.array([a, b])
    return float(math.hypot(a, b)), float(math.atan2(b, a)), float(np.max(np.abs(resid)))


def engineered_flat_sideband(etas, m_max=None):
    """Sideband drives with ``F1(n) = 1 + O(n^N)``; ``scale`` is set on the result."""
    sol = engineering.engineer_monomial(0, etas, "f1", m_max=m_max)
    return sol.drive_set("red_sideband")


__all__ = [
    "MeasurementPlan",
    "SlopeEstimate",
    "MomentEstimate",
    "FanoMandel",
    "QuadratureEstimate",
    "estimate_slope",
    "measure_f0_mean",
    "moments_two_eta",
    "fano_mandel",
    "moment_engineered",
    "generalized_quadrature_oracle",
    "quadrature_oracle",
    "quadrature_measure",
    "position_momentum",
    "fit_quadrature_sweep",
    "engineered_flat_sideband",
]
