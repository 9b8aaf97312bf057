"""Batch runner: JSON scenario in, JSON report (or CSV sweep table) out.

Exit codes: 0 all checks passed (or not ``--strict``), 1 a tolerance check
failed under ``--strict``, 2 usage/parse/domain error, 3 resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__, couplings, dynamics, engineering, fock, multi_ion, protocols, reconstruction
from .errors import DomainError, PhononProbeError, ResourceError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
TASKS = ("slope", "moments_two_eta", "moment_engineered", "quadrature", "fano_mandel",
         "engineer", "nion_collective", "reconstruct")
SWEEP_AXES = ("phi", "eta", "shots", "tau_max")
SWEEP_TASKS = ("slope", "quadrature")
TABLE_COLUMNS = ("value", "stderr", "oracle", "deviation", "pass")
VOLATILE_KEYS = ("timing", "generated_at")

_state_schema = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["fock", "coherent", "thermal", "matrix"]},
        "n": {"type": "integer", "minimum": 0},
        "re": {"type": "number"},
        "im": {"type": "number"},
        "nbar": {"type": "number", "minimum": 0},
        "path": {"type": "string"},
    },
    "allOf": [
        {"if": {"properties": {"type": {"const": "fock"}}}, "then": {"required": ["n"]}},
        {"if": {"properties": {"type": {"const": "thermal"}}}, "then": {"required": ["nbar"]}},
        {"if": {"properties": {"type": {"const": "matrix"}}}, "then": {"required": ["path"]}},
    ],
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "phononprobe scenario",
    "type": "object",
    "required": ["name", "task"],
    "properties": {
        "name": {"type": "string"},
        "task": {"enum": list(TASKS)},
        "state": _state_schema,
        "dim": {"type": "integer", "minimum": 2},
        "params": {"type": "object"},
        "plan": {
            "type": "object",
            "properties": {
                "tau_grid": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "shots": {"oneOf": [{"enum": ["exact", "noiseless"]},
                                    {"type": "integer", "minimum": 1}]},
                "fit_order": {"enum": [1, 2]},
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "sweep": {
            "type": "object",
            "required": ["axis", "values"],
            "properties": {
                "axis": {"type": "string"},
                "values": {"type": "array", "items": {"type": "number"}},
            },
        },
    },
    "allOf": [
        {"if": {"properties": {"task": {"not": {"enum": ["engineer", "nion_collective"]}}}},
         "then": {"required": ["state", "dim"]}},
    ],
}


class ScenarioError(ValueError):
    """Malformed scenario file; carries the offending line or field."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


# -- density-matrix CSV ------------------------------------------------------

def write_density_csv(matrix, path):
    """Header ``dim,<d>`` then ``d`` rows of interleaved ``re,im`` entries."""
    m = np.asarray(matrix, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim", m.shape[0]])
        for row in m:
            w.writerow([repr(float(x)) for z in row for x in (z.real, z.imag)])


def read_density_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0][0].strip() != "dim":
        raise ScenarioError("density CSV must start with a 'dim,<d>' header", line=1)
    try:
        d = int(rows[0][1])
    except (IndexError, ValueError):
        raise ScenarioError("bad dimension in density CSV header", line=1) from None
    if len(rows) != d + 1:
        raise ScenarioError(f"expected {d} matrix rows, found {len(rows) - 1}")
    m = np.empty((d, d), dtype=complex)
    for i, row in enumerate(rows[1:]):
        if len(row) != 2 * d:
            raise ScenarioError(f"expected {2 * d} numbers, found {len(row)}", line=i + 2)
        vals = np.array([float(x) for x in row])
        m[i] = vals[0::2] + 1j * vals[1::2]
    return fock.MotionalState.from_matrix(m)


# -- scenario handling -------------------------------------------------------

def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, line=exc.lineno) from None
    validate_scenario(data)
    data.setdefault("_base_dir", str(path.parent))
    return data


def validate_scenario(data):
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        field = ".".join(str(p) for p in exc.absolute_path) or None
        raise ScenarioError(exc.message, field=field) from None


def _state_from_spec(spec, dim, base_dir="."):
    kind = spec["type"]
    if kind == "fock":
        return fock.fock_state(spec["n"], dim)
    if kind == "coherent":
        return fock.coherent_state(complex(spec.get("re", 0.0), spec.get("im", 0.0)), dim)
    if kind == "thermal":
        return fock.thermal_state(spec["nbar"], dim)
    path = Path(spec["path"])
    if not path.is_absolute():
        path = Path(base_dir) / path
    if not path.exists():
        raise ScenarioError(f"density matrix file {path} not found", field="state.path")
    state = read_density_csv(path)
    if state.dim != dim:
        raise ScenarioError(f"matrix file has dim {state.dim}, scenario says {dim}", field="dim")
    return state


def _plan(sc):
    p = sc.get("plan", {})
    kw = {"shots_per_point": p.get("shots", "exact"), "seed": sc.get("seed", 0),
          "fit_order": p.get("fit_order", 2)}
    if "tau_grid" in p:
        kw["tau_grid"] = p["tau_grid"]
    return protocols.MeasurementPlan(**kw)


def _probe(params):
    pr = params.get("probe", {})
    return fock.ProbeState(int(pr.get("sign", 1)), float(pr.get("phi", math.pi / 2)))


def _drives(spec, default_kind):
    kind = spec.get("kind", default_kind)
    etas = spec["etas"]
    weights = spec.get("weights", [1.0] * len(etas))
    return dynamics.DriveSet(kind, weights, etas, spec.get("time_convention"),
                             spec.get("scale", 1.0))


def _need(params, key, task):
    if key not in params:
        raise ScenarioError(f"task '{task}' requires params.{key}", field=f"params.{key}")
    return params[key]


def _slope_estimate_dict(est):
    return {"value": est.value, "stderr": est.stderr, "method": est.method}


def _task_slope(sc, state, plan, tol):
    params = sc.get("params", {})
    drives = _drives(_need(params, "drive", "slope"), "carrier")
    probe = _probe(params)
    h = dynamics.build_hamiltonian(drives, state.dim)
    est = protocols.estimate_slope(h, probe, state, plan)
    oracle = dynamics.analytic_slope(probe, state, drives)
    dev = est.value - oracle
    ok = abs(dev) <= tol + 4 * est.stderr
    return ({"slope": _slope_estimate_dict(est), "time_convention": drives.describe_time()},
            {"slope": oracle}, {"slope": ok}, (est.value, est.stderr, oracle))


def _two_eta(sc, state, plan):
    params = sc.get("params", {})
    etas = _need(params, "etas", sc["task"])
    if len(etas) != 2:
        raise ScenarioError("exactly two etas are required", field="params.etas")
    probe = _probe(params)
    means = [protocols.measure_f0_mean(state, e, plan, probe) for e in etas]
    n1, n2 = protocols.moments_two_eta(means[0][0], etas[0], means[1][0], etas[1],
                                       means[0][1], means[1][1],
                                       model=params.get("model", "factorial"))
    return means, n1, n2


def _moment_dict(m):
    out = {"p": m.p, "value": m.value, "stderr": m.stderr, "route": m.route}
    if m.budget:
        out["budget"] = m.budget
    return out


def _task_moments_two_eta(sc, state, plan, tol):
    means, n1, n2 = _two_eta(sc, state, plan)
    o1, o2 = fock.number_moment(state, 1), fock.number_moment(state, 2)
    passed = {}
    for key, est, ref in (("n1", n1, o1), ("n2", n2, o2)):
        passed[key] = abs(est.value - ref) <= tol * max(abs(ref), 1e-12) + 4 * est.stderr
    return ({"f0_means": [m[0] for m in means], "n1": _moment_dict(n1), "n2": _moment_dict(n2)},
            {"n1": o1, "n2": o2}, passed, None)


def _task_fano(sc, state, plan, tol):
    means, n1, n2 = _two_eta(sc, state, plan)
    q = protocols.fano_mandel(n1, n2)
    o1, o2 = fock.number_moment(state, 1), fock.number_moment(state, 2)
    oq = (o2 - o1 ** 2) / o1
    return ({"n1": _moment_dict(n1), "n2": _moment_dict(n2),
             "Q": {"value": q.value, "stderr": q.stderr}},
            {"n1": o1, "n2": o2, "Q": oq}, {"Q": abs(q.value - oq) <= tol + 4 * q.stderr}, None)


def _task_moment_engineered(sc, state, plan, tol):
    params = sc.get("params", {})
    p = int(_need(params, "p", "moment_engineered"))
    if "etas" in params:
        etas = params["etas"]
    else:
        etas = engineering.equispaced_etas(int(params.get("n_lasers", 5)),
                                           float(params.get("eta_max", 1.0)))
    m = protocols.moment_engineered(state, p, etas, plan, n_support=params.get("n_support"))
    oracle = fock.number_moment(state, p)
    return ({"moment": _moment_dict(m), "etas": list(map(float, etas))},
            {"moment": oracle}, {"moment": abs(m.value - oracle) <= m.stderr}, None)


def _quad_drives(params):
    if "engineered_etas" in params:
        return protocols.engineered_flat_sideband(params["engineered_etas"])
    return _drives(_need(params, "drive", "quadrature"), "red_sideband")


def _task_quadrature(sc, state, plan, tol):
    params = sc.get("params", {})
    drives = _quad_drives(params)
    phi = float(params.get("phi", 0.0))
    sign = int(params.get("sign", 1))
    q = protocols.quadrature_measure(state, phi, drives, plan, sign=sign,
                                     flat_tol=params.get("flat_tol", 1e-2))
    f = dynamics.effective_coupling(drives, state.dim) * drives.scale
    lin = protocols.quadrature_oracle(state, q.phi)
    gen = protocols.generalized_quadrature_oracle(state, f, phi)
    ok = abs(q.value - lin) <= tol + 4 * q.stderr
    return ({"quadrature": {"phi": q.phi, "value": q.value, "stderr": q.stderr,
                            "flatness": q.flatness, "method": q.method}},
            {"linear": lin, "generalized": gen}, {"quadrature": ok}, (q.value, q.stderr, lin))


def _task_engineer(sc, state, plan, tol):
    params = sc.get("params", {})
    etas = _need(params, "etas", "engineer")
    target = _need(params, "target", "engineer")
    kind = params.get("kind", "f0")
    d = int(sc.get("dim", params.get("dim", 12)))
    sol = engineering.solve_weights(engineering.EngineeringProblem(etas, target, None, kind), d=d)
    c = couplings.taylor_coeffs(sol.weights, etas, len(etas) - 1, kind=kind).c
    err = float(np.max(np.abs(c - np.asarray(target, dtype=float))))
    return ({"weights": sol.weights.tolist(), "omega_ratio": sol.omega_ratio.tolist(),
             "scale": sol.scale, "condition_number": sol.condition_number,
             "phase_flipped_lasers": sol.needs_phase_flip.tolist(),
             "residual_profile": sol.residual_profile.tolist()},
            {"coefficient_error": err},
            {"round_trip": err <= 1e-9 * sol.condition_number}, None)


def _rho_a(spec, n_others):
    if n_others == 0:
        return None
    if spec in ("g", "e"):
        single = np.diag([1.0, 0.0]) if spec == "g" else np.diag([0.0, 1.0])
        out = np.eye(1)
        for _ in range(n_others):
            out = np.kron(out, single)
        return out
    arr = np.asarray(spec, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:  # [[re, im], ...] pairs
        arr = arr[..., 0] + 1j * arr[..., 1]
    return arr


def _task_nion(sc, state, plan, tol):
    params = sc.get("params", {})
    dims = _need(params, "mode_dims", "nion_collective")
    etas = _need(params, "mode_etas", "nion_collective")
    cfg = multi_ion.ChainConfig(len(dims), dims, etas, params.get("mode_frequencies"))
    specs = params.get("mode_states", [{"type": "fock", "n": 0}] * len(dims))
    base = sc.get("_base_dir", ".")
    modes = [_state_from_spec(s, d, base) for s, d in zip(specs, dims)]
    rho_f = multi_ion.product_modes(*modes)
    k = int(params.get("ion", 0))
    probe = _probe(params)
    rho_a = _rho_a(params.get("rho_A", "g"), cfg.n_ions - 1)
    analytic = multi_ion.collective_slope(cfg, k, probe, rho_a, rho_f)
    simulated = multi_ion.simulated_collective_slope(cfg, k, probe, rho_a, rho_f)
    prod = float(np.prod([np.dot(m.populations, fock_f0(e, m.dim)) for m, e in zip(modes, etas)]))
    oracle = -probe.sign * math.sin(probe.phase) * prod
    return ({"analytic_slope": analytic, "simulated_slope": simulated,
             "hilbert_dim": cfg.total_dim},
            {"slope": oracle},
            {"simulated_vs_analytic": abs(simulated - analytic) <= 1e-6,
             "factorization": abs(analytic - oracle) <= 1e-12}, None)


def fock_f0(eta, d):
    from .couplings import f0_diag

    return f0_diag(eta, d).values


def _task_reconstruct(sc, state, plan, tol):
    params = sc.get("params", {})
    k = int(params.get("K", state.dim - 1))
    moments = [fock.number_moment(state, p) for p in range(k + 1)]
    est = reconstruction.moments_to_distribution(moments)
    truth = np.zeros(k + 1)
    pops = state.populations
    truth[:min(len(pops), k + 1)] = pops[:k + 1]
    dev = float(np.max(np.abs(est.probs - truth)))
    return ({"probs": est.probs.tolist(), "condition_number": est.condition_number,
             "negativity": est.negativity},
            {"probs": truth.tolist()},
            {"distribution": dev <= 1e-6 * est.condition_number}, None)


_TASKS = {
    "slope": (_task_slope, 1e-8),
    "moments_two_eta": (_task_moments_two_eta, 1e-3),
    "fano_mandel": (_task_fano, 2e-3),
    "moment_engineered": (_task_moment_engineered, 0.0),
    "quadrature": (_task_quadrature, 1e-3),
    "engineer": (_task_engineer, 0.0),
    "nion_collective": (_task_nion, 1e-6),
    "reconstruct": (_task_reconstruct, 1e-6),
}


def _execute(sc):
    func, default_tol = _TASKS[sc["task"]]
    tol = float(sc.get("tolerance", default_tol))
    state = None
    if "state" in sc and sc["task"] != "nion_collective":
        state = _state_from_spec(sc["state"], sc["dim"], sc.get("_base_dir", "."))
    plan = _plan(sc)
    return func(sc, state, plan, tol), state


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def run_scenario(scenario, seed=None):
    """Run one scenario (dict or path) and return the report dict."""
    if not isinstance(scenario, dict):
        scenario = load_scenario(scenario)
    else:
        validate_scenario({k: v for k, v in scenario.items() if not k.startswith("_")})
    sc = dict(scenario)
    if seed is not None:
        sc["seed"] = int(seed)
    start = time.perf_counter()
    (results, oracle, passed, _), _state = _execute(sc)
    report = {
        "scenario": {k: v for k, v in sc.items() if not k.startswith("_")},
        "results": results,
        "oracle": oracle,
        "pass": passed,
        "passed": all(passed.values()),
        "versions": {"phononprobe": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "timing": {"elapsed_s": time.perf_counter() - start},
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    return _jsonable(report)


def dumps_report(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def strip_volatile(report):
    return {k: v for k, v in report.items() if k not in VOLATILE_KEYS}


# -- sweeps ----------------------------------------------------------------

def _row_seed(seed, index):
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def _apply_axis(sc, axis, value, index):
    sc = json.loads(json.dumps({k: v for k, v in sc.items() if not k.startswith("_")}))
    sc["_base_dir"] = "."
    params = sc.setdefault("params", {})
    plan = sc.setdefault("plan", {})
    if axis == "phi":
        if sc["task"] == "quadrature":
            params["phi"] = value
        else:
            params.setdefault("probe", {})["phi"] = value
    elif axis == "eta":
        key = "drive"
        if key not in params:
            raise DomainError("eta sweeps need an explicit params.drive")
        params[key]["etas"] = [value] * len(params[key]["etas"])
    elif axis == "shots":
        plan["shots"] = int(value)
    elif axis == "tau_max":
        grid = np.asarray(plan.get("tau_grid", protocols.default_tau_grid()), dtype=float)
        plan["tau_grid"] = (grid * value / grid.max()).tolist()
        if plan.get("shots", "exact") == "exact":
            plan["shots"] = "noiseless"
    sc["seed"] = _row_seed(sc.get("seed", 0), index)
    return sc


def emit_sweep(scenario, axis, values, threads=1):
    """One row per value: ``(axis, value, stderr, oracle, deviation, pass)``."""
    if axis not in SWEEP_AXES:
        raise DomainError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if scenario["task"] not in SWEEP_TASKS:
        raise DomainError(f"task {scenario['task']!r} cannot be swept")
    base_dir = scenario.get("_base_dir", ".")

    def one(item):
        i, v = item
        sc = _apply_axis(scenario, axis, v, i)
        sc["_base_dir"] = base_dir
        func, default_tol = _TASKS[sc["task"]]
        tol = float(sc.get("tolerance", default_tol))
        state = _state_from_spec(sc["state"], sc["dim"], base_dir)
        _, _, passed, (val, err, oracle) = func(sc, state, _plan(sc), tol)
        return {axis: float(v), "value": val, "stderr": err, "oracle": oracle,
                "deviation": val - oracle, "pass": all(passed.values())}

    items = list(enumerate(values))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, items))
    return [one(it) for it in items]


def format_table(rows, axis):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((axis,) + TABLE_COLUMNS)
    for r in rows:
        w.writerow([repr(float(r[axis]))] + [repr(float(r[c])) if c != "pass" else str(r[c]).lower()
                                             for c in TABLE_COLUMNS])
    return buf.getvalue()


# -- entry point -----------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="phononprobe", description=__doc__.splitlines()[0])
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", help="report JSON (or sweep CSV) path; stdout if omitted")
    p.add_argument("--strict", action="store_true", help="exit 1 if any check fails")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--threads", type=int, default=1, help="sweep parallelism")
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        sc = load_scenario(args.scenario)
        if args.seed is not None:
            sc["seed"] = args.seed
        if "sweep" in sc:
            rows = emit_sweep(sc, sc["sweep"]["axis"], sc["sweep"]["values"], args.threads)
            text = format_table(rows, sc["sweep"]["axis"])
            passed = all(r["pass"] for r in rows)
        else:
            report = run_scenario(sc)
            text = dumps_report(report)
            passed = report["passed"]
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except PhononProbeError as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.strict and not passed:
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
