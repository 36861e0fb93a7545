"""Run orchestration: trajectories, sweeps, sampling, bounds, CSV + manifests.

Every CSV is a deterministic function of (config, seed): numbers are written
with 17 significant digits, row order follows grid order regardless of
worker scheduling, and manifests carry SHA-256 checksums of every emitted
file. Failures in sweeps degrade per point (status column), never per run.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, classical, config as cfgmod, fock, gaussian, metrics
from .classical import SLConfig
from .dynamics import GeneratorOps, IntegratorConfig, integrate
from .errors import OscsyncError
from .fock import ModeDims, SystemSpec

SWEEP_DEFAULT_DT = 5e-3
BOUND_CURVE_POINTS = 400
BOUND_CURVE_D_RANGE = (0.01, 2.0)


# ---------------------------------------------------------------------------
# formatting and manifests

def fmt(value) -> str:
    """CSV cell: 17 significant digits, '.' separator, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def sha256_of(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _utcnow() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def write_manifest(out_dir: str, command: str, seed, config_path: str,
                   started: str, status: str, outputs, extra=None) -> str:
    """Atomic key-value manifest with per-output checksums."""
    lines = [
        "manifest_version: 1",
        f"command: {command}",
        f"version: {__version__}",
        f"seed: {seed}",
        f"config_file: {os.path.abspath(config_path)}",
        f"started_utc: {started}",
        f"finished_utc: {_utcnow()}",
        f"status: {status}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key}: {value}")
    for name in outputs:
        path = os.path.join(out_dir, name)
        lines.append(f"output: {name} sha256={sha256_of(path)} "
                     f"bytes={os.path.getsize(path)}")
    lines.append("config_snapshot:")
    for raw in cfgmod.config_text(config_path).splitlines():
        lines.append(f"  | {raw}")
    path = os.path.join(out_dir, "manifest.txt")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return path


def _ensure_out(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)


# ---------------------------------------------------------------------------
# simulate

def run_simulate(config_path: str, seed: int, out_dir: str, plot: bool = False) -> int:
    started = _utcnow()
    _ensure_out(out_dir)
    cp = cfgmod.load_config(config_path)
    spec = cfgmod.build_system_spec(cp)
    icfg = cfgmod.build_integrator(cp)
    ops = GeneratorOps(spec)
    evaluator = metrics.TrajectoryEvaluator(spec, ops)
    rho0 = fock.initial_product_state(spec)

    rows = []

    def metrics_observer(t, rho_prev, rho, rho_next, trace_err, min_eig):
        rec = evaluator.row(t, rho, rho_prev, rho_next, trace_err, min_eig, icfg.dt)
        rows.append([getattr(rec, name) for name in metrics.MetricsRecord.CSV_FIELDS])

    status, extra = "ok", {}
    try:
        integrate(rho0, ops, icfg, metrics_observer=metrics_observer,
                  store_states=False)
    except OscsyncError as exc:
        status = "error"
        extra["error"] = f"{type(exc).__name__}: {exc}"
        if getattr(exc, "t", None) is not None:
            extra["error_time"] = fmt(exc.t)

    csv_path = os.path.join(out_dir, "trajectory.csv")
    write_csv(csv_path, metrics.MetricsRecord.CSV_HEADER, rows)
    outputs = ["trajectory.csv"]
    if plot and rows:
        from . import plots
        outputs.append(plots.plot_trajectory(csv_path))
    write_manifest(out_dir, "simulate", seed, config_path, started, status, outputs,
                   extra)
    return 0 if status == "ok" else 1


# ---------------------------------------------------------------------------
# sweeps

def _point_seed(seed: int, i: int, j: int) -> int:
    return int(np.random.SeedSequence([seed, i, j]).generate_state(1)[0])


def _quantum_point(payload) -> tuple[int, int, list]:
    (i, j, k, dw, freq1, temperature, gamma_plus, dims, t_obs, dt) = payload
    try:
        spec = SystemSpec(freqs=(freq1, freq1 + dw), k=k, temperature=temperature,
                          gamma_plus=gamma_plus, dims=ModeDims(dims))
        ops = GeneratorOps(spec)
        rho0 = fock.initial_product_state(spec)
        n_steps = max(int(round(t_obs / dt)), 1)
        icfg = IntegratorConfig(dt=dt, t_final=t_obs, sample_stride=n_steps)
        rec = integrate(rho0, ops, icfg, store_states=False)
        evaluator = metrics.TrajectoryEvaluator(spec, ops)
        d2, _, _ = evaluator.sync_from_moments(rec.final_rho)
        chi_val, _ = evaluator.chi_at(rec.final_rho)
        return (i, j, [k, dw, math.sqrt(max(d2, 0.0)), chi_val, "ok"])
    except (OscsyncError, ValueError, np.linalg.LinAlgError) as exc:
        return (i, j, [k, dw, None, None, f"error:{type(exc).__name__}"])


def _classical_point(payload) -> tuple[int, int, list]:
    (i, j, k, dw, freq1, temperature, gamma_plus, members, t_obs, dt,
     point_seed, fixed_gammas) = payload
    try:
        freqs = (freq1, freq1 + dw)
        if fixed_gammas is not None:
            gammas = fixed_gammas
        else:
            beta = 1.0 / temperature
            gammas = tuple((math.exp(2.0 * beta * w) - 1.0) * g
                           for w, g in zip(freqs, gamma_plus))
        n_steps = max(int(round(t_obs / dt)), 1)
        cfg = SLConfig(freqs=freqs, k=k, gammas=gammas, members=members,
                       dt=dt, t_final=t_obs, sample_stride=n_steps,
                       seed=point_seed)
        rec = classical.simulate(cfg, temperature, store=False)
        met = classical.classical_metrics(rec.final, freqs)
        return (i, j, [k, dw, math.sqrt(max(met.d2, 0.0)), "ok"])
    except (OscsyncError, ValueError, np.linalg.LinAlgError) as exc:
        return (i, j, [k, dw, None, f"error:{type(exc).__name__}"])


def run_sweep(config_path: str, seed: int, out_dir: str, workers: int = 1,
              plot: bool = False) -> int:
    started = _utcnow()
    _ensure_out(out_dir)
    cp = cfgmod.load_config(config_path)
    grid = cfgmod.build_sweep(cp)
    spec = cfgmod.build_system_spec(cp)
    dt = grid.dt if grid.dt is not None else SWEEP_DEFAULT_DT

    payloads = []
    if grid.target == "quantum":
        dims = grid.dims if grid.dims is not None else spec.dims.dims
        point_dt = dt
        for i, k in enumerate(grid.k_values):
            for j, dw in enumerate(grid.delta_omega_values):
                payloads.append((i, j, k, dw, spec.freqs[0], spec.temperature,
                                 spec.gamma_plus, tuple(dims), grid.t_obs, dt))
        worker = _quantum_point
        header = ("k", "delta_omega", "d_at_t", "chi_at_t", "status")
    else:
        explicit_gammas, default_members, cl_dt = cfgmod.classical_sweep_defaults(cp)
        members = grid.members if grid.members is not None else default_members
        point_dt = grid.dt if grid.dt is not None else cl_dt
        for i, k in enumerate(grid.k_values):
            for j, dw in enumerate(grid.delta_omega_values):
                payloads.append((i, j, k, dw, spec.freqs[0], spec.temperature,
                                 spec.gamma_plus, members, grid.t_obs, point_dt,
                                 _point_seed(seed, i, j), explicit_gammas))
        worker = _classical_point
        header = ("k", "delta_omega", "d_cl_at_t", "status")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, payloads, chunksize=4))
    else:
        results = [worker(p) for p in payloads]

    results.sort(key=lambda r: (r[0], r[1]))
    rows = [r[2] for r in results]
    n_failed = sum(1 for row in rows if row[-1] != "ok")

    csv_path = os.path.join(out_dir, "sweep.csv")
    write_csv(csv_path, header, rows)
    outputs = ["sweep.csv"]
    if plot:
        from . import plots
        outputs.append(plots.plot_sweep(csv_path))
    status = "ok" if n_failed == 0 else "partial"
    write_manifest(out_dir, "sweep", seed, config_path, started, status, outputs,
                   {"target": grid.target, "workers": workers,
                    "grid_points": grid.size, "failed_points": n_failed,
                    "dt": fmt(point_dt)})
    return 0 if n_failed == 0 else 2


# ---------------------------------------------------------------------------
# gaussian sampling

def run_sample_gaussian(config_path: str, seed: int, out_dir: str,
                        plot: bool = False) -> int:
    started = _utcnow()
    _ensure_out(out_dir)
    cp = cfgmod.load_config(config_path)
    params, kappa = cfgmod.build_sample_params(cp, seed)
    freqs = (kappa, 1.0)
    bp_q = lambda d: metrics.chi_lower_bound(
        metrics.BoundParams(2, kappa, d), "quantum").value
    bp_cl = lambda d: metrics.chi_lower_bound(
        metrics.BoundParams(2, kappa, d), "classical").value

    sample_rows = []
    pts_q, pts_cl = [], []
    violations = 0
    for idx, state in enumerate(gaussian.sample_random(params)):
        d = math.sqrt(max(gaussian.gaussian_sync_distance(state), 0.0))
        chi_q = gaussian.gaussian_chi(state, freqs, "quantum")
        chi_cl = gaussian.gaussian_chi(state, freqs, "classical")
        margin = gaussian.validity_margin(state.cov)
        sample_rows.append([idx, d, chi_q, chi_cl, state.nus[0], state.nus[1],
                            state.squeeze, margin])
        pts_q.append((d, chi_q))
        pts_cl.append((d, chi_cl))
        if d > 0 and (chi_q < bp_q(d) - 1e-8 or chi_cl < bp_cl(d) - 1e-8):
            violations += 1

    write_csv(os.path.join(out_dir, "samples.csv"),
              ("index", "D", "chi_quantum", "chi_classical", "nu1", "nu2", "r",
               "validity_margin"), sample_rows)
    write_csv(os.path.join(out_dir, "hull_quantum.csv"), ("D", "chi"),
              gaussian.convex_hull(pts_q) if pts_q else [])
    write_csv(os.path.join(out_dir, "hull_classical.csv"), ("D", "chi"),
              gaussian.convex_hull(pts_cl) if pts_cl else [])

    d_grid = np.linspace(*BOUND_CURVE_D_RANGE, BOUND_CURVE_POINTS)
    curve_rows = [[d, bp_q(d), bp_cl(d)] for d in d_grid]
    write_csv(os.path.join(out_dir, "bound_curves.csv"),
              ("D", "chi_min_quantum", "chi_min_classical"), curve_rows)

    outputs = ["samples.csv", "hull_quantum.csv", "hull_classical.csv",
               "bound_curves.csv"]
    if plot:
        from . import plots
        outputs.append(plots.plot_gaussian_sample(out_dir))
    write_manifest(out_dir, "sample-gaussian", seed, config_path, started, "ok",
                   outputs, {"count": params.count, "kappa": fmt(kappa),
                             "bound_violations": violations})
    return 0


# ---------------------------------------------------------------------------
# classical trajectory

def run_classical(config_path: str, seed: int, out_dir: str,
                  plot: bool = False) -> int:
    started = _utcnow()
    _ensure_out(out_dir)
    cp = cfgmod.load_config(config_path)
    cfg, temperature = cfgmod.build_sl_config(cp, seed)
    beta0 = 1.0 / temperature

    rows = []

    def observer(t, ens):
        met = classical.classical_metrics(ens, cfg.freqs)
        bound = classical.csl_bound(ens, cfg, beta0)
        rows.append([t, met.d2, met.chi_cl, met.circ_var, met.mean_r1_sq,
                     met.mean_r2_sq, bound.value])

    status, extra = "ok", {}
    try:
        classical.simulate(cfg, temperature, observer=observer, store=False)
    except OscsyncError as exc:
        status = "error"
        extra["error"] = f"{type(exc).__name__}: {exc}"
        if getattr(exc, "t", None) is not None:
            extra["error_time"] = fmt(exc.t)
        if getattr(exc, "member", None) is not None:
            extra["error_member"] = str(exc.member)

    csv_path = os.path.join(out_dir, "classical.csv")
    write_csv(csv_path, ("t", "D2_cl", "chi_cl", "phase_diff_circ_var",
                         "mean_r1_sq", "mean_r2_sq", "csl_rhs"), rows)
    outputs = ["classical.csv"]
    if plot and rows:
        from . import plots
        outputs.append(plots.plot_classical(csv_path))
    write_manifest(out_dir, "classical", seed, config_path, started, status,
                   outputs, extra)
    return 0 if status == "ok" else 1


# ---------------------------------------------------------------------------
# bound tables

def run_bounds(config_path: str, out_dir: str | None, plot: bool = False) -> int:
    started = _utcnow()
    cp = cfgmod.load_config(config_path)
    table = cfgmod.build_bounds(cp)

    rows = []
    for n in table.n_modes:
        for kap in table.kappas:
            for d in table.d_values:
                if d <= 0:
                    rows.append([n, kap, d, None, None, None, None, None,
                                 "divergent"])
                    continue
                bq = metrics.chi_lower_bound(metrics.BoundParams(n, kap, d),
                                             "quantum")
                bc = metrics.chi_lower_bound(metrics.BoundParams(n, kap, d),
                                             "classical")
                work = metrics.work_lower_bound(metrics.BoundParams(n, kap, d),
                                                table.temperature)
                rows.append([n, kap, d, bq.value, bq.asymptotic, bc.value,
                             bc.asymptotic, work.value, "ok"])

    header = ("n", "kappa", "D", "chi_min_quantum", "chi_asymptotic_quantum",
              "chi_min_classical", "chi_asymptotic_classical", "work_bound",
              "status")
    print(",".join(header))
    for row in rows:
        print(",".join(fmt(c) for c in row))

    if out_dir is not None:
        _ensure_out(out_dir)
        csv_path = os.path.join(out_dir, "bounds.csv")
        write_csv(csv_path, header, rows)
        outputs = ["bounds.csv"]
        if plot:
            from . import plots
            outputs.append(plots.plot_bounds(csv_path))
        write_manifest(out_dir, "bounds", "-", config_path, started, "ok", outputs,
                       {"rows": len(rows)})
    return 0
