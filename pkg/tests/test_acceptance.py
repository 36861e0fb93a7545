"""Acceptance suite: one test per release criterion, reported in the summary.

The dimer trajectory fixtures integrate the four reference couplings once per
session (minutes at the 225-dimensional joint space); the sweep criterion
runs the full 21 x 21 quantum and classical maps and takes the better part of
an hour on one core.
"""

import csv
import math
import os
import time

import numpy as np
import pytest

from oscsync import classical as cl
from oscsync import dynamics, fock, gaussian, metrics, runners
from conftest import record_acceptance

K_VALUES = (0.5, 1.0, 3.0, 5.0)
KAPPA = 2.0 / 3.0  # omega1/omega2 for the reference frequencies
FREQS = (2 * math.pi, 3 * math.pi)
TEMPERATURE = 20.0
GAMMA_PLUS = 1e-3

SWEEP_QUANTUM_INI = """\
[system]
freqs = 6.283185307179586 9.42477796076938
temperature = 20.0
gamma_plus = 0.001
dims = 15 15

[sweep]
target = quantum
k_min = -6.0
k_max = 6.0
k_count = 21
delta_omega_min = 0.0
delta_omega_max = 6.283185307179586
delta_omega_count = 21
t_obs = 10.0
dt = 0.005
"""

SWEEP_CLASSICAL_INI = SWEEP_QUANTUM_INI.replace(
    "target = quantum", "target = classical").replace(
    "dt = 0.005", "") + """
[classical]
members = 2000
dt = 0.002
"""


def reference_spec(k: float) -> fock.SystemSpec:
    return fock.SystemSpec(freqs=FREQS, k=k, temperature=TEMPERATURE,
                           gamma_plus=(GAMMA_PLUS,),
                           dims=fock.ModeDims((15, 15)))


@pytest.fixture(scope="session")
def dimer_runs():
    """Metrics rows plus per-sample Hermiticity residuals for the four k values."""
    runs = {}
    for k in K_VALUES:
        spec = reference_spec(k)
        ops = dynamics.GeneratorOps(spec)
        evaluator = metrics.TrajectoryEvaluator(spec, ops)
        rho0 = fock.initial_product_state(spec)
        cfg = dynamics.IntegratorConfig(dt=1e-3, t_final=10.0, sample_stride=100)
        rows, herms = [], []

        def mobs(t, rho_prev, rho, rho_next, trace_err, min_eig):
            rows.append(evaluator.row(t, rho, rho_prev, rho_next, trace_err,
                                      min_eig, cfg.dt))
            herms.append(float(np.linalg.norm(rho - rho.conj().T)))

        dynamics.integrate(rho0, ops, cfg, metrics_observer=mobs,
                           store_states=False)
        runs[k] = (rows, herms)
    return runs


def test_criterion_1_stationarity():
    spec = reference_spec(5.0)
    rho0 = fock.initial_product_state(spec)
    ops = dynamics.GeneratorOps(spec)
    start = time.perf_counter()
    residual = dynamics.verify_stationary(rho0, ops)
    elapsed = time.perf_counter() - start
    ok = residual <= 1e-8
    record_acceptance(1, ok, f"uncoupled-generator residual {residual:.2e} "
                             f"(<= 1e-8), {elapsed:.2f}s")
    assert ok


def test_criterion_2_state_sanity(dimer_runs):
    worst_tr, worst_h, worst_eig = 0.0, 0.0, 0.0
    for k, (rows, herms) in dimer_runs.items():
        worst_tr = max(worst_tr, max(r.trace_err for r in rows))
        worst_h = max(worst_h, max(herms))
        worst_eig = min(worst_eig, min(r.min_eig for r in rows))
    ok = worst_tr <= 1e-9 and worst_h <= 1e-10 and worst_eig >= -1e-8
    record_acceptance(2, ok, f"max |tr-1| {worst_tr:.1e} (<=1e-9), "
                             f"max herm {worst_h:.1e} (<=1e-10), "
                             f"min eig {worst_eig:.1e} (>=-1e-8)")
    assert ok


def test_reference_trajectories_synchronize(dimer_runs):
    # strong coupling must reduce the distance over the run (qualitative)
    for k in (3.0, 5.0):
        rows, _ = dimer_runs[k]
        assert rows[-1].d2 < rows[0].d2


def test_criterion_3_initial_conditions(dimer_runs):
    worst_d2, worst_chi, worst_l = 0.0, 0.0, 0.0
    for k, (rows, _) in dimer_runs.items():
        first = rows[0]
        worst_d2 = max(worst_d2, abs(first.d2 - 1.0))
        worst_chi = max(worst_chi, first.chi)
        worst_l = max(worst_l, first.big_l)
    ok = worst_d2 <= 1e-6 and worst_chi <= 1e-6 and worst_l <= 1e-9
    record_acceptance(3, ok, f"|D2(0)-1| {worst_d2:.1e} (<=1e-6), "
                             f"chi(0) {worst_chi:.1e} (<=1e-6), "
                             f"L(0) {worst_l:.1e} (<=1e-9)")
    assert ok


def test_criterion_4_second_law(dimer_runs):
    worst = min(min(r.sigma0 for r in rows) for rows, _ in dimer_runs.values())
    ok = worst >= -1e-10
    record_acceptance(4, ok, f"min sigma0 {worst:.2e} (>= -1e-10)")
    assert ok


def test_criterion_5_bound_chain(dimer_runs):
    worst_lc, worst_cb = math.inf, math.inf
    for k, (rows, _) in dimer_runs.items():
        for r in rows:
            worst_lc = min(worst_lc, r.big_l - r.chi)
            d = math.sqrt(max(r.d2, 0.0))
            bound = (-2.0 * math.log(math.e * d / (math.sqrt(2.0) * KAPPA))
                     if d > 0 else -math.inf)
            worst_cb = min(worst_cb, r.chi - bound)
    ok = worst_lc >= -1e-8 and worst_cb >= -1e-8
    record_acceptance(5, ok, f"min L-chi {worst_lc:.2e}, "
                             f"min chi-bound {worst_cb:.3f} (both >= -1e-8)")
    assert ok


def test_criterion_6_rate_identity(dimer_runs):
    worst, checked = 0.0, 0
    for k, (rows, _) in dimer_runs.items():
        for r in rows[1:-1]:  # interior samples have a centered difference
            if abs(r.ldot_fd) > 1e-4:
                worst = max(worst, abs(r.ldot_exact - r.ldot_fd) / abs(r.ldot_fd))
                checked += 1
    ok = worst <= 0.01 and checked > 100
    record_acceptance(6, ok, f"max |exact-fd|/|fd| {worst:.2%} over "
                             f"{checked} samples (<= 1%)")
    assert ok


def test_criterion_7_speed_limit(dimer_runs):
    worst = math.inf
    for k, (rows, _) in dimer_runs.items():
        worst = min(worst, min(r.qsl_rhs - r.ldot_exact for r in rows))
    comm_residual = 0.0
    for k in K_VALUES:
        spec = reference_spec(k)
        h0 = fock.build_h0(spec)
        hc = fock.build_hc_dimer(spec)
        direct = h0 @ hc - hc @ h0
        comm_residual = max(comm_residual, float(np.linalg.norm(
            direct - metrics.dimer_commutator_analytic(spec))))
    ok = worst >= -1e-6 and comm_residual <= 1e-10
    record_acceptance(7, ok, f"min qsl-ldot slack {worst:.2e} (>= -1e-6), "
                             f"commutator residual {comm_residual:.1e} (<=1e-10)")
    assert ok


def test_criterion_8_gaussian_sample(tmp_path):
    params = gaussian.SampleParams(count=10000, seed=2026)
    start = time.perf_counter()
    violations = 0
    pts_q, pts_cl = [], []
    for state in gaussian.sample_random(params):
        d = math.sqrt(max(gaussian.gaussian_sync_distance(state), 0.0))
        chi_q = gaussian.gaussian_chi(state, (1.0, 1.0), "quantum")
        chi_cl = gaussian.gaussian_chi(state, (1.0, 1.0), "classical")
        if d > 0:
            bq = metrics.chi_lower_bound(metrics.BoundParams(2, 1.0, d),
                                         "quantum").value
            bc = metrics.chi_lower_bound(metrics.BoundParams(2, 1.0, d),
                                         "classical").value
            if chi_q < bq - 1e-8 or chi_cl < bc - 1e-8:
                violations += 1
        pts_q.append((d, chi_q))
        pts_cl.append((d, chi_cl))
    elapsed = time.perf_counter() - start
    hull_q = gaussian.convex_hull(pts_q)
    hull_cl = gaussian.convex_hull(pts_cl)
    runners.write_csv(str(tmp_path / "hull_quantum.csv"), ("D", "chi"), hull_q)
    runners.write_csv(str(tmp_path / "hull_classical.csv"), ("D", "chi"), hull_cl)
    emitted = all((tmp_path / n).stat().st_size > 0
                  for n in ("hull_quantum.csv", "hull_classical.csv"))
    ok = violations == 0 and len(hull_q) >= 3 and len(hull_cl) >= 3 and emitted
    record_acceptance(8, ok, f"{violations} bound violations in 10^4 states "
                             f"(need 0), hulls emitted, {elapsed:.1f}s")
    assert ok


def test_criterion_9_entropy_oracles():
    beta_omega = 0.3
    nbar = 1.0 / math.expm1(beta_omega)
    s_analytic = (nbar + 1) * math.log(nbar + 1) - nbar * math.log(nbar)
    rho = fock.thermal_state(beta_omega, 1.0, 60)
    s_fock = metrics.von_neumann_entropy(rho)
    gap_fock = abs(s_fock - s_analytic)
    s_gauss = gaussian.gaussian_entropy(np.diag([nbar + 0.5] * 2))
    gap_gauss = abs(s_gauss - s_fock)
    s_vac = gaussian.gaussian_entropy(0.5 * np.eye(2))
    ok = gap_fock <= 1e-6 and gap_gauss <= 1e-6 and abs(s_vac) <= 1e-12
    record_acceptance(9, ok, f"Fock-vs-analytic {gap_fock:.1e}, "
                             f"Gaussian-vs-Fock {gap_gauss:.1e} (<=1e-6), "
                             f"vacuum {abs(s_vac):.1e} (<=1e-12)")
    assert ok


def test_criterion_10_classical_physics():
    # zero-noise limit cycle via identical oscillators (coupling term cancels)
    cfg = cl.SLConfig(freqs=(1.0, 1.0), k=1.0, gammas=(0.05, 0.05), members=2,
                      dt=1e-3, t_final=100.0, sample_stride=1000, seed=0,
                      noise_amps=(0.0, 0.0))
    rng = np.random.default_rng(0)
    z0 = np.full(2, 0.3 + 0.0j)
    ens = cl.SLEnsemble(z0.copy(), z0.copy())
    radii = []
    for i in range(1, cfg.n_steps + 1):
        ens = cl.em_step(ens, cfg, rng)
        if i * cfg.dt >= 50.0:
            radii.append(abs(ens.z1[0]) ** 2)
    cycle_err = abs(np.mean(radii) - 10.0) / 10.0

    delta = 1.0
    freqs = (2 * math.pi, 2 * math.pi + delta)
    beta = 1.0 / TEMPERATURE
    gammas = tuple((math.exp(2 * beta * w) - 1.0) * GAMMA_PLUS for w in freqs)
    circ = {}
    for label, k in (("locked", 2 * delta), ("free", 0.0)):
        run_cfg = cl.SLConfig(freqs=freqs, k=k, gammas=gammas, members=10000,
                              dt=1e-3, t_final=10.0, sample_stride=100, seed=77)
        acc = []

        def obs(t, e):
            if t >= 5.0:
                acc.append(np.exp(1j * (np.angle(e.z1) - np.angle(e.z2))))

        cl.simulate(run_cfg, TEMPERATURE, observer=obs, store=False)
        circ[label] = 1.0 - abs(np.mean(np.concatenate(acc)))

    ok = cycle_err <= 0.01 and circ["locked"] < 0.05 and circ["free"] > 0.5
    record_acceptance(10, ok, f"cycle radius err {cycle_err:.2%} (<=1%), "
                              f"circ var locked {circ['locked']:.3f} (<0.05) / "
                              f"free {circ['free']:.3f} (>0.5)")
    assert ok


def test_criterion_11_classical_speed_limit():
    beta0 = 1.0 / TEMPERATURE
    gammas = tuple((math.exp(2 * beta0 * w) - 1.0) * GAMMA_PLUS for w in FREQS)
    cfg = cl.SLConfig(freqs=FREQS, k=5.0, gammas=gammas, members=10000,
                      dt=1e-3, t_final=10.0, sample_stride=100, seed=5)
    times, ls, bounds, ses = [], [], [], []

    def obs(t, ens):
        times.append(t)
        ls.append(cl.classical_l(ens, FREQS, beta0))
        b = cl.csl_bound(ens, cfg, beta0)
        bounds.append(b.value)
        ses.append(b.std_error)

    cl.simulate(cfg, TEMPERATURE, observer=obs, store=False)
    ls_arr = np.array(ls)
    dt_s = times[1] - times[0]
    fd = (ls_arr[2:] - ls_arr[:-2]) / (2.0 * dt_s)
    slack = np.array(bounds)[1:-1] + 3.0 * np.array(ses)[1:-1] - fd
    min_slack = float(slack.min())

    # <(ln f)^2> closed form against Monte Carlo sampling of the fitted Gaussian
    rec = cl.simulate(cl.SLConfig(freqs=FREQS, k=5.0, gammas=gammas,
                                  members=10000, dt=1e-3, t_final=2.0,
                                  sample_stride=2000, seed=6), TEMPERATURE)
    r = cl.quadrature_samples(rec.final)
    mu, cov = r.mean(axis=0), np.cov(r, rowvar=False, ddof=1)
    s_cl = 2 * math.log(2 * math.pi * math.e) + 0.5 * np.linalg.slogdet(cov)[1]
    rng = np.random.default_rng(7)
    draws = rng.multivariate_normal(mu, cov, size=10000)
    diff = draws - mu
    q = np.einsum("ij,jk,ik->i", diff, np.linalg.inv(cov), diff)
    lnf = -0.5 * np.linalg.slogdet(2 * math.pi * cov)[1] - 0.5 * q
    mc = float(np.mean(lnf ** 2))
    formula = s_cl ** 2 + 2.0
    lnf2_err = abs(mc - formula) / formula

    ok = min_slack >= 0.0 and lnf2_err <= 0.02
    record_acceptance(11, ok, f"min bound slack {min_slack:.2f} (>=0 with 3 s.e.), "
                              f"lnf^2 formula vs MC {lnf2_err:.2%} (<=2%)")
    assert ok


# ---------------------------------------------------------------------------
# criterion 12: the (k, delta_omega) synchronization maps

def _read_sweep(path, col):
    with open(path, "r", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    d = {}
    for r in rows:
        key = (float(r["k"]), float(r["delta_omega"]))
        d[key] = float(r[col]) if r["status"] == "ok" and r[col] != "" else math.nan
    ks = tuple(sorted({k for k, _ in d}))
    dws = tuple(sorted({w for _, w in d}))
    return ks, dws, d


@pytest.fixture(scope="module")
def sweep_maps(tmp_path_factory):
    base = tmp_path_factory.mktemp("sweeps")
    qcfg = base / "sweep_quantum.ini"
    qcfg.write_text(SWEEP_QUANTUM_INI)
    ccfg = base / "sweep_classical.ini"
    ccfg.write_text(SWEEP_CLASSICAL_INI)
    out_q = base / "quantum"
    out_c = base / "classical"
    code_q = runners.run_sweep(str(qcfg), seed=1, out_dir=str(out_q), workers=1)
    code_c = runners.run_sweep(str(ccfg), seed=1, out_dir=str(out_c), workers=1)
    return (code_q, str(out_q / "sweep.csv")), (code_c, str(out_c / "sweep.csv"))


def test_criterion_12_sweep_pattern(sweep_maps):
    (code_q, path_q), (code_c, path_c) = sweep_maps
    ks, dws, d_q = _read_sweep(path_q, "d_at_t")
    ks_c, dws_c, d_cl = _read_sweep(path_c, "d_cl_at_t")
    assert ks == ks_c and dws == dws_c

    # Threshold: median classical D on the synchronous band's boundary - per
    # detuning row, the outermost grid point of the band {k >= delta_omega}.
    edge_vals = []
    for w in dws:
        inside = [k for k in ks if k >= w]
        if not inside:
            continue
        v = d_cl[(min(inside), w)]
        if not math.isnan(v):
            edge_vals.append(v)
    threshold = float(np.median(edge_vals))

    # Strict interior of the non-synchronizing wedge: at least one k-grid
    # step away from |k| = delta_omega.
    k_step = ks[1] - ks[0]
    interior = [(k, w) for k in ks for w in dws if abs(k) <= w - k_step]
    q_in = [(k, w) for (k, w) in interior
            if not math.isnan(d_q[(k, w)]) and d_q[(k, w)] < threshold]
    cl_in = [(k, w) for (k, w) in interior
             if not math.isnan(d_cl[(k, w)]) and d_cl[(k, w)] < threshold]

    n_failed_q = sum(1 for v in d_q.values() if math.isnan(v))
    ok = (len(q_in) > 0) and (len(cl_in) == 0) and code_q in (0, 2) and code_c == 0
    record_acceptance(
        12, ok,
        f"threshold {threshold:.3f}: quantum synchronizes at {len(q_in)} "
        f"interior points (need >0), classical at {len(cl_in)} (need 0); "
        f"{n_failed_q} failed quantum points")
    assert ok


def test_criterion_13_determinism(tmp_path):
    ini = """\
[system]
freqs = 6.283185307179586 9.42477796076938
k = 1.5
temperature = 8.0
gamma_plus = 0.02
dims = 8 8

[integrator]
dt = 0.002
t_final = 0.1
sample_stride = 25

[classical]
members = 500
dt = 0.002
t_final = 1.0
sample_stride = 100

[sample]
count = 50
kappa = 1.0

[sweep]
target = quantum
k_min = 0.0
k_max = 2.0
k_count = 2
delta_omega_min = 0.0
delta_omega_max = 3.0
delta_omega_count = 2
t_obs = 0.1
dt = 0.002
"""
    cfg = tmp_path / "det.ini"
    cfg.write_text(ini)

    def digest(run, out, **kw):
        run(str(cfg), seed=9, out_dir=str(out), **kw)
        blobs = []
        for name in sorted(os.listdir(out)):
            if name.endswith(".csv"):
                blobs.append(open(os.path.join(out, name), "rb").read())
        return b"".join(blobs)

    same = []
    same.append(digest(runners.run_simulate, tmp_path / "s1")
                == digest(runners.run_simulate, tmp_path / "s2"))
    same.append(digest(runners.run_sweep, tmp_path / "w1", workers=1)
                == digest(runners.run_sweep, tmp_path / "w2", workers=2))
    same.append(digest(runners.run_classical, tmp_path / "c1")
                == digest(runners.run_classical, tmp_path / "c2"))
    same.append(digest(runners.run_sample_gaussian, tmp_path / "g1")
                == digest(runners.run_sample_gaussian, tmp_path / "g2"))
    ok = all(same)
    record_acceptance(13, ok, "byte-identical CSVs for simulate / sweep "
                              "(workers 1 vs 2) / classical / sample-gaussian: "
                              + ", ".join(str(s) for s in same))
    assert ok
