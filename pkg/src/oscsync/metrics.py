"""Synchronization measures, entropic costs, and speed-limit bounds.

Conventions: natural log everywhere (nats), hbar = k_B = 1. Eigenvalues
below EIG_FLOOR are excluded from logarithms and 0*ln(0) is 0.

States that live on a truncated Fock space are compared against the Gibbs
family *of that truncated space*; this keeps the exact chain
L >= chi >= 0 and chi(t=0) = 0 intact at finite truncation. The analytic
(untruncated) Gibbs formulas are used for genuinely infinite-dimensional
states (see the gaussian module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import fock
from .dynamics import GeneratorOps, apply_dissipator
from .errors import InvalidStateError, NoSolutionError, UndefinedMeasureError
from .fock import SystemSpec

EIG_FLOOR = 1e-14
NEG_EIG_TOL = -1e-6
MEAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# spectral helpers

def _eigvalsh_sym(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))


def _entropy_from_probs(p: np.ndarray) -> float:
    q = p[p > EIG_FLOOR]
    return float(-np.sum(q * np.log(q)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S = -tr(rho ln rho) in nats."""
    p = _eigvalsh_sym(rho)
    if p[0] < NEG_EIG_TOL:
        raise InvalidStateError(f"eigenvalue {p[0]:.3e} below {NEG_EIG_TOL:.0e}")
    return _entropy_from_probs(p)


def capacity_of_entanglement(rho: np.ndarray) -> float:
    """Variance of the surprisal, tr(rho (ln rho)^2) - S^2."""
    p = _eigvalsh_sym(rho)
    if p[0] < NEG_EIG_TOL:
        raise InvalidStateError(f"eigenvalue {p[0]:.3e} below {NEG_EIG_TOL:.0e}")
    q = p[p > EIG_FLOOR]
    lq = np.log(q)
    s = -np.sum(q * lq)
    return float(np.sum(q * lq * lq) - s * s)


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """S(rho || sigma) = tr{rho(ln rho - ln sigma)}.

    Returns math.inf when rho carries weight (> 1e-12) outside the support
    of sigma; this is a distinguished value, not an exception, so sweeps can
    record divergent points and continue.
    """
    rho = np.asarray(rho, dtype=complex)
    p, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if p[0] < NEG_EIG_TOL:
        raise InvalidStateError(f"rho eigenvalue {p[0]:.3e} below {NEG_EIG_TOL:.0e}")
    q, v = np.linalg.eigh(0.5 * (np.asarray(sigma, dtype=complex)
                                 + np.asarray(sigma, dtype=complex).conj().T))
    null = q < EIG_FLOOR
    if np.any(null):
        v_null = v[:, null]
        weight = float(np.real(np.sum((v_null.conj() * (rho @ v_null)))))
        if weight > 1e-12:
            return math.inf
    term_rho = float(np.sum(p[p > EIG_FLOOR] * np.log(p[p > EIG_FLOOR])))
    keep = ~null
    overlap = np.abs(u.conj().T @ v[:, keep]) ** 2
    term_cross = float(np.real(p @ overlap @ np.log(q[keep])))
    return term_rho - term_cross


# ---------------------------------------------------------------------------
# Gibbs families of the uncoupled Hamiltonian

def gibbs_occupation(beta: float, omega: float) -> float:
    x = beta * omega
    if x > 700.0:  # occupation underflows; avoid expm1 overflow
        return 0.0
    return 1.0 / math.expm1(x)


def gibbs_energy_analytic(beta: float, freqs) -> float:
    """Mean energy of the untruncated Gibbs state at inverse temperature beta."""
    return float(sum(w * (gibbs_occupation(beta, w) + 0.5) for w in freqs))


def gibbs_entropy_analytic(beta: float, freqs) -> float:
    """Entropy of the untruncated Gibbs state: sum (n+1)ln(n+1) - n ln n."""
    s = 0.0
    for w in freqs:
        n = gibbs_occupation(beta, w)
        s += (n + 1.0) * math.log(n + 1.0) - (n * math.log(n) if n > 0 else 0.0)
    return s


def beta_from_energy(e: float, freqs) -> float:
    """Invert E(beta) = sum_j omega_j (nbar_j + 1/2) for the untruncated family.

    Bisection-style bracketed solve with monotone bracket expansion starting
    from [1e-6, 1e3]/omega_min; relative tolerance 1e-10.
    """
    freqs = tuple(float(w) for w in np.atleast_1d(freqs))
    ground = 0.5 * sum(freqs)
    if e <= ground:
        raise NoSolutionError(f"energy {e} at or below ground energy {ground}")
    w_min = min(freqs)
    lo, hi = 1e-6 / w_min, 1e3 / w_min

    def f(beta):
        return gibbs_energy_analytic(beta, freqs) - e

    while f(lo) < 0 and lo > 1e-300:
        lo /= 10.0
    while f(hi) > 0 and hi < 1e300:
        hi *= 10.0
    return float(brentq(f, lo, hi, rtol=1e-12, maxiter=200))


class TruncatedGibbsFamily:
    """Product Gibbs states of H0 restricted to a fixed Fock truncation.

    On the finite space the family is defined for every real beta (negative
    beta covers population-inverted energies), and E(beta) is a strictly
    decreasing bijection onto (E_min, E_max).
    """

    def __init__(self, freqs, dims):
        self.freqs = tuple(float(w) for w in freqs)
        self.dims = tuple(int(d) for d in dims)
        self.levels = [w * (np.arange(d) + 0.5) for w, d in zip(self.freqs, self.dims)]
        self.e_min = float(sum(lv[0] for lv in self.levels))
        self.e_max = float(sum(lv[-1] for lv in self.levels))

    def _mode_probs(self, beta: float, lv: np.ndarray) -> np.ndarray:
        logw = -beta * lv
        w = np.exp(logw - logw.max())
        return w / w.sum()

    def energy(self, beta: float) -> float:
        return float(sum(self._mode_probs(beta, lv) @ lv for lv in self.levels))

    def entropy(self, beta: float) -> float:
        s = 0.0
        for lv in self.levels:
            p = self._mode_probs(beta, lv)
            s += _entropy_from_probs(p)
        return s

    def log_z(self, beta: float) -> float:
        total = 0.0
        for lv in self.levels:
            logw = -beta * lv
            m = logw.max()
            total += m + math.log(np.exp(logw - m).sum())
        return total

    def beta_from_energy(self, e: float) -> float:
        margin = 1e-12 * (self.e_max - self.e_min)
        if e <= self.e_min + margin or e >= self.e_max - margin:
            raise NoSolutionError(
                f"energy {e} outside the truncated Gibbs range "
                f"({self.e_min}, {self.e_max})"
            )

        def f(beta):
            return self.energy(beta) - e

        lo, hi = -1.0, 1.0
        while f(hi) > 0:
            hi *= 2.0
            if hi > 1e6:
                raise NoSolutionError(f"no inverse temperature found for energy {e}")
        while f(lo) < 0:
            lo *= 2.0
            if lo < -1e6:
                raise NoSolutionError(f"no inverse temperature found for energy {e}")
        return float(brentq(f, lo, hi, rtol=1e-12, maxiter=200))


# ---------------------------------------------------------------------------
# synchronization distance

@dataclass(frozen=True)
class SyncDistance:
    d2: float
    s_theta: float | None
    s_r: float | None


def sync_distance(rho: np.ndarray, quads: list[np.ndarray]) -> SyncDistance:
    """Scale-invariant phase-space distance D^2, with the angular/radial split.

    quads is the (x_1, p_1, ..., x_N, p_N) operator list. For two modes also
    returns s_theta (undefined, hence None, when either mean vector vanishes)
    and s_r; for N > 2 only D^2 is defined.
    """
    rho = np.asarray(rho, dtype=complex)
    n_modes = len(quads) // 2
    if n_modes < 2:
        raise UndefinedMeasureError("need at least two modes")

    def ev(op):
        return float(np.real(np.trace(op @ rho)))

    sx = sum(quads[0::2])
    sp = sum(quads[1::2])
    r2_modes = [ev(quads[2 * j] @ quads[2 * j] + quads[2 * j + 1] @ quads[2 * j + 1])
                for j in range(n_modes)]
    r2_total = sum(r2_modes)
    if r2_total <= 0:
        raise UndefinedMeasureError("vanishing total phase-space radius")
    rbar2 = (ev(sx @ sx) + ev(sp @ sp)) / n_modes ** 2
    r2bar = r2_total / n_modes
    d2 = 2.0 * (1.0 - rbar2 / r2bar)

    if n_modes != 2:
        return SyncDistance(d2, None, None)

    u = min(max(r2_modes[0] / r2_total, 0.0), 1.0)
    s_r = 2.0 * math.sqrt(u * (1.0 - u))
    means = [math.hypot(ev(quads[2 * j]), ev(quads[2 * j + 1])) for j in range(2)]
    s_theta = None
    if means[0] > MEAN_TOL and means[1] > MEAN_TOL:
        cross = ev(quads[0] @ quads[2] + quads[1] @ quads[3])
        s_theta = cross / (means[0] * means[1])
    return SyncDistance(d2, s_theta, s_r)


# ---------------------------------------------------------------------------
# entropic cost functionals

def chi(rho: np.ndarray, spec: SystemSpec) -> float:
    """Relative-entropy distance to the (truncated) Gibbs manifold of H0.

    chi = S_G(beta_E) - S(rho) with beta_E matching the mean energy of rho.
    The raw value is returned; it is non-negative up to solver tolerance.
    """
    family = TruncatedGibbsFamily(spec.freqs, spec.dims.dims)
    e = float(np.real(fock.h0_energies(spec) @ np.diag(rho)))
    beta_e = family.beta_from_energy(e)
    return family.entropy(beta_e) - von_neumann_entropy(rho)


def big_l(rho: np.ndarray, rho0: np.ndarray) -> float:
    """Relative entropy to the specific initial equilibrium state."""
    return relative_entropy(rho, rho0)


def _log_matrix(rho: np.ndarray):
    p, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    logp = np.log(np.maximum(p, EIG_FLOOR))
    return p, u, (u * logp) @ u.conj().T


def sigma0(rho: np.ndarray, rho0: np.ndarray, jumps) -> float:
    """Spohn entropy production rate -tr{D[rho](ln rho - ln rho0)} of the bath channel."""
    rho = np.asarray(rho, dtype=complex)
    q = _eigvalsh_sym(rho0)
    if q[0] < EIG_FLOOR:
        return math.inf
    d = apply_dissipator(rho, jumps)
    _, _, log_rho = _log_matrix(rho)
    _, _, log_rho0 = _log_matrix(rho0)
    return float(-np.real(np.sum(d.T * (log_rho - log_rho0))))


@dataclass(frozen=True)
class LdotExact:
    value: float
    entropy_flow: float
    cov_ce: float
    sigma0: float
    delta_c: float
    delta_e: float


def ldot_exact(rho: np.ndarray, rho0: np.ndarray, spec: SystemSpec) -> LdotExact:
    """Exact rate of change of L from the master equation.

    dL/dt = 2 tr{(Hc - <Hc>) rho ln rho} + 2 beta0 C_CE - sigma0, with
    C_CE = <{H0, Hc}>/2 - <H0><Hc>.
    """
    rho = np.asarray(rho, dtype=complex)
    hc = fock.build_hc_dimer(spec)
    e_diag = fock.h0_energies(spec)
    jumps = fock.jump_ops(spec)
    beta0 = spec.beta

    p, u, log_rho = _log_matrix(rho)
    s = _entropy_from_probs(p)
    plogp = np.where(p > EIG_FLOOR, p * np.log(np.maximum(p, EIG_FLOOR)), 0.0)
    rho_log_rho = (u * plogp) @ u.conj().T

    mean_hc = float(np.real(np.sum(hc.T * rho)))
    entropy_flow = 2.0 * (float(np.real(np.sum(hc.T * rho_log_rho))) + mean_hc * s)

    mean_h0 = float(np.real(e_diag @ np.diag(rho)))
    anti = (e_diag[:, None] + e_diag[None, :]) * hc
    cov_ce = 0.5 * float(np.real(np.sum(anti.T * rho))) - mean_h0 * mean_hc

    sig0 = sigma0(rho, rho0, jumps)

    hc2 = hc @ hc
    var_c = float(np.real(np.sum(hc2.T * rho))) - mean_hc ** 2
    var_e = float(np.real((e_diag ** 2) @ np.diag(rho))) - mean_h0 ** 2
    return LdotExact(
        value=entropy_flow + 2.0 * beta0 * cov_ce - sig0,
        entropy_flow=entropy_flow,
        cov_ce=cov_ce,
        sigma0=sig0,
        delta_c=math.sqrt(max(var_c, 0.0)),
        delta_e=math.sqrt(max(var_e, 0.0)),
    )


@dataclass(frozen=True)
class QslBound:
    value: float
    cap_ent: float
    s_ge: float
    delta_c: float
    delta_e: float
    sigma0: float
    comm_abs: float
    discriminant_clamped: bool


def dimer_commutator_analytic(spec: SystemSpec) -> np.ndarray:
    """[H0, Hc] = (k/2)(omega_1 - omega_2)(a1^dag a2 - a2^dag a1) for the dimer."""
    a1 = fock.embed(fock.annihilation(spec.dims.dims[0]), 0, spec.dims)
    a2 = fock.embed(fock.annihilation(spec.dims.dims[1]), 1, spec.dims)
    hop = a1.conj().T @ a2
    return 0.5 * spec.k * (spec.freqs[0] - spec.freqs[1]) * (hop - hop.conj().T)


def qsl_bound(rho: np.ndarray, spec: SystemSpec, mode: str = "unbounded",
              rho0: np.ndarray | None = None) -> QslBound:
    """Upper bound on dL/dt.

    mode="unbounded" uses 2 Delta_C sqrt(E + S_GE^2); mode="bounded" uses
    4 ||Hc|| S_GE instead. The bounded variant relies on the operator norm of
    the truncated coupling, which grows with the truncation, so it is a
    diagnostic only for the dimer. A negative uncertainty discriminant is
    clamped to zero and flagged.
    """
    if mode not in ("unbounded", "bounded"):
        raise ValueError(f"unknown mode {mode!r}")
    rho = np.asarray(rho, dtype=complex)
    hc = fock.build_hc_dimer(spec)
    e_diag = fock.h0_energies(spec)
    beta0 = spec.beta
    if rho0 is None:
        rho0 = fock.initial_product_state(spec)

    p = _eigvalsh_sym(rho)
    q = p[p > EIG_FLOOR]
    lq = np.log(q)
    s = float(-np.sum(q * lq))
    cap = float(np.sum(q * lq * lq) - s * s)

    family = TruncatedGibbsFamily(spec.freqs, spec.dims.dims)
    e = float(np.real(e_diag @ np.diag(rho)))
    s_ge = family.entropy(family.beta_from_energy(e))

    mean_hc = float(np.real(np.sum(hc.T * rho)))
    var_c = float(np.real(np.sum((hc @ hc).T * rho))) - mean_hc ** 2
    var_e = float(np.real((e_diag ** 2) @ np.diag(rho))) - e ** 2
    delta_c = math.sqrt(max(var_c, 0.0))
    delta_e = math.sqrt(max(var_e, 0.0))

    comm = (e_diag[:, None] - e_diag[None, :]) * hc
    comm_mean = complex(np.sum(comm.T * rho))
    disc = var_e * var_c - 0.5 * abs(comm_mean) ** 2
    clamped = disc < 0
    disc = max(disc, 0.0)

    sig0 = sigma0(rho, rho0, fock.jump_ops(spec))
    if mode == "unbounded":
        first = 2.0 * delta_c * math.sqrt(cap + s_ge ** 2)
    else:
        hc_norm = float(np.max(np.abs(np.linalg.eigvalsh(hc))))
        first = 4.0 * hc_norm * s_ge
    value = first + 2.0 * beta0 * math.sqrt(disc) - sig0
    return QslBound(value, cap, s_ge, delta_c, delta_e, sig0, abs(comm_mean), clamped)


# ---------------------------------------------------------------------------
# chi-D lower bounds and the work bound

@dataclass(frozen=True)
class BoundParams:
    n_modes: int
    kappa: float
    distance: float

    def __post_init__(self):
        if self.n_modes < 2:
            raise ValueError("bounds need at least two modes")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must be in (0, 1]")
        if self.distance < 0.0:
            raise ValueError("distance must be non-negative")


@dataclass(frozen=True)
class ChiBound:
    value: float
    asymptotic: float


def chi_lower_bound(params: BoundParams, regime: str) -> ChiBound:
    """Lower bound on chi in terms of D, with its large-N asymptotic form.

    D = 0 gives a divergent (+inf) bound, returned as a distinguished value.
    """
    if regime not in ("quantum", "classical"):
        raise ValueError(f"unknown regime {regime!r}")
    n = params.n_modes
    kap = params.kappa
    d = params.distance
    if d == 0.0:
        return ChiBound(math.inf, math.inf)
    if regime == "classical":
        base = (n / kap) ** (n / (n - 1)) / (2.0 * (n - 1))
        asym = -n * math.log(d * d / (2.0 * kap))
    else:
        base = (math.e * n / (2.0 * kap)) ** (n / (n - 1)) / (2.0 * (n - 1))
        asym = -n * math.log(math.e * d * d / (4.0 * kap))
    value = -2.0 * (n - 1) * math.log(math.sqrt(base) * d)
    return ChiBound(value, asym)


@dataclass(frozen=True)
class WorkBound:
    value: float
    asymptotic: float
    asymptotic_per_mode: float


def work_lower_bound(params: BoundParams, temperature: float, regime: str = "quantum") -> WorkBound:
    """Minimal work to reach distance D: W >= chi_min / beta = T chi_min."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    cb = chi_lower_bound(params, regime)
    return WorkBound(temperature * cb.value, temperature * cb.asymptotic,
                     temperature * cb.asymptotic / params.n_modes)


# ---------------------------------------------------------------------------
# streaming metrics for trajectory runs

@dataclass
class MetricsRecord:
    t: float
    d2: float
    s_theta: float | None
    s_r: float
    chi: float
    big_l: float
    sigma0: float
    ldot_exact: float
    ldot_fd: float | None
    qsl_rhs: float
    energy: float
    entropy: float
    cap_ent: float
    cov_ce: float
    delta_c: float
    delta_e: float
    trace_err: float
    min_eig: float

    CSV_FIELDS = ("t", "d2", "s_theta", "s_r", "chi", "big_l", "sigma0",
                  "ldot_exact", "ldot_fd", "qsl_rhs", "energy", "entropy",
                  "cap_ent", "cov_ce", "delta_c", "delta_e", "trace_err",
                  "min_eig")
    CSV_HEADER = ("t", "D2", "s_theta", "s_r", "chi", "L", "sigma0",
                  "ldot_exact", "ldot_fd", "qsl_rhs", "energy", "entropy",
                  "cap_ent", "cov_ce", "delta_c", "delta_e", "trace_err",
                  "min_eig")


def _gather(mat_csr) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """COO triplets arranged so that tr(M rho) = sum(vals * rho[cols, rows])."""
    coo = mat_csr.tocoo()
    return coo.data.copy(), coo.row.astype(np.int64), coo.col.astype(np.int64)


class TrajectoryEvaluator:
    """Per-sample metrics for a dimer trajectory, sharing one eigendecomposition."""

    def __init__(self, spec: SystemSpec, ops: GeneratorOps | None = None):
        import scipy.sparse as sp

        if spec.n_modes != 2:
            raise UndefinedMeasureError("trajectory metrics are defined for the dimer")
        self.spec = spec
        self.ops = ops if ops is not None else GeneratorOps(spec)
        self.family = TruncatedGibbsFamily(spec.freqs, spec.dims.dims)
        self.beta0 = spec.beta
        self.e_diag = fock.h0_energies(spec)
        self.log_rho0_diag = -self.beta0 * self.e_diag - self.family.log_z(self.beta0)

        d1, d2 = spec.dims.dims
        a1 = sp.csr_matrix(fock.embed(fock.annihilation(d1), 0, spec.dims))
        a2 = sp.csr_matrix(fock.embed(fock.annihilation(d2), 1, spec.dims))
        hop = (a1.getH() @ a2).tocsr()
        self._hop = _gather(hop)
        self._a1 = _gather(a1)
        self._a2 = _gather(a2)
        n1 = np.add.outer(np.arange(d1), np.zeros(d2)).ravel()
        n2 = np.add.outer(np.zeros(d1), np.arange(d2)).ravel()
        self.n1_diag, self.n2_diag = n1, n2

        hc = self.ops.hc_csr
        self._hc = _gather(hc)
        self._hc2 = _gather((hc @ hc).tocsr())
        e = self.e_diag
        anti = hc.multiply(e[:, None] + e[None, :])
        comm = hc.multiply(e[:, None] - e[None, :])
        self._anti = _gather(anti.tocsr())
        self._comm = _gather(comm.tocsr())

    def _expect(self, triplet, mat: np.ndarray) -> complex:
        vals, rows, cols = triplet
        if vals.size == 0:
            return 0.0
        return complex(np.sum(vals * mat[cols, rows]))

    def l_value(self, rho: np.ndarray) -> float:
        """L = S(rho || rho0) using the closed form of ln rho0."""
        p = _eigvalsh_sym(rho)
        term_rho = float(np.sum(p[p > EIG_FLOOR] * np.log(p[p > EIG_FLOOR])))
        cross = float(np.real(np.diag(rho) @ self.log_rho0_diag))
        return term_rho - cross

    def sync_from_moments(self, rho: np.ndarray):
        diag = np.real(np.diag(rho))
        r1 = 2.0 * float(self.n1_diag @ diag) + 1.0
        r2 = 2.0 * float(self.n2_diag @ diag) + 1.0
        cross = 2.0 * np.real(self._expect(self._hop, rho))
        r_tot = r1 + r2
        d2 = (r1 + r2 - 2.0 * cross) / r_tot
        u = min(max(r1 / r_tot, 0.0), 1.0)
        s_r = 2.0 * math.sqrt(u * (1.0 - u))
        m1 = math.sqrt(2.0) * self._expect(self._a1, rho)
        m2 = math.sqrt(2.0) * self._expect(self._a2, rho)
        s_theta = None
        if abs(m1) > MEAN_TOL and abs(m2) > MEAN_TOL:
            s_theta = cross / (abs(m1) * abs(m2))
        return d2, s_theta, s_r

    def chi_at(self, rho: np.ndarray) -> tuple[float, float]:
        """(chi, energy) of a state on this spec's truncation."""
        e = float(np.real(np.diag(rho) @ self.e_diag))
        s_ge = self.family.entropy(self.family.beta_from_energy(e))
        return s_ge - von_neumann_entropy(rho), e

    def row(self, t: float, rho: np.ndarray, rho_prev: np.ndarray | None,
            rho_next: np.ndarray | None, trace_err: float, min_eig: float,
            dt: float) -> MetricsRecord:
        d2, s_theta, s_r = self.sync_from_moments(rho)

        p, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        logp = np.log(np.maximum(p, EIG_FLOOR))
        keep = p > EIG_FLOOR
        s = float(-np.sum(p[keep] * logp[keep]))
        cap = float(np.sum(p[keep] * logp[keep] ** 2) - s * s)
        log_rho = (u * logp) @ u.conj().T
        plogp = np.where(keep, p * logp, 0.0)
        rho_log_rho = (u * plogp) @ u.conj().T

        diag = np.real(np.diag(rho))
        energy = float(diag @ self.e_diag)
        beta_e = self.family.beta_from_energy(energy)
        s_ge = self.family.entropy(beta_e)
        chi_val = s_ge - s

        term_rho = float(np.sum(p[keep] * logp[keep]))
        l_val = term_rho - float(diag @ self.log_rho0_diag)

        ldot_fd = None
        if rho_prev is not None and rho_next is not None:
            ldot_fd = (self.l_value(rho_next) - self.l_value(rho_prev)) / (2.0 * dt)
        elif rho_next is not None:
            ldot_fd = (self.l_value(rho_next) - l_val) / dt
        elif rho_prev is not None:
            ldot_fd = (l_val - self.l_value(rho_prev)) / dt

        diss = self.ops.dissipator(rho)
        sig0 = float(-np.real(np.sum(diss.T * log_rho))
                     + np.real(np.diag(diss) @ self.log_rho0_diag))

        mean_hc = float(np.real(self._expect(self._hc, rho)))
        entropy_flow = 2.0 * (float(np.real(self._expect(self._hc, rho_log_rho)))
                              + mean_hc * s)
        cov_ce = 0.5 * float(np.real(self._expect(self._anti, rho))) - energy * mean_hc
        ldot = entropy_flow + 2.0 * self.beta0 * cov_ce - sig0

        var_c = float(np.real(self._expect(self._hc2, rho))) - mean_hc ** 2
        var_e = float((self.e_diag ** 2) @ diag) - energy ** 2
        delta_c = math.sqrt(max(var_c, 0.0))
        delta_e = math.sqrt(max(var_e, 0.0))
        comm_mean = self._expect(self._comm, rho)
        disc = max(var_e * var_c - 0.5 * abs(comm_mean) ** 2, 0.0)
        qsl = (2.0 * delta_c * math.sqrt(cap + s_ge ** 2)
               + 2.0 * self.beta0 * math.sqrt(disc) - sig0)

        return MetricsRecord(
            t=t, d2=d2, s_theta=s_theta, s_r=s_r, chi=chi_val, big_l=l_val,
            sigma0=sig0, ldot_exact=ldot, ldot_fd=ldot_fd, qsl_rhs=qsl,
            energy=energy, entropy=s, cap_ent=cap, cov_ce=cov_ce,
            delta_c=delta_c, delta_e=delta_e, trace_err=trace_err,
            min_eig=min_eig,
        )
