"""Classical Stuart-Landau dimer: ensemble Monte Carlo and its bounds.

Complex phase-space representation z_j = (x_j + i p_j)/sqrt(2). The drift is

    dz_j/dt = (k/2 - i omega_j - gamma_j |z_j|^2) z_j + (k/2)(z_other - z_j),

i.e. the bracket multiplies z_j (standard Stuart-Landau form), and the noise
kick is -i * amp_j * sqrt(dt) * eta with eta a complex (or, optionally, real)
standard normal and amp_j defaulting to 2 sqrt(gamma_j).

Classical entropies use the Gaussian approximation of the ensemble, which
upper-bounds the true Shannon entropy and therefore makes the reported
chi_cl a certified lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError

D_PHASE = 4  # phase-space dimension of the dimer


@dataclass(frozen=True)
class SLConfig:
    freqs: tuple[float, float]
    k: float
    gammas: tuple[float, float]
    members: int = 10000
    dt: float = 1e-3
    t_final: float = 10.0
    sample_stride: int = 50
    seed: int = 0
    noise_amps: tuple[float, float] | None = None
    noise: str = "complex"

    def __post_init__(self):
        if len(self.freqs) != 2 or len(self.gammas) != 2:
            raise ValueError("the classical model is a two-oscillator dimer")
        if self.members < 2:
            raise ValueError("need at least two ensemble members")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if any(g < 0 for g in self.gammas):
            raise ValueError("nonlinear damping rates must be non-negative")
        if self.noise not in ("complex", "imaginary"):
            raise ValueError("noise must be 'complex' or 'imaginary'")
        object.__setattr__(self, "freqs", tuple(float(w) for w in self.freqs))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if self.noise_amps is not None:
            object.__setattr__(self, "noise_amps",
                               tuple(float(a) for a in self.noise_amps))

    def amps(self) -> tuple[float, float]:
        if self.noise_amps is not None:
            return self.noise_amps
        return tuple(2.0 * math.sqrt(g) for g in self.gammas)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class SLEnsemble:
    z1: np.ndarray
    z2: np.ndarray
    t: float = 0.0

    def copy(self) -> "SLEnsemble":
        return SLEnsemble(self.z1.copy(), self.z2.copy(), self.t)

    @property
    def members(self) -> int:
        return self.z1.size


def thermal_ensemble(config: SLConfig, temperature: float,
                     rng: np.random.Generator) -> SLEnsemble:
    """Members drawn from the classical Gibbs distribution at the given T."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    m = config.members
    zs = []
    for w in config.freqs:
        scale = math.sqrt(temperature / (2.0 * w))
        zs.append(scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m)))
    return SLEnsemble(zs[0], zs[1], 0.0)


def drift(z1, z2, config: SLConfig):
    """Deterministic part of the coupled Stuart-Landau flow."""
    w1, w2 = config.freqs
    g1, g2 = config.gammas
    half_k = 0.5 * config.k
    d1 = (half_k - 1j * w1 - g1 * np.abs(z1) ** 2) * z1 + half_k * (z2 - z1)
    d2 = (half_k - 1j * w2 - g2 * np.abs(z2) ** 2) * z2 + half_k * (z1 - z2)
    return d1, d2


def em_step(ens: SLEnsemble, config: SLConfig, rng: np.random.Generator) -> SLEnsemble:
    """One Euler-Maruyama step; raises BlowUpError on a non-finite member."""
    d1, d2 = drift(ens.z1, ens.z2, config)
    dt = config.dt
    sq = math.sqrt(dt)
    amps = config.amps()
    kicks = []
    for amp in amps:
        if config.noise == "complex":
            eta = (rng.standard_normal(ens.members)
                   + 1j * rng.standard_normal(ens.members)) / math.sqrt(2.0)
        else:
            eta = rng.standard_normal(ens.members)
        kicks.append(-1j * amp * sq * eta)
    z1 = ens.z1 + d1 * dt + kicks[0]
    z2 = ens.z2 + d2 * dt + kicks[1]
    t = ens.t + dt
    bad = ~(np.isfinite(z1) & np.isfinite(z2))
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise BlowUpError(f"non-finite member {idx} at t={t:.6g}", t=t, member=idx)
    return SLEnsemble(z1, z2, t)


def quadrature_samples(ens: SLEnsemble) -> np.ndarray:
    """(M, 4) array of (x1, p1, x2, p2) per member."""
    s = math.sqrt(2.0)
    return np.column_stack([s * ens.z1.real, s * ens.z1.imag,
                            s * ens.z2.real, s * ens.z2.imag])


def ensemble_moments(ens: SLEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased covariance of (x1, p1, x2, p2)."""
    r = quadrature_samples(ens)
    return r.mean(axis=0), np.cov(r, rowvar=False, ddof=1)


def circular_variance(phases: np.ndarray) -> float:
    """1 - |<exp(i phi)>| of a phase sample."""
    return 1.0 - float(np.abs(np.mean(np.exp(1j * np.asarray(phases)))))


@dataclass(frozen=True)
class ClassicalMetrics:
    d2: float
    chi_cl: float
    circ_var: float
    mean_r1_sq: float
    mean_r2_sq: float
    energy: float
    entropy_cl: float


def classical_l(ens: SLEnsemble, freqs, beta0: float) -> float:
    """L = beta0 E - S_cl + ln Z0 relative to the classical Gibbs state at beta0."""
    met = classical_metrics(ens, freqs)
    if not math.isfinite(met.entropy_cl):
        return math.inf
    log_z0 = sum(math.log(2.0 * math.pi / (beta0 * w)) for w in freqs)
    return beta0 * met.energy - met.entropy_cl + log_z0


def classical_metrics(ens: SLEnsemble, freqs) -> ClassicalMetrics:
    """Synchronization distance and chi of the ensemble (Gaussian approximation).

    A singular sample covariance is reported as chi_cl = +inf (degenerate
    signal), never an exception.
    """
    w1, w2 = freqs
    r = quadrature_samples(ens)
    m2 = (r * r).mean(axis=0)
    mean_r1_sq = float(m2[0] + m2[1])
    mean_r2_sq = float(m2[2] + m2[3])
    r_tot = mean_r1_sq + mean_r2_sq
    diff = (r[:, 2] - r[:, 0]) ** 2 + (r[:, 3] - r[:, 1]) ** 2
    d2 = float(diff.mean() / r_tot)

    energy = 0.5 * (w1 * mean_r1_sq + w2 * mean_r2_sq)
    cov = np.cov(r, rowvar=False, ddof=1)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        entropy_cl = -math.inf
        chi_cl = math.inf
    else:
        entropy_cl = 2.0 * math.log(2.0 * math.pi * math.e) + 0.5 * float(logdet)
        s_ge = sum(math.log(2.0 * math.pi * math.e * energy / (2.0 * w))
                   for w in (w1, w2))
        chi_cl = float(s_ge - entropy_cl)

    phi = np.angle(ens.z1) - np.angle(ens.z2)
    return ClassicalMetrics(d2, chi_cl, circular_variance(phi),
                            mean_r1_sq, mean_r2_sq, energy, entropy_cl)


@dataclass(frozen=True)
class CslBound:
    value: float
    std_error: float
    sigma0: float
    flow: float
    delta_c: float
    delta_e: float
    entropy_cl: float

    @property
    def lnf2(self) -> float:
        return self.entropy_cl ** 2 + 0.5 * D_PHASE


def csl_bound(ens: SLEnsemble, config: SLConfig, beta0: float) -> CslBound:
    """Classical upper bound on dL/dt for the dimer.

    value = beta0 (k(w1+w2)/2) <r1.r2> + 2 Delta_C sqrt(<(ln f)^2>)
            + 2 beta0 Delta_C Delta_E - sigma0,

    with <(ln f)^2> = S_cl^2 + d/2 under the Gaussian approximation and
    sigma0 = (dS/dt - beta0 dE/dt) of the dissipative (uncoupled) generator
    estimated from sample moments. std_error is a 1-sigma Monte Carlo
    estimate of the stochastic terms.
    """
    w1, w2 = config.freqs
    g1, g2 = config.gammas
    a1, a2 = config.amps()
    m = ens.members
    sqm = math.sqrt(m)

    rr = 2.0 * np.real(ens.z1 * np.conj(ens.z2))  # x1 x2 + p1 p2 per member
    hc = config.k * np.real(ens.z1 * np.conj(ens.z2))
    abs1 = np.abs(ens.z1) ** 2
    abs2 = np.abs(ens.z2) ** 2
    h0 = w1 * abs1 + w2 * abs2

    flow_coeff = beta0 * 0.5 * config.k * (w1 + w2)
    flow = flow_coeff * float(rr.mean())

    delta_c = float(hc.std(ddof=1))
    delta_e = float(h0.std(ddof=1))

    r = quadrature_samples(ens)
    cov = np.cov(r, rowvar=False, ddof=1)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise np.linalg.LinAlgError("degenerate ensemble covariance")
    s_cl = 2.0 * math.log(2.0 * math.pi * math.e) + 0.5 * float(logdet)
    lnf2 = s_cl ** 2 + 0.5 * D_PHASE

    cov_inv = np.linalg.inv(cov)
    gam = (0.5 * a1 ** 2, 0.5 * a2 ** 2)  # per-quadrature diffusion coefficients
    e_dot = (w1 * (-2.0 * g1 * float((abs1 ** 2).mean()) + a1 ** 2)
             + w2 * (-2.0 * g2 * float((abs2 ** 2).mean()) + a2 ** 2))
    s_dot = (-4.0 * (g1 * float(abs1.mean()) + g2 * float(abs2.mean()))
             + gam[0] * (cov_inv[0, 0] + cov_inv[1, 1])
             + gam[1] * (cov_inv[2, 2] + cov_inv[3, 3]))
    sig0 = s_dot - beta0 * e_dot

    value = flow + 2.0 * delta_c * math.sqrt(lnf2) + 2.0 * beta0 * delta_c * delta_e - sig0

    # Monte Carlo standard errors of the sampled pieces, combined in quadrature
    se_flow = flow_coeff * float(rr.std(ddof=1)) / sqm
    hc_sq = (hc - hc.mean()) ** 2
    h0_sq = (h0 - h0.mean()) ** 2
    se_dc = float(hc_sq.std(ddof=1)) / sqm / (2.0 * delta_c) if delta_c > 0 else 0.0
    se_de = float(h0_sq.std(ddof=1)) / sqm / (2.0 * delta_e) if delta_e > 0 else 0.0
    se_cs = 2.0 * math.sqrt(lnf2) * se_dc + 2.0 * beta0 * (delta_e * se_dc + delta_c * se_de)
    se_sig = beta0 * math.hypot(2.0 * w1 * g1 * float((abs1 ** 2).std(ddof=1)),
                                2.0 * w2 * g2 * float((abs2 ** 2).std(ddof=1))) / sqm
    se = math.sqrt(se_flow ** 2 + se_cs ** 2 + se_sig ** 2)

    return CslBound(value, se, sig0, flow, delta_c, delta_e, s_cl)


@dataclass
class ClassicalTrajectory:
    times: list[float] = field(default_factory=list)
    ensembles: list[SLEnsemble] | None = None
    final: SLEnsemble | None = None


def simulate(config: SLConfig, temperature: float, observer=None,
             store: bool | None = None) -> ClassicalTrajectory:
    """Euler-Maruyama evolution from the thermal ensemble, sampled on a stride.

    observer(t, ensemble) runs at each sampled step. Bit-reproducible for a
    fixed (config, temperature): a single RNG stream drives the initial draw
    and every kick in order.
    """
    rng = np.random.default_rng(np.random.SeedSequence([config.seed]))
    ens = thermal_ensemble(config, temperature, rng)
    if store is None:
        store = observer is None
    rec = ClassicalTrajectory(ensembles=[] if store else None)

    def sample(e: SLEnsemble):
        rec.times.append(e.t)
        if store:
            rec.ensembles.append(e.copy())
        if observer is not None:
            observer(e.t, e)

    sample(ens)
    stride = config.sample_stride
    for i in range(1, config.n_steps + 1):
        ens = em_step(ens, config, rng)
        ens.t = i * config.dt  # avoid accumulated float drift in sample times
        if i % stride == 0:
            sample(ens)
    rec.final = ens
    return rec
