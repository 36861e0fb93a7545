"""Gaussian-state toolkit: symplectic spectra, entropies, chi, random sampling.

Quadrature ordering is (x_1, p_1, ..., x_N, p_N) and the symplectic form is
block-diagonal [[0, 1], [-1, 0]] per mode. Physical covariances satisfy
Sigma + i Omega / 2 >= 0, i.e. every symplectic eigenvalue nu >= 1/2.
Gaussian states are genuinely infinite-dimensional, so their Gibbs-manifold
comparisons use the analytic (untruncated) thermal formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDistributionError,
    UndefinedMeasureError,
    UnphysicalStateError,
)
from .metrics import beta_from_energy, gibbs_entropy_analytic

SYMMETRY_TOL = 1e-12
PSD_TOL = -1e-10
NU_TOL = 1e-6


def symplectic_form(n_modes: int) -> np.ndarray:
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        omega[2 * j, 2 * j + 1] = 1.0
        omega[2 * j + 1, 2 * j] = -1.0
    return omega


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of a bosonic Gaussian state.

    nus/squeeze carry the Williamson parameters when the state came from the
    random sampler; they are informational only.
    """

    mean: np.ndarray
    cov: np.ndarray
    nus: tuple[float, ...] | None = None
    squeeze: float | None = None

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2 != 0:
            raise ValueError("mean must be a flat vector of length 2N")
        if cov.shape != (mean.size, mean.size):
            raise ValueError("cov must be 2N x 2N")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def validate(self) -> float:
        """Checks symmetry and the uncertainty bound; returns the PSD margin."""
        asym = np.abs(self.cov - self.cov.T).max()
        if asym > SYMMETRY_TOL:
            raise UnphysicalStateError(f"covariance asymmetry {asym:.3e}")
        margin = validity_margin(self.cov)
        if margin < PSD_TOL:
            raise UnphysicalStateError(
                f"Sigma + i Omega/2 has eigenvalue {margin:.3e}"
            )
        return margin


def validity_margin(cov: np.ndarray) -> float:
    """Minimum eigenvalue of Sigma + i Omega / 2 (>= 0 for physical states)."""
    n = cov.shape[0] // 2
    h = cov + 0.5j * symplectic_form(n)
    return float(np.linalg.eigvalsh(h)[0])


def symplectic_spectrum(cov: np.ndarray) -> np.ndarray:
    """Williamson eigenvalues nu_j >= 1/2, in descending order."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(symplectic_form(n) @ cov))
    ev.sort()
    nus = 0.5 * (ev[0::2] + ev[1::2])
    if nus.size and nus[0] < 0.5 - NU_TOL:
        raise UnphysicalStateError(f"symplectic eigenvalue {nus[0]:.6f} < 1/2")
    return nus[::-1].copy()


def _single_mode_entropy(nu: float) -> float:
    up = nu + 0.5
    dn = nu - 0.5
    s = up * math.log(up)
    if dn > 0.0:
        s -= dn * math.log(dn)
    return s


def gaussian_entropy(state: GaussianState | np.ndarray) -> float:
    """Von Neumann entropy of a Gaussian state from its symplectic spectrum."""
    cov = state.cov if isinstance(state, GaussianState) else np.asarray(state)
    return float(sum(_single_mode_entropy(nu) for nu in symplectic_spectrum(cov)))


def classical_entropy(state: GaussianState | np.ndarray) -> float:
    """Differential (Shannon) entropy (1/2) ln |2 pi e Sigma|."""
    cov = state.cov if isinstance(state, GaussianState) else np.asarray(state)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise DegenerateDistributionError("covariance matrix is singular")
    n = cov.shape[0] // 2
    return float(n * math.log(2.0 * math.pi * math.e) + 0.5 * logdet)


def _mean_energy(state: GaussianState, freqs) -> float:
    m2 = np.diag(state.cov) + state.mean ** 2
    return 0.5 * float(sum(w * (m2[2 * j] + m2[2 * j + 1])
                           for j, w in enumerate(freqs)))


def gaussian_chi(state: GaussianState, freqs, regime: str = "quantum") -> float:
    """Entropy gap to the energy-matched Gibbs manifold (quantum or classical)."""
    freqs = tuple(float(w) for w in np.atleast_1d(freqs))
    if len(freqs) != state.n_modes:
        raise ValueError("freqs must list one frequency per mode")
    e = _mean_energy(state, freqs)
    if regime == "quantum":
        ground = 0.5 * sum(freqs)
        if e <= ground * (1.0 + 1e-12):
            s_ge = 0.0
        else:
            s_ge = gibbs_entropy_analytic(beta_from_energy(e, freqs), freqs)
        return s_ge - gaussian_entropy(state)
    if regime == "classical":
        if e <= 0:
            raise ValueError("classical energy must be positive")
        n = len(freqs)
        s_ge = float(sum(math.log(2.0 * math.pi * math.e * e / (n * w))
                         for w in freqs))
        return s_ge - classical_entropy(state)
    raise ValueError(f"unknown regime {regime!r}")


def gaussian_sync_distance(state: GaussianState) -> float:
    """D^2 from first and second Gaussian moments (same contract as the
    Fock-space measure; second moments are taken about zero)."""
    n = state.n_modes
    if n < 2:
        raise UndefinedMeasureError("need at least two modes")
    m2 = state.cov + np.outer(state.mean, state.mean)
    x_idx = np.arange(0, 2 * n, 2)
    p_idx = x_idx + 1
    r2_total = float(np.trace(m2))
    if r2_total <= 0:
        raise UndefinedMeasureError("vanishing total phase-space radius")
    rbar2 = (float(m2[np.ix_(x_idx, x_idx)].sum())
             + float(m2[np.ix_(p_idx, p_idx)].sum())) / n ** 2
    return 2.0 * (1.0 - rbar2 / (r2_total / n))


# ---------------------------------------------------------------------------
# random physical states (two modes)

@dataclass(frozen=True)
class SampleParams:
    count: int
    thermal_scale: float = 1.0
    max_squeeze: float = 1.5
    mean_scale: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be non-negative")
        if self.thermal_scale < 0 or self.max_squeeze < 0 or self.mean_scale < 0:
            raise ValueError("scales must be non-negative")


def _mode_rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


def _passive_two_mode(rng: np.random.Generator) -> np.ndarray:
    """Random orthogonal-symplectic transform: phases, beam splitter, phases."""
    phi = rng.uniform(0.0, 2.0 * math.pi, size=2)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    psi = rng.uniform(0.0, 2.0 * math.pi, size=2)
    pre = np.block([[_mode_rotation(phi[0]), np.zeros((2, 2))],
                    [np.zeros((2, 2)), _mode_rotation(phi[1])]])
    c, s = math.cos(theta), math.sin(theta)
    eye = np.eye(2)
    bs = np.block([[c * eye, s * eye], [-s * eye, c * eye]])
    post = np.block([[_mode_rotation(psi[0]), np.zeros((2, 2))],
                     [np.zeros((2, 2)), _mode_rotation(psi[1])]])
    return pre @ bs @ post


def sample_random(params: SampleParams):
    """Stream of random physical two-mode Gaussian states.

    Williamson construction Sigma = S diag(nu_j x I2) S^T with
    nu_j = 1/2 + Exp(thermal_scale), S = O1 diag(e^r, e^-r, e^r, e^-r) O2
    (O1, O2 random passive transforms, r uniform on [0, max_squeeze]), and
    normally distributed means. Draw i depends only on (seed, i), so any
    prefix of the stream is reproducible and independent of chunking.
    """
    for i in range(params.count):
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, i]))
        nus = 0.5 + rng.exponential(params.thermal_scale, size=2) \
            if params.thermal_scale > 0 else np.array([0.5, 0.5])
        r = rng.uniform(0.0, params.max_squeeze) if params.max_squeeze > 0 else 0.0
        o1 = _passive_two_mode(rng)
        o2 = _passive_two_mode(rng)
        squeeze = np.diag([math.exp(r), math.exp(-r)] * 2)
        s_mat = o1 @ squeeze @ o2
        cov = s_mat @ np.diag(np.repeat(nus, 2)) @ s_mat.T
        cov = 0.5 * (cov + cov.T)
        mean = (rng.normal(0.0, params.mean_scale, size=4)
                if params.mean_scale > 0 else np.zeros(4))
        yield GaussianState(mean, cov, nus=(float(nus[0]), float(nus[1])),
                            squeeze=float(r))


# ---------------------------------------------------------------------------
# convex hull (monotone chain)

def convex_hull(points) -> list[tuple[float, float]]:
    """Counterclockwise convex hull vertices, collinear boundary points excluded.

    Degenerate inputs (all points coincident or collinear) return the one or
    two extreme points instead of a polygon; callers can detect this by
    len(result) < 3.
    """
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        return [pts[0], pts[-1]]
    return hull


def hull_area(vertices) -> float:
    """Shoelace area of an ordered polygon."""
    if len(vertices) < 3:
        return 0.0
    arr = np.asarray(vertices, dtype=float)
    x, y = arr[:, 0], arr[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
