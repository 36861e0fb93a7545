"""Truncated Fock-space operators, Hamiltonians, jump operators and thermal states.

All operators act on the tensor product of per-mode truncated Fock spaces.
Mode 1 is the slowest-varying index of the tensor product, so for two modes
the joint basis is ordered |0,0>, |0,1>, ..., |0,d2-1>, |1,0>, ...
Units: hbar = k_B = 1, all frequencies angular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidRateError,
    TruncationInsufficientError,
    UnsupportedTopologyError,
)

DEFAULT_N_MAX = 15

# Population allowed in the joint top-two-level corner (every mode within its
# top two levels) before a thermal construction is rejected as under-truncated.
TAIL_MASS_LIMIT = 1e-4


@dataclass(frozen=True)
class ModeDims:
    """Per-mode truncation sizes; mode j keeps levels 0..dims[j]-1."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise InvalidDimensionError("need at least one mode")
        for d in self.dims:
            if int(d) != d or d < 2:
                raise InvalidDimensionError(f"every mode needs >= 2 levels, got {d}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))


@dataclass(frozen=True)
class SystemSpec:
    """Physical parameters of the coupled-oscillator system.

    gamma_minus defaults to the local-detailed-balance value
    exp(2 * omega_j / T) * gamma_plus_j per mode, which makes the thermal
    product state stationary under the two-photon dissipator.
    """

    freqs: tuple[float, ...]
    k: float
    temperature: float
    gamma_plus: tuple[float, ...]
    dims: ModeDims
    gamma_minus: tuple[float, ...] | None = None

    def __post_init__(self):
        freqs = tuple(float(w) for w in np.atleast_1d(self.freqs))
        object.__setattr__(self, "freqs", freqs)
        if any(w <= 0 for w in freqs):
            raise ValueError("mode frequencies must be positive")
        if self.temperature <= 0:
            raise ValueError("bath temperature must be positive")
        gp = np.atleast_1d(self.gamma_plus).astype(float)
        if gp.size == 1:
            gp = np.repeat(gp, len(freqs))
        if gp.size != len(freqs):
            raise ValueError("gamma_plus must be scalar or one value per mode")
        if np.any(gp < 0):
            raise InvalidRateError("gamma_plus must be non-negative")
        object.__setattr__(self, "gamma_plus", tuple(gp))
        if self.gamma_minus is not None:
            gm = np.atleast_1d(self.gamma_minus).astype(float)
            if gm.size == 1:
                gm = np.repeat(gm, len(freqs))
            if gm.size != len(freqs):
                raise ValueError("gamma_minus must be scalar or one value per mode")
            if np.any(gm < 0):
                raise InvalidRateError("gamma_minus must be non-negative")
            object.__setattr__(self, "gamma_minus", tuple(gm))
        if self.dims.n_modes != len(freqs):
            raise InvalidDimensionError("dims must list one truncation per mode")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    @property
    def n_modes(self) -> int:
        return len(self.freqs)

    def gamma_minus_effective(self) -> tuple[float, ...]:
        """Per-mode two-photon gain-side rate, derived from detailed balance if unset."""
        if self.gamma_minus is not None:
            return self.gamma_minus
        b = self.beta
        return tuple(
            math.exp(2.0 * b * w) * gp for w, gp in zip(self.freqs, self.gamma_plus)
        )


def annihilation(dim: int) -> np.ndarray:
    """Matrix of the bosonic annihilation operator on a dim-level space."""
    if dim < 2:
        raise InvalidDimensionError(f"annihilation needs dim >= 2, got {dim}")
    a = np.zeros((dim, dim), dtype=complex)
    n = np.arange(dim - 1)
    a[n, n + 1] = np.sqrt(n + 1.0)
    return a


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number(dim: int) -> np.ndarray:
    if dim < 2:
        raise InvalidDimensionError(f"number needs dim >= 2, got {dim}")
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def embed(op: np.ndarray, mode: int, dims: ModeDims) -> np.ndarray:
    """Embed a single-mode operator into the full tensor-product space."""
    if op.shape != (dims.dims[mode], dims.dims[mode]):
        raise InvalidDimensionError(
            f"operator shape {op.shape} does not match mode {mode} dim {dims.dims[mode]}"
        )
    full = np.array([[1.0 + 0.0j]])
    for j, d in enumerate(dims.dims):
        factor = op if j == mode else np.eye(d, dtype=complex)
        full = np.kron(full, factor)
    return full


def quadratures(spec: SystemSpec) -> list[np.ndarray]:
    """Dimensionless quadratures (x_1, p_1, ..., x_N, p_N) on the full space.

    x_j = (a_j + a_j^dag)/sqrt(2), p_j = (a_j - a_j^dag)/(i sqrt(2)).
    """
    ops = []
    for j, d in enumerate(spec.dims.dims):
        a = annihilation(d)
        x = (a + a.conj().T) / math.sqrt(2.0)
        p = (a - a.conj().T) / (1j * math.sqrt(2.0))
        ops.append(embed(x, j, spec.dims))
        ops.append(embed(p, j, spec.dims))
    return ops


def h0_energies(spec: SystemSpec) -> np.ndarray:
    """Diagonal of H0 = sum_j omega_j (n_j + 1/2) in the joint basis."""
    e = np.zeros(1)
    for w, d in zip(spec.freqs, spec.dims.dims):
        e = np.add.outer(e, w * (np.arange(d) + 0.5)).ravel()
    return e


def build_h0(spec: SystemSpec) -> np.ndarray:
    return np.diag(h0_energies(spec)).astype(complex)


def build_hc_dimer(spec: SystemSpec) -> np.ndarray:
    """Hermitian coupling (k/2)(a_1^dag a_2 + a_2^dag a_1) of the dissipative dimer."""
    if spec.n_modes != 2:
        raise UnsupportedTopologyError(
            f"dimer coupling needs exactly 2 modes, got {spec.n_modes}"
        )
    a1 = embed(annihilation(spec.dims.dims[0]), 0, spec.dims)
    a2 = embed(annihilation(spec.dims.dims[1]), 1, spec.dims)
    hop = a1.conj().T @ a2
    return 0.5 * spec.k * (hop + hop.conj().T)


def jump_ops(spec: SystemSpec) -> list[np.ndarray]:
    """Scaled two-photon jump operators, per mode: sqrt(g+)(a^dag)^2, sqrt(g-)a^2.

    Zero-rate operators are omitted (they contribute nothing to the dissipator).
    """
    gm = spec.gamma_minus_effective()
    ops = []
    for j, d in enumerate(spec.dims.dims):
        gp_j = spec.gamma_plus[j]
        gm_j = gm[j]
        if gp_j < 0 or gm_j < 0:
            raise InvalidRateError("two-photon rates must be non-negative")
        a = annihilation(d)
        if gp_j > 0:
            ops.append(math.sqrt(gp_j) * embed(creation(d) @ creation(d), j, spec.dims))
        if gm_j > 0:
            ops.append(math.sqrt(gm_j) * embed(a @ a, j, spec.dims))
    return ops


def thermal_populations(beta: float, omega: float, dim: int) -> np.ndarray:
    """Normalized level populations of a truncated single-mode Gibbs state."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    logp = -beta * omega * np.arange(dim)
    p = np.exp(logp - logp.max())
    return p / p.sum()


def thermal_state(beta: float, omega: float, dim: int) -> np.ndarray:
    """Single-mode thermal density matrix, normalized over the truncation."""
    return np.diag(thermal_populations(beta, omega, dim)).astype(complex)


def top_corner_mass(populations: list[np.ndarray]) -> float:
    """Joint population of the corner where every mode is in its top two levels."""
    mass = 1.0
    for p in populations:
        mass *= float(p[-2:].sum())
    return mass


def initial_product_state(spec: SystemSpec) -> np.ndarray:
    """Tensor product of per-mode thermal states at the bath temperature.

    Rejects truncations whose top-two-level corner carries more than
    TAIL_MASS_LIMIT of the joint population.
    """
    beta = spec.beta
    pops = [
        thermal_populations(beta, w, d) for w, d in zip(spec.freqs, spec.dims.dims)
    ]
    tail = top_corner_mass(pops)
    if tail > TAIL_MASS_LIMIT:
        raise TruncationInsufficientError(
            f"top-two-level population {tail:.3e} exceeds {TAIL_MASS_LIMIT:.0e}; "
            "increase the per-mode truncation"
        )
    joint = pops[0]
    for p in pops[1:]:
        joint = np.outer(joint, p).ravel()
    return np.diag(joint).astype(complex)
