"""Flat key-value configuration files (INI sections) for the CLI.

Sections: [system], [integrator], [classical], [sample], [sweep], [bounds].
List values are whitespace-separated. Every parse failure names the section
and key it came from.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .classical import SLConfig
from .dynamics import IntegratorConfig
from .errors import ConfigError
from .fock import DEFAULT_N_MAX, ModeDims, SystemSpec
from .gaussian import SampleParams

_MISSING = object()


def load_config(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return cp


def config_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _raw(cp, section, key, default=_MISSING):
    if not cp.has_section(section) or not cp.has_option(section, key) \
            or cp.get(section, key).strip() == "":
        if default is _MISSING:
            raise ConfigError(f"missing required key [{section}] {key}")
        return None
    return cp.get(section, key).strip()

def _float(cp, section, key, default=_MISSING):
    raw = _raw(cp, section, key, default)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from exc


def _int(cp, section, key, default=_MISSING):
    raw = _raw(cp, section, key, default)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not an integer: {raw!r}") from exc


def _floats(cp, section, key, default=_MISSING):
    raw = _raw(cp, section, key, default)
    if raw is None:
        return default
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a number list: {raw!r}") from exc


def _ints(cp, section, key, default=_MISSING):
    raw = _raw(cp, section, key, default)
    if raw is None:
        return default
    try:
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not an integer list: {raw!r}") from exc


def _bool(cp, section, key, default=_MISSING):
    raw = _raw(cp, section, key, default)
    if raw is None:
        return default
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: not a boolean: {raw!r}")


def _str(cp, section, key, default=_MISSING):
    raw = _raw(cp, section, key, default)
    return default if raw is None else raw


def build_system_spec(cp) -> SystemSpec:
    freqs = _floats(cp, "system", "freqs")
    dims = _ints(cp, "system", "dims", default=(DEFAULT_N_MAX,) * len(freqs))
    try:
        return SystemSpec(
            freqs=freqs,
            k=_float(cp, "system", "k", default=0.0),
            temperature=_float(cp, "system", "temperature"),
            gamma_plus=_floats(cp, "system", "gamma_plus"),
            gamma_minus=_floats(cp, "system", "gamma_minus", default=None),
            dims=ModeDims(dims),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[system]: {exc}") from exc


def build_integrator(cp) -> IntegratorConfig:
    try:
        return IntegratorConfig(
            dt=_float(cp, "integrator", "dt", default=1e-3),
            t_final=_float(cp, "integrator", "t_final", default=10.0),
            sample_stride=_int(cp, "integrator", "sample_stride", default=100),
            renormalize=_bool(cp, "integrator", "renormalize", default=True),
        )
    except ValueError as exc:
        raise ConfigError(f"[integrator]: {exc}") from exc


def derived_classical_gammas(spec: SystemSpec) -> tuple[float, ...]:
    """Net two-photon damping gamma_minus - gamma_plus, per mode."""
    gm = spec.gamma_minus_effective()
    return tuple(m - p for m, p in zip(gm, spec.gamma_plus))


def build_sl_config(cp, seed: int) -> tuple[SLConfig, float]:
    """Classical run configuration plus the bath temperature for the initial draw."""
    has_system = cp.has_section("system")
    spec = build_system_spec(cp) if has_system else None
    freqs = _floats(cp, "classical", "freqs",
                    default=spec.freqs if spec else _MISSING)
    k = _float(cp, "classical", "k", default=spec.k if spec else 0.0)
    gammas = _floats(cp, "classical", "gammas",
                     default=derived_classical_gammas(spec) if spec else _MISSING)
    temperature = _float(cp, "classical", "temperature",
                         default=spec.temperature if spec else _MISSING)
    try:
        cfg = SLConfig(
            freqs=tuple(freqs),
            k=k,
            gammas=tuple(gammas),
            members=_int(cp, "classical", "members", default=10000),
            dt=_float(cp, "classical", "dt", default=1e-3),
            t_final=_float(cp, "classical", "t_final", default=10.0),
            sample_stride=_int(cp, "classical", "sample_stride", default=50),
            seed=seed,
            noise_amps=_floats(cp, "classical", "noise_amps", default=None),
            noise=_str(cp, "classical", "noise", default="complex"),
        )
    except ValueError as exc:
        raise ConfigError(f"[classical]: {exc}") from exc
    return cfg, temperature


def build_sample_params(cp, seed: int) -> tuple[SampleParams, float]:
    try:
        params = SampleParams(
            count=_int(cp, "sample", "count", default=10000),
            thermal_scale=_float(cp, "sample", "thermal_scale", default=1.0),
            max_squeeze=_float(cp, "sample", "max_squeeze", default=1.5),
            mean_scale=_float(cp, "sample", "mean_scale", default=2.0),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"[sample]: {exc}") from exc
    kappa = _float(cp, "sample", "kappa", default=1.0)
    if not 0.0 < kappa <= 1.0:
        raise ConfigError(f"[sample] kappa: must be in (0, 1], got {kappa}")
    return params, kappa


def classical_sweep_defaults(cp) -> tuple[tuple[float, ...] | None, int, float]:
    """(explicit gammas or None, ensemble size, dt) for classical sweep points."""
    gammas = _floats(cp, "classical", "gammas", default=None)
    members = _int(cp, "classical", "members", default=2000)
    dt = _float(cp, "classical", "dt", default=1e-3)
    return gammas, members, dt


@dataclass(frozen=True)
class SweepGrid:
    target: str
    k_values: tuple[float, ...]
    delta_omega_values: tuple[float, ...]
    t_obs: float
    dt: float | None = None
    dims: tuple[int, ...] | None = None
    members: int | None = None

    @property
    def size(self) -> int:
        return len(self.k_values) * len(self.delta_omega_values)


def build_sweep(cp) -> SweepGrid:
    target = _str(cp, "sweep", "target", default="quantum")
    if target not in ("quantum", "classical"):
        raise ConfigError(f"[sweep] target: must be quantum or classical, got {target!r}")
    k_count = _int(cp, "sweep", "k_count")
    dw_count = _int(cp, "sweep", "delta_omega_count")
    if k_count < 1 or dw_count < 1:
        raise ConfigError("[sweep]: axis counts must be >= 1")
    t_obs = _float(cp, "sweep", "t_obs", default=10.0)
    if t_obs <= 0:
        raise ConfigError("[sweep] t_obs: must be positive")
    k_vals = np.linspace(_float(cp, "sweep", "k_min"), _float(cp, "sweep", "k_max"),
                         k_count)
    dw_vals = np.linspace(_float(cp, "sweep", "delta_omega_min"),
                          _float(cp, "sweep", "delta_omega_max"), dw_count)
    return SweepGrid(
        target=target,
        k_values=tuple(float(v) for v in k_vals),
        delta_omega_values=tuple(float(v) for v in dw_vals),
        t_obs=t_obs,
        dt=_float(cp, "sweep", "dt", default=None),
        dims=_ints(cp, "sweep", "dims", default=None),
        members=_int(cp, "sweep", "members", default=None),
    )


@dataclass(frozen=True)
class BoundsTable:
    n_modes: tuple[int, ...]
    kappas: tuple[float, ...]
    d_values: tuple[float, ...]
    temperature: float


def build_bounds(cp) -> BoundsTable:
    n_modes = _ints(cp, "bounds", "n_modes", default=(2,))
    kappas = _floats(cp, "bounds", "kappa", default=(1.0,))
    d_min = _float(cp, "bounds", "d_min", default=0.01)
    d_max = _float(cp, "bounds", "d_max", default=2.0)
    d_count = _int(cp, "bounds", "d_count", default=50)
    if d_count < 1:
        raise ConfigError("[bounds] d_count: must be >= 1")
    temperature = _float(cp, "bounds", "temperature", default=1.0)
    if temperature <= 0:
        raise ConfigError("[bounds] temperature: must be positive")
    for n in n_modes:
        if n < 2:
            raise ConfigError("[bounds] n_modes: every entry must be >= 2")
    for kap in kappas:
        if not 0.0 < kap <= 1.0:
            raise ConfigError("[bounds] kappa: entries must be in (0, 1]")
    d_vals = tuple(float(v) for v in np.linspace(d_min, d_max, d_count))
    return BoundsTable(tuple(n_modes), tuple(kappas), d_vals, temperature)
