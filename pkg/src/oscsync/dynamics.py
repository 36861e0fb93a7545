"""Integration of the nonlinear non-Hermitian master equation.

The generator is

    drho/dt = -i[H0, rho] + {Hc, rho} - 2<Hc> rho + D[rho],

with D in GKSL form. Everything linear in rho is precomputed as one sparse
superoperator acting on vec(rho), so a generator evaluation is a single
sparse matrix-vector product plus the rank-one nonlinear correction. The
mean <Hc> is re-evaluated inside every Runge-Kutta stage; freezing it at
the step start breaks trace preservation at O(dt^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fock
from .errors import InvalidCouplingError, PositivityLossError
from .fock import SystemSpec

HERMITICITY_TOL = 1e-10
STEP_POSITIVITY_TOL = -1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_final: float = 10.0
    sample_stride: int = 100
    renormalize: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be non-negative")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class TrajectoryRecord:
    times: list[float] = field(default_factory=list)
    states: list[np.ndarray] | None = None
    trace_errs: list[float] = field(default_factory=list)
    min_eigs: list[float] = field(default_factory=list)
    final_rho: np.ndarray | None = None
    final_t: float = 0.0


def _superop_left(a: sp.spmatrix, dim: int) -> sp.csr_matrix:
    """vec(A rho) = (A (x) I) vec(rho) for row-major vec."""
    return sp.kron(a, sp.identity(dim, format="csr"), format="csr")


def _superop_right(b: sp.spmatrix, dim: int) -> sp.csr_matrix:
    """vec(rho B) = (I (x) B^T) vec(rho) for row-major vec."""
    return sp.kron(sp.identity(dim, format="csr"), b.T, format="csr")


def _superop_sandwich(f: sp.spmatrix, dim: int) -> sp.csr_matrix:
    """vec(F rho F^dag) = (F (x) conj(F)) vec(rho)."""
    return sp.kron(f, f.conj(), format="csr")


class GeneratorOps:
    """Precomputed superoperators of the master equation for one SystemSpec."""

    def __init__(self, spec: SystemSpec):
        self.spec = spec
        d = spec.dims.total
        self.dim = d
        self.h0_diag = fock.h0_energies(spec)

        if spec.n_modes == 2:
            hc = sp.csr_matrix(fock.build_hc_dimer(spec))
        else:
            hc = sp.csr_matrix((d, d), dtype=complex)
        self.hc_csr = hc
        hc_coo = hc.tocoo()
        # flat indices of rho[col, row], for tr{Hc rho} as a gather
        self._hc_vals = hc_coo.data.copy()
        self._hc_gather = hc_coo.col.astype(np.int64) * d + hc_coo.row.astype(np.int64)

        self.jumps_csr = [sp.csr_matrix(f) for f in fock.jump_ops(spec)]
        dissipator = sp.csr_matrix((d * d, d * d), dtype=complex)
        for f in self.jumps_csr:
            ffd = (f.getH() @ f).tocsr()
            dissipator = dissipator + _superop_sandwich(f, d)
            dissipator = dissipator - 0.5 * (_superop_left(ffd, d) + _superop_right(ffd, d))
        self.dissipator_vec = dissipator.tocsr()

        gaps = -1j * (self.h0_diag[:, None] - self.h0_diag[None, :]).ravel()
        self.commutator_diag = gaps
        lc = _superop_left(hc, d) + _superop_right(hc, d)
        self.lc_vec = lc.tocsr()
        full = self.dissipator_vec + self.lc_vec + sp.diags(gaps)
        full = full.tocsr()
        full.sum_duplicates()
        self.linear_vec = full
        self._hc_norm: float | None = None

    def expect_hc(self, rho_flat: np.ndarray) -> float:
        if self._hc_vals.size == 0:
            return 0.0
        return float(np.real(np.dot(self._hc_vals, rho_flat[self._hc_gather])))

    def hc_operator_norm(self) -> float:
        if self._hc_norm is None:
            if self.hc_csr.nnz == 0:
                self._hc_norm = 0.0
            else:
                vals = np.linalg.eigvalsh(self.hc_csr.toarray())
                self._hc_norm = float(np.max(np.abs(vals)))
        return self._hc_norm

    def rhs_flat(self, v: np.ndarray) -> np.ndarray:
        """Full nonlinear generator on vec(rho)."""
        out = self.linear_vec @ v
        out -= (2.0 * self.expect_hc(v)) * v
        return out

    def dissipator(self, rho: np.ndarray) -> np.ndarray:
        return (self.dissipator_vec @ rho.ravel()).reshape(rho.shape)

    def rhs_l0(self, rho: np.ndarray) -> np.ndarray:
        """Uncoupled part -i[H0, rho] + D[rho]."""
        v = rho.ravel()
        out = self.dissipator_vec @ v + self.commutator_diag * v
        return out.reshape(rho.shape)


def _as_ops(spec_or_ops) -> GeneratorOps:
    if isinstance(spec_or_ops, GeneratorOps):
        return spec_or_ops
    return GeneratorOps(spec_or_ops)


def apply_dissipator(rho: np.ndarray, jumps) -> np.ndarray:
    """Sum_i F_i rho F_i^dag - (1/2){F_i^dag F_i, rho} for arbitrary rho."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for f in jumps:
        f = f.toarray() if sp.issparse(f) else np.asarray(f, dtype=complex)
        if f.shape != rho.shape:
            raise ValueError(f"jump operator shape {f.shape} != state shape {rho.shape}")
        fd = f.conj().T
        ffd = fd @ f
        out += f @ rho @ fd - 0.5 * (ffd @ rho + rho @ ffd)
    return out


def apply_l0(rho: np.ndarray, h0: np.ndarray, jumps) -> np.ndarray:
    """Uncoupled Liouvillian -i[H0, rho] + D[rho]."""
    rho = np.asarray(rho, dtype=complex)
    h0 = np.asarray(h0, dtype=complex)
    if h0.shape != rho.shape:
        raise ValueError("H0 and rho dimensions disagree")
    return -1j * (h0 @ rho - rho @ h0) + apply_dissipator(rho, jumps)


def apply_lc(rho: np.ndarray, hc: np.ndarray) -> np.ndarray:
    """Coupling part {Hc, rho} - 2<Hc> rho of the nonlinear generator."""
    rho = np.asarray(rho, dtype=complex)
    hc = np.asarray(hc, dtype=complex)
    if hc.shape != rho.shape:
        raise ValueError("Hc and rho dimensions disagree")
    if np.linalg.norm(hc - hc.conj().T) > HERMITICITY_TOL:
        raise InvalidCouplingError("coupling operator must be Hermitian")
    mean = np.real(np.trace(hc @ rho))
    return hc @ rho + rho @ hc - 2.0 * mean * rho


def _rk4_update_flat(v: np.ndarray, dt: float, ops: GeneratorOps) -> np.ndarray:
    k1 = ops.rhs_flat(v)
    k2 = ops.rhs_flat(v + (0.5 * dt) * k1)
    k3 = ops.rhs_flat(v + (0.5 * dt) * k2)
    k4 = ops.rhs_flat(v + dt * k3)
    k1 += k4
    k2 += k3
    return v + (dt / 6.0) * (k1 + 2.0 * k2)


def _finish_step(raw_flat: np.ndarray, dim: int, renormalize: bool) -> tuple[np.ndarray, float]:
    """Symmetrize, optionally renormalize; returns (state, pre-renormalization trace error)."""
    m = raw_flat.reshape(dim, dim)
    out = m + m.conj().T
    out *= 0.5
    tr = float(np.real(np.trace(out)))
    trace_err = abs(tr - 1.0)
    if renormalize:
        out /= tr
    return out, trace_err


def step(rho: np.ndarray, dt: float, spec_or_ops, *, renormalize: bool = True,
         check_positivity: bool = True) -> np.ndarray:
    """One RK4 step of the full nonlinear generator.

    Raises PositivityLossError if the post-step minimum eigenvalue drops
    below -1e-6 (smaller dt or a larger truncation is needed).
    """
    ops = _as_ops(spec_or_ops)
    v = np.ascontiguousarray(rho, dtype=complex).ravel()
    out, _ = _finish_step(_rk4_update_flat(v, dt, ops), ops.dim, renormalize)
    if check_positivity:
        min_eig = float(np.linalg.eigvalsh(out)[0])
        if min_eig < STEP_POSITIVITY_TOL:
            raise PositivityLossError(
                f"minimum eigenvalue {min_eig:.3e} after step; "
                "reduce dt or enlarge the truncation",
                min_eig=min_eig,
            )
    return out


def integrate(rho0: np.ndarray, spec_or_ops, cfg: IntegratorConfig,
              observer=None, metrics_observer=None,
              store_states: bool | None = None) -> TrajectoryRecord:
    """Propagate rho0 and sample every cfg.sample_stride steps.

    observer(t, rho) is called at each sampled step.  metrics_observer, when
    given, is called as metrics_observer(t, rho_prev, rho, rho_next,
    trace_err, min_eig) with the one-step neighbors of each sampled state
    (None at the trajectory edges); it exists so time-derivative estimates
    can be formed at the integration step size rather than the sampling
    stride.  Deterministic for fixed inputs.  Positivity is checked at the
    sampled steps; a violation is reported with the failing time attached.
    """
    ops = _as_ops(spec_or_ops)
    if store_states is None:
        store_states = observer is None and metrics_observer is None
    n_steps = cfg.n_steps
    stride = cfg.sample_stride
    rec = TrajectoryRecord(states=[] if store_states else None)

    rho = np.array(rho0, dtype=complex)
    # samples wait one extra step so the metrics observer can see rho_next
    pending: list[tuple[int, np.ndarray | None, np.ndarray, float]] = []

    def flush(rho_next: np.ndarray | None):
        while pending:
            i, rho_prev, rho_i, terr = pending.pop(0)
            t = i * cfg.dt
            min_eig = float(np.linalg.eigvalsh(rho_i)[0])
            if min_eig < STEP_POSITIVITY_TOL:
                raise PositivityLossError(
                    f"minimum eigenvalue {min_eig:.3e} at t={t:.6g}",
                    t=t, min_eig=min_eig,
                )
            rec.times.append(t)
            rec.trace_errs.append(terr)
            rec.min_eigs.append(min_eig)
            if store_states:
                rec.states.append(rho_i.copy())
            if observer is not None:
                observer(t, rho_i)
            if metrics_observer is not None:
                metrics_observer(t, rho_prev, rho_i, rho_next, terr, min_eig)

    pending.append((0, None, rho, abs(float(np.real(np.trace(rho))) - 1.0)))
    prev = rho
    for i in range(1, n_steps + 1):
        new, terr = _finish_step(_rk4_update_flat(rho.ravel(), cfg.dt, ops),
                                 ops.dim, cfg.renormalize)
        flush(new)
        prev, rho = rho, new
        if i % stride == 0:
            pending.append((i, prev, rho, terr))
    flush(None)

    rec.final_rho = rho
    rec.final_t = n_steps * cfg.dt
    return rec


def verify_stationary(rho0: np.ndarray, spec_or_ops) -> float:
    """Relative Frobenius residual of the uncoupled generator at rho0."""
    ops = _as_ops(spec_or_ops)
    rho0 = np.asarray(rho0, dtype=complex)
    res = ops.rhs_l0(0.5 * (rho0 + rho0.conj().T))
    return float(np.linalg.norm(res) / np.linalg.norm(rho0))
