import math

import numpy as np
import pytest

from oscsync import fock
from oscsync.errors import (
    InvalidDimensionError,
    InvalidRateError,
    TruncationInsufficientError,
    UnsupportedTopologyError,
)

from conftest import make_spec


def test_annihilation_dim2():
    assert np.array_equal(fock.annihilation(2), np.array([[0, 1], [0, 0]], dtype=complex))


def test_annihilation_dim3_entries():
    a = fock.annihilation(3)
    assert a[1, 2] == pytest.approx(math.sqrt(2))
    assert a[0, 1] == pytest.approx(1.0)
    mask = np.ones((3, 3), dtype=bool)
    mask[np.arange(2), np.arange(2) + 1] = False
    assert np.all(a[mask] == 0)


def test_number_operator_from_ladder():
    a = fock.annihilation(6)
    n = fock.creation(6) @ a
    assert np.allclose(n, np.diag(np.arange(6)))


def test_annihilation_rejects_small_dim():
    with pytest.raises(InvalidDimensionError):
        fock.annihilation(1)


def test_mode_dims_validation():
    with pytest.raises(InvalidDimensionError):
        fock.ModeDims((3, 1))
    assert fock.ModeDims((3, 4)).total == 12


def test_quadrature_single_mode_dim2():
    spec = fock.SystemSpec(freqs=(1.0,), k=0.0, temperature=1.0,
                           gamma_plus=(0.0,), dims=fock.ModeDims((2,)))
    x, p = fock.quadratures(spec)
    s = 1 / math.sqrt(2)
    assert np.allclose(x, [[0, s], [s, 0]])
    assert np.allclose(p, [[0, -1j * s], [1j * s, 0]])


def test_quadratures_hermitian():
    spec = make_spec(dims=(6, 5))
    for q in fock.quadratures(spec):
        assert np.linalg.norm(q - q.conj().T) <= 1e-12


def test_canonical_commutator_on_interior():
    spec = fock.SystemSpec(freqs=(1.0,), k=0.0, temperature=1.0,
                           gamma_plus=(0.0,), dims=fock.ModeDims((9,)))
    x, p = fock.quadratures(spec)
    comm = x @ p - p @ x - 1j * np.eye(9)
    # deviation is confined to the top truncated level
    assert np.abs(comm[:8, :8]).max() <= 1e-12
    assert abs(comm[8, 8] + 1j * 9) <= 1e-12


def test_cross_mode_quadratures_commute():
    spec = make_spec(dims=(4, 4))
    x1, p1, x2, p2 = fock.quadratures(spec)
    assert np.abs(x1 @ p2 - p2 @ x1).max() <= 1e-12
    assert np.abs(x1 @ x2 - x2 @ x1).max() <= 1e-12


def test_quadrature_number_identity_interior():
    spec = fock.SystemSpec(freqs=(1.0,), k=0.0, temperature=1.0,
                           gamma_plus=(0.0,), dims=fock.ModeDims((10,)))
    x, p = fock.quadratures(spec)
    lhs = x @ x + p @ p
    rhs = 2 * fock.number(10) + np.eye(10)
    assert np.abs((lhs - rhs)[:9, :9]).max() <= 1e-12


def test_h0_single_mode():
    spec = fock.SystemSpec(freqs=(1.0,), k=0.0, temperature=1.0,
                           gamma_plus=(0.0,), dims=fock.ModeDims((3,)))
    assert np.allclose(fock.build_h0(spec), np.diag([0.5, 1.5, 2.5]))


def test_h0_ground_energy():
    spec = make_spec(freqs=(1.0, 2.0), dims=(3, 3))
    assert fock.h0_energies(spec)[0] == pytest.approx(1.5)
    fig2 = make_spec(dims=(4, 4))
    assert fock.h0_energies(fig2)[0] == pytest.approx(2.5 * math.pi)


def test_h0_energies_increasing_per_mode():
    spec = make_spec(dims=(5, 4))
    e = fock.h0_energies(spec).reshape(5, 4)
    assert np.all(np.diff(e, axis=0) > 0)
    assert np.all(np.diff(e, axis=1) > 0)


def test_hc_dimer_zero_coupling():
    spec = make_spec(k=0.0, dims=(4, 4))
    assert np.abs(fock.build_hc_dimer(spec)).max() == 0


def test_hc_dimer_matrix_element_and_hermiticity():
    spec = make_spec(k=3.0, dims=(3, 3))
    hc = fock.build_hc_dimer(spec)
    # joint index of |n1, n2>: n1 * d2 + n2 (mode 1 slowest)
    assert hc[1 * 3 + 0, 0 * 3 + 1] == pytest.approx(1.5)
    assert np.array_equal(hc, hc.conj().T)


def test_hc_requires_two_modes():
    spec = fock.SystemSpec(freqs=(1.0, 1.0, 1.0), k=1.0, temperature=1.0,
                           gamma_plus=(0.0,), dims=fock.ModeDims((2, 2, 2)))
    with pytest.raises(UnsupportedTopologyError):
        fock.build_hc_dimer(spec)


def test_jump_ops_zero_gain_single_loss():
    spec = fock.SystemSpec(freqs=(1.0,), k=0.0, temperature=1.0,
                           gamma_plus=(0.0,), gamma_minus=(1.0,),
                           dims=fock.ModeDims((5,)))
    ops = fock.jump_ops(spec)
    assert len(ops) == 1
    a = fock.annihilation(5)
    assert np.allclose(ops[0], a @ a)


def test_two_photon_ladder_scaling():
    spec = fock.SystemSpec(freqs=(1.0,), k=0.0, temperature=1.0,
                           gamma_plus=(0.0,), gamma_minus=(1.0,),
                           dims=fock.ModeDims((5,)))
    (loss,) = fock.jump_ops(spec)
    ket2 = np.zeros(5)
    ket2[2] = 1.0
    out = loss @ ket2
    assert out[0] == pytest.approx(math.sqrt(2))
    assert np.abs(out[1:]).max() == 0


def test_detailed_balance_ratio():
    spec = make_spec(dims=(4, 4))
    gm = spec.gamma_minus_effective()
    for w, gp, g in zip(spec.freqs, spec.gamma_plus, gm):
        assert g / gp == pytest.approx(math.exp(2 * spec.beta * w), rel=1e-12)


def test_negative_rate_rejected():
    with pytest.raises(InvalidRateError):
        fock.SystemSpec(freqs=(1.0,), k=0.0, temperature=1.0,
                        gamma_plus=(-0.1,), dims=fock.ModeDims((3,)))


def test_thermal_state_ground_limit():
    rho = fock.thermal_state(1e3, 1.0, 10)
    assert rho[0, 0].real >= 1 - 1e-9


def test_thermal_state_mean_occupation_geometric_oracle():
    # beta*omega = ln 2: populations are 2^-n, so nbar = sum n 2^-n / sum 2^-n
    dim = 200
    n = np.arange(dim)
    weights = 0.5 ** n
    nbar_oracle = float((n * weights).sum() / weights.sum())
    rho = fock.thermal_state(math.log(2.0), 1.0, dim)
    nbar = float(np.real(np.diag(rho) @ n))
    assert nbar == pytest.approx(nbar_oracle, abs=1e-12)
    assert nbar == pytest.approx(1.0, abs=1e-9)


def test_thermal_state_entropy_analytic_oracle():
    beta_omega = 0.3
    nbar = 1.0 / math.expm1(beta_omega)
    s_oracle = (nbar + 1) * math.log(nbar + 1) - nbar * math.log(nbar)
    p = np.real(np.diag(fock.thermal_state(beta_omega, 1.0, 60)))
    s = float(-(p[p > 0] * np.log(p[p > 0])).sum())
    assert s == pytest.approx(s_oracle, abs=1e-6)


def test_thermal_populations_strictly_decreasing():
    p = fock.thermal_populations(0.7, 1.3, 12)
    assert np.all(np.diff(p) < 0)


def test_initial_product_state_cold_limit():
    spec = make_spec(temperature=1e-3, dims=(6, 6))
    rho = fock.initial_product_state(spec)
    assert rho[0, 0].real == pytest.approx(1.0, abs=1e-12)


def test_initial_product_state_trace_and_occupation():
    spec = make_spec(dims=(40, 40))
    rho = fock.initial_product_state(spec)
    assert abs(np.trace(rho).real - 1.0) <= 1e-12
    n1 = np.add.outer(np.arange(40), np.zeros(40)).ravel()
    nbar = float(np.real(np.diag(rho) @ n1))
    assert nbar == pytest.approx(1.0 / math.expm1(2 * math.pi / 20.0), abs=1e-3)


def test_initial_product_state_truncation_guard():
    fock.initial_product_state(make_spec(dims=(15, 15)))  # passes at the default
    with pytest.raises(TruncationInsufficientError):
        fock.initial_product_state(make_spec(dims=(8, 8)))


def test_embed_composition_same_mode():
    rng = np.random.default_rng(3)
    dims = fock.ModeDims((3, 4))
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    lhs = fock.embed(a @ b, 1, dims)
    rhs = fock.embed(a, 1, dims) @ fock.embed(b, 1, dims)
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_embed_cross_mode_commutes():
    rng = np.random.default_rng(4)
    dims = fock.ModeDims((3, 3))
    a = fock.embed(rng.standard_normal((3, 3)), 0, dims)
    b = fock.embed(rng.standard_normal((3, 3)), 1, dims)
    assert np.abs(a @ b - b @ a).max() <= 1e-12
