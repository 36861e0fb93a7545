import numpy as np
import pytest

from oscsync import dynamics, fock

ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status} - {detail}")


@pytest.fixture
def small_spec():
    """Fast dimer: 64-dim joint space, tail mass well under the guard."""
    return fock.SystemSpec(freqs=(2 * np.pi, 3 * np.pi), k=2.0, temperature=8.0,
                           gamma_plus=(0.02,), dims=fock.ModeDims((8, 8)))


@pytest.fixture
def small_ops(small_spec):
    return dynamics.GeneratorOps(small_spec)


def make_spec(k=5.0, temperature=20.0, gamma_plus=1e-3, dims=(15, 15),
              freqs=(2 * np.pi, 3 * np.pi), gamma_minus=None):
    return fock.SystemSpec(freqs=freqs, k=k, temperature=temperature,
                           gamma_plus=(gamma_plus,), dims=fock.ModeDims(dims),
                           gamma_minus=gamma_minus)


def random_density_matrix(dim: int, rng: np.random.Generator,
                          rank: int | None = None) -> np.ndarray:
    r = rank if rank is not None else dim
    a = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
