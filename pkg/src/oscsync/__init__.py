"""Coupled-oscillator synchronization: dynamics, costs, and speed limits.

A simulation library and CLI for a pair of quantum oscillators with a
dissipative (anti-Hermitian) exchange coupling and two-photon thermal
baths, the synchronization measures and relative-entropy costs of that
dynamics, speed-limit bounds on how fast the costs can grow, random
Gaussian-state surveys of the cost-distance plane, and the classical
Stuart-Landau counterpart of the model.
"""

__version__ = "0.1.0"

from .classical import SLConfig, SLEnsemble, classical_metrics, csl_bound, em_step
from .dynamics import GeneratorOps, IntegratorConfig, integrate, step, verify_stationary
from .fock import ModeDims, SystemSpec, initial_product_state
from .gaussian import GaussianState, SampleParams, convex_hull, sample_random
from .metrics import (
    BoundParams,
    MetricsRecord,
    chi,
    chi_lower_bound,
    relative_entropy,
    sync_distance,
    von_neumann_entropy,
    work_lower_bound,
)

__all__ = [
    "__version__",
    "BoundParams", "GaussianState", "GeneratorOps", "IntegratorConfig",
    "MetricsRecord", "ModeDims", "SampleParams", "SLConfig", "SLEnsemble",
    "SystemSpec", "chi", "chi_lower_bound", "classical_metrics", "convex_hull",
    "csl_bound", "em_step", "initial_product_state", "integrate",
    "relative_entropy", "sample_random", "step", "sync_distance",
    "verify_stationary", "von_neumann_entropy", "work_lower_bound",
]
