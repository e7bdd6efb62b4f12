"""Deterministic particle method for the spatially homogeneous multispecies Landau equation."""

import os

THREADS_ENV = "MULTILANDAU_THREADS"

# numba fixes its pool size at import; honour our variable before that happens
if os.environ.get(THREADS_ENV) and "NUMBA_NUM_THREADS" not in os.environ:
    os.environ["NUMBA_NUM_THREADS"] = os.environ[THREADS_ENV]
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

from .core import (  # noqa: E402
    KernelSpec,
    MomentRecord,
    ParticleEnsemble,
    SpeciesSpec,
    SystemState,
    validate_state,
)
from .errors import (  # noqa: E402
    BetaMismatch,
    ConfigParseError,
    ConfigValidationError,
    LandauError,
    NonConvergence,
    NonFiniteError,
    ZeroWeightError,
)

__version__ = "0.1.0"


def set_threads(count: int | None = None) -> int:
    """Set the compiled-kernel thread count (``None`` reads ``MULTILANDAU_THREADS``).

    Returns the count in effect. Results do not depend on it.
    """
    import numba

    if count is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return numba.get_num_threads()
        count = int(env)
    count = max(1, min(int(count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(count)
    return count


__all__ = [
    "BetaMismatch",
    "ConfigParseError",
    "ConfigValidationError",
    "KernelSpec",
    "LandauError",
    "MomentRecord",
    "NonConvergence",
    "NonFiniteError",
    "ParticleEnsemble",
    "SpeciesSpec",
    "SystemState",
    "ZeroWeightError",
    "set_threads",
    "validate_state",
]
