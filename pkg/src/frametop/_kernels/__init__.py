"""Hot kernels: the Cython core when it is built, else the numpy fallback.

Set ``FRAMETOP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("FRAMETOP_PURE_PYTHON") != "1":
    try:
        from . import _core as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback

retract_flow = _impl.retract_flow
level_partitions = _impl.level_partitions
all_subset_sums_at_least = _impl.all_subset_sums_at_least
schur_horn_chain = _impl.schur_horn_chain

CONVERGED, CRITICAL, ITERATION_LIMIT, TIE, STALLED = range(5)


def backends():
    """Available kernel modules keyed by name (used by tests and the benchmark)."""
    found = {"python": _fallback}
    try:
        from . import _core

        found["cython"] = _core
    except ImportError:
        pass
    return found
