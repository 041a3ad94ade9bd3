"""Hot inner loops, compiled with numba when available.

Set ``GRIDRECOVER_DISABLE_NUMBA=1`` to force the pure-numpy path. Both paths
implement identical contracts; integer-valued kernels agree bitwise and the
floating-point ones agree to rounding.
"""
import os

from . import numpy_impl

BACKEND = "numpy"
_impl = numpy_impl

if os.environ.get("GRIDRECOVER_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import numba_impl as _impl  # noqa: F811
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

divergence_weights = _impl.divergence_weights
sure_curve = _impl.sure_curve
markov_chain = _impl.markov_chain
count_runs = _impl.count_runs

__all__ = ["BACKEND", "divergence_weights", "sure_curve", "markov_chain", "count_runs"]
