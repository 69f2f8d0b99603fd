"""Backend selection for the hot kernels.

The environment variable SNRS_BACKEND picks the implementation:

    SNRS_BACKEND=numba   require the JIT kernels (default when numba
                         imports cleanly)
    SNRS_BACKEND=numpy   force the pure-numpy fallback

Unset, numba is used when available, otherwise the fallback is chosen
with a warning.  Both backends are importable directly (for tests and
benchmarks) as `snrs.kernels.numba_backend` / `snrs.kernels.numpy_backend`.
"""

import os
import warnings

from . import numpy_backend


def _select():
    choice = os.environ.get("SNRS_BACKEND", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(
            f"SNRS_BACKEND must be 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", numpy_backend
    try:
        from . import numba_backend
    except ImportError as exc:
        if choice == "numba":
            raise ImportError(
                "SNRS_BACKEND=numba but numba is not importable"
            ) from exc
        warnings.warn(
            "numba unavailable, falling back to the pure-numpy kernels "
            "(set SNRS_BACKEND=numpy to silence)",
            RuntimeWarning,
            stacklevel=2,
        )
        return "numpy", numpy_backend
    return "numba", numba_backend


BACKEND, _impl = _select()

conv2d_masked_forward = _impl.conv2d_masked_forward
conv2d_masked_backward = _impl.conv2d_masked_backward
maxpool2_forward = _impl.maxpool2_forward
maxpool2_backward = _impl.maxpool2_backward
