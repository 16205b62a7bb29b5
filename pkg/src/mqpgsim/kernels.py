"""Backend selection for the hot kernels.

The compiled extension is used when it was built; set
``MQPGSIM_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("MQPGSIM_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def pump_matrix(alpha: np.ndarray, mu0: float, dmu: float, nu_out, nu_in, backend=None) -> np.ndarray:
    """Matrix ``P[o, i] = alpha(nu_out[o] - nu_in[i])``.

    ``alpha`` is sampled at ``mu0 + dmu * k``; values between samples are
    linearly interpolated and the pump is zero outside its grid.
    """
    impl = _select(backend)
    alpha = np.asarray(alpha, dtype=np.complex128)
    return impl.pump_matrix(
        np.ascontiguousarray(alpha.real),
        np.ascontiguousarray(alpha.imag),
        float(mu0),
        float(dmu),
        np.ascontiguousarray(nu_out, dtype=np.float64),
        np.ascontiguousarray(nu_in, dtype=np.float64),
    )


def _select(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")
