"""Backend selection for the hot loops.

The compiled extension ``nlsscat._kernels`` is used when it imports;
otherwise the NumPy versions in ``nlsscat._pykernels`` are used.  Setting
``NLSSCAT_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("NLSSCAT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels

nonlinear_phase = _impl.nonlinear_phase
gaussian_moments = _impl.gaussian_moments
fourier_series = _impl.fourier_series


def backends():
    """Map of available backend name to module."""
    out = {"python": _pykernels}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:  # pragma: no cover
        pass
    return out
