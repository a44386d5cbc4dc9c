"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``POLARSHAPE_BACKEND=python`` to force the fallback.
"""
import os

from . import _fallback

GIVEN = _fallback.GIVEN
SAMPLE = _fallback.SAMPLE
ARGMAX = _fallback.ARGMAX

_kernels = None
if os.environ.get("POLARSHAPE_BACKEND", "").lower() != "python":
    try:
        from . import _kernels
    except ImportError:
        _kernels = None

if _kernels is not None:
    BACKEND = "cython"
    polar_transform_inplace = _kernels.polar_transform_inplace
    sc_descend = _kernels.sc_descend
    sc_climb = _kernels.sc_climb
    sc_sweep = _kernels.sc_sweep
else:
    BACKEND = "python"
    polar_transform_inplace = _fallback.polar_transform_inplace
    sc_descend = _fallback.sc_descend
    sc_climb = _fallback.sc_climb
    sc_sweep = _fallback.sc_sweep

boxplus = _fallback.boxplus
prob_zero = _fallback.prob_zero


def kernels(name):
    """Return a namespace of kernels for ``name`` in {"python", "cython"}."""
    if name == "python":
        return _fallback
    if name == "cython":
        if _kernels is None:
            raise ImportError("compiled kernels are not built")
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
