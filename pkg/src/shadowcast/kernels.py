"""Backend selection for the numerical kernels.

The compiled extension ``shadowcast._ckernels`` is used when it was built;
otherwise the numpy implementations in ``shadowcast._pykernels`` are used.
Setting ``SHADOWCAST_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("SHADOWCAST_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

prefix_posteriors = _impl.prefix_posteriors
polyline_sqdist = _impl.polyline_sqdist
rate_clamp = _impl.rate_clamp
first_order_filter = _impl.first_order_filter
knot_legibility = _impl.knot_legibility


def backends():
    """Every importable kernel implementation, keyed by name."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
