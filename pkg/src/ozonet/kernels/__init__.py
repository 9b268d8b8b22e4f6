"""Hot-kernel backend selection.

Prefers the compiled extension when it is built; falls back to the numpy
implementation otherwise. Set OZONET_PURE_PYTHON=1 to force the fallback
(used by the benchmark and for debugging). Both backends are kept
numerically interchangeable; see tests/test_kernels.py.
"""

import os

if os.environ.get("OZONET_PURE_PYTHON"):
    from ozonet.kernels._pure import ks_distance, window_moments
    BACKEND = "pure"
else:
    try:
        from ozonet.kernels._fast import ks_distance, window_moments
        BACKEND = "compiled"
    except ImportError:
        from ozonet.kernels._pure import ks_distance, window_moments
        BACKEND = "pure"

__all__ = ["ks_distance", "window_moments", "BACKEND"]
