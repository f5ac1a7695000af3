"""Select the collision-kernel backend at import time.

Prefers the compiled extension; falls back to the NumPy
implementation.  Set CHARBOLTZ_PURE=1 to force the fallback (used by
the backend-agreement tests and the benchmark).
"""

import os

if os.environ.get("CHARBOLTZ_PURE"):
    from . import _accel_py as kernels
else:
    try:
        from . import _accel as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _accel_py as kernels

BACKEND = kernels.BACKEND
eval_u = kernels.eval_u
collision_gain = kernels.collision_gain
collision_rhs = kernels.collision_rhs
