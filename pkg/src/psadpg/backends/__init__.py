"""Hot-kernel backend selection.

Two interchangeable kernel modules exist: numba_backend (jitted loops) and
numpy_backend (vectorized fallback). The environment variable PSADPG_BACKEND
picks one, read once at import:

    auto   prefer the jitted backend, fall back to numpy if numba is missing
    numba  require the jitted backend, fail loudly if it cannot import
    numpy  force the pure-numpy fallback

Set the variable before the package is imported; changing it afterwards has
no effect on an already-loaded process.
"""

import os

from ._codes import ACT_CODE, ACT_LINEAR, ACT_NAME, ACT_RELU, ACT_SOFTMAX, ACT_TANH

_FLAG = os.environ.get("PSADPG_BACKEND", "auto").strip().lower()
if _FLAG not in ("auto", "numpy", "numba"):
    raise ValueError(
        "PSADPG_BACKEND must be one of auto/numpy/numba, got %r" % _FLAG
    )

if _FLAG == "numpy":
    from . import numpy_backend as _impl
elif _FLAG == "numba":
    from . import numba_backend as _impl
else:
    try:
        from . import numba_backend as _impl
    except ImportError:
        from . import numpy_backend as _impl

ACTIVE = _impl.NAME

dense_forward = _impl.dense_forward
dense_backward = _impl.dense_backward
adam_flat = _impl.adam_flat
acrobot_step = _impl.acrobot_step
vi_sweep = _impl.vi_sweep
q_from_v = _impl.q_from_v
warmup = _impl.warmup


def get_backend(name):
    """Load a backend module by name, ignoring the active flag.

    Used by the comparison benchmark and the backend equivalence tests, which
    always want both modules side by side.
    """
    if name == "numpy":
        from . import numpy_backend

        return numpy_backend
    if name == "numba":
        from . import numba_backend

        return numba_backend
    raise ValueError("unknown backend %r" % name)
