"""Hot-loop kernels, compiled when available.

The Cython extension ``_rk4`` is used if it was built; otherwise the pure-Python
implementation is selected.  Set ``PHONON_RESET_BACKEND=python`` to force the
fallback.
"""

import os

from . import _rk4_py

BACKENDS = {"python": _rk4_py.rk4_split}

try:
    from ._rk4 import rk4_split as _rk4_cython
except ImportError:  # extension not built
    _rk4_cython = None
else:
    BACKENDS["cython"] = _rk4_cython

if os.environ.get("PHONON_RESET_BACKEND", "").lower() == "python" or _rk4_cython is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

rk4_split = BACKENDS[BACKEND]


def get_rk4(backend=None):
    if backend is None:
        return rk4_split
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend {backend!r} unavailable; have {sorted(BACKENDS)}") from None
