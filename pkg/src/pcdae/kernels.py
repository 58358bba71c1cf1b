"""Kernel backend selection.

The compiled extension is used when it imports; set ``PCDAE_PURE_PYTHON=1``
to force the numpy fallback (the test-suite checks both against each other).
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("PCDAE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

lu_factor = _impl.lu_factor
lu_solve = _impl.lu_solve
machine_f = _impl.machine_f
machine_jac = _impl.machine_jac
network_g = _impl.network_g
network_jac = _impl.network_jac


def compiled_available():
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
