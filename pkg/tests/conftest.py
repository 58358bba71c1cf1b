import numpy as np
import pytest

from pcdae import _pykernels, kernels


@pytest.fixture(params=["python", "compiled"])
def backend(request, monkeypatch):
    """Run a test against each kernel backend by patching ``pcdae.kernels``."""
    if request.param == "compiled":
        if not kernels.compiled_available():
            pytest.skip("compiled kernels not built")
        from pcdae import _kernels as impl
    else:
        impl = _pykernels
    for name in ("lu_factor", "lu_solve", "machine_f", "machine_jac",
                 "network_g", "network_jac"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
