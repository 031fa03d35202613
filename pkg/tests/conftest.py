import numpy as np
import pytest

from sogran import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch every active kernel once so JIT compilation (numba backend)
    happens before any timed acceptance criterion runs."""
    codebook = np.zeros((2, 2))
    data = np.ones((3, 2))
    kernels.assign_bmus(codebook, data)
    kernels.som_epoch(codebook.copy(), data, np.arange(3, dtype=np.int64),
                      np.zeros((2, 2)), 0.0, 3.0, 0.5, 1.0)
    widths = np.ones((2, 2))
    coeffs = np.zeros((2, 3))
    kernels.fis_firing(codebook, widths, data)
    kernels.fis_premise_gradient(codebook, widths, coeffs, data, np.zeros(3))
