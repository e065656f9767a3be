"""Random-matrix generators shared by the test modules (numpy only)."""

import numpy as np


def rng_for(seed):
    return np.random.default_rng(seed)


def complex_matrix(rng, rows, cols, scale=1.0):
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return scale * (re + 1j * im)


def hermitian(rng, n, scale=1.0):
    a = complex_matrix(rng, n, n, scale)
    return 0.5 * (a + a.conj().T)


def psd(rng, n, rank=None, scale=1.0):
    """G G* with G of the requested rank; PSD, singular when rank < n."""
    rank = n if rank is None else rank
    g = complex_matrix(rng, n, rank, scale)
    return g @ g.conj().T
