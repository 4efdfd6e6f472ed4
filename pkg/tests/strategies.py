"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

seeds = st.integers(min_value=0, max_value=2**32 - 1)
small_dims = st.integers(min_value=1, max_value=4)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_hermitian(rng, n):
    g = random_matrix(rng, n)
    return (g + g.conj().T) / 2


def random_density(rng, n):
    g = random_matrix(rng, n)
    r = g @ g.conj().T
    return r / np.trace(r).real
