"""Shared helpers for randomized test fixtures."""

import numpy as np


def rng(seed=0):
    return np.random.default_rng(seed)


def random_hpd(p, gen, spread=1.0):
    """Well-conditioned random HPD matrix."""
    A = gen.standard_normal((p, p)) + 1j * gen.standard_normal((p, p))
    return A @ A.conj().T / p + np.exp(-spread) * np.eye(p)


def random_hermitian(p, gen, scale=1.0):
    A = gen.standard_normal((p, p)) + 1j * gen.standard_normal((p, p))
    return scale * 0.5 * (A + A.conj().T)
