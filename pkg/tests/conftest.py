"""Shared builders for the test suite.

Every random object is drawn from a counter-based generator keyed by an
explicit integer, so each test owns its stream and reruns are bit-identical.
"""

import numpy as np
import pytest

from psdtls.objective import ProblemInstance


def rng_for(key):
    """Deterministic generator for a test-local key."""
    return np.random.Generator(np.random.Philox(key=key))


def random_orthonormal(key, n, r):
    """Random n x r orthonormal basis via QR of a Gaussian draw."""
    q, _ = np.linalg.qr(rng_for(key).standard_normal((n, r)))
    return q[:, :r]


def exact_fit_instance(key, m, n, rank):
    """Instance with T = D X* for a known PSD X* of the given rank.

    Returns (instance, X*, Y*, s*).
    """
    gen = rng_for(key)
    D = gen.standard_normal((m, n))
    Y, _ = np.linalg.qr(gen.standard_normal((n, rank)))
    Y = Y[:, :rank]
    s = gen.uniform(0.5, 2.0, rank)
    X = (Y * s**2) @ Y.T
    X = 0.5 * (X + X.T)
    return ProblemInstance(D=D, T=D @ X), X, Y, s


def uniform_instance(key, m, n, lo=0.0, hi=1.0):
    """Instance with i.i.d. uniform entries, the random-suite shape."""
    gen = rng_for(key)
    width = hi - lo
    D = width * gen.random((m, n)) + lo
    T = width * gen.random((m, n)) + lo
    return ProblemInstance(D=D, T=T)


def random_spd(key, n, shift=None):
    """Random symmetric positive definite matrix."""
    gen = rng_for(key)
    M = gen.standard_normal((n, n))
    return M @ M.T + (n if shift is None else shift) * np.eye(n)


@pytest.fixture
def tmp_matrix_file(tmp_path):
    """Write a matrix in the package text format; returns the writer."""

    def _write(name, M):
        from psdtls.linalg import write_matrix

        path = tmp_path / name
        write_matrix(str(path), np.asarray(M, dtype=float))
        return str(path)

    return _write
