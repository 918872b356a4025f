import numpy as np
import pytest

from fiberalloc import build_model


@pytest.fixture
def m2():
    """n=2 symmetric demo model."""
    return build_model([[1.0, 1.0]])


@pytest.fixture
def m2a():
    """n=2 asymmetric demo model."""
    return build_model([[1.0, 2.0]])


@pytest.fixture
def m3():
    """n=3 standard demo model."""
    return build_model([[1.0, 1.0, 1.0], [1.0, -1.0, 0.0]])


@pytest.fixture
def m3bal():
    """n=3 model with |b_i| all equal (balanced hinge pairs)."""
    return build_model([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])


def random_model(rng, n, min_b=0.05):
    """Random valid model of kinetic dimension n with a well-separated b.

    Rejects draws whose null-space generator has a component below ``min_b``
    so downstream solves stay well-conditioned across the whole suite.
    """
    from fiberalloc.errors import FiberAllocError

    while True:
        A = rng.normal(size=(n - 1, n))
        try:
            model = build_model(A)
        except FiberAllocError:
            continue
        if np.min(np.abs(model.b)) >= min_b:
            return model


def model_with_b(b):
    """Model whose null-space generator is (up to sign) the given vector."""
    b = np.asarray(b, dtype=float)
    b = b / np.linalg.norm(b)
    n = b.shape[0]
    G = np.eye(n)
    G[:, 0] = b
    Q, _ = np.linalg.qr(G)
    return build_model(Q[:, 1:].T)
