import numpy as np
import pytest

from polyrank import HomPoly


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def mono(n, d, assignments, c=1.0):
    """Single-term polynomial: assignments maps variable index -> exponent."""
    alpha = [0] * n
    for i, a in assignments.items():
        alpha[i] = a
    return HomPoly(n, d, {tuple(alpha): c})


def poly_of(n, d, term_map):
    """HomPoly from {exponent tuple: coefficient}."""
    return HomPoly(n, d, dict(term_map))
