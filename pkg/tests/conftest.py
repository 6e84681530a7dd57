import itertools

import numpy as np
import pytest

from signedflow.presets import (
    KURAMOTO_SIX,
    LEADER_SYMMETRY_BALANCED,
    LEADER_SYMMETRY_UNBALANCED,
    SIGN_PRESERVING_STAR,
)
from signedflow.signed_graph import SignedGraph


@pytest.fixture
def four_node():
    return LEADER_SYMMETRY_BALANCED


@pytest.fixture
def four_node_flipped():
    return LEADER_SYMMETRY_UNBALANCED


@pytest.fixture
def star():
    return SIGN_PRESERVING_STAR


@pytest.fixture
def kuramoto_graph():
    return KURAMOTO_SIX


@pytest.fixture
def bad_triangle():
    return SignedGraph(3, ((1, 2, 1.0), (2, 3, 1.0), (1, 3, -1.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def brute_force_balanced(g: SignedGraph) -> bool:
    """Balance by trying every gauge; independent of the BFS colouring."""
    for sigma in itertools.product((1, -1), repeat=g.n):
        if all(sigma[u - 1] * sigma[v - 1] * w > 0 for u, v, w in g.edges):
            return True
    return False
