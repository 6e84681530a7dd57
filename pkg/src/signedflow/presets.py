"""Example graphs and initial conditions used by the CLI, docs and tests.

Each graph is small and built to exhibit one property: a grounded
Laplacian, a leader symmetry, or a known camp structure.
"""

from __future__ import annotations

import numpy as np

from .signed_graph import SignedGraph

# Grounding node 4 of this graph gives L1 = [[2,-1,0],[-1,3,1],[0,1,2]].
# swap(1, 3) is a leader symmetry about nodes 2 and 4. Gauge (1, 1, -1, 1).
LEADER_SYMMETRY_BALANCED = SignedGraph(
    4, ((1, 2, 1.0), (2, 3, -1.0), (1, 4, 1.0), (2, 4, 1.0), (3, 4, -1.0))
)
# Same graph with edge (2, 3) made positive: grounds to L2, triangle 2-3-4 turns negative.
LEADER_SYMMETRY_UNBALANCED = LEADER_SYMMETRY_BALANCED.with_edge_sign_flipped(2, 3)

L1 = np.array([[2.0, -1.0, 0.0], [-1.0, 3.0, 1.0], [0.0, 1.0, 2.0]])
L2 = np.array([[2.0, -1.0, 0.0], [-1.0, 3.0, -1.0], [0.0, -1.0, 2.0]])
# Signed input that reproduces the rank-deficient / full-rank contrast; it is
# the gauge vector of the balanced graph restricted to the followers.
SIGNED_INPUT = np.array([1.0, 1.0, -1.0])

# Three nodes, swap(1, 2) crosses the bipartition under gauge (1, -1, 1).
SIGNED_SWAP_TRIANGLE = SignedGraph(3, ((1, 2, -1.0), (1, 3, 1.0), (2, 3, -1.0)))

# swap(1, 3) keeps every node in its own camp; camps {1, 2, 3} / {4}.
SIGN_PRESERVING_STAR = SignedGraph(
    4, ((1, 2, 1.0), (2, 3, 1.0), (1, 4, -1.0), (2, 4, -1.0), (3, 4, -1.0))
)

# Balanced 6-node oscillator network, camps {1, 2, 3} / {4, 5, 6}: a positive
# path inside each camp and three negative rungs between them.
KURAMOTO_SIX = SignedGraph(
    6,
    (
        (1, 2, 1.0), (2, 3, 1.0), (4, 5, 1.0), (5, 6, 1.0),
        (1, 4, -1.0), (2, 5, -1.0), (3, 6, -1.0),
    ),
)
KURAMOTO_X0 = np.array([-1.73, -0.38, -0.21, 0.56, -0.65, -0.32])
KURAMOTO_WINDOWS = ((0.0, 10.0), (0.0, 3.0), (2.0, 5.0))

PRESETS = {
    "leader-symmetry-balanced": LEADER_SYMMETRY_BALANCED,
    "leader-symmetry-unbalanced": LEADER_SYMMETRY_UNBALANCED,
    "signed-swap-triangle": SIGNED_SWAP_TRIANGLE,
    "sign-preserving-star": SIGN_PRESERVING_STAR,
    "kuramoto-six": KURAMOTO_SIX,
}
