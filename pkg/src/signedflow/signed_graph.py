"""Signed graphs, their Laplacians, and structural-balance certification.

Nodes are labelled ``1..n`` everywhere a node appears as a value (edges,
cycles, partitions). Vectors indexed by node (gauges, states) are plain
arrays whose position ``k`` belongs to node ``k + 1``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, GraphError, NumericalError

DEFAULT_EIG_TOL = 1e-8


@dataclass(frozen=True)
class SignedGraph:
    """Undirected graph with finite, nonzero, possibly negative edge weights.

    Edges are stored normalised as ``(u, v, w)`` with ``u < v`` and sorted,
    so two graphs built from the same edge set compare equal.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GraphError(f"node count must be a positive integer, got {self.n!r}")
        normalised = {}
        for edge in self.edges:
            try:
                u, v, w = edge
            except (TypeError, ValueError):
                raise GraphError(f"edge must be a (u, v, w) triple, got {edge!r}") from None
            u, v, w = int(u), int(v), float(w)
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphError(f"edge ({u}, {v}) references a node outside 1..{self.n}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not math.isfinite(w) or w == 0.0:
                raise GraphError(f"edge ({u}, {v}) has invalid weight {w!r}; weights must be finite and nonzero")
            key = (min(u, v), max(u, v))
            if key in normalised:
                raise GraphError(f"duplicate edge {key}")
            normalised[key] = w
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple((u, v, w) for (u, v), w in sorted(normalised.items())))

    @classmethod
    def from_adjacency(cls, adjacency) -> "SignedGraph":
        a = np.asarray(adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError("adjacency must be square")
        if not np.array_equal(a, a.T):
            raise GraphError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise GraphError("adjacency must have a zero diagonal")
        iu, ju = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], tuple((int(i) + 1, int(j) + 1, float(a[i, j])) for i, j in zip(iu, ju)))

    def neighbors(self, node: int) -> list[tuple[int, float]]:
        out = []
        for u, v, w in self.edges:
            if u == node:
                out.append((v, w))
            elif v == node:
                out.append((u, w))
        return out

    def weight(self, u: int, v: int) -> float:
        """Weight of edge ``uv``; 0.0 when absent."""
        key = (min(u, v), max(u, v))
        for a, b, w in self.edges:
            if (a, b) == key:
                return w
        return 0.0

    def with_edge_sign_flipped(self, u: int, v: int) -> "SignedGraph":
        key = (min(u, v), max(u, v))
        if self.weight(*key) == 0.0:
            raise GraphError(f"no edge {key} to flip")
        return SignedGraph(self.n, tuple((a, b, -w if (a, b) == key else w) for a, b, w in self.edges))

    def unsigned(self) -> "SignedGraph":
        return SignedGraph(self.n, tuple((u, v, abs(w)) for u, v, w in self.edges))

    def relabel(self, perm: Sequence[int]) -> "SignedGraph":
        """Graph with node ``i`` renamed to ``perm[i-1]``."""
        return SignedGraph(self.n, tuple((perm[u - 1], perm[v - 1], w) for u, v, w in self.edges))

    def components(self) -> list[list[int]]:
        """Connected components as sorted node lists, ordered by smallest node."""
        adj = _adjacency_lists(self)
        seen = [False] * (self.n + 1)
        comps = []
        for root in range(1, self.n + 1):
            if seen[root]:
                continue
            seen[root] = True
            comp, queue = [root], deque([root])
            while queue:
                a = queue.popleft()
                for b, _ in adj[a]:
                    if not seen[b]:
                        seen[b] = True
                        comp.append(b)
                        queue.append(b)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [{"u": u, "v": v, "w": w} for u, v, w in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> "SignedGraph":
        try:
            n = data["n"]
            edges = tuple((e["u"], e["v"], e["w"]) for e in data.get("edges", []))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"graph document is missing field {exc}") from None
        if isinstance(n, bool) or not isinstance(n, int):
            raise GraphError(f"'n' must be an integer, got {n!r}")
        return cls(n, edges)


def _adjacency_lists(g: SignedGraph) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(g.n + 1)]
    for u, v, w in g.edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    for lst in adj:
        lst.sort()
    return adj


@dataclass(frozen=True)
class GaugeTransform:
    """Diagonal +-1 change of orthant; ``matrix`` is its own transpose and inverse."""

    sigma: tuple[int, ...]

    def __post_init__(self):
        sigma = tuple(int(s) for s in np.asarray(self.sigma).ravel())
        if not sigma or any(s not in (1, -1) for s in sigma):
            raise GraphError(f"gauge entries must be +1 or -1, got {self.sigma!r}")
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def identity(cls, n: int) -> "GaugeTransform":
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return len(self.sigma)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.sigma, dtype=float)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.vector)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n:
            raise DimensionError(f"vector of length {x.shape[0]} for a gauge on {self.n} nodes")
        return self.vector * x

    def negated(self) -> "GaugeTransform":
        return GaugeTransform(tuple(-s for s in self.sigma))


@dataclass(frozen=True)
class BalanceCertificate:
    status: str
    gauge: GaugeTransform | None = None
    partition: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    witness_cycle: tuple[int, ...] | None = None
    components: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def balanced(self) -> bool:
        return self.status == "balanced"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "sigma": list(self.gauge.sigma) if self.gauge else None,
            "partition": [list(p) for p in self.partition] if self.partition else None,
            "witness_cycle": list(self.witness_cycle) if self.witness_cycle else None,
            "components": [list(c) for c in self.components],
        }


def signed_adjacency(g: SignedGraph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        a[u - 1, v - 1] = a[v - 1, u - 1] = w
    return a


def degree_matrix(g: SignedGraph) -> np.ndarray:
    return np.diag(np.abs(signed_adjacency(g)).sum(axis=1))


def signed_laplacian(g: SignedGraph) -> np.ndarray:
    a = signed_adjacency(g)
    return np.diag(np.abs(a).sum(axis=1)) - a


def _check_gauge(g: SignedGraph, gauge) -> GaugeTransform:
    if not isinstance(gauge, GaugeTransform):
        gauge = GaugeTransform(tuple(gauge))
    if gauge.n != g.n:
        raise DimensionError(f"gauge has length {gauge.n}, graph has {g.n} nodes")
    return gauge


def gauge_transformed_laplacian(g: SignedGraph, gauge) -> np.ndarray:
    gauge = _check_gauge(g, gauge)
    s = gauge.vector
    return s[:, None] * signed_laplacian(g) * s[None, :]


def gauge_transformed_adjacency(g: SignedGraph, gauge) -> np.ndarray:
    gauge = _check_gauge(g, gauge)
    s = gauge.vector
    return s[:, None] * signed_adjacency(g) * s[None, :]


def check_structural_balance(g: SignedGraph) -> BalanceCertificate:
    """Decide structural balance by breadth-first 2-colouring on edge signs.

    Each component's lowest-numbered node is coloured +1. On the first
    colour conflict the odd-sign cycle is read off the BFS tree and
    returned as the witness.
    """
    adj = _adjacency_lists(g)
    colour = [0] * (g.n + 1)
    parent = [0] * (g.n + 1)
    depth = [0] * (g.n + 1)
    components = []
    for root in range(1, g.n + 1):
        if colour[root]:
            continue
        colour[root] = 1
        comp, queue = [root], deque([root])
        while queue:
            a = queue.popleft()
            for b, w in adj[a]:
                s = 1 if w > 0 else -1
                if not colour[b]:
                    colour[b] = colour[a] * s
                    parent[b] = a
                    depth[b] = depth[a] + 1
                    comp.append(b)
                    queue.append(b)
                elif colour[b] != colour[a] * s:
                    return BalanceCertificate(
                        status="unbalanced",
                        witness_cycle=_tree_cycle(a, b, parent, depth),
                        components=tuple(tuple(c) for c in g.components()),
                    )
        components.append(tuple(sorted(comp)))
    sigma = tuple(colour[1:])
    plus = tuple(i for i in range(1, g.n + 1) if colour[i] == 1)
    minus = tuple(i for i in range(1, g.n + 1) if colour[i] == -1)
    return BalanceCertificate(
        status="balanced",
        gauge=GaugeTransform(sigma),
        partition=(plus, minus),
        components=tuple(components),
    )


def _tree_cycle(a: int, b: int, parent: list[int], depth: list[int]) -> tuple[int, ...]:
    # a -> ... -> lca -> ... -> b, closed by the non-tree edge (b, a)
    left, right = [a], [b]
    x, y = a, b
    while depth[x] > depth[y]:
        x = parent[x]
        left.append(x)
    while depth[y] > depth[x]:
        y = parent[y]
        right.append(y)
    while x != y:
        x, y = parent[x], parent[y]
        left.append(x)
        right.append(y)
    return tuple(left + right[-2::-1])


def laplacian_spectrum(g: SignedGraph) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(signed_laplacian(g))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on the signed Laplacian: {exc}") from exc


def zero_eigenvalue_check(g: SignedGraph, tol: float = DEFAULT_EIG_TOL) -> bool:
    """True when the smallest Laplacian eigenvalue is zero up to ``tol``.

    ``tol`` is relative to the largest eigenvalue magnitude; a graph with
    no edges has the zero matrix as Laplacian and is trivially singular.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    eig = laplacian_spectrum(g)
    if not np.all(np.isfinite(eig)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")
    scale = np.abs(eig).max()
    if scale == 0.0:
        return True
    return bool(abs(eig[0]) <= tol * scale)


def cycle_sign_product(g: SignedGraph, cycle: Iterable[int]) -> int:
    cycle = [int(c) for c in cycle]
    if len(cycle) < 3:
        raise GraphError("a cycle needs at least three nodes")
    if len(set(cycle)) != len(cycle):
        raise GraphError(f"cycle {cycle} repeats a node")
    sign = 1
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        w = g.weight(a, b) if 1 <= a <= g.n and 1 <= b <= g.n else 0.0
        if w == 0.0:
            raise GraphError(f"({a}, {b}) is not an edge, so {cycle} is not a cycle")
        sign *= 1 if w > 0 else -1
    return sign


def random_signed_graph(
    n: int,
    edge_prob: float,
    rng: np.random.Generator,
    neg_prob: float = 0.5,
    connected: bool = True,
    max_tries: int = 1000,
) -> SignedGraph:
    """Erdos-Renyi signed graph; with ``connected`` resample until connected."""
    for _ in range(max_tries):
        edges = []
        for u in range(1, n + 1):
            for v in range(u + 1, n + 1):
                if rng.random() < edge_prob:
                    edges.append((u, v, -1.0 if rng.random() < neg_prob else 1.0))
        g = SignedGraph(n, tuple(edges))
        if not connected or g.is_connected():
            return g
    raise GraphError(f"no connected graph after {max_tries} draws (n={n}, p={edge_prob})")


def random_cycles(g: SignedGraph, count: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Sample simple cycles as fundamental cycles of random spanning trees.

    Each draw builds a BFS tree from a random root with shuffled neighbour
    order, picks a random non-tree edge, and closes it through the tree.
    Returns an empty list for forests.
    """
    adj = _adjacency_lists(g)
    cycles = []
    for _ in range(count * 4):
        if len(cycles) >= count:
            break
        root = int(rng.integers(1, g.n + 1))
        parent = [0] * (g.n + 1)
        depth = [0] * (g.n + 1)
        seen = [False] * (g.n + 1)
        seen[root] = True
        queue = deque([root])
        tree = set()
        while queue:
            a = queue.popleft()
            nbrs = [b for b, _ in adj[a]]
            rng.shuffle(nbrs)
            for b in nbrs:
                if not seen[b]:
                    seen[b] = True
                    parent[b] = a
                    depth[b] = depth[a] + 1
                    tree.add((min(a, b), max(a, b)))
                    queue.append(b)
        chords = [(u, v) for u, v, _ in g.edges if (u, v) not in tree and seen[u]]
        if not chords:
            if all(seen[1:]):
                break
            continue
        u, v = chords[int(rng.integers(len(chords)))]
        cycles.append(_tree_cycle(u, v, parent, depth))
    return cycles
