"""Graph automorphisms and their gauge-conjugated (signed) versions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, GraphError, UnbalancedGraphError
from .signed_graph import GaugeTransform, SignedGraph, check_structural_balance, signed_adjacency

MAX_EXHAUSTIVE_NODES = 12
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Permutation:
    """Node permutation; ``map[i-1]`` is the image of node ``i``."""

    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        if sorted(m) != list(range(1, len(m) + 1)):
            raise GraphError(f"{self.map!r} is not a permutation of 1..{len(m)}")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def swap(cls, n: int, a: int, b: int) -> "Permutation":
        m = list(range(1, n + 1))
        m[a - 1], m[b - 1] = b, a
        return cls(tuple(m))

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, i: int) -> int:
        return self.map[i - 1]

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.map, start=1))

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: first ``other``, then ``self``."""
        if other.n != self.n:
            raise DimensionError("cannot compose permutations of different sizes")
        return Permutation(tuple(self(other(i)) for i in range(1, self.n + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.map, start=1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    @property
    def matrix(self) -> np.ndarray:
        """``J`` with ``J[i, j] = 1`` iff ``phi(i) = j``, so ``(J x)_i = x_phi(i)``."""
        j = np.zeros((self.n, self.n))
        j[np.arange(self.n), np.array(self.map) - 1] = 1.0
        return j

    def fixed_points(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.map, start=1) if v == i)


@dataclass(frozen=True)
class SignedAutomorphism:
    perm: Permutation
    gauge: GaugeTransform

    def __post_init__(self):
        if self.perm.n != self.gauge.n:
            raise DimensionError(f"permutation on {self.perm.n} nodes with gauge on {self.gauge.n}")

    @property
    def n(self) -> int:
        return self.perm.n

    @property
    def matrix(self) -> np.ndarray:
        s = self.gauge.vector
        return s[:, None] * self.perm.matrix * s[None, :]

    def __call__(self, x) -> np.ndarray:
        return apply_signed_automorphism(self, x)

    def compose(self, other: "SignedAutomorphism") -> "SignedAutomorphism":
        if other.gauge != self.gauge:
            raise GraphError("signed automorphisms compose only under a common gauge")
        return SignedAutomorphism(self.perm.compose(other.perm), self.gauge)

    def to_dict(self) -> dict:
        return {"map": list(self.perm.map), "sigma": list(self.gauge.sigma)}


def _node_invariants(absadj: np.ndarray) -> list[tuple]:
    out = []
    for row in absadj:
        nz = np.sort(row[row != 0])
        out.append((int(nz.size), tuple(np.round(nz, 9))))
    return out


def iter_automorphisms(
    g: SignedGraph,
    fixed: Iterable[int] = (),
    classes: Sequence | None = None,
    allow_large: bool = False,
) -> Iterator[Permutation]:
    """Yield permutations commuting with the magnitude adjacency ``|A_s|``.

    Backtracking over nodes in order; candidate images are restricted to
    nodes with the same degree and sorted incident ``|w|`` multiset, and
    each partial assignment is checked against every already-placed node.
    ``fixed`` nodes must map to themselves and ``classes`` (one label per
    node) must be preserved. Output is in lexicographic order of ``map``,
    so the identity comes first.
    """
    if g.n > MAX_EXHAUSTIVE_NODES and not allow_large:
        raise GraphError(
            f"exhaustive automorphism search is limited to {MAX_EXHAUSTIVE_NODES} nodes "
            f"(graph has {g.n}); pass allow_large=True to override"
        )
    n = g.n
    absadj = np.abs(signed_adjacency(g))
    inv = _node_invariants(absadj)
    if classes is not None:
        if len(classes) != n:
            raise DimensionError(f"{len(classes)} class labels for {n} nodes")
        inv = [(c, k) for c, k in zip(classes, inv)]
    fixed = {int(v) - 1 for v in fixed}
    candidates = [[i] if i in fixed else [j for j in range(n) if inv[j] == inv[i] and j not in fixed] for i in range(n)]
    image = [-1] * n
    used = [False] * n

    def close(a: float, b: float) -> bool:
        return abs(a - b) <= WEIGHT_TOL * max(1.0, abs(a), abs(b))

    def extend(i: int):
        if i == n:
            yield Permutation(tuple(v + 1 for v in image))
            return
        for c in candidates[i]:
            if used[c]:
                continue
            if all(close(absadj[i, k], absadj[c, image[k]]) for k in range(i)):
                image[i] = c
                used[c] = True
                yield from extend(i + 1)
                used[c] = False
        image[i] = -1

    yield from extend(0)


def find_automorphisms(g: SignedGraph, limit: int | None = None, allow_large: bool = False) -> list[Permutation]:
    """At most ``limit`` automorphisms of ``|A_s|``, identity first."""
    if limit is not None and limit < 1:
        raise ValueError("limit must be at least 1")
    return list(itertools.islice(iter_automorphisms(g, allow_large=allow_large), limit))


def is_automorphism(g: SignedGraph, perm: Permutation) -> bool:
    if perm.n != g.n:
        return False
    absadj = np.abs(signed_adjacency(g))
    j = perm.matrix
    return bool(np.allclose(j @ absadj, absadj @ j, rtol=0.0, atol=WEIGHT_TOL * max(1.0, absadj.max(initial=0.0))))


def make_signed_automorphism(perm: Permutation, gauge) -> SignedAutomorphism:
    if not isinstance(gauge, GaugeTransform):
        gauge = GaugeTransform(tuple(gauge))
    return SignedAutomorphism(perm, gauge)


def signed_automorphisms(g: SignedGraph, limit: int | None = None) -> list[SignedAutomorphism]:
    """All ``J' = G_t J G_t`` for a balanced graph, using its certifying gauge."""
    cert = check_structural_balance(g)
    if not cert.balanced:
        raise UnbalancedGraphError(
            f"signed automorphisms need a balanced graph; cycle {cert.witness_cycle} has negative sign"
        )
    return [SignedAutomorphism(p, cert.gauge) for p in find_automorphisms(g, limit)]


def fixed_points(sa: SignedAutomorphism | Permutation) -> frozenset[int]:
    perm = sa.perm if isinstance(sa, SignedAutomorphism) else sa
    return perm.fixed_points()


def preserves_edge_signs(g: SignedGraph, perm: Permutation) -> bool:
    if not is_automorphism(g, perm):
        raise GraphError(f"{perm.map} is not an automorphism of the magnitude graph")
    for u, v, w in g.edges:
        if math.copysign(1.0, w) != math.copysign(1.0, g.weight(perm(u), perm(v))):
            return False
    return True


def preserves_gauge(perm: Permutation, gauge: GaugeTransform) -> bool:
    """True when every node is mapped into its own side of the bipartition."""
    return all(gauge.sigma[i - 1] == gauge.sigma[perm(i) - 1] for i in range(1, perm.n + 1))


def apply_signed_automorphism(sa: SignedAutomorphism, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != sa.n:
        raise DimensionError(f"state of length {x.shape[0]} for an automorphism on {sa.n} nodes")
    idx = np.array(sa.perm.map) - 1
    s = sa.gauge.vector
    return s * s[idx] * x[idx]


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    return Permutation(tuple(int(v) + 1 for v in rng.permutation(n)))
