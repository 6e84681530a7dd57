"""Uncontrollability certificates for leader-follower signed flows.

Two kinds of evidence live here. The linear one is the Kalman rank test,
computed both by SVD and by exact rational elimination. The nonlinear one
is a symmetry certificate: a balanced graph, a signed automorphism fixing
the leader and a parity condition on ``f`` make the flow equivariant, so
the fixed-point subspace of the automorphism is invariant and the
leader-follower system cannot be accessible from the origin. The probe
checks that invariance on simulated controlled trajectories.

A missing certificate says nothing about controllability.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import (
    NONLINEAR_KINDS,
    FlowSystem,
    NonlinearFunction,
    PseudorandomInput,
    flow_field,
    get_nonlinearity,
    integrate,
)
from .errors import DimensionError, GraphError, NumericalError, UnsupportedNonlinearityError
from .signed_graph import GaugeTransform, SignedGraph, check_structural_balance, signed_laplacian
from .symmetry import SignedAutomorphism, iter_automorphisms, preserves_edge_signs, preserves_gauge

DEFAULT_RANK_TOL = 1e-10
RULE_FOR_KIND = {"absolute": "absolute-flow", "relative": "relative-flow", "disagreement": "disagreement-flow"}


def controllability_matrix(A, b) -> np.ndarray:
    """``[b, A b, ..., A^(n-1) b]``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise DimensionError(f"b has length {b.size}, A is {A.shape[0]}x{A.shape[0]}")
    cols = [b]
    for _ in range(A.shape[0] - 1):
        cols.append(A @ cols[-1])
    return np.column_stack(cols)


@dataclass(frozen=True)
class RankReport:
    matrix_rank: int
    dimension: int
    singular_values: tuple[float, ...]
    verdict: str

    def to_dict(self) -> dict:
        return {
            "matrix_rank": self.matrix_rank,
            "dimension": self.dimension,
            "singular_values": list(self.singular_values),
            "verdict": self.verdict,
        }


def rank_with_tolerance(M, rel_tol: float = DEFAULT_RANK_TOL) -> RankReport:
    """Numerical rank: singular values above ``rel_tol`` times the largest.

    ``dimension`` is the row count, i.e. the state dimension for a Kalman
    matrix.
    """
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    try:
        sv = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    rank = int(np.sum(sv > rel_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    dim = M.shape[0]
    return RankReport(rank, dim, tuple(float(s) for s in sv), "controllable" if rank == dim else "uncontrollable")


def exact_rank(M) -> int:
    """Rank by fraction-exact Gaussian elimination; entries must be rational."""
    rows = [[Fraction(v) for v in row] for row in np.asarray(M, dtype=object).tolist()]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                factor = rows[r][c] / rows[rank][c]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def exact_controllability_matrix(A, b) -> list[list[Fraction]]:
    A = [[Fraction(v) for v in row] for row in A]
    col = [Fraction(v) for v in b]
    n = len(A)
    cols = [col]
    for _ in range(n - 1):
        col = [sum(A[i][k] * col[k] for k in range(n)) for i in range(n)]
        cols.append(col)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class UncontrollabilityCertificate:
    rule: str
    leader: int
    automorphism: SignedAutomorphism
    gauge: GaugeTransform
    parity_case: str
    edge_sign_preserved: bool

    def __post_init__(self):
        if self.automorphism.perm.is_identity():
            raise GraphError("a certificate needs a non-identity automorphism")
        if self.leader not in self.automorphism.perm.fixed_points():
            raise GraphError(f"leader {self.leader} is not fixed by the automorphism")
        if self.rule == "absolute-flow" and self.parity_case == "even" and not self.edge_sign_preserved:
            raise GraphError("absolute flow with even f needs an edge-sign preserving automorphism")

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "leader": self.leader,
            "automorphism": self.automorphism.to_dict(),
            "sigma": list(self.gauge.sigma),
            "parity_case": self.parity_case,
            "edge_sign_preserved": self.edge_sign_preserved,
            "fixed_points": sorted(self.automorphism.perm.fixed_points()),
        }


def certify_inaccessibility(
    g: SignedGraph,
    kind: str,
    f: NonlinearFunction | str,
    leader: int,
) -> UncontrollabilityCertificate | None:
    """Look for a symmetry certificate that the leader-follower flow is inaccessible.

    Conditions: ``g`` is structurally balanced and some non-identity
    automorphism of ``|A_s|`` fixes ``leader``. For odd ``f`` that is
    enough for all three flows. For even ``f`` the automorphism must also
    keep every node on its own side of the bipartition; on a connected
    graph with a fixed leader this is the same as preserving edge signs.
    Without it the sign factor ``sigma_i sigma_phi(i)`` breaks
    equivariance for every flow kind, not only the absolute one.

    Returns ``None`` when no certificate is found.
    """
    f = get_nonlinearity(f)
    if kind not in NONLINEAR_KINDS:
        raise UnsupportedNonlinearityError(f"certificates cover the flows {NONLINEAR_KINDS}, not {kind!r}")
    if f.parity not in ("odd", "even"):
        raise UnsupportedNonlinearityError(f"{f.name!r} is neither odd nor even; no certificate applies")
    if not 1 <= leader <= g.n:
        raise GraphError(f"leader {leader} is not a node of a {g.n}-node graph")
    balance = check_structural_balance(g)
    if not balance.balanced:
        return None
    gauge = balance.gauge
    classes = gauge.sigma if f.parity == "even" else None
    for perm in iter_automorphisms(g, fixed=(leader,), classes=classes):
        if perm.is_identity():
            continue
        edge_signs = preserves_edge_signs(g, perm)
        if f.parity == "even" and not (edge_signs and preserves_gauge(perm, gauge)):
            continue
        return UncontrollabilityCertificate(
            rule=RULE_FOR_KIND[kind],
            leader=leader,
            automorphism=SignedAutomorphism(perm, gauge),
            gauge=gauge,
            parity_case=f.parity,
            edge_sign_preserved=edge_signs,
        )
    return None


def equivariance_defect(sys: FlowSystem, sa: SignedAutomorphism, states) -> float:
    """``max |J' F(x) - F(J' x)|`` over the given states."""
    J = sa.matrix
    worst = 0.0
    for x in np.atleast_2d(states):
        worst = max(worst, float(np.max(np.abs(J @ flow_field(sys, x) - flow_field(sys, sa(x))))))
    return worst


def empirical_invariance_probe(
    sys: FlowSystem,
    cert: UncontrollabilityCertificate,
    seed: int,
    T: float = 10.0,
    dt: float = 0.01,
    amplitude: float = 1.0,
    hold: float = 0.5,
) -> float:
    """Largest ``||phi'(x(t)) - x(t)||_inf`` along a controlled run from the origin.

    The leader is driven directly by a seeded piecewise-constant input.
    :class:`~signedflow.errors.DivergenceError` propagates unchanged.
    """
    if sys.input_mode != "direct" or sys.leader != cert.leader:
        raise GraphError(f"probe needs direct actuation of leader {cert.leader}")
    if cert.automorphism.n != sys.n:
        raise DimensionError("certificate and system have different node counts")
    traj = integrate(sys, np.zeros(sys.n), dt, T, PseudorandomInput(seed, amplitude, hold))
    sa = cert.automorphism
    idx = np.array(sa.perm.map) - 1
    s = sa.gauge.vector
    moved = s * s[idx] * traj.states[:, idx]
    return float(np.max(np.abs(moved - traj.states)))


def linearized_controllability(sys: FlowSystem, rel_tol: float = DEFAULT_RANK_TOL, h: float = 1e-6) -> RankReport:
    """Kalman rank of the leader-actuated flow linearised at the origin.

    Every flow linearises to ``-f'(0) L_s``; under direct actuation the
    leader row is replaced by the input channel ``e_leader``.
    """
    if sys.input_mode != "direct":
        raise GraphError("linearised test is defined for direct leader actuation")
    slope = 1.0 if sys.kind == "linear" else float((sys.f(np.array(h)) - sys.f(np.array(-h))) / (2 * h))
    A = -slope * signed_laplacian(sys.graph)
    A[sys.leader - 1, :] = 0.0
    b = np.zeros(sys.n)
    b[sys.leader - 1] = 1.0
    return rank_with_tolerance(controllability_matrix(A, b), rel_tol)
