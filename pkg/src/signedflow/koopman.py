"""EDMD approximation of the Koopman operator on a Hermite product dictionary.

The fit follows the usual EDMD recipe: evaluate the dictionary on
snapshot pairs, form the Gram matrix ``G`` and the cross matrix ``A``,
and take ``K = G^+ A``. Right eigenvectors of ``K`` give eigenfunction
coefficients; Koopman modes for the full-state observable come from the
left eigenvectors restricted to the coordinate (first-order) dictionary
entries, normalised against the right ones.

For a structurally balanced consensus flow the mode paired with the
eigenvalue closest to 1 is proportional to the gauge vector, so its sign
pattern recovers the two camps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .dynamics import Trajectory
from .errors import DimensionError, GraphError, NumericalError, UnbalancedGraphError
from .signed_graph import BalanceCertificate

DEFAULT_DICTIONARY_CAP = 10_000
DEFAULT_PINV_RTOL = 1e-10
RETAIN_ABS_EIGENVALUE = 0.1


def hermite(order: int, x):
    """Probabilists' Hermite polynomial ``He_order(x)`` by three-term recurrence."""
    if order < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x
    if order == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, order):
        prev, cur = cur, x * cur - k * prev
    return cur if cur.ndim else float(cur)


def hermite_table(x, max_order: int) -> np.ndarray:
    """``He_0 .. He_max_order`` stacked on a new last axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (max_order + 1,))
    out[..., 0] = 1.0
    if max_order >= 1:
        out[..., 1] = x
    for k in range(1, max_order):
        out[..., k + 1] = x * out[..., k] - k * out[..., k - 1]
    return out


@dataclass(frozen=True, eq=False)
class Dictionary:
    """All products ``prod_i He_{j_i}(x_i)`` with ``0 <= j_i <= max_order``.

    Multi-indices are enumerated lexicographically, so entry 0 is the
    constant function.
    """

    n: int
    max_order: int
    multi_indices: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.multi_indices)

    @property
    def coordinate_indices(self) -> np.ndarray:
        """Position of ``He_1(x_i) = x_i`` for each coordinate ``i``."""
        idx = self.multi_indices
        return np.array([int(np.flatnonzero((idx.sum(axis=1) == 1) & (idx[:, i] == 1))[0]) for i in range(self.n)])

    @property
    def constant_index(self) -> int:
        return int(np.flatnonzero(self.multi_indices.sum(axis=1) == 0)[0])


def build_dictionary(n: int, p: int, cap: int = DEFAULT_DICTIONARY_CAP) -> Dictionary:
    if n < 1 or p < 1:
        raise ValueError("dictionary needs n >= 1 and max order p >= 1")
    size = (p + 1) ** n
    if size > cap:
        raise GraphError(f"dictionary would have {size} functions, above the cap of {cap}")
    idx = np.array(list(itertools.product(range(p + 1), repeat=n)), dtype=int)
    return Dictionary(n, p, idx)


def evaluate_dictionary(d: Dictionary, x) -> np.ndarray:
    """Dictionary values; a single state gives a vector, a stack of states a matrix."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != d.n:
        raise DimensionError(f"states have dimension {X.shape[1]}, dictionary expects {d.n}")
    H = hermite_table(X, d.max_order)
    out = np.ones((X.shape[0], d.size))
    for i in range(d.n):
        out *= H[:, i, d.multi_indices[:, i]]
    return out[0] if single else out


@dataclass(frozen=True, eq=False)
class SnapshotPairs:
    X: np.ndarray
    Y: np.ndarray
    dt: float

    def __post_init__(self):
        X, Y = np.atleast_2d(self.X), np.atleast_2d(self.Y)
        if X.shape != Y.shape:
            raise DimensionError(f"X {X.shape} and Y {Y.shape} differ")
        if X.shape[0] < 1:
            raise GraphError("need at least one snapshot pair")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def M(self) -> int:
        return self.X.shape[0]

    @classmethod
    def concat(cls, parts: list["SnapshotPairs"]) -> "SnapshotPairs":
        if len({p.dt for p in parts}) != 1:
            raise GraphError("cannot stack snapshot pairs with different dt")
        return cls(np.vstack([p.X for p in parts]), np.vstack([p.Y for p in parts]), parts[0].dt)


def assemble_snapshots(traj: Trajectory, window: tuple[float, float] | None = None) -> SnapshotPairs:
    """Consecutive sample pairs whose both ends fall in ``[t_start, t_end]``."""
    times = np.asarray(traj.times)
    if window is None:
        window = (times[0], times[-1])
    a, b = map(float, window)
    if b < a:
        raise GraphError(f"window [{a}, {b}] is empty")
    eps = 1e-9 * max(1.0, abs(traj.dt))
    if a < times[0] - eps or b > times[-1] + eps:
        raise GraphError(f"window [{a}, {b}] is outside the trajectory span [{times[0]}, {times[-1]}]")
    inside = np.flatnonzero((times >= a - eps) & (times <= b + eps))
    if inside.size < 2:
        raise GraphError(f"window [{a}, {b}] holds fewer than two samples")
    s = traj.states[inside]
    return SnapshotPairs(s[:-1], s[1:], traj.dt)


class ZeroMode(NamedTuple):
    eigenvalue: complex
    mode: np.ndarray
    index: int


@dataclass(frozen=True, eq=False)
class EDMDResult:
    K: np.ndarray
    eigenvalues: np.ndarray
    right_eigvecs: np.ndarray
    left_eigvecs: np.ndarray
    modes: np.ndarray
    dt: float
    residual: float
    gram_rank: int
    rank_deficient: bool
    dictionary: Dictionary = field(repr=False)

    @property
    def retained(self) -> np.ndarray:
        """Eigenpairs worth reporting (``|mu| >= 0.1``); all pairs stay searchable."""
        return np.abs(self.eigenvalues) >= RETAIN_ABS_EIGENVALUE

    def eigenfunctions(self, x) -> np.ndarray:
        return evaluate_dictionary(self.dictionary, x) @ self.right_eigvecs

    def continuous_eigenvalues(self) -> tuple[np.ndarray, np.ndarray]:
        """``log(mu) / dt`` on the principal branch, plus a flag for pairs near the branch cut."""
        with np.errstate(divide="ignore"):
            lam = np.log(self.eigenvalues.astype(complex)) / self.dt
        near_cut = np.abs(lam.imag) > 0.9 * np.pi / self.dt
        return lam, near_cut

    def to_dict(self, retained_only: bool = True) -> dict:
        keep = self.retained if retained_only else np.ones(len(self.eigenvalues), bool)
        return {
            "dictionary_size": self.dictionary.size,
            "dt": self.dt,
            "residual": self.residual,
            "gram_rank": self.gram_rank,
            "rank_deficient": self.rank_deficient,
            "eigenvalues": [[float(m.real), float(m.imag)] for m in self.eigenvalues[keep]],
        }


def _order(mu: np.ndarray) -> np.ndarray:
    # descending |mu|, ties broken by real then imaginary part; stable
    return np.lexsort((-np.round(mu.imag, 12), -np.round(mu.real, 12), -np.round(np.abs(mu), 12)))


def _biorthogonalize(mu, WL, VR, cluster_tol: float = 1e-8):
    """Rescale left eigenvectors so that ``W^H V = I``.

    Inside a cluster of repeated eigenvalues the solver's left and right
    bases need not be dual, so the cluster block is inverted as a whole.
    Blocks that are numerically singular (defective eigenvalues) are
    flagged as unusable.
    """
    WL = WL.copy()
    ok = np.zeros(len(mu), dtype=bool)
    done = np.zeros(len(mu), dtype=bool)
    for j in range(len(mu)):
        if done[j]:
            continue
        idx = np.flatnonzero(~done & (np.abs(mu - mu[j]) <= cluster_tol * max(1.0, abs(mu[j]))))
        done[idx] = True
        block = WL[:, idx].conj().T @ VR[:, idx]
        sv = np.linalg.svd(block, compute_uv=False)
        if sv[-1] > 1e-12 * max(1.0, sv[0]):
            WL[:, idx] = WL[:, idx] @ np.linalg.inv(block).conj().T
            ok[idx] = True
    return WL, ok


def edmd_fit(
    pairs: SnapshotPairs,
    d: Dictionary,
    reg: float = 0.0,
    pinv_rtol: float = DEFAULT_PINV_RTOL,
) -> EDMDResult:
    """Fit ``K = (G + reg I)^+ A`` and decompose it.

    ``G`` and ``A`` are averaged over the ``M`` pairs. Left eigenvectors are
    scaled so that ``W^H Xi = I``; mode ``j`` is then the row of
    ``W^H B`` with ``B`` picking the coordinate entries, so that
    ``x = sum_j v_j phi_j(x)`` over a complete eigenbasis. Modes whose
    normalisation is numerically singular (defective eigenvalues) are NaN.
    """
    if reg < 0:
        raise ValueError("reg must be non-negative")
    if pairs.X.shape[1] != d.n:
        raise DimensionError(f"snapshots have dimension {pairs.X.shape[1]}, dictionary expects {d.n}")
    PX = evaluate_dictionary(d, pairs.X)
    PY = evaluate_dictionary(d, pairs.Y)
    M = pairs.M
    G = PX.T @ PX / M + reg * np.eye(d.size)
    A = PX.T @ PY / M
    try:
        sv = np.linalg.svd(G, compute_uv=False)
        K = np.linalg.pinv(G, rcond=pinv_rtol, hermitian=True) @ A
        mu, WL, VR = scipy.linalg.eig(K, left=True, right=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"EDMD decomposition failed: {exc}") from exc
    if not np.all(np.isfinite(mu)):
        raise NumericalError("EDMD eigensolver returned non-finite eigenvalues")
    gram_rank = int(np.sum(sv > pinv_rtol * sv[0])) if sv[0] > 0 else 0

    order = _order(mu)
    mu, WL, VR = mu[order], WL[:, order], VR[:, order]
    WL, ok = _biorthogonalize(mu, WL, VR)
    modes = np.full((len(mu), d.n), np.nan + 0j)
    modes[ok] = WL.conj()[d.coordinate_indices][:, ok].T

    residual = float(np.linalg.norm(PY - PX @ K) / max(np.linalg.norm(PY), np.finfo(float).tiny))
    return EDMDResult(
        K=K,
        eigenvalues=mu,
        right_eigvecs=VR,
        left_eigvecs=WL,
        modes=modes,
        dt=pairs.dt,
        residual=residual,
        gram_rank=gram_rank,
        rank_deficient=gram_rank < d.size and reg == 0.0,
        dictionary=d,
    )


def extract_zero_mode(r: EDMDResult, tol: float = 0.05, cluster_tol: float = 1e-6) -> ZeroMode:
    """Koopman mode of the eigenvalue closest to 1 (continuous eigenvalue 0).

    Eigenvalues within ``cluster_tol`` of the closest one are treated as a
    single numerically degenerate cluster (a conserved quantity shares the
    eigenvalue with the constant function); the pair with the largest real
    mode is taken from it. Raises :class:`NumericalError` when nothing lies
    within ``tol`` of 1 or the chosen mode is genuinely complex.
    """
    gap = np.abs(r.eigenvalues - 1.0)
    usable = np.all(np.isfinite(r.modes), axis=1)
    if not usable.any():
        raise NumericalError("no eigenpair has a usable Koopman mode")
    best = float(gap[usable].min())
    if best > tol:
        raise NumericalError(f"no eigenvalue within {tol} of 1 (closest is {best:.3g} away)")
    cluster = np.flatnonzero(usable & (gap <= best + cluster_tol))
    j = int(cluster[np.argmax([np.linalg.norm(r.modes[k].real) for k in cluster])])
    mode = r.modes[j]
    size = np.linalg.norm(mode)
    if size == 0.0:
        raise NumericalError("zero-eigenvalue mode vanishes")
    if np.linalg.norm(mode.imag) > tol * size:
        raise NumericalError("zero-eigenvalue mode has a significant imaginary part")
    return ZeroMode(complex(r.eigenvalues[j]), mode.real.copy(), j)


@dataclass(frozen=True)
class BipartitionEstimate:
    signs: tuple[int, ...]
    mode_index: int | None = None
    eigenvalue_gap: float | None = None
    ambiguous: tuple[int, ...] = ()

    @property
    def partition(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        plus = tuple(i for i, s in enumerate(self.signs, start=1) if s > 0)
        minus = tuple(i for i, s in enumerate(self.signs, start=1) if s < 0)
        return plus, minus

    def to_dict(self) -> dict:
        return {
            "signs": list(self.signs),
            "partition": [list(p) for p in self.partition],
            "ambiguous": list(self.ambiguous),
            "mode_index": self.mode_index,
            "eigenvalue_gap": self.eigenvalue_gap,
        }


def bipartition_from_mode(
    mode,
    dead_zone: float = 0.05,
    mode_index: int | None = None,
    eigenvalue: complex | None = None,
) -> BipartitionEstimate:
    """Sign pattern of a mode, normalised so node 1 is on the ``+`` side.

    Entries below ``dead_zone`` times the largest magnitude are reported
    as ambiguous; if node 1 is ambiguous the first clear entry fixes the
    global sign instead.
    """
    v = np.real(np.asarray(mode)).astype(float)
    peak = np.abs(v).max() if v.size else 0.0
    if not peak > 0:
        raise NumericalError("mode is identically zero")
    ambiguous = np.abs(v) < dead_zone * peak
    if ambiguous.all():
        raise NumericalError("every mode entry lies in the dead zone")
    anchor = 0 if not ambiguous[0] else int(np.flatnonzero(~ambiguous)[0])
    if v[anchor] < 0:
        v = -v
    signs = tuple(1 if s >= 0 else -1 for s in v)
    gap = None if eigenvalue is None else float(abs(eigenvalue - 1.0))
    return BipartitionEstimate(signs, mode_index, gap, tuple(int(i) + 1 for i in np.flatnonzero(ambiguous)))


def validate_against_gauge(est: BipartitionEstimate, cert: BalanceCertificate) -> bool:
    if not cert.balanced:
        raise UnbalancedGraphError("cannot validate against an unbalanced certificate")
    sigma = cert.gauge.sigma
    if len(sigma) != len(est.signs):
        raise DimensionError(f"estimate has {len(est.signs)} entries, gauge has {len(sigma)}")
    return tuple(est.signs) == sigma or tuple(-s for s in est.signs) == sigma


def recover_bipartition(
    traj: Trajectory,
    window: tuple[float, float] | None = None,
    order: int = 2,
    reg: float = 0.0,
    tol: float = 0.05,
    dead_zone: float = 0.05,
) -> tuple[EDMDResult, ZeroMode, BipartitionEstimate]:
    """Window a trajectory, fit EDMD and read the camps off the zero mode."""
    d = build_dictionary(traj.n, order)
    result = edmd_fit(assemble_snapshots(traj, window), d, reg)
    zm = extract_zero_mode(result, tol)
    return result, zm, bipartition_from_mode(zm.mode, dead_zone, zm.index, zm.eigenvalue)
