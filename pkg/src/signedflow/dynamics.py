"""Nonlinear consensus flows on signed graphs and their simulation.

Three nonlinear flows are supported besides linear signed consensus. With
``s_ij = sgn(a_ij)`` and ``w_ij = |a_ij|``:

* absolute:      dx_i/dt = -sum_j w_ij [f(x_i) - s_ij f(x_j)]
* relative:      dx_i/dt = -sum_j w_ij f(x_i - s_ij x_j)
* disagreement:  dx_i/dt = -f(sum_j w_ij (x_i - s_ij x_j))
* linear:        dx/dt   = -L_s x

With unit weights these are the usual unweighted protocols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, DivergenceError, GraphError, UnbalancedGraphError
from .signed_graph import SignedGraph, check_structural_balance, signed_laplacian

FLOW_KINDS = ("absolute", "relative", "disagreement", "linear")
NONLINEAR_KINDS = ("absolute", "relative", "disagreement")
INPUT_MODES = ("direct", "additive")
OVERFLOW_GUARD = 1e12


@dataclass(frozen=True)
class NonlinearFunction:
    """Scalar coupling nonlinearity with the metadata the certificates key on.

    ``sector_class`` is ``"S0"`` for ``[f(x) - f(0)] x > 0`` away from the
    origin (with a radially unbounded integral), ``"S"`` for the translated
    version and ``"none"`` otherwise. It is declared, not proven; see
    :func:`sector_violations` for the sampled check.
    """

    name: str
    parity: str
    sector_class: str
    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    smooth: bool = True

    def __post_init__(self):
        if self.parity not in ("odd", "even", "neither"):
            raise ValueError(f"parity must be odd, even or neither, got {self.parity!r}")
        if self.sector_class not in ("S", "S0", "none"):
            raise ValueError(f"sector_class must be S, S0 or none, got {self.sector_class!r}")

    def __call__(self, x):
        return self.eval(x)


def _cubic_plus_linear(x):
    return x**3 + x


def _one_minus_cos(x):
    return 1.0 - np.cos(x)


NONLINEARITIES: dict[str, NonlinearFunction] = {
    f.name: f
    for f in (
        NonlinearFunction("identity", "odd", "S0", lambda x: 1.0 * np.asarray(x)),
        NonlinearFunction("cubic", "odd", "S0", _cubic_plus_linear),
        NonlinearFunction("tanh", "odd", "S0", np.tanh),
        NonlinearFunction("sin", "odd", "none", np.sin),
        NonlinearFunction("square", "even", "none", np.square),
        NonlinearFunction("abs", "even", "none", np.abs, smooth=False),
        NonlinearFunction("one_minus_cos", "even", "none", _one_minus_cos),
    )
}


def get_nonlinearity(name: str | NonlinearFunction) -> NonlinearFunction:
    if isinstance(name, NonlinearFunction):
        return name
    try:
        return NONLINEARITIES[name]
    except KeyError:
        raise GraphError(f"unknown nonlinearity {name!r}; choose from {sorted(NONLINEARITIES)}") from None


def sector_violations(f: NonlinearFunction, xs, x_star: float = 0.0) -> np.ndarray:
    """Sample points where ``[f(x) - f(x*)](x - x*) > 0`` fails."""
    xs = np.asarray(xs, dtype=float)
    xs = xs[xs != x_star]
    lhs = (f(xs) - f(np.array(x_star))) * (xs - x_star)
    return xs[~(lhs > 0)]


# -- input signals ---------------------------------------------------------


class InputSignal:
    """Scalar control input ``u(t)``."""

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class ZeroInput(InputSignal):
    def __call__(self, t):
        return 0.0

    def to_dict(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class ConstantInput(InputSignal):
    value: float

    def __call__(self, t):
        return float(self.value)

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class PiecewiseConstantInput(InputSignal):
    """``values[k]`` on ``[times[k], times[k+1])``; the last value holds forever."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("schedule needs matching, non-empty times and values")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("schedule times must be strictly increasing")

    def __call__(self, t):
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.values[max(k, 0)])

    def to_dict(self):
        return {"kind": "schedule", "times": list(self.times), "values": list(self.values)}


class PseudorandomInput(InputSignal):
    """Piecewise-constant input, uniform on ``[-amplitude, amplitude]`` per hold interval.

    Segment values are drawn in order from a seeded generator, so ``u(t)``
    does not depend on the order in which times are queried.
    """

    def __init__(self, seed: int, amplitude: float = 1.0, hold: float = 0.5):
        if hold <= 0:
            raise ValueError("hold must be positive")
        self.seed = int(seed)
        self.amplitude = float(amplitude)
        self.hold = float(hold)
        self._rng = np.random.default_rng(self.seed)
        self._values: list[float] = []

    def __call__(self, t):
        k = max(int(math.floor(t / self.hold)), 0)
        while len(self._values) <= k:
            self._values.append(float(self._rng.uniform(-self.amplitude, self.amplitude)))
        return self._values[k]

    def to_dict(self):
        return {"kind": "pseudorandom", "seed": self.seed, "amplitude": self.amplitude, "hold": self.hold}


def input_from_config(spec) -> InputSignal | None:
    if spec is None:
        return None
    if isinstance(spec, InputSignal):
        return spec
    if isinstance(spec, (int, float)):
        return ConstantInput(float(spec))
    kind = spec.get("kind")
    if kind == "zero":
        return ZeroInput()
    if kind == "constant":
        return ConstantInput(float(spec["value"]))
    if kind == "schedule":
        return PiecewiseConstantInput(tuple(map(float, spec["times"])), tuple(map(float, spec["values"])))
    if kind == "pseudorandom":
        return PseudorandomInput(spec["seed"], spec.get("amplitude", 1.0), spec.get("hold", 0.5))
    raise GraphError(f"unknown input signal kind {kind!r}")


# -- systems ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlowSystem:
    """A graph with a flow kind, a nonlinearity and an optional input channel.

    ``input_mode="direct"`` replaces the leader's derivative by ``u``;
    ``input_mode="additive"`` adds ``b * u`` to the whole field.
    """

    graph: SignedGraph
    kind: str
    f: NonlinearFunction | str = "identity"
    leader: int | None = None
    input_mode: str | None = None
    b: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in FLOW_KINDS:
            raise GraphError(f"flow kind must be one of {FLOW_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "f", get_nonlinearity(self.f))
        mode = self.input_mode
        if mode is None:
            mode = "direct" if self.leader is not None else ("additive" if self.b is not None else None)
        if mode is not None and mode not in INPUT_MODES:
            raise GraphError(f"input_mode must be one of {INPUT_MODES}, got {mode!r}")
        object.__setattr__(self, "input_mode", mode)
        n = self.graph.n
        if self.leader is not None and not 1 <= self.leader <= n:
            raise GraphError(f"leader {self.leader} is not a node of a {n}-node graph")
        if mode == "direct" and self.leader is None:
            raise GraphError("direct actuation needs a leader")
        if mode == "additive":
            if self.b is None:
                raise GraphError("additive input needs an input vector b")
            b = np.asarray(self.b, dtype=float).ravel()
            if b.shape != (n,):
                raise DimensionError(f"input vector has length {b.size}, graph has {n} nodes")
            object.__setattr__(self, "b", b)

        src, dst, sgn, wt = [], [], [], []
        for u, v, w in self.graph.edges:
            s = 1.0 if w > 0 else -1.0
            src += [u - 1, v - 1]
            dst += [v - 1, u - 1]
            sgn += [s, s]
            wt += [abs(w), abs(w)]
        object.__setattr__(self, "_src", np.array(src, dtype=int))
        object.__setattr__(self, "_dst", np.array(dst, dtype=int))
        object.__setattr__(self, "_sgn", np.array(sgn))
        object.__setattr__(self, "_wt", np.array(wt))
        object.__setattr__(self, "_laplacian", signed_laplacian(self.graph))

    @property
    def n(self) -> int:
        return self.graph.n

    def with_graph(self, graph: SignedGraph) -> "FlowSystem":
        return FlowSystem(graph, self.kind, self.f, self.leader, self.input_mode, self.b)


def _check_state(sys: FlowSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise DimensionError(f"state has shape {x.shape}, expected ({sys.n},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("state contains non-finite entries")
    return x


def _field(sys: FlowSystem, x: np.ndarray) -> np.ndarray:
    n = sys.n
    if sys.kind == "linear":
        return -(sys._laplacian @ x)
    if sys.kind == "disagreement":
        return -sys.f(sys._laplacian @ x)
    i, j = sys._src, sys._dst
    if sys.kind == "absolute":
        fx = sys.f(x)
        terms = sys._wt * (fx[i] - sys._sgn * fx[j])
    else:
        terms = sys._wt * sys.f(x[i] - sys._sgn * x[j])
    return -np.bincount(i, weights=terms, minlength=n)


def flow_field(sys: FlowSystem, x) -> np.ndarray:
    return _field(sys, _check_state(sys, x))


def controlled_field(sys: FlowSystem, x, u: float, t: float = 0.0) -> np.ndarray:
    x = _check_state(sys, x)
    if sys.input_mode is None:
        raise GraphError("system has no input configured (set a leader or an input vector b)")
    out = _field(sys, x)
    if sys.input_mode == "direct":
        out[sys.leader - 1] = u
    else:
        out = out + sys.b * u
    return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise DimensionError("times and states differ in length")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def __len__(self):
        return len(self.times)

    def to_csv(self, path) -> None:
        header = ",".join(["t"] + [f"x{i}" for i in range(1, self.n + 1)])
        data = np.column_stack([self.times, self.states])
        np.savetxt(path, data, delimiter=",", fmt="%.17g", header=header, comments="")

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        if not header or header[0] != "t" or header[1:] != [f"x{i}" for i in range(1, len(header))]:
            raise GraphError(f"{path}: expected a header 't,x1,...,xn'")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[0] < 2:
            raise GraphError(f"{path}: need at least two samples")
        times = data[:, 0]
        dt = float(times[1] - times[0])
        if np.max(np.abs(np.diff(times) - dt)) > 1e-9 * max(1.0, abs(times[-1])):
            raise GraphError(f"{path}: samples are not uniformly spaced")
        return cls(times, data[:, 1:], dt)


def integrate(
    sys: FlowSystem,
    x0,
    dt: float,
    T: float,
    u: InputSignal | Callable[[float], float] | float | None = None,
) -> Trajectory:
    """Classic fixed-step RK4 from ``t = 0`` to ``T``.

    With an input, ``u`` is sampled once per step at the step midpoint and
    held over the step, so piecewise-constant inputs switching on the grid
    never straddle a stage. Raises :class:`DivergenceError` (carrying the
    partial trajectory) once any coordinate exceeds the overflow guard.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not T >= dt * (1 - 1e-12):
        raise ValueError("horizon T must be at least dt")
    x = _check_state(sys, x0).copy()
    if isinstance(u, (int, float)):
        u = ConstantInput(float(u))
    if u is not None and sys.input_mode is None:
        raise GraphError("an input signal was given but the system has no input configured")
    steps = int(math.floor(T / dt + 1e-9))
    times = np.arange(steps + 1) * dt
    states = np.empty((steps + 1, sys.n))
    states[0] = x

    if u is None:
        def rhs(y, uk):
            return _field(sys, y)
    elif sys.input_mode == "direct":
        leader = sys.leader - 1

        def rhs(y, uk):
            out = _field(sys, y)
            out[leader] = uk
            return out
    else:
        def rhs(y, uk):
            return _field(sys, y) + sys.b * uk

    half = 0.5 * dt
    for k in range(steps):
        uk = float(u(times[k] + half)) if u is not None else 0.0
        k1 = rhs(x, uk)
        k2 = rhs(x + half * k1, uk)
        k3 = rhs(x + half * k2, uk)
        k4 = rhs(x + dt * k3, uk)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > OVERFLOW_GUARD:
            partial = Trajectory(times[: k + 1].copy(), states[: k + 1].copy(), dt)
            raise DivergenceError(f"state left |x| <= {OVERFLOW_GUARD:g} at t = {times[k + 1]:.6g}", partial)
        states[k + 1] = x
    return Trajectory(times, states, dt)


def bipartite_limit(g: SignedGraph, x0) -> np.ndarray:
    """Predicted bipartite-consensus state ``(1/n)(1^T G_t x0) G_t 1``.

    On a disconnected graph the formula is applied per component.
    """
    cert = check_structural_balance(g)
    if not cert.balanced:
        raise UnbalancedGraphError(
            f"bipartite limit is only defined for balanced graphs; cycle {cert.witness_cycle} is negative"
        )
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (g.n,):
        raise DimensionError(f"x0 has shape {x0.shape}, expected ({g.n},)")
    s = cert.gauge.vector
    out = np.empty(g.n)
    for comp in cert.components:
        idx = np.array(comp) - 1
        alpha = float(s[idx] @ x0[idx]) / len(idx)
        out[idx] = alpha * s[idx]
    return out
