import itertools

import numpy as np
import pytest

from signedflow.controllability import (
    UncontrollabilityCertificate,
    certify_inaccessibility,
    controllability_matrix,
    empirical_invariance_probe,
    equivariance_defect,
    exact_controllability_matrix,
    exact_rank,
    linearized_controllability,
    rank_with_tolerance,
)
from signedflow.dynamics import FlowSystem, NonlinearFunction
from signedflow.errors import DimensionError, GraphError, UnsupportedNonlinearityError
from signedflow.presets import L1, L2, SIGNED_INPUT, SIGNED_SWAP_TRIANGLE
from signedflow.signed_graph import GaugeTransform, SignedGraph, check_structural_balance
from signedflow.symmetry import Permutation, SignedAutomorphism

KINDS = ("absolute", "relative", "disagreement")


class TestKalman:
    def test_columns(self):
        A = np.array([[0.0, 1.0], [-2.0, -3.0]])
        C = controllability_matrix(A, [0.0, 1.0])
        assert np.array_equal(C, [[0, 1], [1, -3]])

    def test_shapes(self):
        with pytest.raises(DimensionError):
            controllability_matrix(np.ones((2, 3)), [1, 1])
        with pytest.raises(DimensionError):
            controllability_matrix(np.eye(3), [1, 1])

    def test_signed_input_contrast(self):
        for L, expected in ((L1, 1), (L2, 3)):
            C = controllability_matrix(-L, SIGNED_INPUT)
            assert rank_with_tolerance(C).matrix_rank == expected
            assert exact_rank(exact_controllability_matrix(-L, SIGNED_INPUT)) == expected

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_uniform_input(self, sign):
        b = sign * np.ones(3)
        assert rank_with_tolerance(controllability_matrix(-L1, b)).matrix_rank == 3
        assert rank_with_tolerance(controllability_matrix(-L2, b)).matrix_rank == 1
        assert exact_rank(exact_controllability_matrix(-L1, b)) == 3
        assert exact_rank(exact_controllability_matrix(-L2, b)) == 1

    def test_verdicts(self):
        assert rank_with_tolerance(np.eye(3)).verdict == "controllable"
        assert rank_with_tolerance(np.zeros((3, 3))).matrix_rank == 0

    def test_tolerance_range(self):
        with pytest.raises(ValueError):
            rank_with_tolerance(np.eye(2), 0.0)

    def test_exact_rank_examples(self):
        assert exact_rank([[1, 2], [2, 4]]) == 1
        assert exact_rank([[0, 0], [0, 0]]) == 0
        assert exact_rank([[0, 1], [1, 0]]) == 2

    def test_rank_invariant_under_similarity(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 7))
            A = rng.integers(-2, 3, size=(n, n)).astype(float)
            b = rng.integers(-1, 2, size=n).astype(float)
            base = exact_rank(exact_controllability_matrix(A, b))
            assert rank_with_tolerance(controllability_matrix(A, b)).matrix_rank == base
            P = np.eye(n)[rng.permutation(n)]
            assert exact_rank(exact_controllability_matrix(P @ A @ P.T, P @ b)) == base
            Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
            assert rank_with_tolerance(controllability_matrix(Q @ A @ Q.T, Q @ b)).matrix_rank == base


class TestCertificates:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("f", ["cubic", "tanh", "sin"])
    def test_odd_four_node(self, four_node, kind, f):
        cert = certify_inaccessibility(four_node, kind, f, leader=2)
        assert cert is not None
        assert cert.rule == f"{kind}-flow"
        assert cert.automorphism.perm.map == (3, 2, 1, 4)
        assert cert.parity_case == "odd"
        assert cert.to_dict()["fixed_points"] == [2, 4]

    @pytest.mark.parametrize("kind", KINDS)
    def test_even_star(self, star, kind):
        cert = certify_inaccessibility(star, kind, "square", leader=4)
        assert cert is not None and cert.edge_sign_preserved
        assert cert.automorphism.perm.map == (3, 2, 1, 4)

    @pytest.mark.parametrize("kind", KINDS)
    def test_even_rejected_when_swap_crosses_camps(self, kind):
        assert certify_inaccessibility(SIGNED_SWAP_TRIANGLE, kind, "square", leader=3) is None

    def test_even_counterexample_breaks_equivariance(self, rng):
        sa = SignedAutomorphism(Permutation.swap(3, 1, 2), check_structural_balance(SIGNED_SWAP_TRIANGLE).gauge)
        states = rng.normal(size=(50, 3))
        for kind in KINDS:
            assert equivariance_defect(FlowSystem(SIGNED_SWAP_TRIANGLE, kind, "square"), sa, states) > 1e-3
            assert equivariance_defect(FlowSystem(SIGNED_SWAP_TRIANGLE, kind, "cubic"), sa, states) < 1e-12

    @pytest.mark.parametrize("kind", KINDS)
    def test_unbalanced_gives_none(self, four_node_flipped, kind):
        assert certify_inaccessibility(four_node_flipped, kind, "cubic", leader=2) is None

    def test_no_symmetry_fixing_leader(self):
        path = SignedGraph(3, ((1, 2, 1.0), (2, 3, -1.0)))
        assert certify_inaccessibility(path, "relative", "cubic", leader=1) is None
        assert certify_inaccessibility(path, "relative", "cubic", leader=2) is not None

    def test_linear_kind_refused(self, four_node):
        with pytest.raises(UnsupportedNonlinearityError):
            certify_inaccessibility(four_node, "linear", "identity", leader=2)

    def test_neither_parity_refused(self, four_node):
        f = NonlinearFunction("shifted", "neither", "none", lambda x: x + x**2)
        with pytest.raises(UnsupportedNonlinearityError):
            certify_inaccessibility(four_node, "relative", f, leader=2)

    def test_certificate_validation(self, four_node):
        gauge = check_structural_balance(four_node).gauge
        with pytest.raises(GraphError):
            UncontrollabilityCertificate("relative-flow", 2, SignedAutomorphism(Permutation.identity(4), gauge), gauge, "odd", True)
        with pytest.raises(GraphError):
            UncontrollabilityCertificate("relative-flow", 1, SignedAutomorphism(Permutation.swap(4, 1, 3), gauge), gauge, "odd", True)
        with pytest.raises(GraphError):
            UncontrollabilityCertificate("absolute-flow", 2, SignedAutomorphism(Permutation.swap(4, 1, 3), gauge), gauge, "even", False)

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("graph,f,leader", [("four_node", "cubic", 2), ("star", "square", 4), ("star", "one_minus_cos", 4)])
    def test_soundness_equivariance(self, request, rng, kind, graph, f, leader):
        g = request.getfixturevalue(graph)
        cert = certify_inaccessibility(g, kind, f, leader)
        sys = FlowSystem(g, kind, f)
        assert equivariance_defect(sys, cert.automorphism, rng.uniform(-2, 2, size=(1000, g.n))) <= 1e-10

    def test_exhaustive_small_graphs_sound(self, rng):
        """Every certificate issued on small balanced graphs is equivariant."""
        checked = 0
        for n in (3, 4, 5):
            pairs = list(itertools.combinations(range(1, n + 1), 2))
            for _ in range(25):
                sigma = rng.choice([1, -1], n)
                chosen = [p for p in pairs if rng.random() < 0.6]
                g = SignedGraph(n, tuple((u, v, float(sigma[u - 1] * sigma[v - 1])) for u, v in chosen))
                for f in ("cubic", "square"):
                    for leader in range(1, n + 1):
                        cert = certify_inaccessibility(g, "relative", f, leader)
                        if cert is None:
                            continue
                        checked += 1
                        sys = FlowSystem(g, "relative", f)
                        assert equivariance_defect(sys, cert.automorphism, rng.normal(size=(20, n))) <= 1e-10
        assert checked > 0


class TestProbe:
    def test_certified_is_exactly_invariant(self, four_node):
        cert = certify_inaccessibility(four_node, "relative", "cubic", 2)
        sys = FlowSystem(four_node, "relative", "cubic", leader=2)
        assert empirical_invariance_probe(sys, cert, seed=1, T=5.0) == 0.0

    def test_broken_by_flipped_edge(self, four_node):
        cert = certify_inaccessibility(four_node, "relative", "cubic", 2)
        broken = four_node.with_edge_sign_flipped(3, 4)
        assert certify_inaccessibility(broken, "relative", "cubic", 2) is None
        sys = FlowSystem(broken, "relative", "cubic", leader=2)
        assert empirical_invariance_probe(sys, cert, seed=1, T=5.0) >= 0.01

    def test_zero_input_stays_at_origin(self, four_node):
        cert = certify_inaccessibility(four_node, "absolute", "tanh", 2)
        sys = FlowSystem(four_node.with_edge_sign_flipped(3, 4), "absolute", "tanh", leader=2)
        assert empirical_invariance_probe(sys, cert, seed=0, T=2.0, amplitude=0.0) == 0.0

    def test_requires_matching_leader(self, four_node):
        cert = certify_inaccessibility(four_node, "relative", "cubic", 2)
        with pytest.raises(GraphError):
            empirical_invariance_probe(FlowSystem(four_node, "relative", "cubic", leader=4), cert, seed=0)
        with pytest.raises(GraphError):
            empirical_invariance_probe(FlowSystem(four_node, "relative", "cubic"), cert, seed=0)


class TestLinearized:
    @pytest.mark.parametrize("f", ["cubic", "tanh", "sin", "identity"])
    def test_certified_leader_is_rank_deficient(self, four_node, f):
        sys = FlowSystem(four_node, "relative", f, leader=2)
        assert certify_inaccessibility(four_node, "relative", f, 2) is not None
        assert linearized_controllability(sys).matrix_rank < 4

    def test_linear_kind(self, four_node):
        report = linearized_controllability(FlowSystem(four_node, "linear", leader=2))
        assert report.verdict == "uncontrollable"

    def test_needs_direct_mode(self, four_node):
        with pytest.raises(GraphError):
            linearized_controllability(FlowSystem(four_node, "linear", b=np.ones(4)))

    def test_gauge_does_not_change_rank(self, four_node):
        sys = FlowSystem(four_node, "linear", leader=2)
        plain = FlowSystem(four_node.unsigned(), "linear", leader=2)
        assert linearized_controllability(sys).matrix_rank == linearized_controllability(plain).matrix_rank

    def test_gauge_type(self):
        assert GaugeTransform((1, -1)).n == 2
