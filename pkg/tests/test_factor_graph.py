import json

import numpy as np
import pytest

from gbp.errors import InvalidBeta, MissingAssignment, NotAdjacent, UnknownNode
from gbp.factor_graph import (
    FactorGraph,
    Message,
    damp,
    graph_from_json,
    graph_to_json,
)
from gbp.factors import custom_linear, offset1d, prior_factor, rangebearing, relpos2d, smooth1d
from gbp.gaussian import GaussianCanonical, to_moments
from gbp import oracle, schedules

from helpers import leaves_first_order, random_tree


def unit_prior(mean=0.0):
    return GaussianCanonical([mean], [[1.0]])


class TestBeliefUpdate:
    def test_empty_inbox_no_prior(self):
        g = FactorGraph()
        g.add_variable("x", 1)
        belief = g.update_belief("x")
        assert belief.is_zero()

    def test_prior_only(self):
        g = FactorGraph()
        g.add_variable("x", 1, GaussianCanonical([3.0], [[1.0]]))
        assert g.update_belief("x").allclose(GaussianCanonical([3.0], [[1.0]]))

    def test_prior_product_with_message(self):
        g = FactorGraph(damping=1.0)
        g.add_variable("x", 1, unit_prior(0.0))
        g.add_factor("f", ["x"], offset1d(d=2.0, sigma=1.0))
        g.factor_to_variable("f", "x")
        belief = g.update_belief("x")
        assert belief.eta == pytest.approx([2.0])
        assert belief.lam == pytest.approx(np.array([[2.0]]))
        assert to_moments(belief).mean == pytest.approx([1.0])

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            FactorGraph().update_belief("nope")


class TestVariableToFactor:
    def test_single_factor_no_prior_is_zero(self):
        g = FactorGraph()
        g.add_variable("x", 1)
        g.add_factor("f", ["x"], offset1d(0.0, 1.0))
        assert g.variable_to_factor("x", "f").payload.is_zero()

    def test_prior_passes_through(self):
        g = FactorGraph()
        g.add_variable("x", 1, GaussianCanonical([5.0], [[2.0]]))
        g.add_factor("f", ["x"], offset1d(0.0, 1.0))
        msg = g.variable_to_factor("x", "f")
        assert msg.payload.allclose(GaussianCanonical([5.0], [[2.0]]))

    def test_excludes_recipient(self):
        # prior (0,1), f1 message (1,1), f2 message (4,2): to f2 -> (1,2)
        g = FactorGraph(damping=1.0)
        g.add_variable("x", 1, unit_prior(0.0))
        g.add_factor("f1", ["x"], offset1d(1.0, 1.0))
        g.add_factor("f2", ["x"], custom_linear([[1.0]], [2.0], [[0.5]]))
        g.factor_to_variable("f1", "x")
        g.factor_to_variable("f2", "x")
        msg = g.variable_to_factor("x", "f2")
        assert msg.payload.eta == pytest.approx([1.0])
        assert msg.payload.lam == pytest.approx(np.array([[2.0]]))

    def test_not_adjacent(self):
        g = FactorGraph()
        g.add_variable("x", 1)
        g.add_variable("y", 1)
        g.add_factor("f", ["x"], offset1d(0.0, 1.0))
        with pytest.raises(NotAdjacent):
            g.variable_to_factor("y", "f")


class TestFactorToVariable:
    def test_unary_equals_factor_gaussian(self):
        g = FactorGraph(damping=1.0)
        g.add_variable("x", 1)
        g.add_factor("f", ["x"], offset1d(3.0, 0.5))
        msg = g.factor_to_variable("f", "x")
        assert msg.payload.allclose(g.factors["f"].gaussian)

    def test_binary_relative_hand_derived(self):
        # x2 - x1 ~ N(1, 1), incoming x1 message (eta=0, lam=1):
        # joint lam [[2,-1],[-1,1]], eta [-1,1]; marginal on x2: lam 1/2, mean 1.
        g = FactorGraph(damping=1.0)
        g.add_variable("x1", 1, unit_prior(0.0))
        g.add_variable("x2", 1)
        g.add_factor("f", ["x1", "x2"], custom_linear([[-1.0, 1.0]], [1.0], [[1.0]]))
        g.variable_to_factor("x1", "f")
        msg = g.factor_to_variable("f", "x2")
        assert msg.payload.lam == pytest.approx(np.array([[0.5]]))
        assert to_moments(msg.payload).mean == pytest.approx([1.0])

    def test_deterministic_repeat(self):
        g = FactorGraph(damping=1.0)
        g.add_variable("x1", 1, unit_prior(0.0))
        g.add_variable("x2", 1)
        g.add_factor("f", ["x1", "x2"], smooth1d(1.0))
        g.variable_to_factor("x1", "f")
        first = g.factor_to_variable("f", "x2")
        second = g.factor_to_variable("f", "x2")
        assert np.array_equal(first.payload.eta, second.payload.eta)
        assert np.array_equal(first.payload.lam, second.payload.lam)

    def test_underconstrained_falls_back_to_zero(self):
        # Eliminating across a factor whose block carries no information must
        # not raise; it sends the zero-information message instead.
        g = FactorGraph(damping=1.0)
        g.add_variable("x1", 1)
        g.add_variable("x2", 1)
        g.add_factor("f", ["x1", "x2"], custom_linear([[0.0, 1.0]], [0.0], [[1.0]]))
        msg = g.factor_to_variable("f", "x1")
        assert msg.payload.is_zero()


class TestDamp:
    def make(self, eta, lam):
        return Message("f", "x", GaussianCanonical([eta], [[lam]]))

    def test_beta_one_returns_new(self):
        new, old = self.make(2.0, 2.0), self.make(0.0, 1.0)
        assert damp(new, old, 1.0) is new

    def test_fixed_point_any_beta(self):
        new = self.make(1.5, 2.5)
        for beta in (0.1, 0.5, 0.9):
            out = damp(new, self.make(1.5, 2.5), beta)
            assert out.payload.eta == pytest.approx([1.5])
            assert out.payload.lam == pytest.approx(np.array([[2.5]]))

    def test_weighted_sum(self):
        out = damp(self.make(2.0, 2.0), self.make(0.0, 1.0), 0.5)
        assert out.payload.eta == pytest.approx([1.0])
        assert out.payload.lam == pytest.approx(np.array([[1.5]]))

    def test_invalid_beta(self):
        with pytest.raises(InvalidBeta):
            damp(self.make(1, 1), self.make(1, 1), 0.0)
        with pytest.raises(InvalidBeta):
            damp(self.make(1, 1), self.make(1, 1), 1.5)


class TestTotalEnergy:
    def test_zero_residuals(self):
        g = FactorGraph()
        g.add_variable("a", 1)
        g.add_variable("b", 1)
        g.add_factor("s", ["a", "b"], smooth1d(1.0))
        assert g.total_energy({"a": [2.0], "b": [2.0]}) == pytest.approx(0.0)

    def test_scalar_prior_half_squared(self):
        g = FactorGraph()
        g.add_variable("x", 1, unit_prior(0.0))
        assert g.total_energy({"x": [2.0]}) == pytest.approx(2.0)

    def test_missing_assignment(self):
        g = FactorGraph()
        g.add_variable("x", 1)
        with pytest.raises(MissingAssignment):
            g.total_energy({})

    def test_map_is_energy_minimum(self):
        rng = np.random.default_rng(5)
        for seed in range(4):
            graph, _ = random_tree(seed, max_vars=5, max_dim=4)
            means = oracle.map_solve(oracle.assemble(graph))
            base = graph.total_energy(means)
            for _ in range(5):
                perturbed = {vid: mu + rng.normal(scale=0.3, size=mu.size)
                             for vid, mu in means.items()}
                assert graph.total_energy(perturbed) >= base - 1e-9


class TestResidualOf:
    def test_unchanged_message_zero(self):
        g = FactorGraph(damping=1.0)
        g.add_variable("x", 1)
        g.add_factor("f", ["x"], offset1d(3.0, 2.0))
        g.factor_to_variable("f", "x")
        assert g.residual_of("f", "x") == pytest.approx(0.0)

    def test_norm_arithmetic(self):
        # Stored zero-information vs candidate eta=3, lam=4 -> 3 + 4 = 7.
        g = FactorGraph(damping=1.0)
        g.add_variable("x", 1)
        g.add_factor("f", ["x"], custom_linear([[2.0]], [1.5], [[1.0]]))
        # candidate: eta = J d = 3, lam = J^2 = 4
        assert g.residual_of("f", "x") == pytest.approx(7.0)


class TestConvergenceDelta:
    def test_no_change_zero(self):
        g = FactorGraph()
        g.add_variable("x", 1, unit_prior(1.0))
        g.snapshot_beliefs()
        assert g.convergence_delta() == 0.0

    def test_single_move(self):
        g = FactorGraph(damping=1.0)
        g.add_variable("x", 1, unit_prior(0.0))
        g.add_variable("y", 1, unit_prior(0.0))
        g.snapshot_beliefs()
        g.add_factor("f", ["x"], offset1d(0.5, 1.0))
        g.factor_to_variable("f", "x")
        assert g.convergence_delta() == pytest.approx(0.25)

    def test_singular_belief_is_infinite(self):
        g = FactorGraph()
        g.add_variable("x", 1)
        g.snapshot_beliefs()
        assert g.convergence_delta() == float("inf")

    def test_tree_delta_hits_zero_within_diameter_plus_one(self):
        for seed in (0, 1, 2):
            graph, edges = random_tree(seed, max_vars=10, max_dim=2)
            diameter = tree_diameter(len(graph.variables), edges)
            policy = schedules.SchedulePolicy("synchronous")
            deltas = [schedules.step(graph, policy).convergence_delta
                      for _ in range(diameter + 1)]
            assert deltas[-1] <= 1e-12


def tree_diameter(n, edges):
    adj = {i: [] for i in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)

    def farthest(start):
        dist = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        far = max(dist, key=lambda k: dist[k])
        return far, dist[far]

    far, _ = farthest(0)
    _, diameter = farthest(far)
    return diameter


class TestTreeExactness:
    def test_one_sweep_matches_dense_marginals(self):
        for seed in range(5):
            graph, _ = random_tree(seed, max_vars=12, max_dim=3)
            truth = oracle.marginals(oracle.assemble(graph))
            order = leaves_first_order(graph, root=0)
            schedules.step(graph, schedules.SchedulePolicy("sweep", order=order))
            for vid, marg in truth.items():
                belief = to_moments(graph.belief(vid))
                assert np.abs(belief.mean - marg.mean).max() <= 1e-8
                assert np.abs(belief.cov - marg.cov).max() <= 1e-8


class TestLambdaSparsity:
    def test_unshared_variables_have_zero_block(self):
        g = FactorGraph()
        g.add_variable(0, 1, unit_prior(0.0))
        g.add_variable(1, 1, unit_prior(0.0))
        g.add_variable(2, 1, unit_prior(0.0))
        g.add_factor("f01", [0, 1], smooth1d(1.0))
        g.add_factor("f12", [1, 2], smooth1d(1.0))
        lam = oracle.assemble(g).lam
        assert lam[0, 2] == 0.0 and lam[2, 0] == 0.0
        assert lam[0, 1] != 0.0 and lam[1, 2] != 0.0


class TestGraphJson:
    def build(self):
        g = FactorGraph()
        g.add_variable(0, 2, GaussianCanonical([1.0, 0.0], [[2.0, 0.1], [0.1, 1.0]]),
                       initial=[0.5, 0.0])
        g.add_variable(1, 2, initial=[1.0, 1.0])
        g.add_variable(2, 1)
        g.add_factor("rel", [0, 1], relpos2d(0.5, 0.5, 0.2))
        g.add_factor("rb", [0, 1], rangebearing(1.0, 0.3, 0.1, 0.05, huber_t=1.5))
        g.add_factor("anchor", [2], offset1d(0.7, 0.3))
        g.add_factor("pri", [2], prior_factor([0.5], [[4.0]]))
        return g

    def test_round_trip_bit_exact(self):
        g = self.build()
        doc = graph_to_json(g)
        text = json.dumps(doc)
        rebuilt = graph_from_json(json.loads(text))
        assert json.dumps(graph_to_json(rebuilt)) == text

    def test_round_trip_preserves_structure(self):
        g = self.build()
        rebuilt = graph_from_json(graph_to_json(g))
        rebuilt.validate()
        assert list(rebuilt.variables) == list(g.variables)
        assert list(rebuilt.factors) == list(g.factors)
        for fid in g.factors:
            assert np.abs(rebuilt.factors[fid].gaussian.lam
                          - g.factors[fid].gaussian.lam).max() <= 1e-12

    def test_field_names(self):
        doc = graph_to_json(self.build())
        assert set(doc) == {"variables", "factors"}
        assert set(doc["variables"][0]) == {"id", "dim", "prior", "initial"}
        assert set(doc["variables"][2]) == {"id", "dim"}
        rel = doc["factors"][0]
        assert [rel[k] for k in ("id", "type", "neighbors")] == ["rel", "relpos2d", [0, 1]]
        assert {"dx", "dy", "sigma"} <= set(rel)


class TestMessagePsd:
    def test_stored_messages_stay_psd(self):
        # Payload precisions are Schur complements of PSD joints: never
        # meaningfully negative.
        from helpers import random_loopy
        from gbp import schedules
        g = random_loopy(13, n_vars=7, extra_edges=3)
        for _ in range(25):
            schedules.step(g, schedules.SchedulePolicy("synchronous"))
        g._ensure_messages()
        for (fid, vid), msg in g._msgs_f2v.items():
            assert np.abs(msg.lam - msg.lam.T).max(initial=0.0) <= 1e-12
            assert np.linalg.eigvalsh(msg.lam).min() >= -1e-10


class TestRemoveNode:
    def test_remove_factor_detaches(self):
        g = FactorGraph(damping=1.0)
        g.add_variable("x", 1, unit_prior(0.0))
        g.add_factor("f", ["x"], offset1d(2.0, 1.0))
        g.factor_to_variable("f", "x")
        g.remove_node("f")
        assert "f" not in g.factors
        assert g.belief("x").allclose(unit_prior(0.0))

    def test_remove_variable_removes_adjacent_factors(self):
        g = FactorGraph()
        g.add_variable("x", 1)
        g.add_variable("y", 1)
        g.add_factor("f", ["x", "y"], smooth1d(1.0))
        g.remove_node("x")
        assert not g.factors
        assert "y" in g.variables
