"""Shared fixtures: seeded random graphs with known-solvable structure."""

import numpy as np

from gbp.factor_graph import FactorGraph
from gbp.factors import custom_linear
from gbp.gaussian import GaussianCanonical


def random_spd(rng, d, strength=1.0):
    a = rng.normal(size=(d, d))
    return strength * (a @ a.T + d * np.eye(d))


def random_tree(seed, max_vars=20, max_dim=3, damping=1.0):
    """Random tree: SPD prior on every variable, random linear factor per edge."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_vars + 1))
    graph = FactorGraph(damping=damping)
    dims = [int(rng.integers(1, max_dim + 1)) for _ in range(n)]
    for i in range(n):
        prior_lam = random_spd(rng, dims[i], strength=0.5)
        prior_eta = prior_lam @ rng.normal(size=dims[i])
        graph.add_variable(i, dims[i], GaussianCanonical(prior_eta, prior_lam))
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((j, i))
        m = int(rng.integers(1, max_dim + 1))
        jac = rng.normal(size=(m, dims[j] + dims[i]))
        noise = random_spd(rng, m, strength=0.3)
        graph.add_factor(f"f{j}-{i}", [j, i],
                         custom_linear(jac, rng.normal(size=m), noise))
    return graph, edges


def random_loopy(seed, n_vars=8, extra_edges=4, dim=2, damping=0.7):
    """Random loopy graph that keeps GBP convergent: anchored, relative factors.

    Every variable gets a weak prior; edges carry relative-difference factors
    with moderate noise, which keeps the model walk-summable in practice.
    """
    rng = np.random.default_rng(seed)
    graph = FactorGraph(damping=damping)
    for i in range(n_vars):
        lam = np.eye(dim) * float(rng.uniform(0.05, 0.2))
        eta = lam @ rng.normal(scale=2.0, size=dim)
        graph.add_variable(i, dim, GaussianCanonical(eta, lam))
    edges = set()
    for i in range(1, n_vars):
        edges.add((int(rng.integers(0, i)), i))
    while len(edges) < n_vars - 1 + extra_edges:
        i, j = rng.integers(0, n_vars, size=2)
        if i != j:
            edges.add((min(int(i), int(j)), max(int(i), int(j))))
    jac = np.hstack([-np.eye(dim), np.eye(dim)])
    for k, (i, j) in enumerate(sorted(edges)):
        sigma = float(rng.uniform(0.5, 1.5))
        graph.add_factor(f"e{k}", [i, j],
                         custom_linear(jac, rng.normal(size=dim),
                                       np.eye(dim) * sigma ** 2))
    return graph


def bfs_order(graph, root):
    """Variable ids in BFS order from the root, following shared factors."""
    seen = {root}
    order = [root]
    frontier = [root]
    while frontier:
        nxt = []
        for vid in frontier:
            for fid in graph.variables[vid].factors:
                for uid in graph.factors[fid].neighbors:
                    if uid not in seen:
                        seen.add(uid)
                        order.append(uid)
                        nxt.append(uid)
        frontier = nxt
    return order


def leaves_first_order(graph, root=None):
    """Sweep order that visits children before parents (tree exactness)."""
    if root is None:
        root = next(iter(graph.variables))
    return list(reversed(bfs_order(graph, root)))
