"""Exact dense reference solvers and two classical baselines.

Assembles the joint canonical form over all variables and solves it
directly, giving ground-truth means and marginal covariances to verify the
message-passing engine against.  Gauss-Newton and Jacobi are included for
comparison, not as part of the engine.

Everything here works on a snapshot of the graph and never mutates it.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularPrecision, ZeroDiagonal
from .factor_graph import FactorGraph
from .gaussian import GaussianMoments, PIVOT_RTOL, _symmetrize


@dataclass(frozen=True)
class DenseSystem:
    """Joint information vector and precision with the variable layout."""

    eta: np.ndarray
    lam: np.ndarray
    layout: dict  # variable id -> (offset, dim)

    @property
    def dim(self) -> int:
        return self.eta.size

    def block(self, var_id) -> slice:
        offset, dim = self.layout[var_id]
        return slice(offset, offset + dim)


def assemble(graph: FactorGraph) -> DenseSystem:
    """Scatter every factor's and prior's (eta, lam) into the joint layout.

    The joint precision inherits the graph's sparsity: block (i, j) is
    nonzero only when some factor adjoins both variables.
    """
    layout = {}
    offset = 0
    for vid, var in graph.variables.items():
        layout[vid] = (offset, var.dim)
        offset += var.dim
    eta = np.zeros(offset)
    lam = np.zeros((offset, offset))
    for vid, var in graph.variables.items():
        if var.prior is not None:
            sl = slice(layout[vid][0], layout[vid][0] + var.dim)
            eta[sl] += var.prior.eta
            lam[sl, sl] += var.prior.lam
    for factor in graph.factors.values():
        idx = np.concatenate([
            np.arange(layout[vid][0], layout[vid][0] + graph.variables[vid].dim)
            for vid in factor.neighbors])
        eta[idx] += factor.gaussian.eta
        lam[np.ix_(idx, idx)] += factor.gaussian.lam
    return DenseSystem(eta, _symmetrize(lam), layout)


def _factorize(sys: DenseSystem):
    try:
        chol = scipy.linalg.cho_factor(sys.lam, lower=True)
    except scipy.linalg.LinAlgError:
        raise SingularPrecision("joint precision is not positive definite "
                                "(unanchored graph?)") from None
    pivots = np.diagonal(chol[0]) ** 2
    if pivots.min() < PIVOT_RTOL * pivots.max():
        raise SingularPrecision("joint precision is singular at working tolerance")
    return chol


def map_solve(sys: DenseSystem) -> dict:
    """MAP means: solve lam mu = eta with one step of iterative refinement."""
    chol = _factorize(sys)
    mu = scipy.linalg.cho_solve(chol, sys.eta)
    mu += scipy.linalg.cho_solve(chol, sys.eta - sys.lam @ mu)
    return {vid: mu[sys.block(vid)].copy() for vid in sys.layout}


def marginals(sys: DenseSystem) -> dict:
    """Per-variable moments: joint mean blocks and diagonal covariance blocks."""
    chol = _factorize(sys)
    cov = scipy.linalg.cho_solve(chol, np.eye(sys.dim))
    mu = cov @ sys.eta
    out = {}
    for vid in sys.layout:
        sl = sys.block(vid)
        out[vid] = GaussianMoments(mu[sl], cov[sl, sl])
    return out


def jacobi_solve(sys: DenseSystem, iters: int, x0: np.ndarray | None = None) -> dict:
    """Plain Jacobi iteration mu <- D^-1 (eta - (lam - D) mu)."""
    diag = np.diagonal(sys.lam)
    if np.any(diag == 0.0):
        raise ZeroDiagonal("jacobi iteration needs a nonzero diagonal")
    off = sys.lam - np.diag(diag)
    mu = np.zeros(sys.dim) if x0 is None else np.asarray(x0, float).copy()
    for _ in range(iters):
        mu = (sys.eta - off @ mu) / diag
    return {vid: mu[sys.block(vid)].copy() for vid in sys.layout}


@dataclass
class GaussNewtonResult:
    means: dict
    energy: float
    iterations: int
    converged: bool
    energies: list  # total energy after each iteration (monitored)


def gauss_newton(graph: FactorGraph, max_iters: int = 50, tol: float = 1e-10) -> GaussNewtonResult:
    """Relinearize-and-solve until the update stalls.

    Each iteration rebuilds every factor at the current estimate (robust
    covariance scaling included) and solves the resulting linear system
    exactly.  Plain steps, no line search; returns the best-so-far estimate
    flagged unconverged when max_iters runs out, with the per-iteration
    energies kept for monitoring.
    """
    work = copy.deepcopy(graph)
    est = work.current_estimate()
    converged = False
    iterations = 0
    energies = []
    for iterations in range(1, max_iters + 1):
        for fid, factor in work.factors.items():
            model = factor.model
            if model.affine and model.robust is None:
                continue
            x0 = np.concatenate([est[vid] for vid in factor.neighbors])
            work.relinearize_factor(fid, x0)
        new_est = map_solve(assemble(work))
        delta = max(float(np.abs(new_est[vid] - est[vid]).max(initial=0.0))
                    for vid in new_est)
        est = new_est
        energies.append(work.total_energy(est))
        if delta < tol:
            converged = True
            break
    return GaussNewtonResult(est, energies[-1], iterations, converged, energies)
