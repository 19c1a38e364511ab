"""Factor graph structure and the three message-passing phases.

Variables hold beliefs, factors hold a (possibly relinearized and
robust-scaled) canonical Gaussian over their neighbors' concatenated state,
and every directed (factor, variable) edge stores the last message sent
along it.  Absent messages mean zero information.  Beliefs are refreshed
from the stored inbox whenever read after a change, so observers never see
a stale belief.

Everything a message computation reads is local: the sending node's own
state plus the stored messages on its adjacent edges.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidBeta,
    InvalidSpec,
    MissingAssignment,
    NotAdjacent,
    SingularBlock,
    SingularPrecision,
    UnknownNode,
)
from .factors import MeasurementModel, linearize, mahalanobis, model_from_params
from .gaussian import GaussianCanonical, _spd_cholesky, _chol_solve, marginalize

DEFAULT_DAMPING = 0.7
TREE_DAMPING = 1.0


@dataclass(frozen=True)
class Message:
    """The payload sent along one directed edge of the graph."""

    from_id: object
    to_id: object
    payload: GaussianCanonical


def damp(new: Message, old: Message, beta: float) -> Message:
    """Convex blend of a new message with the previous one on the same edge.

    eta = beta*eta_new + (1-beta)*eta_old, likewise for the precision.
    beta = 1 recovers the undamped message bit-for-bit.  Applied only to
    factor-to-variable messages; damping the variable side is unnecessary.
    """
    if not 0.0 < beta <= 1.0:
        raise InvalidBeta(f"damping must lie in (0, 1], got {beta}")
    if new.from_id != old.from_id or new.to_id != old.to_id:
        raise DimensionMismatch("damp called with messages from different edges")
    if new.payload.dim != old.payload.dim:
        raise DimensionMismatch("damp called with mismatched payload dimensions")
    if beta == 1.0:
        return new
    blended = GaussianCanonical(
        beta * new.payload.eta + (1.0 - beta) * old.payload.eta,
        beta * new.payload.lam + (1.0 - beta) * old.payload.lam,
    )
    return Message(new.from_id, new.to_id, blended)


class VariableNode:
    """A variable node: id, dimension, optional prior anchor, current belief."""

    __slots__ = ("id", "dim", "prior", "factors", "initial",
                 "_belief", "_belief_stale", "_mean", "_mean_stale")

    def __init__(self, node_id, dim: int, prior: GaussianCanonical | None = None,
                 initial: np.ndarray | None = None):
        if dim < 1:
            raise InvalidSpec(f"variable {node_id!r} must have positive dim")
        if prior is not None and prior.dim != dim:
            raise DimensionMismatch(f"prior dim {prior.dim} != variable dim {dim}")
        self.id = node_id
        self.dim = dim
        self.prior = prior
        self.factors: list = []  # adjacent factor ids, insertion order
        self.initial = None if initial is None else np.asarray(initial, float).reshape(-1)
        self._belief = prior if prior is not None else GaussianCanonical.zero(dim)
        self._belief_stale = False
        self._mean = None
        self._mean_stale = True


class FactorNode:
    """A factor node: ordered neighbors and the current linearized Gaussian."""

    __slots__ = ("id", "neighbors", "model", "gaussian", "linearization_point",
                 "jac", "offset", "slices", "dim", "_base")

    def __init__(self, factor_id, neighbors: list, model: MeasurementModel,
                 dims: list, x0: np.ndarray):
        if len(set(neighbors)) != len(neighbors):
            raise InvalidSpec(f"factor {factor_id!r} lists a neighbor twice")
        self.id = factor_id
        self.neighbors = list(neighbors)
        self.model = model
        self.dim = sum(dims)
        self.slices = []
        start = 0
        for d in dims:
            self.slices.append(slice(start, start + d))
            start += d
        lin = linearize(model, x0)
        if lin.gaussian.dim != self.dim:
            raise DimensionMismatch(
                f"factor {factor_id!r}: model spans dim {lin.gaussian.dim}, "
                f"neighbors span {self.dim}")
        self.gaussian = lin.gaussian
        self.linearization_point = lin.linearization_point
        self.jac = lin.jac
        self.offset = lin.offset
        # Affine robust factors rescale by dividing a cached unscaled
        # Gaussian; no refactorization needed.
        self._base = None
        if model.affine and model.robust is not None:
            plain = dataclasses.replace(model, robust=None)
            self._base = linearize(plain, x0).gaussian

    def slice_of(self, var_id) -> slice:
        return self.slices[self.neighbors.index(var_id)]


class FactorGraph:
    """Bipartite graph of variables and factors with per-edge message storage."""

    def __init__(self, damping: float = DEFAULT_DAMPING, relin_threshold: float = 0.1):
        if not 0.0 < damping <= 1.0:
            raise InvalidBeta(f"damping must lie in (0, 1], got {damping}")
        self.variables: dict = {}
        self.factors: dict = {}
        self.damping = damping
        self.relin_threshold = relin_threshold
        self._msgs_f2v: dict = {}  # (factor_id, var_id) -> GaussianCanonical
        self._msgs_v2f: dict = {}  # (var_id, factor_id) -> GaussianCanonical
        self._prev_means: dict | None = None
        # Cache/version bookkeeping for the vectorized synchronous kernel.
        self._struct_version = 0   # topology or priors changed
        self._values_version = 0   # some factor gaussian changed
        self._msg_epoch = 0        # some stored message changed
        self._kernel_live = None   # kernel currently holding message state

    def _ensure_messages(self):
        """Flush kernel-held message state back into the per-edge dicts."""
        kernel = self._kernel_live
        if kernel is not None:
            self._kernel_live = None
            kernel.flush_to(self)

    def _note_message_write(self):
        self._msg_epoch += 1

    # -- construction -------------------------------------------------------

    def add_variable(self, node_id, dim: int, prior: GaussianCanonical | None = None,
                     initial=None) -> VariableNode:
        if node_id in self.variables:
            raise InvalidSpec(f"duplicate variable id {node_id!r}")
        node = VariableNode(node_id, dim, prior, initial)
        self.variables[node_id] = node
        self._struct_version += 1
        return node

    def add_factor(self, factor_id, neighbors: list, model: MeasurementModel,
                   x0=None) -> FactorNode:
        if factor_id in self.factors:
            raise InvalidSpec(f"duplicate factor id {factor_id!r}")
        dims = []
        for vid in neighbors:
            if vid not in self.variables:
                raise UnknownNode(f"factor {factor_id!r} references unknown variable {vid!r}")
            dims.append(self.variables[vid].dim)
        if x0 is None:
            parts = []
            for vid in neighbors:
                init = self.variables[vid].initial
                parts.append(init if init is not None else np.zeros(self.variables[vid].dim))
            x0 = np.concatenate(parts) if parts else np.zeros(0)
        node = FactorNode(factor_id, neighbors, model, dims, np.asarray(x0, float))
        self.factors[factor_id] = node
        for vid in neighbors:
            self.variables[vid].factors.append(factor_id)
            self.variables[vid]._belief_stale = True
        self._struct_version += 1
        return node

    def set_prior(self, var_id, prior: GaussianCanonical | None):
        var = self._variable(var_id)
        if prior is not None and prior.dim != var.dim:
            raise DimensionMismatch(f"prior dim {prior.dim} != variable dim {var.dim}")
        var.prior = prior
        var._belief_stale = True
        self._struct_version += 1

    def remove_node(self, node_id):
        """Remove a variable (plus its factors) or a factor."""
        self._ensure_messages()
        self._struct_version += 1
        if node_id in self.variables:
            for fid in list(self.variables[node_id].factors):
                self.remove_node(fid)
            del self.variables[node_id]
            if self._prev_means is not None:
                self._prev_means.pop(node_id, None)
        elif node_id in self.factors:
            factor = self.factors.pop(node_id)
            for vid in factor.neighbors:
                if vid in self.variables:
                    var = self.variables[vid]
                    var.factors.remove(node_id)
                    var._belief_stale = True
                self._msgs_f2v.pop((node_id, vid), None)
                self._msgs_v2f.pop((vid, node_id), None)
        else:
            raise UnknownNode(f"no node {node_id!r}")

    # -- lookups ------------------------------------------------------------

    def _variable(self, var_id) -> VariableNode:
        try:
            return self.variables[var_id]
        except KeyError:
            raise UnknownNode(f"no variable {var_id!r}") from None

    def _factor(self, factor_id) -> FactorNode:
        try:
            return self.factors[factor_id]
        except KeyError:
            raise UnknownNode(f"no factor {factor_id!r}") from None

    def _check_adjacent(self, factor: FactorNode, var_id):
        if var_id not in factor.neighbors:
            raise NotAdjacent(f"factor {factor.id!r} is not adjacent to variable {var_id!r}")

    def message_f2v(self, factor_id, var_id) -> GaussianCanonical:
        self._ensure_messages()
        msg = self._msgs_f2v.get((factor_id, var_id))
        return msg if msg is not None else GaussianCanonical.zero(self._variable(var_id).dim)

    def message_v2f(self, var_id, factor_id) -> GaussianCanonical:
        self._ensure_messages()
        msg = self._msgs_v2f.get((var_id, factor_id))
        return msg if msg is not None else GaussianCanonical.zero(self._variable(var_id).dim)

    def seed_message(self, factor_id, var_id, payload: GaussianCanonical) -> None:
        """Preset a stored factor-to-variable message (multiscale warm starts)."""
        factor = self._factor(factor_id)
        self._check_adjacent(factor, var_id)
        if payload.dim != self._variable(var_id).dim:
            raise DimensionMismatch("seeded message has wrong dimension")
        self._ensure_messages()
        self._msgs_f2v[(factor_id, var_id)] = payload
        self._note_message_write()
        self.variables[var_id]._belief_stale = True

    def directed_f2v_edges(self) -> list:
        """All (factor id, variable id) pairs, in graph insertion order."""
        return [(fid, vid) for fid, f in self.factors.items() for vid in f.neighbors]

    # -- beliefs ------------------------------------------------------------

    def update_belief(self, var_id) -> GaussianCanonical:
        """Product of the prior (if any) and all stored incoming messages."""
        var = self._variable(var_id)
        var._belief = self._gather(var, var_id, None)
        var._belief_stale = False
        var._mean_stale = True
        return var._belief

    def _gather(self, var: VariableNode, var_id, skip_factor) -> GaussianCanonical:
        """Prior times all incoming messages, optionally excluding one factor."""
        self._ensure_messages()
        if var.dim == 1:
            eta = 0.0
            lam = 0.0
            if var.prior is not None:
                eta = var.prior.eta[0]
                lam = var.prior.lam[0, 0]
            for fid in var.factors:
                if fid == skip_factor:
                    continue
                msg = self._msgs_f2v.get((fid, var_id))
                if msg is not None:
                    eta += msg.eta[0]
                    lam += msg.lam[0, 0]
            return GaussianCanonical._make(np.array([eta]), np.array([[lam]]))
        dim = var.dim
        eta = np.zeros(dim)
        lam = np.zeros((dim, dim))
        if var.prior is not None:
            eta += var.prior.eta
            lam += var.prior.lam
        for fid in var.factors:
            if fid == skip_factor:
                continue
            msg = self._msgs_f2v.get((fid, var_id))
            if msg is not None:
                eta += msg.eta
                lam += msg.lam
        return GaussianCanonical._make(eta, lam)

    def belief(self, var_id) -> GaussianCanonical:
        var = self._variable(var_id)
        if var._belief_stale:
            self.update_belief(var_id)
        return var._belief

    def belief_mean(self, var_id) -> np.ndarray | None:
        """Mean of the current belief, or None while the precision is singular."""
        var = self._variable(var_id)
        if var._belief_stale:
            self.update_belief(var_id)
        if var._mean_stale:
            b = var._belief
            if b.dim == 1:
                pivot = b.lam[0, 0]
                var._mean = np.array([b.eta[0] / pivot]) if pivot > 0.0 else None
            else:
                try:
                    chol = _spd_cholesky(b.lam, SingularPrecision)
                except SingularPrecision:
                    var._mean = None
                else:
                    var._mean = _chol_solve(chol, b.eta)
            var._mean_stale = False
        return var._mean

    # -- the three BP phases -------------------------------------------------

    def variable_to_factor(self, var_id, factor_id) -> Message:
        """What the variable would believe if the receiving factor did not exist."""
        var = self._variable(var_id)
        factor = self._factor(factor_id)
        self._check_adjacent(factor, var_id)
        payload = self._gather(var, var_id, factor_id)
        self._msgs_v2f[(var_id, factor_id)] = payload
        self._note_message_write()
        return Message(var_id, factor_id, payload)

    def _f2v_candidate(self, factor: FactorNode, var_id) -> GaussianCanonical:
        """Undamped factor-to-variable message from current stored inputs."""
        self._ensure_messages()
        if len(factor.neighbors) == 1:
            return factor.gaussian
        g = factor.gaussian
        if g.eta.shape[0] == 2 and len(factor.neighbors) == 2:
            # Binary scalar-scalar factor: closed-form Schur complement.
            own = 0 if factor.neighbors[0] == var_id else 1
            other = 1 - own
            other_id = factor.neighbors[other]
            e_o = g.eta[other]
            l_oo = g.lam[other, other]
            msg = self._msgs_v2f.get((other_id, factor.id))
            if msg is not None:
                e_o += msg.eta[0]
                l_oo += msg.lam[0, 0]
            cross = g.lam[own, other]
            if l_oo > 0.0:
                return GaussianCanonical._make(
                    np.array([g.eta[own] - cross * e_o / l_oo]),
                    np.array([[g.lam[own, own] - cross * cross / l_oo]]))
            if cross == 0.0 and e_o == 0.0:
                # Uninformed, uncoupled block drops freely.
                return GaussianCanonical._make(np.array([g.eta[own]]),
                                               np.array([[g.lam[own, own]]]))
            return self._f2v_fallback(factor, var_id)
        eta = g.eta.copy()
        lam = g.lam.copy()
        keep = None
        for nid, sl in zip(factor.neighbors, factor.slices):
            if nid == var_id:
                keep = sl
                continue
            msg = self._msgs_v2f.get((nid, factor.id))
            if msg is not None:
                eta[sl] += msg.eta
                lam[sl, sl] += msg.lam
        joint = GaussianCanonical._make(eta, lam)
        keep_idx = np.arange(keep.start, keep.stop)
        try:
            return marginalize(joint, keep_idx)
        except SingularBlock:
            return self._f2v_fallback(factor, var_id)

    def _f2v_fallback(self, factor: FactorNode, var_id) -> GaussianCanonical:
        # Not enough incoming information yet: try the raw factor's own
        # marginal, and failing that send no information at all.
        sl = factor.slice_of(var_id)
        try:
            return marginalize(factor.gaussian, np.arange(sl.start, sl.stop))
        except SingularBlock:
            return GaussianCanonical.zero(sl.stop - sl.start)

    def factor_to_variable(self, factor_id, var_id) -> Message:
        """Marginal of the factor (plus other neighbors' messages) onto one variable.

        The outgoing message is damped against the previously stored message
        with the graph's damping parameter before being stored and returned.
        """
        factor = self._factor(factor_id)
        self._check_adjacent(factor, var_id)
        payload = self._f2v_candidate(factor, var_id)
        beta = self.damping
        if beta < 1.0:
            old = self._msgs_f2v.get((factor_id, var_id))
            if old is None:
                old = GaussianCanonical.zero(payload.dim)
            payload = GaussianCanonical._make(
                beta * payload.eta + (1.0 - beta) * old.eta,
                beta * payload.lam + (1.0 - beta) * old.lam)
        self._msgs_f2v[(factor_id, var_id)] = payload
        self._note_message_write()
        var = self.variables[var_id]
        var._belief_stale = True
        return Message(factor_id, var_id, payload)

    # -- residuals and convergence -------------------------------------------

    def residual_of(self, factor_id, var_id) -> float:
        """Distance between the recomputed (undamped) message and the stored one."""
        factor = self._factor(factor_id)
        self._check_adjacent(factor, var_id)
        cand = self._f2v_candidate(factor, var_id)
        stored = self.message_f2v(factor_id, var_id)
        return float(np.linalg.norm(cand.eta - stored.eta)
                     + np.linalg.norm(cand.lam - stored.lam, ord="fro"))

    def snapshot_beliefs(self):
        """Record current belief means as the reference for convergence_delta."""
        self._prev_means = {vid: self.belief_mean(vid) for vid in self.variables}

    def convergence_delta(self, prev_means: dict | None = None) -> float:
        """Max-norm change of belief means since the last snapshot.

        A variable whose current belief is still singular contributes +inf;
        one that just became informative (no previous mean) contributes 0,
        so consistent chains settle to delta 0 the moment the sweep finishes.
        """
        reference = prev_means if prev_means is not None else self._prev_means
        if reference is None:
            self.snapshot_beliefs()
            return float("inf")
        worst = 0.0
        for vid in self.variables:
            now = self.belief_mean(vid)
            if now is None:
                return float("inf")
            prev = reference.get(vid)
            if prev is None:
                continue
            if now.shape[0] == 1:
                diff = abs(now[0] - prev[0])
            else:
                diff = float(np.abs(now - prev).max(initial=0.0))
            if diff > worst:
                worst = diff
        return worst

    # -- estimates, energy, relinearization -----------------------------------

    def current_estimate(self) -> dict:
        """Best available point estimate per variable.

        Belief mean when defined, else prior mean, else the variable's block
        of the first adjacent factor's linearization point, else zeros.
        """
        est = {}
        for vid, var in self.variables.items():
            mean = self.belief_mean(vid)
            if mean is None and var.prior is not None:
                try:
                    chol = _spd_cholesky(var.prior.lam, SingularPrecision)
                    mean = _chol_solve(chol, var.prior.eta)
                except SingularPrecision:
                    mean = None
            if mean is None and var.initial is not None:
                mean = var.initial
            if mean is None:
                for fid in var.factors:
                    factor = self.factors[fid]
                    mean = factor.linearization_point[factor.slice_of(vid)]
                    break
            est[vid] = np.zeros(var.dim) if mean is None else np.asarray(mean, float)
        return est

    def total_energy(self, assignment: dict | None = None) -> float:
        """Sum of factor energies (robust where configured) plus prior energies."""
        if assignment is None:
            assignment = self.current_estimate()
        for vid, var in self.variables.items():
            if vid not in assignment:
                raise MissingAssignment(f"no value for variable {vid!r}")
            if np.asarray(assignment[vid]).reshape(-1).size != var.dim:
                raise MissingAssignment(f"value for {vid!r} has wrong dimension")
        total = 0.0
        for factor in self.factors.values():
            x = np.concatenate([np.asarray(assignment[vid], float).reshape(-1)
                                for vid in factor.neighbors])
            total += factor.model.energy(x)
        for vid, var in self.variables.items():
            if var.prior is None:
                continue
            x = np.asarray(assignment[vid], float).reshape(-1)
            try:
                chol = _spd_cholesky(var.prior.lam, SingularPrecision)
                mu = _chol_solve(chol, var.prior.eta)
            except SingularPrecision:
                mu = np.linalg.pinv(var.prior.lam) @ var.prior.eta
            diff = x - mu
            total += 0.5 * float(diff @ var.prior.lam @ diff)
        return total

    def relinearize_factor(self, factor_id, x0) -> None:
        factor = self._factor(factor_id)
        lin = linearize(factor.model, np.asarray(x0, float))
        factor.gaussian = lin.gaussian
        factor.linearization_point = lin.linearization_point
        factor.jac = lin.jac
        factor.offset = lin.offset
        self._values_version += 1

    def refresh_factor(self, factor_id) -> bool:
        """Just-in-time relinearization (and robust rescale) of one factor.

        Returns True when the factor was rebuilt.  Affine non-robust factors
        never need it; factors whose neighbors still have singular beliefs
        are left alone.
        """
        factor = self._factor(factor_id)
        model = factor.model
        if model.affine and model.robust is None:
            return False
        means = []
        drift = 0.0
        linpoint = factor.linearization_point
        for vid, sl in zip(factor.neighbors, factor.slices):
            mean = self.belief_mean(vid)
            if mean is None:
                return False
            if mean.shape[0] == 1:
                step = abs(mean[0] - linpoint[sl.start])
            else:
                step = float(np.abs(mean - linpoint[sl]).max(initial=0.0))
            if step > drift:
                drift = step
            means.append(mean)
        if drift <= self.relin_threshold:
            return False
        x_cur = np.concatenate(means)
        if factor._base is not None:
            # Affine robust: only the covariance scale changes with the
            # residual; reuse the cached unscaled Gaussian.
            r = model.residual(x_cur)
            if r.shape[0] == 1:
                m = abs(r[0]) / math.sqrt(model.noise_cov[0, 0])
            else:
                m = mahalanobis(r, model.noise_cov)
            t = model.robust.t
            scale = 1.0 if m < t else (2.0 * t * m - t * t) / (m * m)
            factor.gaussian = GaussianCanonical._make(factor._base.eta * scale,
                                                      factor._base.lam * scale)
            factor.linearization_point = x_cur
            self._values_version += 1
            return True
        self.relinearize_factor(factor_id, x_cur)
        return True

    def refresh_all_factors(self) -> int:
        return sum(self.refresh_factor(fid) for fid in self.factors)

    # -- topology -------------------------------------------------------------

    def variable_ball(self, center_id, radius: int) -> set:
        """Variables within ``radius`` hops of the center (one factor = one hop)."""
        self._variable(center_id)
        ball = {center_id}
        frontier = [center_id]
        for _ in range(radius):
            nxt = []
            for vid in frontier:
                for fid in self.variables[vid].factors:
                    for uid in self.factors[fid].neighbors:
                        if uid not in ball:
                            ball.add(uid)
                            nxt.append(uid)
            if not nxt:
                break
            frontier = nxt
        return ball

    def validate(self) -> None:
        """Check the structural invariants; raises InvalidSpec on violation."""
        for fid, factor in self.factors.items():
            if fid in self.variables:
                raise InvalidSpec(f"id {fid!r} used for both a factor and a variable")
            span = 0
            for vid in factor.neighbors:
                if vid not in self.variables:
                    raise InvalidSpec(f"factor {fid!r} touches unknown variable {vid!r}")
                span += self.variables[vid].dim
            if span != factor.gaussian.dim:
                raise InvalidSpec(f"factor {fid!r} gaussian dim mismatch")
            asym = np.abs(factor.gaussian.lam - factor.gaussian.lam.T).max(initial=0.0)
            if asym > 1e-12:
                raise InvalidSpec(f"factor {fid!r} precision asymmetric by {asym}")
        self._ensure_messages()
        for (fid, vid) in self._msgs_f2v:
            if fid not in self.factors or vid not in self.variables:
                raise InvalidSpec(f"dangling message on edge {(fid, vid)!r}")



# ---------------------------------------------------------------------------
# Graph JSON format (shared with the CLI and the session service).
# ---------------------------------------------------------------------------


def graph_to_json(graph: FactorGraph) -> dict:
    """Serializable dict in the shared graph format.

    ``initial`` is an extension field carrying nonlinear initialization;
    it is emitted only when a variable has one.
    """
    variables = []
    for vid, var in graph.variables.items():
        entry = {"id": vid, "dim": var.dim}
        if var.prior is not None:
            entry["prior"] = {"eta": var.prior.eta.tolist(),
                              "lambda": var.prior.lam.tolist()}
        if var.initial is not None:
            entry["initial"] = var.initial.tolist()
        variables.append(entry)
    factors = []
    for fid, factor in graph.factors.items():
        if factor.model.kind == "custom":
            raise InvalidSpec(f"factor {fid!r} has no JSON form (custom model)")
        entry = {"id": fid, "type": factor.model.kind, "neighbors": list(factor.neighbors)}
        entry.update(factor.model.params)
        factors.append(entry)
    return {"variables": variables, "factors": factors}


def graph_from_json(doc: dict, damping: float = DEFAULT_DAMPING) -> FactorGraph:
    """Rebuild a graph from the shared JSON format."""
    if "variables" not in doc or "factors" not in doc:
        raise InvalidSpec("graph JSON needs 'variables' and 'factors'")
    graph = FactorGraph(damping=damping)
    for entry in doc["variables"]:
        prior = None
        if entry.get("prior") is not None:
            prior = GaussianCanonical(entry["prior"]["eta"], entry["prior"]["lambda"])
        graph.add_variable(entry["id"], int(entry["dim"]), prior,
                           initial=entry.get("initial"))
    for entry in doc["factors"]:
        params = {k: v for k, v in entry.items() if k not in ("id", "type", "neighbors")}
        model = model_from_params(entry["type"], params)
        graph.add_factor(entry["id"], list(entry["neighbors"]), model)
    return graph


def save_graph(graph: FactorGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_json(graph), fh)
        fh.write("\n")


def load_graph(path, damping: float = DEFAULT_DAMPING) -> FactorGraph:
    with open(path) as fh:
        return graph_from_json(json.load(fh), damping=damping)
