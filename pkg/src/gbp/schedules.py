"""Message-passing schedules.

A schedule decides which messages fire and in what order; the fixed points
do not depend on it, only the route taken.  ``step`` executes one unit of a
policy (a full round for synchronous/sweep/random/attention, a single
broadcast or send for round-robin/residual), and ``run`` loops steps in
policy-sized batches until the belief means stop moving.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from . import _scalar_kernel
from .errors import EmptyGraph, InvalidSpec, UnknownNode
from .factor_graph import FactorGraph

KINDS = ("synchronous", "random", "sweep", "round_robin", "residual", "attention")


@dataclass(frozen=True)
class SendEvent:
    """One message send (or node broadcast) in a schedule's event stream."""

    kind: str  # factor_to_variable | variable_to_factor | node_broadcast
    from_id: object
    to_id: object = None


class SchedulePolicy:
    """Configuration plus run state for one schedule.

    A fixed seed makes the whole event stream deterministic; reuse a fresh
    policy instance per run to replay it.
    """

    def __init__(self, kind: str, seed: int = 0, order=None, focus=None):
        kind = kind.replace("-", "_")
        if kind not in KINDS:
            raise InvalidSpec(f"unknown schedule kind {kind!r}")
        if kind == "attention" and focus is None:
            raise InvalidSpec("attention schedule needs a focus {id, radius}")
        self.kind = kind
        self.seed = int(seed)
        self.order = list(order) if order is not None else None
        self.focus = focus  # (variable id, radius)
        self._rng = None
        self._cursor = 0
        self._residuals = None  # edge -> residual
        self._heap = None

    @classmethod
    def from_json(cls, doc: dict) -> "SchedulePolicy":
        focus = None
        if doc.get("focus") is not None:
            focus = (doc["focus"]["id"], int(doc["focus"]["radius"]))
        return cls(doc["kind"], seed=doc.get("seed", 0), order=doc.get("order"),
                   focus=focus)

    def to_json(self) -> dict:
        doc = {"kind": self.kind, "seed": self.seed}
        if self.order is not None:
            doc["order"] = list(self.order)
        if self.focus is not None:
            doc["focus"] = {"id": self.focus[0], "radius": self.focus[1]}
        return doc

    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.default_rng(self.seed)
        return self._rng


@dataclass
class StepReport:
    messages_sent: int
    convergence_delta: float
    events: list = field(default_factory=list)


def node_send(graph: FactorGraph, var_id) -> StepReport:
    """The playground's click primitive: one ripple outwards from a variable.

    The variable refreshes its belief from its inbox, sends to every
    adjacent factor, and each of those factors immediately sends to all its
    *other* neighbors.  A unary factor has no other neighbor, so it fires
    back at the clicked variable instead; its message is a constant, so no
    self-echo is possible, and anchors stay reachable from clicks alone.
    """
    if var_id not in graph.variables:
        raise UnknownNode(f"no variable {var_id!r}")
    events = [SendEvent("node_broadcast", var_id)]
    graph.update_belief(var_id)
    sent = 0
    for fid in graph.variables[var_id].factors:
        graph.variable_to_factor(var_id, fid)
        events.append(SendEvent("variable_to_factor", var_id, fid))
        sent += 1
    for fid in list(graph.variables[var_id].factors):
        graph.refresh_factor(fid)
        factor = graph.factors[fid]
        targets = [u for u in factor.neighbors if u != var_id] or [var_id]
        for uid in targets:
            graph.factor_to_variable(fid, uid)
            events.append(SendEvent("factor_to_variable", fid, uid))
            sent += 1
    return StepReport(sent, graph.convergence_delta(), events)


def node_receive(graph: FactorGraph, var_id) -> tuple:
    """Pull fresh messages into one variable from all its adjacent factors.

    Each factor first refreshes the variable-to-factor messages of its other
    neighbors, then fires at ``var_id``.  This is the building block of the
    sweep schedule: a leaves-first pass and its reverse reproduce the classic
    forward-backward sweep, unary factors included.
    """
    if var_id not in graph.variables:
        raise UnknownNode(f"no variable {var_id!r}")
    events = []
    sent = 0
    for fid in graph.variables[var_id].factors:
        graph.refresh_factor(fid)
        for uid in graph.factors[fid].neighbors:
            if uid == var_id:
                continue
            graph.variable_to_factor(uid, fid)
            events.append(SendEvent("variable_to_factor", uid, fid))
            sent += 1
        graph.factor_to_variable(fid, var_id)
        events.append(SendEvent("factor_to_variable", fid, var_id))
        sent += 1
    return sent, events


def residual_queue_top(graph: FactorGraph, k: int) -> list:
    """The k directed factor-to-variable edges with the largest residuals.

    Residuals are recomputed from scratch; ties break lexicographically on
    (factor id, variable id).
    """
    scored = [((fid, vid), graph.residual_of(fid, vid))
              for fid, vid in graph.directed_f2v_edges()]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return [(edge, res) for edge, res in scored[:k]]


def step(graph: FactorGraph, policy: SchedulePolicy) -> StepReport:
    """Execute one unit of the policy and report messages sent and belief delta."""
    if not graph.variables:
        raise EmptyGraph("cannot step an empty graph")
    graph.snapshot_beliefs()
    runner = _RUNNERS[policy.kind]
    sent, events = runner(graph, policy)
    return StepReport(sent, graph.convergence_delta(), events)


def _step_synchronous(graph: FactorGraph, policy, restrict=None):
    """Two-phase round: every variable sends, then every factor sends.

    Phase one reads only the stored factor-to-variable messages, phase two
    reads only phase one's output, so iteration order inside a phase cannot
    change any result.  All-scalar affine graphs (grids, chains) run through
    a vectorized kernel that performs the identical round in array form.
    """
    if restrict is None:
        kernel = _scalar_kernel.get_kernel(graph)
        if kernel is not None:
            return kernel.step(), []
    events = []
    sent = 0
    if restrict is None:
        factor_ids = list(graph.factors)
        var_ids = graph.variables
    else:
        factor_ids = [fid for fid, f in graph.factors.items()
                      if any(vid in restrict for vid in f.neighbors)]
        var_ids = [vid for vid in graph.variables if vid in restrict]
    for fid in factor_ids:
        graph.refresh_factor(fid)
    for vid in var_ids:
        for fid in graph.variables[vid].factors:
            graph.variable_to_factor(vid, fid)
            events.append(SendEvent("variable_to_factor", vid, fid))
            sent += 1
    for fid in factor_ids:
        for vid in graph.factors[fid].neighbors:
            graph.factor_to_variable(fid, vid)
            events.append(SendEvent("factor_to_variable", fid, vid))
            sent += 1
    return sent, events


def _step_random(graph: FactorGraph, policy):
    """N single sends at uniformly random directed edges (N = edge count).

    Before each send the other neighbors' variable-to-factor messages are
    refreshed so the sampled message reflects current inboxes.
    """
    edges = graph.directed_f2v_edges()
    rng = policy.rng()
    events = []
    sent = 0
    for _ in range(len(edges)):
        fid, vid = edges[int(rng.integers(len(edges)))]
        graph.refresh_factor(fid)
        for uid in graph.factors[fid].neighbors:
            if uid == vid:
                continue
            graph.variable_to_factor(uid, fid)
            events.append(SendEvent("variable_to_factor", uid, fid))
            sent += 1
        graph.factor_to_variable(fid, vid)
        events.append(SendEvent("factor_to_variable", fid, vid))
        sent += 1
    return sent, events


def _step_sweep(graph: FactorGraph, policy):
    """One receive pass along ``order``, then the reverse pass.

    With an order that visits children before parents (e.g. reversed BFS
    from a root) this solves a tree exactly in a single step: the first pass
    settles all leafward messages, the reverse pass all rootward ones.
    """
    order = policy.order if policy.order is not None else list(graph.variables)
    events = []
    sent = 0
    for vid in list(order) + list(reversed(order)):
        n, ev = node_receive(graph, vid)
        events.extend(ev)
        sent += n
    return sent, events


def _step_round_robin(graph: FactorGraph, policy):
    """The next node in cyclic order broadcasts."""
    order = policy.order if policy.order is not None else list(graph.variables)
    vid = order[policy._cursor % len(order)]
    policy._cursor += 1
    report = node_send(graph, vid)
    return report.messages_sent, report.events


def _residual_refresh(graph: FactorGraph, policy, edges):
    for edge in edges:
        res = graph.residual_of(*edge)
        policy._residuals[edge] = res
        heapq.heappush(policy._heap, (-res, _edge_key(edge), edge))


def _edge_key(edge):
    fid, vid = edge
    return (str(type(fid).__name__), fid, str(type(vid).__name__), vid)


def _step_residual(graph: FactorGraph, policy):
    """Pop and send the highest-residual factor-to-variable message.

    After the send, the receiving variable's outgoing messages are
    refreshed and only the residuals of edges that could have changed are
    recomputed (the lazy bookkeeping of residual BP).
    """
    if policy._residuals is None:
        policy._residuals = {}
        policy._heap = []
        _residual_refresh(graph, policy, graph.directed_f2v_edges())
    edge = None
    while policy._heap:
        neg_res, _, cand = heapq.heappop(policy._heap)
        if policy._residuals.get(cand) != -neg_res:
            continue  # stale heap entry
        fid, vid = cand
        if fid not in graph.factors or vid not in graph.factors[fid].neighbors:
            del policy._residuals[cand]  # edge edited away mid-run
            continue
        edge = cand
        break
    if edge is None:
        return 0, []
    fid, vid = edge
    events = []
    if graph.refresh_factor(fid):
        # Relinearization changed all of this factor's candidates.
        _residual_refresh(graph, policy, [(fid, u) for u in graph.factors[fid].neighbors
                                          if (fid, u) != edge])
    graph.factor_to_variable(fid, vid)
    events.append(SendEvent("factor_to_variable", fid, vid))
    sent = 1
    policy._residuals[edge] = graph.residual_of(fid, vid)
    heapq.heappush(policy._heap, (-policy._residuals[edge], _edge_key(edge), edge))
    dirty = []
    for nfid in graph.variables[vid].factors:
        graph.variable_to_factor(vid, nfid)
        events.append(SendEvent("variable_to_factor", vid, nfid))
        sent += 1
        dirty.extend((nfid, uid) for uid in graph.factors[nfid].neighbors if uid != vid)
    _residual_refresh(graph, policy, dirty)
    return sent, events


def _step_attention(graph: FactorGraph, policy):
    """Synchronous round restricted to the k-hop ball around the focus node.

    Only factors touching the ball fire, so nothing beyond the (k+1)-hop
    ball can change.
    """
    focus_id, radius = policy.focus
    ball = graph.variable_ball(focus_id, radius)
    return _step_synchronous(graph, policy, restrict=ball)


_RUNNERS = {
    "synchronous": _step_synchronous,
    "random": _step_random,
    "sweep": _step_sweep,
    "round_robin": _step_round_robin,
    "residual": _step_residual,
    "attention": _step_attention,
}


def batch_size(graph: FactorGraph, policy: SchedulePolicy) -> int:
    """Steps per convergence check: single-send policies need a full cycle."""
    if policy.kind == "round_robin":
        return max(1, len(policy.order or graph.variables))
    if policy.kind == "residual":
        return max(1, len(graph.directed_f2v_edges()))
    return 1


@dataclass
class IterationRecord:
    iteration: int
    messages_sent: int
    delta: float
    energy: float


def run(graph: FactorGraph, policy: SchedulePolicy, max_iters: int = 200,
        tol: float = 1e-8, on_iteration=None, with_energy: bool | None = None):
    """Step the policy until the batch delta drops below ``tol``.

    One iteration is one policy batch (a full cycle for round-robin and
    residual schedules).  Returns (converged, records).  The per-iteration
    energy is evaluated only when a callback is given or ``with_energy`` is
    set; it costs a full pass over the factors.
    """
    records = []
    converged = False
    energetic = with_energy if with_energy is not None else on_iteration is not None
    for iteration in range(1, max_iters + 1):
        prev = {vid: graph.belief_mean(vid) for vid in graph.variables}
        sent = 0
        for _ in range(batch_size(graph, policy)):
            sent += step(graph, policy).messages_sent
        delta = graph.convergence_delta(prev)
        energy = graph.total_energy() if energetic else float("nan")
        record = IterationRecord(iteration, sent, delta, energy)
        records.append(record)
        if on_iteration is not None:
            on_iteration(record)
        # A variable that just became informative reports delta 0 (it had no
        # mean to move); that must not count as convergence.
        newly_informed = any(prev.get(vid) is None and graph.belief_mean(vid) is not None
                             for vid in graph.variables)
        if delta < tol and not newly_informed:
            converged = True
            break
    return converged, records
