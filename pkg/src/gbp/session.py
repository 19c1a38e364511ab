"""Stateful session endpoint for the interactive playground.

A session wraps one factor graph plus a schedule policy.  Commands arrive as
JSON documents ({v:1, op, args, request_id}) and each produces exactly one
event ({v:1, request_id, status, state_delta, ...}); errors come back as
error events, never dropped connections.  state_delta carries only the
variables whose belief changed since the session's previous event, which
makes the locality of message passing directly visible to a client.

The minimal transport binding is newline-delimited JSON over a local TCP
socket (``serve``); any framing that preserves document boundaries works,
and the in-process ``SessionHub`` speaks dicts directly for tests and
replay tooling.
"""

from __future__ import annotations

import json
import math
import socketserver
import threading

import numpy as np

from . import problems, schedules
from .errors import GbpError, InvalidOp, UnknownSession
from .factor_graph import DEFAULT_DAMPING, FactorGraph, TREE_DAMPING
from .factors import model_from_params, relpos2d
from .gaussian import GaussianCanonical, SingularPrecision, to_moments

PROTOCOL_VERSION = 1


def _preset_chain(seed=0, **_ignored):
    graph = FactorGraph(damping=TREE_DAMPING)
    anchor = np.eye(2) * 1e4
    for i in range(5):
        prior = GaussianCanonical(anchor @ np.zeros(2), anchor) if i == 0 else None
        graph.add_variable(i, 2, prior, initial=[float(i), 0.0])
    for i in range(4):
        graph.add_factor(f"rel{i}", [i, i + 1], relpos2d(1.0, 0.0, 0.1))
    return graph


def _preset_loop(seed=0, **_ignored):
    graph = FactorGraph(damping=DEFAULT_DAMPING)
    n = 6
    pts = [(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)) for k in range(n)]
    anchor = np.eye(2) * 1e4
    for i, (x, y) in enumerate(pts):
        prior = GaussianCanonical(anchor @ np.array(pts[0]), anchor) if i == 0 else None
        graph.add_variable(i, 2, prior, initial=[x, y])
    for i in range(n):
        j = (i + 1) % n
        dx = pts[j][0] - pts[i][0]
        dy = pts[j][1] - pts[i][1]
        graph.add_factor(f"rel{i}", [i, j], relpos2d(dx, dy, 0.1))
    return graph


def _preset_grid(seed=0, **_ignored):
    graph = FactorGraph(damping=DEFAULT_DAMPING)
    side = 4
    anchor = np.eye(2) * 1e4
    for r in range(side):
        for c in range(side):
            i = r * side + c
            prior = GaussianCanonical(anchor @ np.zeros(2), anchor) if i == 0 else None
            graph.add_variable(i, 2, prior, initial=[float(c), float(r)])
    for r in range(side):
        for c in range(side):
            i = r * side + c
            if c + 1 < side:
                graph.add_factor(f"h{r}_{c}", [i, i + 1], relpos2d(1.0, 0.0, 0.1))
            if r + 1 < side:
                graph.add_factor(f"v{r}_{c}", [i, i + side], relpos2d(0.0, 1.0, 0.1))
    return graph


def _preset_linefit(name):
    def build(seed=0, loss="huber", huber_t=None):
        if loss == "squared":
            t = None
        else:
            t = huber_t if huber_t is not None else (1.0 if name == "outlier" else 0.2)
        spec = problems.line_fit_preset(name, huber_t=t, seed=seed)
        return problems.build_line_fit(spec)
    return build


def _preset_pose_sim(seed=0, **_ignored):
    spec = problems.default_pose_sim(12, 4, seed=seed)
    graph, _ = problems.simulate_poses(spec)
    return graph


PRESETS = {
    "chain": _preset_chain,
    "loop": _preset_loop,
    "grid": _preset_grid,
    "linefit_outlier": _preset_linefit("outlier"),
    "linefit_step": _preset_linefit("step"),
    "pose_sim": _preset_pose_sim,
}


class Session:
    """One graph, one policy, and the belief snapshot behind state_delta."""

    def __init__(self, session_id):
        self.id = session_id
        self.graph = FactorGraph(damping=DEFAULT_DAMPING)
        self.policy = schedules.SchedulePolicy("synchronous")
        self.preset = None  # (name, seed) restored by reset
        self._snapshot = {}

    def belief_payload(self, vid):
        belief = self.graph.belief(vid)
        try:
            moments = to_moments(belief)
        except SingularPrecision:
            return {"mean": None, "cov": None}
        return {"mean": moments.mean.tolist(), "cov": moments.cov.tolist()}

    def collect_delta(self, force=()) -> dict:
        """Beliefs that changed since the previous event, and refresh the snapshot.

        ``force`` ids are included even when numerically unchanged (the
        clicked node of a node_send always reports its belief).
        """
        delta = {}
        snapshot = {}
        forced = {str(vid) for vid in force}
        for vid in self.graph.variables:
            belief = self.graph.belief(vid)
            key = (belief.eta.tobytes(), belief.lam.tobytes())
            snapshot[vid] = key
            if self._snapshot.get(vid) != key or str(vid) in forced:
                delta[str(vid)] = self.belief_payload(vid)
        self._snapshot = snapshot
        return delta


class SessionHub:
    """All live sessions; ``handle`` maps one command dict to one event dict."""

    def __init__(self):
        self.sessions = {}
        self._counter = 0
        self._lock = threading.Lock()

    def handle(self, cmd: dict) -> dict:
        request_id = cmd.get("request_id")
        with self._lock:
            try:
                return self._dispatch(cmd, request_id)
            except GbpError as exc:
                return _event(request_id, status="error",
                              error={"code": type(exc).__name__, "message": str(exc)})
            except (KeyError, TypeError, ValueError) as exc:
                return _event(request_id, status="error",
                              error={"code": "InvalidOp", "message": repr(exc)})

    def handle_json(self, line: str) -> str:
        try:
            cmd = json.loads(line)
        except json.JSONDecodeError as exc:
            return encode_event(_event(None, status="error",
                                       error={"code": "InvalidOp",
                                              "message": f"bad JSON: {exc}"}))
        if not isinstance(cmd, dict) or cmd.get("v") != PROTOCOL_VERSION:
            return encode_event(_event(
                cmd.get("request_id") if isinstance(cmd, dict) else None,
                status="error",
                error={"code": "InvalidOp", "message": "expected {v:1, op, ...}"}))
        return encode_event(self.handle(cmd))

    # -- dispatch -------------------------------------------------------------

    def _dispatch(self, cmd: dict, request_id) -> dict:
        op = cmd.get("op")
        args = cmd.get("args") or {}
        if op == "create_session":
            self._counter += 1
            sid = f"s{self._counter}"
            self.sessions[sid] = Session(sid)
            return _event(request_id, session=sid)
        session = self.sessions.get(args.get("session"))
        if session is None:
            raise UnknownSession(f"unknown session {args.get('session')!r}")
        handler = getattr(self, f"_op_{op}", None)
        if handler is None:
            raise InvalidOp(f"unknown op {op!r}")
        return handler(session, args, request_id)

    def _finish(self, session, request_id, messages_sent=0, delta=None, force=(),
                **extra):
        graph = session.graph
        state_delta = session.collect_delta(force)
        energy = graph.total_energy() if graph.variables else 0.0
        if not math.isfinite(energy):
            energy = None
        return _event(request_id, state_delta=state_delta, messages_sent=messages_sent,
                      delta=delta, total_energy=energy, **extra)

    def _op_load_preset(self, session, args, request_id):
        name = args["name"]
        if name not in PRESETS:
            raise InvalidOp(f"unknown preset {name!r}; have {sorted(PRESETS)}")
        kwargs = {"seed": int(args.get("seed", 0))}
        if args.get("loss") is not None:
            kwargs["loss"] = args["loss"]
        if args.get("huber_t") is not None:
            kwargs["huber_t"] = float(args["huber_t"])
        session.graph = PRESETS[name](**kwargs)
        session.preset = (name, dict(kwargs))
        session._snapshot = {}
        return self._finish(session, request_id)

    def _op_reset(self, session, args, request_id):
        if session.preset is not None:
            name, kwargs = session.preset
            session.graph = PRESETS[name](**kwargs)
        else:
            session.graph = FactorGraph(damping=DEFAULT_DAMPING)
        session._snapshot = {}
        return self._finish(session, request_id)

    def _op_add_variable(self, session, args, request_id):
        prior = None
        if args.get("prior") is not None:
            prior = GaussianCanonical(args["prior"]["eta"], args["prior"]["lambda"])
        session.graph.add_variable(args["id"], int(args["dim"]), prior,
                                   initial=args.get("initial"))
        return self._finish(session, request_id)

    def _op_add_factor(self, session, args, request_id):
        params = {k: v for k, v in args.items()
                  if k not in ("session", "id", "type", "neighbors")}
        model = model_from_params(args["type"], params)
        session.graph.add_factor(args["id"], list(args["neighbors"]), model)
        return self._finish(session, request_id)

    def _op_remove_node(self, session, args, request_id):
        session.graph.remove_node(args["id"])
        return self._finish(session, request_id)

    def _op_set_prior(self, session, args, request_id):
        prior = None
        if args.get("eta") is not None:
            prior = GaussianCanonical(args["eta"], args["lambda"])
        session.graph.set_prior(args["id"], prior)
        return self._finish(session, request_id)

    def _op_node_send(self, session, args, request_id):
        report = schedules.node_send(session.graph, args["id"])
        return self._finish(session, request_id, messages_sent=report.messages_sent,
                            delta=report.convergence_delta, force=(args["id"],))

    def _op_step(self, session, args, request_id):
        report = schedules.step(session.graph, session.policy)
        return self._finish(session, request_id, messages_sent=report.messages_sent,
                            delta=report.convergence_delta)

    def _op_set_policy(self, session, args, request_id):
        session.policy = schedules.SchedulePolicy.from_json(args["policy"])
        return self._finish(session, request_id)

    def _op_set_damping(self, session, args, request_id):
        beta = float(args["beta"])
        if not 0.0 < beta <= 1.0:
            raise InvalidOp(f"damping must lie in (0, 1], got {beta}")
        session.graph.damping = beta
        return self._finish(session, request_id)

    def _op_get_state(self, session, args, request_id):
        graph = session.graph
        state = {
            "variables": {str(vid): dict(
                dim=graph.variables[vid].dim,
                initial=(None if graph.variables[vid].initial is None
                         else graph.variables[vid].initial.tolist()),
                **session.belief_payload(vid)) for vid in graph.variables},
            "factors": [{"id": fid, "type": graph.factors[fid].model.kind,
                         "neighbors": list(graph.factors[fid].neighbors)}
                        for fid in graph.factors],
            "damping": graph.damping,
            "policy": session.policy.to_json(),
        }
        return self._finish(session, request_id, state=state)


def _event(request_id, status="ok", state_delta=None, messages_sent=0, delta=None,
           total_energy=None, **extra) -> dict:
    event = {
        "v": PROTOCOL_VERSION,
        "request_id": request_id,
        "status": status,
        "state_delta": state_delta if state_delta is not None else {},
        "messages_sent": messages_sent,
        "delta": delta if delta is not None and math.isfinite(delta) else None,
        "total_energy": total_energy,
    }
    event.update(extra)
    return event


def encode_event(event: dict) -> str:
    return json.dumps(event, separators=(",", ":"), allow_nan=False)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            response = self.server.hub.handle_json(line)
            self.wfile.write(response.encode("utf-8") + b"\n")
            self.wfile.flush()


class SessionServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, hub: SessionHub | None = None):
        super().__init__(address, _Handler)
        self.hub = hub if hub is not None else SessionHub()


def serve(host: str = "127.0.0.1", port: int = 8733) -> None:
    """Run the newline-delimited JSON session service until interrupted."""
    server = SessionServer((host, port))
    print(f"session service listening on {host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
