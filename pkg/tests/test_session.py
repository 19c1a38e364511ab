import json
import socket
import threading

import pytest

from gbp.session import PRESETS, SessionHub, SessionServer, encode_event


def cmd(op, request_id, **args):
    return {"v": 1, "op": op, "args": args, "request_id": request_id}


def new_session(hub):
    event = hub.handle(cmd("create_session", "r0"))
    assert event["status"] == "ok"
    return event["session"]


class TestLifecycle:
    def test_create_session(self):
        hub = SessionHub()
        event = hub.handle(cmd("create_session", "boot"))
        assert event["status"] == "ok"
        assert event["request_id"] == "boot"
        assert event["state_delta"] == {}

    def test_unknown_session_is_error_event(self):
        hub = SessionHub()
        event = hub.handle(cmd("node_send", "r", session="nope", id=0))
        assert event["status"] == "error"
        assert event["error"]["code"] == "UnknownSession"

    def test_unknown_op(self):
        hub = SessionHub()
        sid = new_session(hub)
        event = hub.handle(cmd("explode", "r", session=sid))
        assert event["status"] == "error"
        assert event["error"]["code"] == "InvalidOp"

    def test_all_presets_load(self):
        hub = SessionHub()
        sid = new_session(hub)
        for name in PRESETS:
            event = hub.handle(cmd("load_preset", f"load-{name}", session=sid,
                                   name=name))
            assert event["status"] == "ok", name


class TestChainSweep:
    def test_chain_solved_in_one_sweep_event(self):
        hub = SessionHub()
        sid = new_session(hub)
        hub.handle(cmd("load_preset", "r1", session=sid, name="chain"))
        hub.handle(cmd("set_policy", "r2", session=sid,
                       policy={"kind": "sweep"}))
        event = hub.handle(cmd("step", "r3", session=sid))
        assert event["status"] == "ok"
        assert event["delta"] == pytest.approx(0.0, abs=1e-12)
        # A second sweep changes nothing.
        event = hub.handle(cmd("step", "r4", session=sid))
        assert event["delta"] == pytest.approx(0.0, abs=1e-12)
        assert event["state_delta"] == {}


class TestLocality:
    def test_node_send_on_isolated_anchored_node(self):
        hub = SessionHub()
        sid = new_session(hub)
        hub.handle(cmd("add_variable", "r1", session=sid, id="x", dim=1,
                       prior={"eta": [2.0], "lambda": [[1.0]]}))
        hub.handle(cmd("get_state", "r2", session=sid))  # settles the snapshot
        event = hub.handle(cmd("node_send", "r3", session=sid, id="x"))
        assert set(event["state_delta"]) == {"x"}

    def test_delta_contains_only_changed_nodes(self):
        hub = SessionHub()
        sid = new_session(hub)
        hub.handle(cmd("load_preset", "r1", session=sid, name="chain"))
        first = hub.handle(cmd("node_send", "r2", session=sid, id=0))
        # Clicking node 0 informs its belief and its direct neighbor's only.
        assert set(first["state_delta"]) <= {"0", "1"}

    def test_state_delta_matches_get_state(self):
        hub = SessionHub()
        sid = new_session(hub)
        hub.handle(cmd("load_preset", "r1", session=sid, name="loop"))
        event = hub.handle(cmd("step", "r2", session=sid))
        state = hub.handle(cmd("get_state", "r3", session=sid))["state"]
        for vid, belief in event["state_delta"].items():
            assert state["variables"][vid]["mean"] == belief["mean"]
            assert state["variables"][vid]["cov"] == belief["cov"]


class TestEditing:
    def test_add_nodes_and_factor(self):
        hub = SessionHub()
        sid = new_session(hub)
        hub.handle(cmd("add_variable", "r1", session=sid, id=0, dim=2,
                       prior={"eta": [0.0, 0.0], "lambda": [[100.0, 0.0], [0.0, 100.0]]}))
        hub.handle(cmd("add_variable", "r2", session=sid, id=1, dim=2))
        event = hub.handle(cmd("add_factor", "r3", session=sid, id="rel",
                               type="relpos2d", neighbors=[0, 1],
                               dx=1.0, dy=0.5, sigma=0.2))
        assert event["status"] == "ok"
        state = hub.handle(cmd("get_state", "r4", session=sid))["state"]
        assert len(state["variables"]) == 2
        assert len(state["factors"]) == 1

    def test_remove_factor_changes_neighbor_beliefs(self):
        hub = SessionHub()
        sid = new_session(hub)
        hub.handle(cmd("load_preset", "r1", session=sid, name="chain"))
        hub.handle(cmd("set_policy", "r2", session=sid, policy={"kind": "sweep"}))
        hub.handle(cmd("step", "r3", session=sid))
        event = hub.handle(cmd("remove_node", "r4", session=sid, id="rel3"))
        assert event["status"] == "ok"
        assert "4" in event["state_delta"]
        assert event["state_delta"]["4"]["mean"] is None  # back to uninformed

    def test_reset_restores_preset(self):
        hub = SessionHub()
        sid = new_session(hub)
        hub.handle(cmd("load_preset", "r1", session=sid, name="chain"))
        hub.handle(cmd("remove_node", "r2", session=sid, id=4))
        event = hub.handle(cmd("reset", "r3", session=sid))
        assert event["status"] == "ok"
        state = hub.handle(cmd("get_state", "r4", session=sid))["state"]
        assert len(state["variables"]) == 5

    def test_set_damping_validation(self):
        hub = SessionHub()
        sid = new_session(hub)
        assert hub.handle(cmd("set_damping", "r1", session=sid,
                              beta=0.5))["status"] == "ok"
        assert hub.handle(cmd("set_damping", "r2", session=sid,
                              beta=0.0))["status"] == "error"


class TestIsolation:
    def test_sessions_do_not_interact(self):
        hub = SessionHub()
        a = new_session(hub)
        b = new_session(hub)
        hub.handle(cmd("load_preset", "r1", session=a, name="chain"))
        hub.handle(cmd("load_preset", "r2", session=b, name="loop"))
        hub.handle(cmd("step", "r3", session=a))
        state_b = hub.handle(cmd("get_state", "r4", session=b))["state"]
        assert all(v["mean"] is None for vid, v in state_b["variables"].items()
                   if vid != "0")


class TestReplayDeterminism:
    LOG = [
        cmd("create_session", "c0"),
        cmd("load_preset", "c1", session="s1", name="pose_sim", seed=3),
        cmd("set_policy", "c2", session="s1",
            policy={"kind": "random", "seed": 11}),
        cmd("step", "c3", session="s1"),
        cmd("step", "c4", session="s1"),
        cmd("node_send", "c5", session="s1", id="p0"),
        cmd("set_damping", "c6", session="s1", beta=0.6),
        cmd("step", "c7", session="s1"),
        cmd("get_state", "c8", session="s1"),
    ]

    def replay(self):
        hub = SessionHub()
        return [encode_event(hub.handle(dict(c))) for c in self.LOG]

    def test_byte_identical_event_stream(self):
        assert self.replay() == self.replay()


class TestSocketTransport:
    def test_newline_delimited_round_trip(self):
        server = SessionServer(("127.0.0.1", 0))
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            with socket.create_connection(server.server_address) as conn:
                fh = conn.makefile("rwb")
                frames = [
                    {"v": 1, "op": "create_session", "args": {}, "request_id": "a"},
                    {"v": 1, "op": "load_preset",
                     "args": {"session": "s1", "name": "chain"}, "request_id": "b"},
                    {"v": 1, "op": "node_send",
                     "args": {"session": "s1", "id": 0}, "request_id": "c"},
                ]
                events = []
                for frame in frames:
                    fh.write(json.dumps(frame).encode() + b"\n")
                    fh.flush()
                    events.append(json.loads(fh.readline()))
            assert [e["request_id"] for e in events] == ["a", "b", "c"]
            assert all(e["v"] == 1 for e in events)
            assert events[2]["status"] == "ok"
        finally:
            server.shutdown()
            server.server_close()

    def test_bad_json_yields_error_event(self):
        server = SessionServer(("127.0.0.1", 0))
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            with socket.create_connection(server.server_address) as conn:
                fh = conn.makefile("rwb")
                fh.write(b"this is not json\n")
                fh.flush()
                event = json.loads(fh.readline())
            assert event["status"] == "error"
            assert event["error"]["code"] == "InvalidOp"
        finally:
            server.shutdown()
            server.server_close()
