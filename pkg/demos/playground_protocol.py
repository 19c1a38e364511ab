"""Drive the interactive session protocol end to end over a local socket.

Starts the newline-delimited JSON service in-process, builds a tiny pose
graph by hand, clicks a node, runs a schedule, and prints each event.  This
is exactly the wire traffic the browser playground produces.
"""

import json
import socket
import threading

from gbp.session import SessionServer

server = SessionServer(("127.0.0.1", 0))
threading.Thread(target=server.serve_forever, daemon=True).start()
print("service on", server.server_address)

conn = socket.create_connection(server.server_address)
fh = conn.makefile("rwb")
counter = 0


def send(op, **args):
    global counter
    counter += 1
    frame = {"v": 1, "op": op, "args": args, "request_id": f"demo{counter}"}
    fh.write(json.dumps(frame).encode() + b"\n")
    fh.flush()
    event = json.loads(fh.readline())
    changed = sorted(event.get("state_delta", {}))
    print(f"-> {op:13s} status={event['status']} delta={event['delta']} "
          f"changed={changed}")
    return event


sid = send("create_session")["session"]
send("add_variable", session=sid, id="a", dim=2,
     prior={"eta": [0.0, 0.0], "lambda": [[1e4, 0.0], [0.0, 1e4]]})
send("add_variable", session=sid, id="b", dim=2)
send("add_variable", session=sid, id="c", dim=2)
send("add_factor", session=sid, id="ab", type="relpos2d", neighbors=["a", "b"],
     dx=1.0, dy=0.0, sigma=0.1)
send("add_factor", session=sid, id="bc", type="relpos2d", neighbors=["b", "c"],
     dx=0.0, dy=1.0, sigma=0.1)

# One click on the anchored node ripples one factor hop outward.
send("node_send", session=sid, id="a")
# A sweep finishes the chain.
send("set_policy", session=sid, policy={"kind": "sweep"})
send("step", session=sid)

state = send("get_state", session=sid)["state"]
for vid, belief in state["variables"].items():
    mean = belief["mean"]
    print(f"   {vid}: mean {None if mean is None else [round(v, 3) for v in mean]}")

conn.close()
server.shutdown()
server.server_close()
