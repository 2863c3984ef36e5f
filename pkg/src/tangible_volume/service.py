"""Live session service: broadcasts snapshots and accepts viewer inputs as
newline-free JSON text messages over a WebSocket (one message per frame).

The simulation loop is the sole owner of session state. Client inputs go
through an ordered queue and are stamped with the time of the tick that
folds them; snapshot broadcast is coalesced (latest wins) so a slow viewer
never stalls the loop.
"""

from __future__ import annotations

import asyncio
import json

import numpy as np

from .session import PROTOCOL_VERSION, Session, StateSnapshot, state_hash
from .study import HINTS

BROADCAST_HZ = 60.0

INPUT_KINDS = ("pose", "head", "pressure", "pressures", "hint", "fov")


def _mat16(m: np.ndarray) -> list[float]:
    """Column-major flattening (what GL-style clients expect)."""
    return [float(v) for v in m.T.flatten()]


def snapshot_message(snapshot: StateSnapshot, session: Session) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "type": "snapshot",
        "tick": snapshot.tick,
        "time": snapshot.time,
        "hash": f"{state_hash(snapshot):016x}",
        "volume": {
            "position": [float(v) for v in snapshot.volume_pose.translation],
            "rotation": [float(v) for v in snapshot.volume_pose.rotation],
            "half_extent": session.volume.half_extent,
            "bezel_fraction": session.volume.bezel_fraction,
        },
        "head": [float(v) for v in snapshot.head],
        "objects": [
            {
                "id": o.id,
                "label": o.label,
                "position": [float(v) for v in o.pose.translation],
                "rotation": [float(v) for v in o.pose.rotation],
                "radius": o.radius,
            }
            for o in session.scene.objects
        ],
        "phase": snapshot.phase.value,
        "candidate": snapshot.candidate_id,
        "grasped": snapshot.grasped_id,
        "bimanual": snapshot.bimanual,
        "pressures": [float(p) for p in snapshot.pressures],
        "targets": [
            {
                "index": ts.target_index,
                "center": [float(v) for v in session.scene.targets[ts.target_index].center],
                "radius": session.scene.targets[ts.target_index].radius,
                "required_object": session.scene.targets[ts.target_index].required_object,
                "label": session.scene.targets[ts.target_index].silhouette_label,
                "appeared_at": ts.appeared_at,
                "completed_at": ts.completed_at,
            }
            for ts in snapshot.active_targets
        ],
        "hints_revealed": snapshot.hints_revealed,
        "fov": snapshot.fov_condition,
        "cameras": [
            {
                "face": cam.face_index,
                "view": _mat16(cam.view),
                "projection": _mat16(cam.projection),
            }
            for cam in snapshot.cameras
        ],
    }


def parse_input_message(text: str) -> dict:
    """Validate one client message; returns {kind, data} for Session.submit."""
    msg = json.loads(text)
    if not isinstance(msg, dict):
        raise ValueError("message must be a JSON object")
    if msg.get("v") != PROTOCOL_VERSION:
        raise ValueError(f"unsupported protocol version {msg.get('v')!r}")
    if msg.get("type") != "input":
        raise ValueError(f"unexpected message type {msg.get('type')!r}")
    kind = msg.get("kind")
    if kind not in INPUT_KINDS:
        raise ValueError(f"unknown input kind {kind!r}")
    data = {k: v for k, v in msg.items() if k not in ("v", "type", "kind")}
    return {"kind": kind, "data": data}


class SessionService:
    """Runs a session loop and serves it to WebSocket viewers."""

    def __init__(
        self,
        session: Session,
        host: str = "127.0.0.1",
        port: int = 8765,
        pace: bool = True,
        max_ticks: int | None = None,
        duration: float | None = None,
    ):
        self.session = session
        self.host = host
        self.port = port
        self.pace = pace
        self.max_ticks = max_ticks
        self.duration = duration
        self.hashes: list[int] = []
        self._clients: set = set()
        self._inputs: asyncio.Queue = asyncio.Queue()
        self._latest: dict | None = None
        self._side_queue: list[dict] = []
        self._fresh = asyncio.Event()
        self._finished = asyncio.Event()
        self.bound_port: int | None = None

    async def _handler(self, websocket):
        self._clients.add(websocket)
        try:
            if self._latest is not None:
                await websocket.send(json.dumps(self._latest))
            async for text in websocket:
                try:
                    parsed = parse_input_message(text)
                except (ValueError, KeyError) as e:
                    await websocket.send(
                        json.dumps({"v": PROTOCOL_VERSION, "type": "error", "message": str(e)})
                    )
                    continue
                await self._inputs.put(parsed)
        finally:
            self._clients.discard(websocket)

    def _drain_inputs(self) -> None:
        # Stamp queued inputs with the upcoming tick's time so the loop
        # folds them immediately; arrival order is preserved by the queue.
        from .session import InputEvent

        next_time = (self.session.tick_index + 1) * self.session.config.dt
        while not self._inputs.empty():
            parsed = self._inputs.get_nowait()
            try:
                self.session.submit(
                    InputEvent(t=next_time, kind=parsed["kind"], data=parsed["data"])
                )
            except (ValueError, KeyError):
                continue  # rejected at ingestion

    async def _loop(self):
        dt = self.session.config.dt
        while True:
            if self.max_ticks is not None and self.session.tick_index >= self.max_ticks:
                break
            if self.duration is not None and self.session.time + 1e-12 >= self.duration:
                break
            if self.session.done():
                break
            self._drain_inputs()
            snapshot = self.session.tick()
            self.hashes.append(state_hash(snapshot))
            self._latest = snapshot_message(snapshot, self.session)
            self._side_messages(snapshot)
            self._fresh.set()
            if self.pace:
                await asyncio.sleep(dt)
            else:
                await asyncio.sleep(0)  # let the network tasks breathe
        self._finished.set()
        self._fresh.set()

    def _side_messages(self, snapshot: StateSnapshot) -> None:
        for ev in snapshot.events:
            if ev.get("event") == "hint":
                self._queue_broadcast(
                    {
                        "v": PROTOCOL_VERSION,
                        "type": "hint",
                        "index": ev["index"],
                        "text": HINTS[ev["index"] - 1],
                    }
                )
            else:
                self._queue_broadcast({"v": PROTOCOL_VERSION, "type": "event", **ev})

    def _queue_broadcast(self, msg: dict) -> None:
        self._side_queue.append(msg)

    async def _broadcaster(self):
        while not (self._finished.is_set() and self._latest is None):
            await self._fresh.wait()
            self._fresh.clear()
            latest, self._latest = self._latest, None
            side, self._side_queue = self._side_queue, []
            messages = [json.dumps(m) for m in side]
            if latest is not None:
                messages.append(json.dumps(latest))
            for ws in list(self._clients):
                for m in messages:
                    try:
                        await ws.send(m)
                    except Exception:
                        self._clients.discard(ws)
                        break
            if self._finished.is_set():
                final = json.dumps(
                    {
                        "v": PROTOCOL_VERSION,
                        "type": "event",
                        "event": "session-end",
                        "tick": self.session.tick_index,
                        "hash": f"{self.hashes[-1]:016x}" if self.hashes else None,
                    }
                )
                for ws in list(self._clients):
                    try:
                        await ws.send(final)
                    except Exception:
                        pass
                return
            await asyncio.sleep(1.0 / BROADCAST_HZ)

    async def serve(self, ready: asyncio.Event | None = None, linger: float = 0.0):
        import websockets.asyncio.server as ws_server

        async with ws_server.serve(self._handler, self.host, self.port) as server:
            self.bound_port = list(server.sockets)[0].getsockname()[1]
            if ready is not None:
                ready.set()
            broadcaster = asyncio.create_task(self._broadcaster())
            await self._loop()
            await broadcaster
            if linger:
                await asyncio.sleep(linger)

    def run(self, linger: float = 0.0) -> list[int]:
        asyncio.run(self.serve(linger=linger))
        return self.hashes
