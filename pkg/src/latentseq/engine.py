"""Network control plane: OSC in/out over UDP plus a WebSocket JSON bridge.

Both transports translate to the same internal Control values and drive
the same engine, so a Pure Data patch over OSC and the web UI over
WebSocket cause identical state transitions. Inbound floods are
coalesced latest-wins per control (a musician dragging an XY pad wants
the newest position, not the backlog) and the audio clock never waits
on network I/O.

Wire contract (normative for this artifact):

  OSC inbound   /seq/latent ff | /seq/threshold f | /seq/model s
                /seq/pitch ii | /seq/length i | /seq/bpm f
                /seq/transport s("start"|"stop")
  OSC outbound  /seq/pattern 32*i | /seq/velocity 32*i | /seq/playhead i
  WebSocket     JSON {"type": ..., ...} messages isomorphic to the above;
                the server pushes a full snapshot on connect.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from dataclasses import dataclass

from .errors import InputError
from .generate import GenerationRequest, generate_ensemble
from .osc import OscDecodeError, OscMessage, decode_message, encode_message
from .sequencer import SequencerState, StepSequencer

logger = logging.getLogger(__name__)

OSC_PREFIX = "/seq"
TRANSPORT_ACTIONS = ("start", "stop")


@dataclass(frozen=True)
class Control:
    kind: str      # latent | threshold | model | pitch | length | bpm | transport
    values: tuple

    @property
    def coalesce_key(self) -> str:
        # Per-slot pitch updates must not clobber each other.
        if self.kind == "pitch":
            return f"pitch:{self.values[0]}"
        return self.kind


class UnknownAddress(InputError):
    """Inbound message targets no known control."""


def _as_float(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"expected a number, got {value!r}")
    return float(value)


def _as_int(value) -> int:
    if isinstance(value, bool):
        raise InputError(f"expected an integer, got {value!r}")
    if isinstance(value, float):
        if not value.is_integer():
            raise InputError(f"expected an integer, got {value!r}")
        value = int(value)
    if not isinstance(value, int):
        raise InputError(f"expected an integer, got {value!r}")
    return value


def parse_osc_control(msg: OscMessage) -> Control:
    """Translate an inbound OSC message; raises on unknown address or bad args."""
    try:
        if msg.address == f"{OSC_PREFIX}/latent":
            x, y = msg.args
            return Control("latent", (_as_float(x), _as_float(y)))
        if msg.address == f"{OSC_PREFIX}/threshold":
            (t,) = msg.args
            return Control("threshold", (_as_float(t),))
        if msg.address == f"{OSC_PREFIX}/model":
            (model_id,) = msg.args
            if not isinstance(model_id, str):
                raise InputError("model id must be a string")
            return Control("model", (model_id,))
        if msg.address == f"{OSC_PREFIX}/pitch":
            slot, note = msg.args
            return Control("pitch", (_as_int(slot), _as_int(note)))
        if msg.address == f"{OSC_PREFIX}/length":
            (length,) = msg.args
            return Control("length", (_as_int(length),))
        if msg.address == f"{OSC_PREFIX}/bpm":
            (bpm,) = msg.args
            return Control("bpm", (_as_float(bpm),))
        if msg.address == f"{OSC_PREFIX}/transport":
            (action,) = msg.args
            if action not in TRANSPORT_ACTIONS:
                raise InputError(f"transport action must be start or stop, got {action!r}")
            return Control("transport", (action,))
    except ValueError as exc:
        raise InputError(f"{msg.address}: bad arguments {msg.args!r} ({exc})") from exc
    raise UnknownAddress(f"no control at {msg.address}")


def parse_ws_control(payload: dict) -> Control:
    """Translate an inbound WebSocket JSON object into a Control."""
    if not isinstance(payload, dict):
        raise InputError("message must be a JSON object")
    kind = payload.get("type")
    try:
        if kind == "latent":
            return Control("latent", (_as_float(payload["x"]), _as_float(payload["y"])))
        if kind == "threshold":
            return Control("threshold", (_as_float(payload["value"]),))
        if kind == "model":
            model_id = payload["id"]
            if not isinstance(model_id, str):
                raise InputError("model id must be a string")
            return Control("model", (model_id,))
        if kind == "pitch":
            return Control("pitch", (_as_int(payload["slot"]), _as_int(payload["note"])))
        if kind == "length":
            return Control("length", (_as_int(payload["value"]),))
        if kind == "bpm":
            return Control("bpm", (_as_float(payload["value"]),))
        if kind == "transport":
            action = payload.get("action")
            if action not in TRANSPORT_ACTIONS:
                raise InputError(f"transport action must be start or stop, got {action!r}")
            return Control("transport", (action,))
    except KeyError as exc:
        raise InputError(f"{kind}: missing field {exc}") from exc
    raise UnknownAddress(f"no control of type {kind!r}")


@dataclass(frozen=True)
class Broadcast:
    kind: str          # "pattern" | "playhead" | "transport"
    payload: dict

    def to_ws(self) -> dict:
        return {"type": self.kind, **self.payload}

    def to_osc(self) -> list[OscMessage]:
        """Outbound OSC mirrors only the active model's pattern stream."""
        if self.kind == "pattern":
            if not self.payload["active"]:
                return []
            return [
                OscMessage(f"{OSC_PREFIX}/pattern", tuple(self.payload["steps"])),
                OscMessage(f"{OSC_PREFIX}/velocity", tuple(self.payload["velocities"])),
            ]
        if self.kind == "playhead":
            return [OscMessage(f"{OSC_PREFIX}/playhead", (self.payload["step"],))]
        return []


class Engine:
    """Single-owner core wiring generator and sequencer together.

    All mutations flow through handle_control / apply + regenerate;
    network frontends translate and validate, this class owns state.
    """

    def __init__(self, decoders: dict, sequencer: StepSequencer | None = None,
                 atlases: dict | None = None, active_model: str | None = None,
                 clock=time.monotonic):
        if not decoders:
            raise InputError("engine needs at least one decoder")
        self.decoders = dict(decoders)
        self.atlases = dict(atlases or {})
        self.active_model = active_model if active_model is not None else next(iter(decoders))
        if self.active_model not in self.decoders:
            raise InputError(f"active model {self.active_model!r} is not loaded")
        self.seq = sequencer if sequencer is not None else StepSequencer()
        self.clock = clock
        self.x = 0.0
        self.y = 0.0
        self.threshold = 0.5
        self.last_results = {}

    def apply(self, control: Control) -> bool:
        """Apply one validated control; returns True if generation is stale."""
        kind, values = control.kind, control.values
        if kind == "latent":
            self.x, self.y = values
            return True
        if kind == "threshold":
            t = values[0]
            if not 0.0 <= t <= 1.0:
                raise InputError(f"threshold must be within [0, 1], got {t}")
            self.threshold = t
            return True
        if kind == "model":
            if values[0] not in self.decoders:
                raise InputError(f"unknown model {values[0]!r}")
            self.active_model = values[0]
            return True
        if kind == "pitch":
            self.seq.set_pitch(*values)
            return False
        if kind == "length":
            self.seq.set_length(values[0])
            return False
        if kind == "bpm":
            self.seq.set_bpm(values[0])
            return False
        if kind == "transport":
            if values[0] == "start":
                self.seq.start()
            else:
                self.seq.stop(self.clock())
            return False
        raise UnknownAddress(f"no control of kind {kind!r}")

    def regenerate(self) -> list[Broadcast]:
        """Run every decoder at the current request; route the active result."""
        request = GenerationRequest(self.x, self.y, self.threshold)
        self.last_results = generate_ensemble(self.decoders, request)
        self.seq.apply_generation(self.last_results[self.active_model])
        return [
            Broadcast("pattern", {
                "model_id": model_id,
                "steps": [int(v) for v in result.pattern],
                "velocities": [int(v) for v in result.velocities],
                "active": model_id == self.active_model,
            })
            for model_id, result in self.last_results.items()
        ]

    def handle_control(self, control: Control) -> list[Broadcast]:
        broadcasts = []
        stale = self.apply(control)
        if control.kind == "transport":
            broadcasts.append(Broadcast("transport", {"running": self.seq.state.running}))
        if stale:
            broadcasts.extend(self.regenerate())
        return broadcasts

    def handle_osc_packet(self, data: bytes) -> list[Broadcast]:
        """Decode + route one datagram; bad input is logged, never fatal."""
        try:
            msg = decode_message(data)
        except OscDecodeError as exc:
            logger.warning("dropping malformed OSC packet: %s", exc)
            return []
        try:
            control = parse_osc_control(msg)
            return self.handle_control(control)
        except UnknownAddress:
            logger.warning("ignoring OSC message at unknown address %s", msg.address)
        except InputError as exc:
            logger.warning("ignoring invalid OSC control %s: %s", msg.address, exc)
        return []

    def shutdown(self) -> None:
        """Stop the sequencer, closing any sounding note."""
        self.seq.stop(self.clock())

    def snapshot(self) -> dict:
        state = self.seq.state
        return {
            "type": "snapshot",
            "models": sorted(self.decoders),
            "active_model": self.active_model,
            "latent": {"x": self.x, "y": self.y},
            "threshold": self.threshold,
            "atlases": {
                model_id: {
                    "points": [{"id": p.record_id, "x": p.x, "y": p.y} for p in points],
                    "range": {
                        "min_x": lrange.min_x, "max_x": lrange.max_x,
                        "min_y": lrange.min_y, "max_y": lrange.max_y,
                        "suggested_ui_min": lrange.suggested_ui_min,
                        "suggested_ui_max": lrange.suggested_ui_max,
                    },
                }
                for model_id, (points, lrange) in self.atlases.items()
            },
            "sequencer": {
                "pattern": [int(v) for v in state.pattern],
                "velocities": [int(v) for v in state.velocities],
                "pitch_lane": [int(v) for v in state.pitch_lane],
                "length": int(state.length),
                "bpm": float(state.bpm),
                "playhead": int(state.playhead),
                "running": bool(state.running),
            },
        }


class _OscInProtocol(asyncio.DatagramProtocol):
    def __init__(self, server: "EngineServer"):
        self.server = server

    def datagram_received(self, data: bytes, addr) -> None:
        self.server.deposit_osc(data)


class EngineServer:
    """Asyncio frontend: one loop owns the engine, the clock and all sockets."""

    def __init__(self, engine: Engine,
                 osc_in_port: int = 9000, osc_out_port: int = 9001,
                 osc_out_host: str = "127.0.0.1", ws_port: int = 8080,
                 host: str = "127.0.0.1"):
        self.engine = engine
        self.host = host
        self.osc_in_port = osc_in_port
        self.osc_out_port = osc_out_port
        self.osc_out_host = osc_out_host
        self.ws_port = ws_port
        self._pending: dict[str, object] = {}   # coalesce key -> Control | raw packet
        self._wake = asyncio.Event()
        self._clients: dict = {}                # websocket -> outbound queue
        self._tasks: list[asyncio.Task] = []
        self._udp_transport = None
        self._ws_server = None

    # inbound

    def deposit_osc(self, data: bytes) -> None:
        # Decode immediately so coalescing happens per control, but keep
        # routing in the engine task.
        try:
            msg = decode_message(data)
            control = parse_osc_control(msg)
        except OscDecodeError as exc:
            logger.warning("dropping malformed OSC packet: %s", exc)
            return
        except UnknownAddress as exc:
            logger.warning("%s", exc)
            return
        except InputError as exc:
            logger.warning("ignoring invalid OSC control: %s", exc)
            return
        self.deposit(control)

    def deposit(self, control: Control, reply=None) -> None:
        """Latest-wins mailbox write; reply (if given) receives error frames."""
        self._pending[control.coalesce_key] = (control, reply)
        self._wake.set()

    # engine task

    async def _engine_loop(self) -> None:
        while True:
            await self._wake.wait()
            self._wake.clear()
            batch = list(self._pending.values())
            self._pending.clear()
            broadcasts: list[Broadcast] = []
            regenerate = False
            for control, reply in batch:
                try:
                    stale = self.engine.apply(control)
                    regenerate = regenerate or stale
                    if control.kind == "transport":
                        broadcasts.append(Broadcast("transport", {
                            "running": self.engine.seq.state.running,
                        }))
                except InputError as exc:
                    if reply is not None:
                        self._enqueue_ws(reply, {"type": "error", "message": str(exc)})
                    else:
                        logger.warning("ignoring invalid control %s: %s", control.kind, exc)
            if regenerate:
                broadcasts.extend(self.engine.regenerate())
            self._fan_out(broadcasts)

    # clock task

    async def _clock_loop(self) -> None:
        loop = asyncio.get_running_loop()
        seq = self.engine.seq
        next_step = None
        while True:
            if not seq.state.running:
                next_step = None
                await asyncio.sleep(0.005)
                continue
            now = loop.time()
            if next_step is None:
                next_step = now
            off_time = seq.next_off_time()
            target = next_step if off_time is None else min(off_time, next_step)
            if target > now:
                await asyncio.sleep(target - now)
            if not seq.state.running:
                continue
            if off_time is not None and off_time <= next_step:
                seq.flush_pending(off_time)
                continue
            step = seq.state.playhead
            seq.tick(next_step)
            self._fan_out([Broadcast("playhead", {"step": int(step)})])
            next_step += seq.step_period()

    # outbound

    def _fan_out(self, broadcasts: list[Broadcast]) -> None:
        for broadcast in broadcasts:
            if self._udp_transport is not None and self.osc_out_port >= 0:
                for msg in broadcast.to_osc():
                    self._udp_transport.sendto(
                        encode_message(msg), (self.osc_out_host, self.osc_out_port))
            frame = broadcast.to_ws()
            for queue in self._clients.values():
                self._enqueue_frame(queue, frame)

    def _enqueue_frame(self, queue: asyncio.Queue, frame: dict) -> None:
        # Slow clients lose the oldest frames rather than stalling anyone.
        while True:
            try:
                queue.put_nowait(frame)
                return
            except asyncio.QueueFull:
                try:
                    queue.get_nowait()
                except asyncio.QueueEmpty:
                    pass

    def _enqueue_ws(self, websocket, frame: dict) -> None:
        queue = self._clients.get(websocket)
        if queue is not None:
            self._enqueue_frame(queue, frame)

    # websocket session

    async def _ws_handler(self, websocket) -> None:
        queue: asyncio.Queue = asyncio.Queue(maxsize=256)
        self._clients[websocket] = queue
        sender = asyncio.create_task(self._ws_sender(websocket, queue))
        try:
            await websocket.send(json.dumps(self.engine.snapshot()))
            async for raw in websocket:
                try:
                    control = parse_ws_control(json.loads(raw))
                except json.JSONDecodeError:
                    self._enqueue_ws(websocket, {"type": "error",
                                                 "message": "malformed JSON"})
                    continue
                except (UnknownAddress, InputError) as exc:
                    self._enqueue_ws(websocket, {"type": "error", "message": str(exc)})
                    continue
                self.deposit(control, reply=websocket)
        except Exception:
            pass
        finally:
            self._clients.pop(websocket, None)
            sender.cancel()

    async def _ws_sender(self, websocket, queue: asyncio.Queue) -> None:
        try:
            while True:
                frame = await queue.get()
                await websocket.send(json.dumps(frame))
        except Exception:
            pass

    # lifecycle

    async def start(self) -> None:
        """Bind the enabled transports; a port of -1 disables that side."""
        loop = asyncio.get_running_loop()
        if self.osc_in_port >= 0:
            self._udp_transport, _ = await loop.create_datagram_endpoint(
                lambda: _OscInProtocol(self), local_addr=(self.host, self.osc_in_port))
            self.osc_in_port = self._udp_transport.get_extra_info("sockname")[1]
        if self.ws_port >= 0:
            from websockets.asyncio.server import serve

            self._ws_server = await serve(self._ws_handler, self.host, self.ws_port)
            self.ws_port = self._ws_server.sockets[0].getsockname()[1]
        self._tasks = [
            asyncio.create_task(self._engine_loop()),
            asyncio.create_task(self._clock_loop()),
        ]
        logger.info("listening: osc-in udp/%d -> osc-out %s:%d, websocket tcp/%d",
                    self.osc_in_port, self.osc_out_host, self.osc_out_port, self.ws_port)

    async def stop(self) -> None:
        self.engine.shutdown()
        for task in self._tasks:
            task.cancel()
        self._tasks = []
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()
            self._ws_server = None
        if self._udp_transport is not None:
            self._udp_transport.close()
            self._udp_transport = None
