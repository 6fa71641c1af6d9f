"""Live session service: real-time-paced simulation over a WebSocket.

Each WebSocket connection owns one session. The transport carries one JSON
object per text frame:

client -> server
    {"type": "press"|"release", "switch": "open"|"close"}
    {"type": "pause"} | {"type": "resume"} | {"type": "reset"}
    {"type": "set_params", "path": "<dotted>", "value": <number>}
    {"type": "subscribe", "rate_hz": <n>}

server -> client
    {"type": "state", "tick", "theta", "omega", "drive", "rb0", "rb1",
     "grip_force", "open_sw", "close_sw", "underruns"}
    {"type": "ack", "seq": <n>}          (seq 0 also carries "session": <id>)
    {"type": "error", "code": <str>, "detail": <str>}

A session starts paused at tick 0 with the arm at rest, fully open. Switch
presses and parameter changes queue and take effect at the next tick
boundary, so a frame can never expose a mid-tick state. The paced clock only
schedules ticks; it never changes what a tick computes, which is what makes
a recorded event log bit-reproducible through the batch runner. On hosts too
slow to keep up, the clock runs at most 10 catch-up ticks per wake, forgets
the rest of the backlog, and counts the forgotten ticks in the telemetry
"underruns" field.
"""

from __future__ import annotations

import asyncio
import json
import secrets
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import websockets

from .firmware import FirmwareConfig
from .harness import SimEngine, TraceRecord, run_scenario
from .plant import GripParams, MotorParams, NonFiniteState
from .scenario import MalformedScenario, Scenario, SwitchEvent, parse_overrides

DEFAULT_PORT = 7420
PORT_ENV_VAR = "GRIPSIM_PORT"
MAX_CATCHUP_TICKS = 10
SUBSCRIBER_QUEUE_LIMIT = 256


class UnknownSession(Exception):
    """No live session with that id."""


class UnknownMessageType(Exception):
    """Wire message with an unrecognized or missing type field."""


class InvalidParam(Exception):
    """set_params path or value rejected."""


@dataclass(frozen=True)
class LoggedEvent:
    """One applied session input, stamped with the tick it took effect on."""

    tick: int
    kind: str  # "press" | "release" | "set_params"
    switch: str | None = None
    path: str | None = None
    value: float | None = None


_SETTABLE = {
    "firmware_cfg": ("debounce_ticks", "actuation_ticks"),
    "motor_params": ("r_ohm", "ke", "kt", "j", "b", "gear_ratio", "gear_eff", "supply_v"),
    "grip_params": ("theta_min", "theta_max", "lever_arm", "max_grip_force"),
}


class Session:
    """One live arm: an engine, a paced clock, and telemetry fan-out."""

    def __init__(self, session_id: str, overrides: dict[str, Any] | None = None) -> None:
        cfg = parse_overrides(overrides or {})
        self.id = session_id
        self.tick_period_us = cfg.tick_period_us
        self.initial_config: tuple[FirmwareConfig, MotorParams, GripParams] = (
            cfg.firmware_cfg, cfg.motor_params, cfg.grip_params,
        )
        self.engine = SimEngine(cfg.firmware_cfg, cfg.motor_params, cfg.grip_params)
        self.raw_open = False
        self.raw_close = False
        self.pending: list[dict[str, Any]] = []
        self.event_log: list[LoggedEvent] = []
        self.trace: list[TraceRecord] = []
        self.subscribers: list[tuple[int, asyncio.Queue]] = []
        self.underruns = 0
        self.closed = False
        self._running = asyncio.Event()  # cleared = paused

    # -- message intake (always lands between ticks; see run()) --

    def handle(self, message: Any) -> dict[str, Any]:
        """Apply one wire message; returns the extra fields for the ack."""
        if not isinstance(message, dict):
            raise UnknownMessageType("message must be a JSON object")
        mtype = message.get("type")
        if mtype in ("press", "release"):
            switch = message.get("switch")
            if switch not in ("open", "close"):
                raise InvalidParam("switch must be 'open' or 'close'")
            self.pending.append({"kind": mtype, "switch": switch})
            return {}
        if mtype == "pause":
            self._running.clear()
            return {}
        if mtype == "resume":
            self._running.set()
            return {}
        if mtype == "reset":
            self.reset()
            return {}
        if mtype == "set_params":
            path = message.get("path")
            value = message.get("value")
            self._validate_param(path, value)
            self.pending.append({"kind": "set_params", "path": path, "value": value})
            return {}
        if mtype == "subscribe":
            rate = message.get("rate_hz")
            queue = self.subscribe(rate)
            return {"queue": queue, "rate_hz": rate}
        raise UnknownMessageType(f"unknown message type {mtype!r}")

    def subscribe(self, rate_hz: Any) -> asyncio.Queue:
        tick_rate = 1e6 / self.tick_period_us
        if isinstance(rate_hz, bool) or not isinstance(rate_hz, (int, float)):
            raise InvalidParam("rate_hz must be a number")
        if not 1 <= rate_hz <= tick_rate:
            raise InvalidParam(f"rate_hz must be in [1, {tick_rate:g}]")
        stride = max(1, round(tick_rate / rate_hz))
        queue: asyncio.Queue = asyncio.Queue(maxsize=SUBSCRIBER_QUEUE_LIMIT)
        self.subscribers.append((stride, queue))
        return queue

    def reset(self) -> None:
        """Back to tick 0 rest state: open aperture, switches released, paused."""
        fw, mp, gp = self.initial_config
        self.engine = SimEngine(fw, mp, gp)
        self.raw_open = False
        self.raw_close = False
        self.pending.clear()
        self.event_log.clear()
        self.trace.clear()
        self.underruns = 0
        self._running.clear()

    def _validate_param(self, path: Any, value: Any) -> None:
        if not isinstance(path, str) or path.count(".") != 1:
            raise InvalidParam(f"path must look like 'motor_params.r_ohm', got {path!r}")
        group, name = path.split(".")
        if group not in _SETTABLE or name not in _SETTABLE[group]:
            raise InvalidParam(f"unknown parameter {path!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidParam("value must be a number")
        current = {
            "firmware_cfg": self.engine.firmware_cfg,
            "motor_params": self.engine.motor_params,
            "grip_params": self.engine.grip_params,
        }[group]
        if group == "firmware_cfg":
            if not float(value).is_integer():
                raise InvalidParam(f"{path} takes an integer tick count")
            value = int(value)
        try:
            replace(current, **{name: value})
        except ValueError as exc:
            raise InvalidParam(str(exc)) from exc

    def _apply_set_params(self, path: str, value: float) -> None:
        group, name = path.split(".")
        engine = self.engine
        if group == "firmware_cfg":
            engine.firmware_cfg = replace(engine.firmware_cfg, **{name: int(value)})
        elif group == "motor_params":
            engine.motor_params = replace(engine.motor_params, **{name: float(value)})
        else:
            engine.grip_params = replace(engine.grip_params, **{name: float(value)})
            gp = engine.grip_params
            ps = engine.plant_state
            ps.theta_out = min(max(ps.theta_out, gp.theta_min), gp.theta_max)

    def _apply_pending(self) -> None:
        tick = self.engine.tick
        for item in self.pending:
            kind = item["kind"]
            if kind == "press" or kind == "release":
                if item["switch"] == "open":
                    self.raw_open = kind == "press"
                else:
                    self.raw_close = kind == "press"
                self.event_log.append(LoggedEvent(tick, kind, switch=item["switch"]))
            else:
                self._apply_set_params(item["path"], item["value"])
                self.event_log.append(
                    LoggedEvent(tick, "set_params", path=item["path"], value=item["value"])
                )
        self.pending.clear()

    # -- tick execution --

    def step_once(self) -> TraceRecord:
        """Apply pending inputs and run exactly one tick."""
        self._apply_pending()
        try:
            rec = self.engine.step(self.raw_open, self.raw_close)
        except NonFiniteState as exc:
            # A what-if parameter change can destabilize the plant; park the
            # session and tell every subscriber rather than dying silently.
            self._running.clear()
            self._fanout({
                "type": "error",
                "code": "simulation_fault",
                "detail": f"tick {self.engine.tick}: {exc}",
            })
            raise
        self.trace.append(rec)
        self._fanout(self.frame_for(rec), tick=rec.tick)
        return rec

    def _fanout(self, message: dict[str, Any], tick: int | None = None) -> None:
        for stride, queue in self.subscribers:
            if tick is not None and tick % stride != 0:
                continue
            if queue.full():
                queue.get_nowait()  # drop the oldest for a slow client
            queue.put_nowait(message)

    def frame_for(self, rec: TraceRecord) -> dict[str, Any]:
        return {
            "type": "state",
            "tick": rec.tick,
            "theta": rec.theta_out,
            "omega": rec.omega,
            "drive": rec.drive_state.value,
            "rb0": rec.rb0,
            "rb1": rec.rb1,
            "grip_force": rec.grip_force_n,
            "open_sw": rec.open_sw,
            "close_sw": rec.close_sw,
            "underruns": self.underruns,
        }

    async def run(self) -> None:
        """Paced clock: one engine tick per tick_period of wall time."""
        loop = asyncio.get_running_loop()
        period = self.tick_period_us * 1e-6
        next_t: float | None = None
        while not self.closed:
            if not self._running.is_set():
                next_t = None
                await self._running.wait()
                continue
            now = loop.time()
            if next_t is None:
                next_t = now  # fresh start after pause/reset: no backlog
            if now < next_t:
                await asyncio.sleep(next_t - now)
                continue
            due = int((now - next_t) / period) + 1
            burst = min(due, MAX_CATCHUP_TICKS)
            if due > burst:
                self.underruns += due - burst
                next_t = now - (burst - 1) * period
            for _ in range(burst):
                if not self._running.is_set() or self.closed:
                    break
                try:
                    self.step_once()
                except NonFiniteState:
                    break  # session parked itself; wait for reset/set_params
                next_t += period

    def close(self) -> None:
        self.closed = True
        self._running.set()  # unblock run() so it can exit


async def stream_state(session: Session, rate_hz: float):
    """Continuous telemetry frames for a session, decimated to rate_hz.

    Async generator over the same queue the wire subscribers use; yields
    until the session closes. Frames are exact tick snapshots, never
    interpolations.
    """
    queue = session.subscribe(rate_hz)
    try:
        while not session.closed:
            yield await queue.get()
    finally:
        session.subscribers = [
            (stride, q) for stride, q in session.subscribers if q is not queue
        ]


class GatewayManager:
    """Registry of live sessions keyed by id."""

    def __init__(self) -> None:
        self.sessions: dict[str, Session] = {}

    def create_session(self, overrides: dict[str, Any] | None = None) -> Session:
        session_id = secrets.token_hex(8)
        session = Session(session_id, overrides)
        self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def handle_event(self, session_id: str, message: Any) -> dict[str, Any]:
        return self.get(session_id).handle(message)

    def close_session(self, session_id: str) -> None:
        session = self.sessions.pop(session_id, None)
        if session is not None:
            session.close()


def replay_event_log(
    session_or_log: Session | list[LoggedEvent],
    n_ticks: int | None = None,
    config: tuple[FirmwareConfig, MotorParams, GripParams] | None = None,
    tick_period_us: int = 1000,
) -> list[TraceRecord]:
    """Rebuild a live session's tick sequence through the batch runner.

    Refuses logs containing set_params entries: a batch scenario carries one
    fixed parameter set, so such a log has no batch equivalent.
    """
    if isinstance(session_or_log, Session):
        session = session_or_log
        log = session.event_log
        n_ticks = session.engine.tick if n_ticks is None else n_ticks
        config = session.initial_config
        tick_period_us = session.tick_period_us
    else:
        log = session_or_log
        if n_ticks is None or config is None:
            raise ValueError("n_ticks and config are required when passing a bare log")
    if n_ticks == 0:
        return []
    if any(ev.kind == "set_params" for ev in log):
        raise ValueError("event log contains set_params entries; no batch equivalent")
    fw, mp, gp = config
    events = tuple(
        SwitchEvent(ev.tick, ev.switch or "", ev.kind) for ev in log if ev.tick < n_ticks
    )
    scenario = Scenario(
        name="replay",
        tick_period_us=tick_period_us,
        duration_ticks=n_ticks,
        firmware_cfg=fw,
        motor_params=mp,
        grip_params=gp,
        events=events,
    )
    return list(run_scenario(scenario))


def _error_reply(code: str, detail: str, seq: int | None = None) -> str:
    reply: dict[str, Any] = {"type": "error", "code": code, "detail": detail}
    if seq is not None:
        reply["seq"] = seq
    return json.dumps(reply)


async def _client_handler(
    manager: GatewayManager,
    websocket,
    event_log_dir: Path | None = None,
) -> None:
    try:
        session = manager.create_session({})
    except MalformedScenario as exc:
        await websocket.send(_error_reply("malformed", str(exc)))
        return
    clock_task = asyncio.create_task(session.run())
    sender_tasks: list[asyncio.Task] = []

    async def sender(queue: asyncio.Queue) -> None:
        while True:
            frame = await queue.get()
            await websocket.send(json.dumps(frame))

    try:
        await websocket.send(json.dumps({"type": "ack", "seq": 0, "session": session.id}))
        seq = 0
        async for raw in websocket:
            seq += 1
            try:
                message = json.loads(raw)
            except json.JSONDecodeError as exc:
                await websocket.send(_error_reply("malformed_json", str(exc), seq))
                continue
            try:
                extra = session.handle(message)
            except UnknownMessageType as exc:
                await websocket.send(_error_reply("unknown_message_type", str(exc), seq))
                continue
            except InvalidParam as exc:
                await websocket.send(_error_reply("invalid_param", str(exc), seq))
                continue
            queue = extra.pop("queue", None)
            if queue is not None:
                sender_tasks.append(asyncio.create_task(sender(queue)))
            await websocket.send(json.dumps({"type": "ack", "seq": seq}))
    finally:
        clock_task.cancel()
        for task in sender_tasks:
            task.cancel()
        if event_log_dir is not None and session.event_log:
            _write_event_log(event_log_dir / f"{session.id}.jsonl", session)
        manager.close_session(session.id)


def _write_event_log(path: Path, session: Session) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for ev in session.event_log:
            entry: dict[str, Any] = {"tick": ev.tick, "kind": ev.kind}
            if ev.switch is not None:
                entry["switch"] = ev.switch
            if ev.path is not None:
                entry["path"] = ev.path
                entry["value"] = ev.value
            fh.write(json.dumps(entry) + "\n")


async def serve(
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
    event_log_dir: str | Path | None = None,
    ready: asyncio.Event | None = None,
    bound_port: list[int] | None = None,
) -> None:
    """Run the gateway until cancelled.

    With port 0 the OS picks a free port; the bound port is printed and, if
    given, appended to bound_port (used by scripted clients and tests).
    """
    manager = GatewayManager()
    log_dir = Path(event_log_dir) if event_log_dir is not None else None

    async def handler(websocket):
        await _client_handler(manager, websocket, log_dir)

    async with websockets.serve(handler, host, port) as server:
        actual_port = next(iter(server.sockets)).getsockname()[1]
        if bound_port is not None:
            bound_port.append(actual_port)
        print(f"gateway listening on ws://{host}:{actual_port}", flush=True)
        if ready is not None:
            ready.set()
        await asyncio.Future()
