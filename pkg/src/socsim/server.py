"""Single-process exercise server: WebSocket fan-out plus HTTP plumbing.

Concurrency model: every mutation is applied synchronously inside an event
loop callback (no awaits between validate, mutate, audit, and fan-out), so
the loop itself serializes the global mutation order. Each connection owns
an outbound queue drained by its own writer task; a slow or dead client can
therefore never block or reorder anyone else.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from pathlib import Path
from typing import Optional

from aiohttp import WSMsgType, web

from . import protocol
from .config import ExerciseConfig
from .errors import CommandError, InvalidError, UnknownKindError
from .exercise import BroadcastItem, Exercise
from .export import build_export, write_export
from .model import now_ms
from .session import ClientSession

log = logging.getLogger("socsim")

SCHEDULER_TICK_S = 0.05
PRESENCE_SWEEP_S = 1.0
HELLO_TIMEOUT_S = 15.0

STATIC_DIR = Path(__file__).parent / "static"

_FALLBACK_INDEX = """<!doctype html>
<html><head><meta charset="utf-8"><title>socsim</title></head>
<body><h1>socsim server is running</h1>
<p>The web UI bundle is not installed. Connect a client to <code>/ws</code>,
or build the frontend (see README).</p></body></html>
"""


_CLOSE_SENTINEL = object()


class Connection:
    """One joined WebSocket client: session, outbound queue, frame counter."""

    def __init__(self, ws: web.WebSocketResponse, session: ClientSession):
        self.ws = ws
        self.session = session
        self.queue: asyncio.Queue = asyncio.Queue()
        self.seq = 0
        self.strikes = 0
        self.writer_task: Optional[asyncio.Task] = None
        self.closing = False

    def enqueue(self, kind: str, payload: dict, at: int) -> None:
        # seq is assigned at commit time, so per-connection order mirrors the
        # global mutation order restricted to this client's entitlements.
        self.seq += 1
        self.queue.put_nowait(protocol.make_frame(self.seq, kind, payload, at))


class SocServer:
    def __init__(self, exercise: Exercise, config: ExerciseConfig,
                 static_dir: Optional[Path] = None):
        self.exercise = exercise
        self.config = config
        self.static_dir = STATIC_DIR if static_dir is None else static_dir
        self.connections: dict[str, Connection] = {}
        self.started_monotonic = time.monotonic()
        self._tasks: list[asyncio.Task] = []
        self._runner: Optional[web.AppRunner] = None
        self.port: Optional[int] = None

    # -- fan-out ---------------------------------------------------------------

    def fanout(self, items: list[BroadcastItem], at: int) -> None:
        if not items:
            return
        for conn in list(self.connections.values()):
            if conn.closing:
                continue
            for item in items:
                payload = protocol.render_item(item, conn.session, self.exercise)
                if payload is not None:
                    conn.enqueue(item.kind, payload, at)

    def _send_error(self, conn: Connection, exc: CommandError,
                    ref_seq: Optional[int] = None) -> None:
        conn.enqueue("error", protocol.error_payload(exc, ref_seq), now_ms())

    # -- command path ------------------------------------------------------------

    def _dispatch(self, session: ClientSession, cmd: protocol.ClientCommand,
                  at: int) -> list[BroadcastItem]:
        ex = self.exercise
        p = cmd.payload
        kind = cmd.kind
        if kind == "heartbeat":
            return ex.heartbeat(session.client_id, at=at)
        if kind == "chat.send":
            return ex.post_message(session, p["channel"], p["body"], at=at)
        if kind == "event.triage":
            return ex.triage_event(session, p["eventId"], p["decision"], at=at)
        if kind == "event.annotate":
            return ex.annotate_event(session, p["eventId"], p["text"], at=at)
        if kind == "teacher.pacing":
            return ex.set_pacing(
                session,
                running=p.get("running"),
                rate_per_minute=p.get("ratePerMinute"),
                fp_ratio=p.get("fpRatio"),
                now=time.monotonic(),
                at=at,
            )
        if kind == "teacher.inject":
            spec = {k: p[k] for k in ("region", "deviceType", "severity", "status")
                    if p.get(k) is not None}
            return ex.inject_event(session, spec, at=at)
        if kind == "teacher.colour":
            return ex.set_colour(session, p["eventId"], p["colour"], at=at)
        if kind == "teacher.delete":
            return ex.delete_event(session, p["eventId"], at=at)
        if kind == "teacher.confirm":
            return ex.confirm_escalation(session, p["eventId"], at=at)
        if kind == "teacher.assign":
            return ex.assign_region(session, p["clientId"], p["region"], at=at)
        if kind == "teacher.endgame":
            items = ex.fire_endgame(session, at=at)
            self._auto_export(session)
            return items
        raise UnknownKindError(f"unknown kind {kind!r}")

    def _auto_export(self, teacher: ClientSession) -> None:
        if not self.config.export_path:
            return
        try:
            write_export(self.exercise, self.config.export_path)
            log.info("endgame export written to %s", self.config.export_path)
        except OSError as exc:
            log.warning("endgame export failed: %s", exc)
            conn = self.connections.get(teacher.client_id)
            if conn is not None:
                self._send_error(conn, InvalidError(f"export failed: {exc}"))

    def _handle_text(self, conn: Connection, raw: str) -> None:
        """Decode and apply one client frame. Fully synchronous: this is the
        critical section that makes the mutation order total."""
        try:
            cmd = protocol.decode_client_frame(raw, conn.session)
        except CommandError as exc:
            conn.strikes += 1
            self._send_error(conn, exc)
            if conn.strikes >= protocol.MAX_PROTOCOL_STRIKES:
                conn.closing = True
            return
        conn.strikes = 0
        at = now_ms()
        try:
            items = self._dispatch(conn.session, cmd, at)
        except CommandError as exc:
            self._send_error(conn, exc, ref_seq=cmd.seq)
            return
        except Exception:
            log.exception("command %s failed unexpectedly", cmd.kind)
            self._send_error(conn, InvalidError("internal error"), ref_seq=cmd.seq)
            return
        self.fanout(items, at)

    # -- connection lifecycle -------------------------------------------------

    async def _writer(self, conn: Connection) -> None:
        try:
            while True:
                frame = await conn.queue.get()
                if frame is _CLOSE_SENTINEL:
                    return
                await conn.ws.send_str(json.dumps(frame))
        except asyncio.CancelledError:
            raise
        except Exception:
            # Socket died mid-send: drop this client, never disturb the rest.
            conn.closing = True
            self._commit_leave(conn, reason="send_failure")

    def _commit_leave(self, conn: Connection, reason: str) -> None:
        self.connections.pop(conn.session.client_id, None)
        at = now_ms()
        items = self.exercise.leave(conn.session.client_id, at=at, reason=reason)
        self.fanout(items, at)

    async def _close_connection(self, conn: Connection, reason: str) -> None:
        if conn.session.client_id in self.connections:
            self._commit_leave(conn, reason)
        if conn.writer_task is not None:
            # Flush whatever is queued (the final error frame in particular),
            # then stop the writer and tear the socket down.
            conn.queue.put_nowait(_CLOSE_SENTINEL)
            try:
                await asyncio.wait_for(conn.writer_task, timeout=2.0)
            except Exception:
                conn.writer_task.cancel()
        if not conn.ws.closed:
            await conn.ws.close()

    async def ws_handler(self, request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse()
        await ws.prepare(request)

        # Hello handshake: the first frame must join or the connection is refused.
        try:
            msg = await asyncio.wait_for(ws.receive(), timeout=HELLO_TIMEOUT_S)
        except asyncio.TimeoutError:
            await ws.close()
            return ws
        if msg.type != WSMsgType.TEXT:
            await ws.close()
            return ws
        try:
            hello = protocol.decode_hello(msg.data)
            at = now_ms()
            session, items = self.exercise.join(
                hello.payload["displayName"],
                hello.payload["role"],
                hello.payload.get("region"),
                hello.payload.get("teacherToken"),
                at=at,
            )
        except CommandError as exc:
            frame = protocol.make_frame(1, "error", protocol.error_payload(exc), now_ms())
            await ws.send_str(json.dumps(frame))
            await ws.close()
            return ws

        conn = Connection(ws, session)
        self.connections[session.client_id] = conn
        # Snapshot is frame 1 and reflects the join commit; peers learn about
        # the join via the presence item, which excludes the joiner.
        conn.enqueue("snapshot", protocol.build_snapshot(self.exercise, session), at)
        self.fanout(items, at)
        conn.writer_task = asyncio.create_task(self._writer(conn))
        log.info("join %s role=%s region=%s", session.display_name, session.role,
                 session.region)

        try:
            async for msg in ws:
                if msg.type == WSMsgType.TEXT:
                    self._handle_text(conn, msg.data)
                    if conn.closing:
                        break
                elif msg.type in (WSMsgType.ERROR, WSMsgType.CLOSE):
                    break
        finally:
            await self._close_connection(conn, reason="close")
        return ws

    # -- background tasks ----------------------------------------------------

    async def _scheduler_loop(self) -> None:
        while True:
            await asyncio.sleep(SCHEDULER_TICK_S)
            at = now_ms()
            items = self.exercise.generator_tick(time.monotonic(), at)
            if items:
                self.fanout(items, at)

    async def _presence_loop(self) -> None:
        while True:
            await asyncio.sleep(PRESENCE_SWEEP_S)
            at = now_ms()
            items = self.exercise.sweep_presence(at)
            if items:
                self.fanout(items, at)

    # -- HTTP ------------------------------------------------------------------

    async def healthz(self, request: web.Request) -> web.Response:
        uptime = time.monotonic() - self.started_monotonic
        return web.json_response({"status": "ok", "uptimeSeconds": round(uptime, 3)})

    def _export_authorized(self, request: web.Request) -> bool:
        token = request.headers.get("X-Teacher-Token")
        if token is None:
            auth = request.headers.get("Authorization", "")
            if auth.startswith("Bearer "):
                token = auth[len("Bearer "):]
        return token == self.config.teacher_token

    async def export_endpoint(self, request: web.Request) -> web.Response:
        if not self._export_authorized(request):
            return web.json_response({"error": "teacher token required"}, status=403)
        return web.json_response(build_export(self.exercise))

    async def index(self, request: web.Request) -> web.Response:
        index_path = self.static_dir / "index.html"
        if index_path.is_file():
            return web.FileResponse(index_path)
        return web.Response(text=_FALLBACK_INDEX, content_type="text/html")

    async def static_file(self, request: web.Request) -> web.Response:
        name = request.match_info["name"]
        base = self.static_dir.resolve()
        candidate = (base / name).resolve()
        if base in candidate.parents and candidate.is_file():
            return web.FileResponse(candidate)
        raise web.HTTPNotFound()

    def build_app(self) -> web.Application:
        app = web.Application()
        app.router.add_get("/healthz", self.healthz)
        app.router.add_get("/api/export", self.export_endpoint)
        app.router.add_get("/ws", self.ws_handler)
        app.router.add_get("/", self.index)
        app.router.add_get("/{name:.+}", self.static_file)
        return app

    # -- lifecycle ---------------------------------------------------------------

    async def start(self) -> int:
        """Bind and start background tasks; returns the bound port."""
        app = self.build_app()
        self._runner = web.AppRunner(app)
        await self._runner.setup()
        site = web.TCPSite(self._runner, self.config.bind_address, self.config.port)
        await site.start()
        self.port = self._runner.addresses[0][1]
        self._tasks = [
            asyncio.create_task(self._scheduler_loop()),
            asyncio.create_task(self._presence_loop()),
        ]
        return self.port

    async def stop(self) -> None:
        for task in self._tasks:
            task.cancel()
        for conn in list(self.connections.values()):
            await self._close_connection(conn, reason="shutdown")
        if self._runner is not None:
            await self._runner.cleanup()

    async def serve_forever(self) -> None:
        port = await self.start()
        log.info("listening on %s:%s", self.config.bind_address, port)
        try:
            await asyncio.Event().wait()
        finally:
            await self.stop()
