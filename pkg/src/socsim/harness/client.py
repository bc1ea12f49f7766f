"""One headless scripted client: connects, records, and optionally behaves."""

from __future__ import annotations

import asyncio
import json
import random
from dataclasses import dataclass, field
from typing import Optional

import aiohttp

from ..model import now_ms

HEARTBEAT_INTERVAL_S = 10.0

_CHAT_LINES = (
    "looking at the newest alert now",
    "that source address keeps showing up",
    "I think this one is noise",
    "escalating, the pattern matches an attack",
    "can someone double-check the firewall events?",
    "monitoring this one for now",
    "severity looks overstated to me",
    "same template as the last false positive",
)


@dataclass
class Transcript:
    """Everything one client saw and did, in arrival order."""

    name: str
    role: str
    region: Optional[str] = None
    frames: list = field(default_factory=list)  # {"recvAt": ms, "frame": {...}}
    sent: list = field(default_factory=list)    # {"sentAt": ms, "kind": ..., "payload": ...}
    faults: list = field(default_factory=list)

    def frames_of_kind(self, kind: str) -> list[dict]:
        return [f["frame"] for f in self.frames if f["frame"]["kind"] == kind]

    def to_jsonl(self) -> str:
        lines = [json.dumps({"meta": {"name": self.name, "role": self.role,
                                      "region": self.region, "faults": self.faults}})]
        lines.extend(json.dumps(entry) for entry in self.frames)
        return "\n".join(lines) + "\n"


class ScriptedClient:
    """Connects as one participant, records every frame, and runs behavior.

    Folded state (events/you/endgame) mirrors what a thin client would hold;
    the reactive triage behavior and the confirm macro both work off it.
    """

    def __init__(
        self,
        name: str,
        role: str,
        http_session: aiohttp.ClientSession,
        ws_url: str,
        *,
        region: Optional[str] = None,
        teacher_token: Optional[str] = None,
        rng: Optional[random.Random] = None,
        chat_rate_per_minute: float = 0.0,
        triage_probability: float = 0.0,
    ):
        self.name = name
        self.role = role
        self.region = region
        self._http = http_session
        self._ws_url = ws_url
        self._teacher_token = teacher_token
        self.rng = rng or random.Random(0)
        self.chat_rate = chat_rate_per_minute
        self.triage_probability = triage_probability

        self.transcript = Transcript(name=name, role=role, region=region)
        self.events: dict[int, dict] = {}
        self.you: Optional[dict] = None
        self.endgame_seen = False
        self.connected = asyncio.Event()
        self.closed = asyncio.Event()
        self._ws = None
        self._subtasks: list[asyncio.Task] = []

    # -- wire ------------------------------------------------------------------

    async def send(self, kind: str, payload: Optional[dict] = None) -> None:
        payload = payload or {}
        self.transcript.sent.append({"sentAt": now_ms(), "kind": kind, "payload": payload})
        await self._ws.send_str(json.dumps({"kind": kind, "payload": payload}))

    async def run(self) -> None:
        """Connect, hello, and record until the socket closes or run() is cancelled."""
        try:
            self._ws = await self._http.ws_connect(self._ws_url, heartbeat=None)
        except Exception as exc:
            self.transcript.faults.append(f"connect failed: {exc}")
            self.closed.set()
            return
        try:
            hello: dict = {"displayName": self.name, "role": self.role}
            if self.region is not None:
                hello["region"] = self.region
            if self.role == "teacher":
                hello["teacherToken"] = self._teacher_token
            await self.send("hello", hello)

            self._subtasks.append(asyncio.create_task(self._heartbeat_loop()))
            if self.role == "student" and self.chat_rate > 0:
                self._subtasks.append(asyncio.create_task(self._chat_loop()))

            async for msg in self._ws:
                if msg.type != aiohttp.WSMsgType.TEXT:
                    break
                frame = json.loads(msg.data)
                self.transcript.frames.append({"recvAt": now_ms(), "frame": frame})
                self._fold(frame)
        except asyncio.CancelledError:
            raise
        except Exception as exc:
            self.transcript.faults.append(f"premature close: {exc}")
        finally:
            await self.close()

    async def close(self) -> None:
        for task in self._subtasks:
            task.cancel()
        self._subtasks = []
        if self._ws is not None and not self._ws.closed:
            await self._ws.close()
        self.closed.set()

    # -- folded client state ---------------------------------------------------

    def _fold(self, frame: dict) -> None:
        kind = frame["kind"]
        payload = frame["payload"]
        if kind == "snapshot":
            self.you = payload["you"]
            self.region = self.you.get("region")
            self.events = {e["id"]: dict(e) for e in payload["events"]}
            self.endgame_seen = "endgame" in payload
            self.connected.set()
        elif kind == "event.new":
            self.events[payload["id"]] = dict(payload)
            self._maybe_react(payload)
        elif kind == "event.update":
            event = self.events.get(payload["eventId"])
            if event is not None:
                event.update(payload["changed"])
        elif kind == "event.delete":
            self.events.pop(payload["eventId"], None)
        elif kind == "endgame.report":
            self.endgame_seen = True

    # -- behavior ----------------------------------------------------------------

    def _maybe_react(self, event: dict) -> None:
        if self.role != "student" or self.triage_probability <= 0:
            return
        if event.get("region") != self.region:
            return
        if self.rng.random() >= self.triage_probability:
            return
        decision = self.rng.choices(
            ("escalated", "monitoring", "dismissed"), weights=(4, 3, 3))[0]
        delay = self.rng.uniform(0.2, 1.2)
        self._subtasks.append(
            asyncio.create_task(self._triage_later(event["id"], decision, delay)))

    async def _triage_later(self, event_id: int, decision: str, delay: float) -> None:
        await asyncio.sleep(delay)
        try:
            await self.send("event.triage", {"eventId": event_id, "decision": decision})
        except Exception:
            pass

    async def _chat_loop(self) -> None:
        interval = 60.0 / self.chat_rate
        await asyncio.sleep(self.rng.uniform(0.5, interval))
        while True:
            await self.connected.wait()
            if self.region:
                try:
                    await self.send("chat.send", {
                        "channel": self.region,
                        "body": self.rng.choice(_CHAT_LINES),
                    })
                except Exception:
                    return
            await asyncio.sleep(interval)

    async def _heartbeat_loop(self) -> None:
        while True:
            await asyncio.sleep(HEARTBEAT_INTERVAL_S)
            try:
                await self.send("heartbeat", {})
            except Exception:
                return

    async def confirm_escalations(self, count: int) -> int:
        """Teacher macro: confirm `count` escalated, still-pending events.

        A candidate can be re-triaged out from under the confirm, so each send
        is verified against the folded state before it counts; failures move
        on to the next candidate.
        """
        done = 0
        tried: set[int] = set()
        while done < count:
            candidates = [
                eid for eid, e in sorted(self.events.items())
                if e.get("triageState") == "escalated"
                and e.get("verdict") == "pending" and eid not in tried
            ]
            if not candidates:
                break
            eid = candidates[0]
            tried.add(eid)
            await self.send("teacher.confirm", {"eventId": eid})
            deadline = asyncio.get_running_loop().time() + 2.0
            while asyncio.get_running_loop().time() < deadline:
                event = self.events.get(eid)
                if event is not None and event.get("verdict") != "pending":
                    done += 1
                    break
                await asyncio.sleep(0.05)
        return done
