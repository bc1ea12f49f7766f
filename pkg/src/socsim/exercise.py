"""The authoritative writer: every mutation of exercise state goes through here.

Each public method validates, mutates, appends to the audit log, and returns
the list of broadcast items the protocol layer fans out. Methods are plain
synchronous functions; the server calls them from event-loop callbacks with
no awaits in between, which is what serializes the mutation order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

from . import triage
from .chat import ChatLog, ChatMessage
from .config import ExerciseConfig
from .errors import ForbiddenError, InvalidError, PreconditionError
from .eventgen import EventGenerator
from .model import (
    ROLE_TEACHER,
    AuditLog,
    EventStore,
    LogTemplate,
    SocEvent,
    event_record,
    now_ms,
)
from .session import ClientSession, SessionRegistry


@dataclass
class BroadcastItem:
    """One fan-out obligation produced by a committed mutation.

    The payload each recipient sees is rendered later, per role, by the
    protocol layer; this only says what happened and to whom it goes.
    """

    kind: str
    event: Optional[SocEvent] = None
    changed: tuple = ()
    message: Optional[ChatMessage] = None
    data: Optional[dict] = None
    only_client: Optional[str] = None
    exclude_client: Optional[str] = None


class Exercise:
    """All exercise state plus the mutation methods that are its only writers."""

    def __init__(self, config: ExerciseConfig, catalog: Sequence[LogTemplate]):
        self.config = config
        self.catalog = list(catalog)
        self.store = EventStore(config.regions, config.devices)
        self.audit = AuditLog()
        self.sessions = SessionRegistry(
            config.regions, config.teacher_token, config.max_teachers
        )
        self.chat = ChatLog(config.regions)
        self.generator = EventGenerator(
            config.seed, self.catalog, config.regions, config.devices,
            config.rate_per_minute, config.fp_ratio,
        )
        self.endgame_report: Optional[dict] = None
        self.started_at = now_ms()

    # -- helpers -----------------------------------------------------------

    @property
    def endgame_fired(self) -> bool:
        return self.endgame_report is not None

    def _require_teacher(self, actor: ClientSession) -> None:
        if actor.role != ROLE_TEACHER:
            raise ForbiddenError("teacher role required")

    def _presence_item(self, exclude: Optional[str] = None) -> BroadcastItem:
        return BroadcastItem(
            "presence", data=self.sessions.presence_payload(), exclude_client=exclude
        )

    def _counters_item(self) -> BroadcastItem:
        return BroadcastItem("counters", data=self.store.counters.to_payload())

    def _generator_item(self) -> BroadcastItem:
        return BroadcastItem("generator.state", data=self.generator.state_payload())

    def _create_event(self, event: SocEvent, action: str, actor: str, at: int) -> list[BroadcastItem]:
        self.store.add(event)
        self.audit.append(action, actor, at, event_id=event.id,
                          payload={"event": event_record(event)})
        return [BroadcastItem("event.new", event=event), self._counters_item()]

    # -- session lifecycle ---------------------------------------------------

    def join(self, display_name: str, role: str, region: Optional[str],
             teacher_token: Optional[str], at: Optional[int] = None
             ) -> tuple[ClientSession, list[BroadcastItem]]:
        at = now_ms() if at is None else at
        session = self.sessions.join(display_name, role, at,
                                     region=region, teacher_token=teacher_token)
        self.audit.append("join", session.client_id, at,
                          payload={"session": session.to_record()})
        # The joiner's snapshot already carries presence; only peers need the update.
        return session, [self._presence_item(exclude=session.client_id)]

    def leave(self, client_id: str, at: Optional[int] = None,
              reason: str = "close") -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        session = self.sessions.leave(client_id, at)
        if session is None:
            return []
        self.audit.append("leave", client_id, at, payload={"reason": reason})
        return [self._presence_item()]

    def heartbeat(self, client_id: str, at: Optional[int] = None) -> list[BroadcastItem]:
        self.sessions.heartbeat(client_id, now_ms() if at is None else at)
        return []

    def sweep_presence(self, at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        dropped = self.sessions.sweep(at)
        if not dropped:
            return []
        for session in dropped:
            self.audit.append("leave", "system", at,
                              payload={"reason": "timeout", "clientId": session.client_id})
        return [self._presence_item()]

    def assign_region(self, actor: ClientSession, client_id: str, region: str,
                      at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        self._require_teacher(actor)
        target = self.sessions.get(client_id)
        previous = target.region if target else None
        session = self.sessions.assign_region(client_id, region)
        self.audit.append("assign", actor.client_id, at,
                          payload={"clientId": client_id, "region": region,
                                   "previous": previous})
        # The moved student gets a fresh snapshot: their visible chat history
        # just changed wholesale, and snapshot is the frame kind that carries it.
        return [
            BroadcastItem("snapshot", only_client=session.client_id),
            self._presence_item(),
        ]

    # -- chat ----------------------------------------------------------------

    def post_message(self, actor: ClientSession, channel: str, body: str,
                     at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        trimmed = self.chat.validate_post(actor, channel, body)
        entry = self.audit.append("chat", actor.client_id, at)
        message = ChatMessage(
            id=entry.seq, channel=channel, sender_id=actor.client_id,
            sender_name=actor.display_name, sender_role=actor.role,
            body=trimmed, at=at,
        )
        entry.payload = {"message": message.to_record()}
        self.chat.add(message)
        return [BroadcastItem("chat.message", message=message)]

    # -- triage and moderation -------------------------------------------------

    def triage_event(self, actor: ClientSession, event_id: int, decision: str,
                     at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        event = triage.triage_event(self.store, actor, event_id, decision, at)
        self.audit.append("triage", actor.client_id, at, event_id=event_id,
                          payload={"decision": decision})
        return [BroadcastItem("event.update", event=event,
                              changed=("triageState", "triagedBy", "triagedAt"))]

    def annotate_event(self, actor: ClientSession, event_id: int, text: str,
                       at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        event = triage.annotate_event(self.store, actor, event_id, text)
        self.audit.append("annotate", actor.client_id, at, event_id=event_id,
                          payload={"text": text or ""})
        return [BroadcastItem("event.update", event=event, changed=("annotation",))]

    def set_colour(self, actor: ClientSession, event_id: int, colour: str,
                   at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        event = triage.set_colour(self.store, actor, event_id, colour)
        self.audit.append("colour", actor.client_id, at, event_id=event_id,
                          payload={"colour": colour})
        return [BroadcastItem("event.update", event=event, changed=("colourTag",))]

    def delete_event(self, actor: ClientSession, event_id: int,
                     at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        triage.delete_event(self.store, actor, event_id)
        self.audit.append("delete", actor.client_id, at, event_id=event_id)
        return [
            BroadcastItem("event.delete", data={"eventId": event_id}),
            self._counters_item(),
        ]

    def confirm_escalation(self, actor: ClientSession, event_id: int,
                           at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        event = triage.confirm_escalation(self.store, actor, event_id)
        self.audit.append("confirm", actor.client_id, at, event_id=event_id,
                          payload={"verdict": event.verdict})
        # The verdict flips the event to revealed; the per-role renderer adds
        # the newly visible ground-truth fields for students.
        return [BroadcastItem("event.update", event=event, changed=("verdict",))]

    # -- generator control -----------------------------------------------------

    def set_pacing(self, actor: ClientSession, *, running: Optional[bool] = None,
                   rate_per_minute: Optional[float] = None,
                   fp_ratio: Optional[float] = None,
                   now: Optional[float] = None,
                   at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        now = time.monotonic() if now is None else now
        self._require_teacher(actor)
        if running is None and rate_per_minute is None and fp_ratio is None:
            raise InvalidError("pacing change names no fields")
        self.generator.set_pacing(now=now, rate_per_minute=rate_per_minute,
                                  fp_ratio=fp_ratio, running=running)
        action = "generator_start" if self.generator.running else "generator_stop"
        self.audit.append(action, actor.client_id, at,
                          payload=self.generator.state_payload())
        return [self._generator_item()]

    def inject_event(self, actor: ClientSession, spec: Optional[dict] = None,
                     at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        self._require_teacher(actor)
        spec = dict(spec or {})
        region = spec.get("region")
        if region is not None and region not in self.config.regions:
            raise InvalidError(f"unknown region {region!r}")
        device = spec.get("deviceType")
        if device is not None and device not in self.config.devices:
            raise InvalidError(f"unknown deviceType {device!r}")
        severity = spec.get("severity")
        if severity is not None and severity not in ("low", "medium", "high", "critical"):
            raise InvalidError(f"unknown severity {severity!r}")
        status = spec.get("status")
        if status is not None and status not in ("genuine", "false_positive"):
            raise InvalidError(f"unknown status {status!r}")
        event = self.generator.next_injected(self.store.allocate_id(), at, spec)
        return self._create_event(event, "inject", actor.client_id, at)

    def generator_tick(self, now: Optional[float] = None,
                       at: Optional[int] = None) -> list[BroadcastItem]:
        """Emit the events the elapsed time has earned (scheduler entry point)."""
        now = time.monotonic() if now is None else now
        at = now_ms() if at is None else at
        items: list[BroadcastItem] = []
        for _ in range(self.generator.owed(now)):
            event = self.generator.next_event(self.store.allocate_id(), at)
            items.extend(self._create_event(event, "create", "system", at))
        return items

    # -- endgame ----------------------------------------------------------------

    def fire_endgame(self, actor: ClientSession,
                     at: Optional[int] = None) -> list[BroadcastItem]:
        at = now_ms() if at is None else at
        self._require_teacher(actor)
        if self.endgame_fired:
            raise PreconditionError("exercise already ended")
        self.generator.freeze()
        self.endgame_report = triage.compute_endgame_report(
            self.store.all_events(), self.config.regions, at
        )
        self.audit.append("endgame", actor.client_id, at)
        return [
            BroadcastItem("endgame.report", data=self.endgame_report),
            self._generator_item(),
        ]
