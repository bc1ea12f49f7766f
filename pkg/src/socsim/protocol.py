"""The wire contract: frame schemas, command validation, per-role rendering.

One JSON object per WebSocket text message. Server frames carry
{seq, kind, payload, at} with seq starting at 1 per connection; client frames
carry {kind, payload} plus an optional seq echoed back as refSeq on errors.
Redaction happens here, at the serialization boundary, and nowhere else:
whatever leaves render_item()/build_snapshot() is what a client sees.

The load harness imports this module too, so server and harness can never
disagree about schemas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import CommandError, ForbiddenError, InvalidError, UnknownKindError
from .exercise import BroadcastItem, Exercise
from .model import ROLE_STUDENT, ROLE_TEACHER, SocEvent, redact_for_role
from .session import ClientSession

CLIENT_KINDS = (
    "hello", "chat.send", "event.annotate", "event.triage", "heartbeat",
    "teacher.pacing", "teacher.inject", "teacher.colour", "teacher.delete",
    "teacher.confirm", "teacher.assign", "teacher.endgame",
)

SERVER_KINDS = (
    "snapshot", "event.new", "event.update", "event.delete", "counters",
    "chat.message", "presence", "generator.state", "endgame.report", "error",
)

ERROR_CODES = ("forbidden", "not_found", "invalid", "precondition", "unknown_kind")

# Consecutive decode-level protocol errors before the connection is closed.
# Domain failures (not_found, precondition, bad values) never count: a student
# mis-clicking must not be disconnected, a client speaking garbage must be.
MAX_PROTOCOL_STRIKES = 3


@dataclass
class ClientCommand:
    kind: str
    payload: dict
    seq: Optional[int] = None


def parse_frame(raw) -> ClientCommand:
    """Parse one client JSON text frame into a (kind, payload, seq) triple.

    Shape errors raise InvalidError, an unrecognized kind UnknownKindError;
    both count as protocol strikes. Unknown extra fields are ignored.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidError("frame is not valid UTF-8") from exc
    try:
        doc = json.loads(raw)
    except ValueError as exc:
        raise InvalidError("frame is not valid JSON") from exc
    if not isinstance(doc, dict):
        raise InvalidError("frame must be a JSON object")
    kind = doc.get("kind")
    if not isinstance(kind, str):
        raise InvalidError("frame is missing a string `kind`")
    if kind not in CLIENT_KINDS:
        raise UnknownKindError(f"unknown kind {kind!r}")
    payload = doc.get("payload", {})
    if not isinstance(payload, dict):
        raise InvalidError("`payload` must be an object")
    seq = doc.get("seq")
    if seq is not None and not isinstance(seq, int):
        seq = None
    return ClientCommand(kind=kind, payload=payload, seq=seq)


def _require(payload: dict, key: str, types, kind: str):
    value = payload.get(key)
    if not isinstance(value, types):
        raise InvalidError(f"{kind}: field {key!r} missing or of wrong type")
    return value


def decode_client_frame(raw, session: Optional[ClientSession]) -> ClientCommand:
    """Parse and validate one post-hello client command against the session role.

    Raises CommandError subclasses; the caller turns them into error frames
    and counts decode-level ones toward the strike limit.
    """
    cmd = parse_frame(raw)
    if cmd.kind == "hello":
        raise InvalidError("hello is only valid as the first frame")
    if session is None:
        raise InvalidError("first frame must be hello")
    if cmd.kind.startswith("teacher.") and session.role != ROLE_TEACHER:
        raise ForbiddenError(f"{cmd.kind} requires the teacher role")

    p = cmd.payload
    if cmd.kind == "chat.send":
        _require(p, "channel", str, cmd.kind)
        _require(p, "body", str, cmd.kind)
    elif cmd.kind == "event.annotate":
        _require(p, "eventId", int, cmd.kind)
        _require(p, "text", str, cmd.kind)
    elif cmd.kind == "event.triage":
        _require(p, "eventId", int, cmd.kind)
        _require(p, "decision", str, cmd.kind)
    elif cmd.kind == "teacher.pacing":
        for key, types in (("running", bool), ("ratePerMinute", (int, float)),
                           ("fpRatio", (int, float))):
            if key in p and p[key] is not None and not isinstance(p[key], types):
                raise InvalidError(f"{cmd.kind}: field {key!r} of wrong type")
    elif cmd.kind == "teacher.inject":
        for key in ("region", "deviceType", "severity", "status"):
            if key in p and p[key] is not None and not isinstance(p[key], str):
                raise InvalidError(f"{cmd.kind}: field {key!r} of wrong type")
    elif cmd.kind == "teacher.colour":
        _require(p, "eventId", int, cmd.kind)
        _require(p, "colour", str, cmd.kind)
    elif cmd.kind in ("teacher.delete", "teacher.confirm"):
        _require(p, "eventId", int, cmd.kind)
    elif cmd.kind == "teacher.assign":
        _require(p, "clientId", str, cmd.kind)
        _require(p, "region", str, cmd.kind)
    # heartbeat and teacher.endgame carry empty payloads
    return cmd


def decode_hello(raw) -> ClientCommand:
    cmd = parse_frame(raw)
    if cmd.kind != "hello":
        raise InvalidError("first frame must be hello")
    _require(cmd.payload, "displayName", str, "hello")
    _require(cmd.payload, "role", str, "hello")
    return cmd


def make_frame(seq: int, kind: str, payload: dict, at: int) -> dict:
    assert kind in SERVER_KINDS, f"unknown server kind {kind}"
    return {"seq": seq, "kind": kind, "payload": payload, "at": at}


def error_payload(exc: CommandError, ref_seq: Optional[int] = None) -> dict:
    payload = {"code": exc.code, "message": exc.message}
    if ref_seq is not None:
        payload["refSeq"] = ref_seq
    return payload


def event_view(event: SocEvent, session: ClientSession, endgame_fired: bool) -> dict:
    return redact_for_role(event, session.role, event.revealed(endgame_fired))


def render_item(item: BroadcastItem, session: ClientSession,
                exercise: Exercise) -> Optional[dict]:
    """Payload of one broadcast item for one recipient, or None if not entitled."""
    if item.only_client is not None and session.client_id != item.only_client:
        return None
    if item.exclude_client is not None and session.client_id == item.exclude_client:
        return None

    kind = item.kind
    if kind == "event.new":
        if session.role != ROLE_TEACHER and item.event.deleted:
            return None
        return event_view(item.event, session, exercise.endgame_fired)
    if kind == "event.update":
        if session.role != ROLE_TEACHER and item.event.deleted:
            return None
        view = event_view(item.event, session, exercise.endgame_fired)
        changed = {k: view[k] for k in item.changed if k in view}
        if (session.role == ROLE_STUDENT and "verdict" in item.changed
                and item.event.verdict != "pending"):
            # Confirmation just revealed the event: ship the ground-truth
            # fields the student view now includes.
            for key in ("status", "templateId", "injected"):
                if key in view:
                    changed[key] = view[key]
        return {"eventId": item.event.id, "changed": changed}
    if kind == "chat.message":
        if not exercise.chat.visible_to(item.message, session):
            return None
        return item.message.to_record()
    if kind == "snapshot":
        return build_snapshot(exercise, session)
    # counters, presence, event.delete, generator.state, endgame.report go to
    # everyone with the same payload.
    return item.data


def build_snapshot(exercise: Exercise, session: ClientSession) -> dict:
    """One consistent view of everything the client is entitled to see.

    Students get live events only, redacted; teachers get tombstones too.
    """
    endgame = exercise.endgame_fired
    if session.role == ROLE_TEACHER:
        events = [event_view(e, session, endgame) for e in exercise.store.all_events()]
    else:
        events = [event_view(e, session, endgame) for e in exercise.store.live_events()]
    snapshot = {
        "you": session.to_record(),
        "presence": exercise.sessions.presence_payload(),
        "generatorState": exercise.generator.state_payload(),
        "counters": exercise.store.counters.to_payload(),
        "events": events,
        "chatHistories": exercise.chat.history_for(session),
    }
    if endgame:
        snapshot["endgame"] = exercise.endgame_report
    return snapshot
