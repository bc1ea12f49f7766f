"""Transcript export for the debrief, and audit-log replay.

The export is one JSON document with full ground truth (teacher token
elided). Replaying its auditLog section against an empty store must
reproduce the events section byte-for-byte once canonicalized; tests and the
acceptance suite hold the system to that.
"""

from __future__ import annotations

import json
from typing import Iterable

from .chat import message_from_record
from .exercise import Exercise
from .model import EventStore, event_from_record, event_record


def canonical_json(doc) -> str:
    """Stable serialization: sorted keys, no whitespace."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def build_export(exercise: Exercise) -> dict:
    doc = {
        "config": exercise.config.to_record(include_token=False),
        "events": [event_record(e) for e in exercise.store.all_events()],
        "auditLog": exercise.audit.to_records(),
        "chatHistories": exercise.chat.all_histories(),
        "sessions": exercise.sessions.to_records(),
    }
    if exercise.endgame_report is not None:
        doc["endgameReport"] = exercise.endgame_report
    return doc


def replay_events(audit_records: Iterable[dict], regions, devices) -> EventStore:
    """Rebuild the event store from audit entries alone.

    Only event-bearing actions matter here; chat, presence, and generator
    entries are part of the trail but do not touch the store.
    """
    store = EventStore(regions, devices)
    for entry in audit_records:
        action = entry["action"]
        payload = entry.get("payload", {})
        event_id = entry.get("eventId")
        if action in ("create", "inject"):
            store.add(event_from_record(payload["event"]))
        elif action == "triage":
            event = store.events[event_id]
            event.triage_state = payload["decision"]
            event.triaged_by = entry["actor"]
            event.triaged_at = entry["at"]
        elif action == "annotate":
            store.events[event_id].annotation = payload["text"] or None
        elif action == "colour":
            store.events[event_id].colour_tag = payload["colour"]
        elif action == "confirm":
            store.events[event_id].verdict = payload["verdict"]
        elif action == "delete":
            store.mark_deleted(event_id)
    return store


def replay_chat(audit_records: Iterable[dict]) -> list:
    """Chat messages reconstructed from the audit trail, in id order."""
    return [message_from_record(e["payload"]["message"])
            for e in audit_records if e["action"] == "chat"]


def replayed_events_section(export_doc: dict) -> list[dict]:
    """The events section an export's audit log deterministically implies."""
    store = replay_events(
        export_doc["auditLog"],
        export_doc["config"]["regions"],
        export_doc["config"]["devices"],
    )
    return [event_record(e) for e in store.all_events()]


def write_export(exercise: Exercise, path: str) -> None:
    doc = build_export(exercise)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
