"""Triage decisions, annotations, teacher moderation, and the endgame report."""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import ForbiddenError, InvalidError, NotFoundError, PreconditionError
from .model import (
    COLOUR_TAGS,
    ROLE_TEACHER,
    TRIAGE_STATES,
    EventStore,
    SocEvent,
)
from .session import ClientSession

TRIAGE_DECISIONS = ("escalated", "monitoring", "dismissed")

MAX_ANNOTATION = 2000

_CELL_KEYS = (
    "escalatedGenuine", "escalatedFalsePositive",
    "dismissedGenuine", "dismissedFalsePositive",
    "monitoringGenuine", "monitoringFalsePositive",
    "untriagedGenuine", "untriagedFalsePositive",
)


def _require_live_event(store: EventStore, event_id: int) -> SocEvent:
    event = store.get_live(event_id)
    if event is None:
        raise NotFoundError(f"no event {event_id}")
    return event


def _require_region_access(actor: ClientSession, event: SocEvent) -> None:
    # Students act only inside their team's region; teachers act anywhere.
    if actor.role != ROLE_TEACHER and actor.region != event.region:
        raise ForbiddenError("event belongs to another region's team")


def triage_event(store: EventStore, actor: ClientSession, event_id: int,
                 decision: str, at: int) -> SocEvent:
    """Set the triage state; latest decision wins, history lives in the audit log."""
    if decision not in TRIAGE_DECISIONS:
        raise InvalidError(f"unknown triage decision {decision!r}")
    event = _require_live_event(store, event_id)
    _require_region_access(actor, event)
    event.triage_state = decision
    event.triaged_by = actor.client_id
    event.triaged_at = at
    return event


def annotate_event(store: EventStore, actor: ClientSession, event_id: int,
                   text: str) -> SocEvent:
    """Replace the written justification; empty text clears it."""
    if text is None:
        text = ""
    if len(text) > MAX_ANNOTATION:
        raise InvalidError(f"annotation exceeds {MAX_ANNOTATION} characters")
    event = _require_live_event(store, event_id)
    _require_region_access(actor, event)
    event.annotation = text if text else None
    return event


def set_colour(store: EventStore, actor: ClientSession, event_id: int,
               colour: str) -> SocEvent:
    if actor.role != ROLE_TEACHER:
        raise ForbiddenError("only teachers may colour-code events")
    if colour not in COLOUR_TAGS:
        raise InvalidError(f"unknown colour {colour!r}")
    event = _require_live_event(store, event_id)
    event.colour_tag = colour
    return event


def delete_event(store: EventStore, actor: ClientSession, event_id: int) -> SocEvent:
    """Tombstone the event: hidden from counters and student views, kept for export."""
    if actor.role != ROLE_TEACHER:
        raise ForbiddenError("only teachers may delete events")
    event = store.get(event_id)
    if event is None or event.deleted:
        raise NotFoundError(f"no event {event_id}")
    return store.mark_deleted(event_id)


def confirm_escalation(store: EventStore, actor: ClientSession, event_id: int) -> SocEvent:
    """Reveal the ground truth of an escalated event.

    The verdict always matches status: the teacher confirms truth, never
    chooses it.
    """
    if actor.role != ROLE_TEACHER:
        raise ForbiddenError("only teachers may confirm escalations")
    event = _require_live_event(store, event_id)
    if event.triage_state != "escalated":
        raise PreconditionError("only escalated events can be confirmed")
    if event.verdict != "pending":
        raise PreconditionError("event already confirmed")
    event.verdict = (
        "confirmed_genuine" if event.status == "genuine" else "confirmed_false_positive"
    )
    return event


def _zero_cells() -> dict:
    return {k: 0 for k in _CELL_KEYS}


def _bucket_key(event: SocEvent) -> str:
    state = event.triage_state if event.triage_state in TRIAGE_STATES else "untriaged"
    suffix = "Genuine" if event.status == "genuine" else "FalsePositive"
    return state + suffix


def _finish_cells(cells: dict) -> dict:
    """Attach precision/recall over escalations; None marks an undefined ratio."""
    escalated = cells["escalatedGenuine"] + cells["escalatedFalsePositive"]
    genuine_total = (cells["escalatedGenuine"] + cells["dismissedGenuine"]
                     + cells["monitoringGenuine"] + cells["untriagedGenuine"])
    cells["precision"] = cells["escalatedGenuine"] / escalated if escalated else None
    cells["recall"] = cells["escalatedGenuine"] / genuine_total if genuine_total else None
    return cells


def compute_endgame_report(events: Iterable[SocEvent], regions: Sequence[str],
                           generated_at: int) -> dict:
    """Bucket non-deleted events by (region, triage state, ground truth).

    Scoring treats the unresolved monitoring state as neither hit nor miss;
    precision and recall are defined over escalations only.
    """
    per_region = {r: _zero_cells() for r in regions}
    overall = _zero_cells()
    for event in events:
        if event.deleted:
            continue
        key = _bucket_key(event)
        per_region.setdefault(event.region, _zero_cells())[key] += 1
        overall[key] += 1
    return {
        "perRegion": {r: _finish_cells(c) for r, c in per_region.items()},
        "overall": _finish_cells(overall),
        "generatedAt": generated_at,
    }
