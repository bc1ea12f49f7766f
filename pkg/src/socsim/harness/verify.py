"""Transcript conformance checks: sequencing, redaction, isolation, convergence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..model import ROLE_STUDENT, ROLE_TEACHER, event_from_record, redact_for_role
from .client import Transcript
from .runner import RunResult

GROUND_TRUTH_KEYS = ("status", "templateId", "injected")


@dataclass
class ConformanceReport:
    violations: list = field(default_factory=list)

    def add(self, client: str, check: str, detail: str,
            frame_seq: Optional[int] = None) -> None:
        ref = f" (frame seq {frame_seq})" if frame_seq is not None else ""
        self.violations.append(f"[{check}] {client}: {detail}{ref}")

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "conformance: ok"
        return "conformance: {} violation(s)\n{}".format(
            len(self.violations), "\n".join(self.violations))


def _check_seq(transcript: Transcript, report: ConformanceReport) -> None:
    expected = 1
    for entry in transcript.frames:
        seq = entry["frame"].get("seq")
        if seq != expected:
            report.add(transcript.name, "seq",
                       f"expected seq {expected}, saw {seq}", frame_seq=seq)
            if isinstance(seq, int):
                expected = seq + 1
            continue
        expected += 1


def _leaked_keys(view: dict) -> list[str]:
    return [k for k in GROUND_TRUTH_KEYS if k in view]


def _check_student_redaction(transcript: Transcript, report: ConformanceReport) -> None:
    """No ground-truth keys in any event payload until that event is revealed."""
    endgame_seen = False
    verdicts: dict[int, str] = {}
    for entry in transcript.frames:
        frame = entry["frame"]
        kind, payload, seq = frame["kind"], frame["payload"], frame.get("seq")
        if kind == "endgame.report":
            endgame_seen = True
        elif kind == "snapshot":
            endgame_seen = endgame_seen or "endgame" in payload
            for view in payload.get("events", []):
                verdicts[view["id"]] = view.get("verdict", "pending")
                leaked = _leaked_keys(view)
                if leaked and not endgame_seen and view.get("verdict", "pending") == "pending":
                    report.add(transcript.name, "redaction",
                               f"snapshot leaks {leaked} for unrevealed event {view['id']}",
                               frame_seq=seq)
        elif kind == "event.new":
            verdicts[payload["id"]] = payload.get("verdict", "pending")
            leaked = _leaked_keys(payload)
            # New events are by definition unconfirmed; post-endgame nothing
            # is created, so ground truth must never ride along here unless
            # the endgame reveal is already in force.
            if leaked and not endgame_seen:
                report.add(transcript.name, "redaction",
                           f"event.new leaks {leaked} for event {payload['id']}",
                           frame_seq=seq)
        elif kind == "event.update":
            changed = payload.get("changed", {})
            event_id = payload.get("eventId")
            if "verdict" in changed:
                verdicts[event_id] = changed["verdict"]
            leaked = _leaked_keys(changed)
            revealed = endgame_seen or verdicts.get(event_id, "pending") != "pending"
            if leaked and not revealed:
                report.add(transcript.name, "redaction",
                           f"event.update leaks {leaked} for unrevealed event {event_id}",
                           frame_seq=seq)


def _check_chat_isolation(transcript: Transcript, report: ConformanceReport) -> None:
    """Students must only ever see their region, their own instructor thread,
    teacher instructor posts, and broadcasts."""
    region = transcript.region
    my_id = None
    for entry in transcript.frames:
        frame = entry["frame"]
        kind, payload, seq = frame["kind"], frame["payload"], frame.get("seq")
        if kind == "snapshot":
            my_id = payload["you"]["clientId"]
            region = payload["you"].get("region")
            for channel, messages in payload.get("chatHistories", {}).items():
                for msg in messages:
                    _check_chat_message(transcript, report, msg, region, my_id, seq)
        elif kind == "chat.message":
            _check_chat_message(transcript, report, payload, region, my_id, seq)


def _check_chat_message(transcript: Transcript, report: ConformanceReport,
                        msg: dict, region: Optional[str], my_id: Optional[str],
                        seq: Optional[int]) -> None:
    channel = msg.get("channel")
    if channel == "broadcast":
        return
    if channel == region:
        return
    if channel == "instructor":
        if msg.get("senderRole") == ROLE_TEACHER or msg.get("senderId") == my_id:
            return
        report.add(transcript.name, "chat-isolation",
                   f"saw another student's instructor message {msg.get('id')}",
                   frame_seq=seq)
        return
    report.add(transcript.name, "chat-isolation",
               f"saw message {msg.get('id')} from channel {channel!r}", frame_seq=seq)


def _fold_events(transcript: Transcript) -> dict[int, dict]:
    events: dict[int, dict] = {}
    for entry in transcript.frames:
        frame = entry["frame"]
        kind, payload = frame["kind"], frame["payload"]
        if kind == "snapshot":
            events = {e["id"]: dict(e) for e in payload.get("events", [])}
        elif kind == "event.new":
            events[payload["id"]] = dict(payload)
        elif kind == "event.update":
            if payload["eventId"] in events:
                events[payload["eventId"]].update(payload["changed"])
        elif kind == "event.delete":
            events.pop(payload["eventId"], None)
    return events


def _check_convergence(transcript: Transcript, export: dict,
                       report: ConformanceReport) -> None:
    """The folded event set must equal the export's role-visible set, field
    by field. Requires the run to have ended quiescent."""
    role = transcript.role
    endgame_fired = "endgameReport" in export
    expected: dict[int, dict] = {}
    for rec in export["events"]:
        event = event_from_record(rec)
        if event.deleted and role != ROLE_TEACHER:
            continue
        expected[event.id] = redact_for_role(
            event, role, event.revealed(endgame_fired))

    folded = _fold_events(transcript)
    if set(folded) != set(expected):
        missing = sorted(set(expected) - set(folded))[:5]
        extra = sorted(set(folded) - set(expected))[:5]
        report.add(transcript.name, "convergence",
                   f"event id sets differ (missing {missing}, extra {extra})")
        return
    for eid, view in expected.items():
        got = folded[eid]
        diff = {k for k in set(view) | set(got) if view.get(k) != got.get(k)}
        if diff:
            report.add(transcript.name, "convergence",
                       f"event {eid} fields differ: {sorted(diff)}")


def verify_transcripts(result: RunResult,
                       export: Optional[dict] = None) -> ConformanceReport:
    """Run every conformance check over a completed run."""
    report = ConformanceReport()
    export = export if export is not None else result.export
    for transcript in result.transcripts.values():
        if not transcript.frames and transcript.faults:
            continue  # connection-level faults are reported separately
        _check_seq(transcript, report)
        if transcript.role == ROLE_STUDENT:
            _check_student_redaction(transcript, report)
            _check_chat_isolation(transcript, report)
        if export is not None:
            _check_convergence(transcript, export, report)
    return report
