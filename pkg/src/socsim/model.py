"""Shared exercise state: events, counters, templates, and the audit trail.

Everything here is owned by a single authoritative writer (see exercise.py);
readers only ever get copies or freshly built dicts. The wire/export field
names are camelCase and are produced exclusively by the record/view builders
in this module so that redaction has exactly one choke point.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

SEVERITIES = ("low", "medium", "high", "critical")
STATUSES = ("genuine", "false_positive")
TRIAGE_STATES = ("untriaged", "escalated", "monitoring", "dismissed")
VERDICTS = ("pending", "confirmed_genuine", "confirmed_false_positive")
COLOUR_TAGS = ("red", "amber", "green", "blue", "none")
STATUS_CLASSES = ("benign_noise", "ambiguous", "attack")

ROLE_STUDENT = "student"
ROLE_TEACHER = "teacher"

DEFAULT_REGIONS = ("North America", "Europe", "Asia-Pacific", "South America")
DEFAULT_DEVICES = ("firewall", "ids", "server", "workstation", "router", "domain-controller")

# Ground-truth fields stripped from student views until the event is revealed.
STUDENT_HIDDEN_FIELDS = ("status", "templateId", "injected")

RECOGNIZED_PLACEHOLDERS = ("ip", "port", "user", "device", "region")
_PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")

AUDIT_ACTIONS = (
    "create", "inject", "annotate", "colour", "triage", "confirm", "delete",
    "chat", "join", "leave", "assign", "generator_start", "generator_stop",
    "endgame",
)


def now_ms() -> int:
    """Current UTC wall clock in epoch milliseconds (the wire time unit)."""
    return int(time.time() * 1000)


@dataclass
class SocEvent:
    """One synthetic alert with full ground truth, triage state and audit hooks."""

    id: int
    created_at: int  # epoch ms
    region: str
    device_type: str
    severity: str
    source_ip: str
    description: str
    template_id: str
    status: str  # ground truth, immutable after creation
    injected: bool
    triage_state: str = "untriaged"
    triaged_by: Optional[str] = None
    triaged_at: Optional[int] = None
    annotation: Optional[str] = None
    colour_tag: str = "none"
    verdict: str = "pending"
    deleted: bool = False

    def revealed(self, endgame_fired: bool) -> bool:
        return endgame_fired or self.verdict != "pending"


def event_record(event: SocEvent) -> dict:
    """Full wire/export record, ground truth included. Never student-bound as-is."""
    return {
        "id": event.id,
        "createdAt": event.created_at,
        "region": event.region,
        "deviceType": event.device_type,
        "severity": event.severity,
        "sourceIp": event.source_ip,
        "description": event.description,
        "templateId": event.template_id,
        "status": event.status,
        "injected": event.injected,
        "triageState": event.triage_state,
        "triagedBy": event.triaged_by,
        "triagedAt": event.triaged_at,
        "annotation": event.annotation,
        "colourTag": event.colour_tag,
        "verdict": event.verdict,
        "deleted": event.deleted,
    }


def event_from_record(rec: dict) -> SocEvent:
    """Inverse of event_record; used by audit replay."""
    return SocEvent(
        id=rec["id"],
        created_at=rec["createdAt"],
        region=rec["region"],
        device_type=rec["deviceType"],
        severity=rec["severity"],
        source_ip=rec["sourceIp"],
        description=rec["description"],
        template_id=rec["templateId"],
        status=rec["status"],
        injected=rec["injected"],
        triage_state=rec.get("triageState", "untriaged"),
        triaged_by=rec.get("triagedBy"),
        triaged_at=rec.get("triagedAt"),
        annotation=rec.get("annotation"),
        colour_tag=rec.get("colourTag", "none"),
        verdict=rec.get("verdict", "pending"),
        deleted=rec.get("deleted", False),
    )


def redact_for_role(event: SocEvent, role: str, revealed: bool) -> dict:
    """Build the event view a client of `role` is entitled to.

    Teachers get the full record (tombstone flag included). Students never see
    the tombstone flag, and lose status/templateId/injected until the event is
    revealed (verdict confirmed, or endgame fired). Callers filter tombstones
    out of student-bound traffic before this point.
    """
    rec = event_record(event)
    if role == ROLE_TEACHER:
        return rec
    del rec["deleted"]
    if not revealed:
        for key in STUDENT_HIDDEN_FIELDS:
            del rec[key]
    return rec


@dataclass
class Counters:
    """Dashboard summary figures over non-deleted events.

    All configured regions/devices plus every severity are always present as
    keys so the incrementally maintained copy compares exactly equal to the
    recount oracle.
    """

    total_events: int = 0
    genuine: int = 0
    false_positive: int = 0
    by_region: dict = field(default_factory=dict)
    by_device_type: dict = field(default_factory=dict)
    by_severity: dict = field(default_factory=dict)

    @classmethod
    def zero(cls, regions: Iterable[str], devices: Iterable[str]) -> "Counters":
        return cls(
            by_region={r: 0 for r in regions},
            by_device_type={d: 0 for d in devices},
            by_severity={s: 0 for s in SEVERITIES},
        )

    def apply(self, event: SocEvent, delta: int) -> None:
        self.total_events += delta
        if event.status == "genuine":
            self.genuine += delta
        else:
            self.false_positive += delta
        self.by_region[event.region] = self.by_region.get(event.region, 0) + delta
        self.by_device_type[event.device_type] = (
            self.by_device_type.get(event.device_type, 0) + delta
        )
        self.by_severity[event.severity] = self.by_severity.get(event.severity, 0) + delta

    def to_payload(self) -> dict:
        return {
            "totalEvents": self.total_events,
            "genuine": self.genuine,
            "falsePositive": self.false_positive,
            "byRegion": dict(self.by_region),
            "byDeviceType": dict(self.by_device_type),
            "bySeverity": dict(self.by_severity),
        }


def recount(events: Iterable[SocEvent], regions: Iterable[str], devices: Iterable[str]) -> Counters:
    """Ground-truth oracle: full scan of non-deleted events.

    The incrementally maintained Counters must always equal this.
    """
    counters = Counters.zero(regions, devices)
    for event in events:
        if not event.deleted:
            counters.apply(event, +1)
    return counters


class EventStore:
    """Authoritative event container with incrementally maintained counters."""

    def __init__(self, regions: Iterable[str], devices: Iterable[str]):
        self.regions = tuple(regions)
        self.devices = tuple(devices)
        self.events: dict[int, SocEvent] = {}
        self.counters = Counters.zero(self.regions, self.devices)
        self._next_id = 1

    def allocate_id(self) -> int:
        eid = self._next_id
        self._next_id += 1
        return eid

    def add(self, event: SocEvent) -> None:
        if event.id in self.events:
            raise ValueError(f"duplicate event id {event.id}")
        self.events[event.id] = event
        self._next_id = max(self._next_id, event.id + 1)
        if not event.deleted:
            self.counters.apply(event, +1)

    def get(self, event_id: int) -> Optional[SocEvent]:
        return self.events.get(event_id)

    def get_live(self, event_id: int) -> Optional[SocEvent]:
        event = self.events.get(event_id)
        if event is None or event.deleted:
            return None
        return event

    def mark_deleted(self, event_id: int) -> SocEvent:
        event = self.events[event_id]
        if event.deleted:
            raise ValueError(f"event {event_id} already deleted")
        event.deleted = True
        self.counters.apply(event, -1)
        return event

    def all_events(self) -> list[SocEvent]:
        """Every event, tombstones included, in id order."""
        return list(self.events.values())

    def live_events(self) -> list[SocEvent]:
        return [e for e in self.events.values() if not e.deleted]

    def recount(self) -> Counters:
        return recount(self.events.values(), self.regions, self.devices)


def filter_events(
    events: Iterable[SocEvent],
    criteria: Optional[dict] = None,
    role: str = ROLE_STUDENT,
) -> list[SocEvent]:
    """Non-deleted events matching the conjunction of provided criteria, id order.

    The `status` criterion is honored only for teacher callers; unknown names
    in criteria simply match nothing.
    """
    criteria = criteria or {}
    region = criteria.get("region")
    device = criteria.get("deviceType")
    severity = criteria.get("severity")
    triage_state = criteria.get("triageState")
    status = criteria.get("status") if role == ROLE_TEACHER else None
    text = criteria.get("textSubstring")
    text_lower = text.lower() if text else None

    out = []
    for event in events:
        if event.deleted:
            continue
        if region is not None and event.region != region:
            continue
        if device is not None and event.device_type != device:
            continue
        if severity is not None and event.severity != severity:
            continue
        if triage_state is not None and event.triage_state != triage_state:
            continue
        if status is not None and event.status != status:
            continue
        if text_lower is not None and text_lower not in event.description.lower():
            continue
        out.append(event)
    out.sort(key=lambda e: e.id)
    return out


@dataclass
class LogTemplate:
    """Parameterized log pattern with a ground-truth class and applicability."""

    id: str
    pattern: str
    status_class: str
    applicable_devices: tuple = ()
    severity_weights: dict = field(default_factory=dict)

    def placeholders(self) -> list[str]:
        return _PLACEHOLDER_RE.findall(self.pattern)

    def render(self, values: dict) -> str:
        return _PLACEHOLDER_RE.sub(lambda m: str(values[m.group(1)]), self.pattern)

    def compatible_with(self, status: str) -> bool:
        if self.status_class == "ambiguous":
            return True
        if status == "genuine":
            return self.status_class == "attack"
        return self.status_class == "benign_noise"

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "pattern": self.pattern,
            "statusClass": self.status_class,
            "applicableDevices": list(self.applicable_devices),
            "severityWeights": dict(self.severity_weights),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "LogTemplate":
        return cls(
            id=rec.get("id", ""),
            pattern=rec.get("pattern", ""),
            status_class=rec.get("statusClass", ""),
            applicable_devices=tuple(rec.get("applicableDevices", ()) or ()),
            severity_weights=dict(rec.get("severityWeights", {}) or {}),
        )


def validate_template_catalog(catalog: list[LogTemplate]) -> list[str]:
    """All invariant violations in the catalog; empty list means valid."""
    errors: list[str] = []
    seen_ids: set[str] = set()
    classes_present: set[str] = set()

    for tpl in catalog:
        label = tpl.id or "<missing id>"
        if not tpl.id:
            errors.append("template with missing id")
        elif tpl.id in seen_ids:
            errors.append(f"duplicate template id {tpl.id}")
        else:
            seen_ids.add(tpl.id)

        if tpl.status_class not in STATUS_CLASSES:
            errors.append(f"{label}: unknown statusClass {tpl.status_class!r}")
        else:
            classes_present.add(tpl.status_class)

        for ph in tpl.placeholders():
            if ph not in RECOGNIZED_PLACEHOLDERS:
                errors.append(f"{label}: unrecognized placeholder {ph!r}")

        weights = tpl.severity_weights
        if not any(w > 0 for w in weights.values()):
            errors.append(f"{label}: severityWeights needs at least one positive weight")
        for sev, w in weights.items():
            if sev not in SEVERITIES:
                errors.append(f"{label}: unknown severity {sev!r} in severityWeights")
            elif w < 0:
                errors.append(f"{label}: negative weight for severity {sev!r}")

    if catalog and "attack" not in classes_present:
        errors.append("catalog has no attack template")
    if catalog and "benign_noise" not in classes_present:
        errors.append("catalog has no benign_noise template")
    if not catalog:
        errors.append("catalog is empty")
    return errors


def default_template_catalog() -> list[LogTemplate]:
    """Built-in catalog so the simulator runs with zero configuration."""
    t = LogTemplate
    return [
        # Benign noise: alerts whose ground truth is always a false positive.
        t("cpu-spike", "CPU utilization exceeded 95% on {device} ({ip}) for over five minutes",
          "benign_noise", (), {"low": 5, "medium": 4, "high": 1}),
        t("disk-threshold", "Disk usage on {device} ({ip}) crossed the 90% capacity threshold",
          "benign_noise", ("server", "workstation", "domain-controller"),
          {"low": 6, "medium": 3, "high": 1}),
        t("cert-expiry", "TLS certificate served by {device} ({ip}) expires within 14 days",
          "benign_noise", ("server", "firewall", "router"), {"low": 7, "medium": 3}),
        t("av-stale", "Antivirus definitions on {device} are more than 7 days out of date",
          "benign_noise", ("workstation", "server"), {"low": 6, "medium": 4}),
        # Ambiguous: plausible either way; the fp ratio decides per event.
        t("failed-login-burst", "User {user} failed login 6 times within 2 minutes on {device} from {ip}",
          "ambiguous", (), {"medium": 5, "high": 4, "critical": 1}),
        t("port-scan", "Port scan from {ip} against {device}: 40 ports probed including {port}",
          "ambiguous", ("firewall", "ids", "router"), {"medium": 5, "high": 4, "critical": 1}),
        t("scheduled-task", "New scheduled task registered by {user} on {device}",
          "ambiguous", ("workstation", "server", "domain-controller"),
          {"low": 2, "medium": 6, "high": 2}),
        t("geo-login", "Login for {user} on {device} from unfamiliar address {ip} ({region} egress)",
          "ambiguous", (), {"medium": 6, "high": 3, "critical": 1}),
        # Attack: alerts whose ground truth is always a genuine incident.
        t("malware-signature", "Malware signature match on {device}: process beaconing to {ip}:{port}",
          "attack", ("workstation", "server", "ids"), {"high": 5, "critical": 5}),
        t("audit-log-cleared", "Security audit log cleared on {device} by {user}",
          "attack", ("domain-controller", "server", "workstation"), {"high": 4, "critical": 6}),
        t("priv-escalation", "Privilege escalation: {user} added to Domain Admins from {device} ({ip})",
          "attack", ("domain-controller", "workstation", "server"), {"critical": 8, "high": 2}),
        t("dlp-exfil", "Outbound transfer of 4.2 GB from {device} to {ip}:{port} flagged by DLP",
          "attack", ("firewall", "server", "workstation"), {"high": 6, "critical": 4}),
    ]


@dataclass
class AuditEntry:
    """One committed mutation. seq is strictly increasing; the log is append-only."""

    seq: int
    at: int
    actor: str
    action: str
    event_id: Optional[int]
    payload: dict

    def to_record(self) -> dict:
        rec = {
            "seq": self.seq,
            "at": self.at,
            "actor": self.actor,
            "action": self.action,
            "payload": self.payload,
        }
        if self.event_id is not None:
            rec["eventId"] = self.event_id
        return rec


class AuditLog:
    """Append-only trail of every committed mutation, in commit order."""

    def __init__(self) -> None:
        self.entries: list[AuditEntry] = []
        self._next_seq = 1

    def append(self, action: str, actor: str, at: int,
               event_id: Optional[int] = None, payload: Optional[dict] = None) -> AuditEntry:
        assert action in AUDIT_ACTIONS, f"unknown audit action {action}"
        entry = AuditEntry(
            seq=self._next_seq, at=at, actor=actor, action=action,
            event_id=event_id, payload=payload or {},
        )
        self._next_seq += 1
        self.entries.append(entry)
        return entry

    def __len__(self) -> int:
        return len(self.entries)

    def to_records(self) -> list[dict]:
        return [e.to_record() for e in self.entries]
