"""Deterministic, seeded synthesis of the alert stream plus teacher injection.

Every random attribute of a generated event is a pure function of
(seed, draw index, field tag) through a splitmix64-style counter PRNG, so the
stream replays identically across runs and platforms regardless of pacing,
pauses, or interleaved injections. Injected events draw from a separate
stream keyed the same way, which is what makes injection isolation trivial.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

from .model import (
    SEVERITIES,
    LogTemplate,
    SocEvent,
)
from .errors import InvalidError, PreconditionError

_MASK64 = (1 << 64) - 1

# Streams: generated events and injections never share draws.
STREAM_GENERATED = 0
STREAM_INJECTED = 1

# Field tags keying the per-event draw streams. Fixed forever; changing any
# of these changes every seeded stream.
_TAG_STATUS = 1
_TAG_TEMPLATE = 2
_TAG_REGION = 3
_TAG_DEVICE = 4
_TAG_SEVERITY = 5
_TAG_IP = 6
_TAG_PORT = 7
_TAG_USER = 8

# Catch-up cap: after a clock stall the scheduler emits at most this many
# events in one tick instead of flooding the class.
CATCH_UP_CAP = 5

DEFAULT_RATE_PER_MINUTE = 30.0
DEFAULT_FP_RATIO = 0.6

# Documentation/test address blocks plus 10/8; never routable.
_IP_BLOCKS = ("192.0.2.", "198.51.100.", "203.0.113.")

_PORTS = (21, 22, 23, 25, 53, 80, 110, 135, 139, 143, 389, 443, 445, 465,
          587, 993, 995, 1433, 1521, 3306, 3389, 5432, 5900, 8080, 8443)

_USERS = ("jmorris", "achen", "rpatel", "lgarcia", "dkim", "snowak", "tokafor",
          "mfischer", "administrator", "svc-backup", "svc-sql", "helpdesk01",
          "contractor7", "printops", "labuser", "root")


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix(*parts: int) -> int:
    h = 0x6A09E667F3BCC909  # arbitrary non-zero offset
    for p in parts:
        h = _splitmix64(h ^ (p & _MASK64))
    return h


class DrawStream:
    """Per-event random values keyed by (seed, stream, index, field tag).

    Each tag yields an independent deterministic sequence, so draws for one
    field never perturb another and fields can be drawn lazily.
    """

    def __init__(self, seed: int, stream: int, index: int):
        self._key = _mix(seed, stream, index)

    def u64(self, tag: int, n: int = 0) -> int:
        return _mix(self._key, tag, n)

    def unit(self, tag: int, n: int = 0) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.u64(tag, n) >> 11) * 2.0 ** -53

    def choice(self, seq: Sequence, tag: int, n: int = 0):
        return seq[self.u64(tag, n) % len(seq)]

    def weighted(self, items: Sequence, weights: Sequence[float], tag: int):
        total = float(sum(weights))
        r = self.unit(tag) * total
        acc = 0.0
        for item, w in zip(items, weights):
            acc += w
            if r < acc:
                return item
        return items[-1]


def _draw_source_ip(stream: DrawStream) -> str:
    block = stream.u64(_TAG_IP, 0) % 4
    if block < 3:
        return _IP_BLOCKS[block] + str(1 + stream.u64(_TAG_IP, 1) % 254)
    return "10.{}.{}.{}".format(
        stream.u64(_TAG_IP, 1) % 256,
        stream.u64(_TAG_IP, 2) % 256,
        1 + stream.u64(_TAG_IP, 3) % 254,
    )


def _pick_template(catalog: Sequence[LogTemplate], status: str, stream: DrawStream) -> LogTemplate:
    compatible = [t for t in catalog if t.compatible_with(status)]
    if not compatible:
        raise InvalidError(f"no template compatible with status class for {status!r}")
    return stream.choice(compatible, _TAG_TEMPLATE)


def _pick_device(template: LogTemplate, devices: Sequence[str], stream: DrawStream) -> str:
    # Intersect with the configured device list so a custom device set can't
    # produce events outside it; empty intersection falls back to all devices.
    candidates = [d for d in template.applicable_devices if d in devices] or list(devices)
    return stream.choice(candidates, _TAG_DEVICE)


def _pick_severity(template: LogTemplate, stream: DrawStream) -> str:
    sevs = [s for s in SEVERITIES if template.severity_weights.get(s, 0) > 0]
    weights = [template.severity_weights[s] for s in sevs]
    return stream.weighted(sevs, weights, _TAG_SEVERITY)


def _render_description(template: LogTemplate, event_fields: dict, stream: DrawStream) -> str:
    values = {
        "device": event_fields["device_type"],
        "region": event_fields["region"],
        "ip": event_fields["source_ip"],
    }
    needed = set(template.placeholders())
    if "port" in needed:
        values["port"] = stream.choice(_PORTS, _TAG_PORT)
    if "user" in needed:
        values["user"] = stream.choice(_USERS, _TAG_USER)
    return template.render(values)


def draw_event(
    *,
    seed: int,
    fp_ratio: float,
    regions: Sequence[str],
    devices: Sequence[str],
    catalog: Sequence[LogTemplate],
    index: int,
    event_id: int,
    created_at: int,
) -> SocEvent:
    """Draw generated event number `index` of the stream.

    Attribute draw order is fixed: status, template, region, device,
    severity, then sourceIp and description placeholders. Each comes from its
    own tagged counter stream, so the whole event depends only on
    (seed, index) and the fp ratio in force at this index; wall clock affects
    createdAt alone.
    """
    stream = DrawStream(seed, STREAM_GENERATED, index)
    status = "false_positive" if stream.unit(_TAG_STATUS) < fp_ratio else "genuine"
    template = _pick_template(catalog, status, stream)
    region = stream.choice(regions, _TAG_REGION)
    device_type = _pick_device(template, devices, stream)
    severity = _pick_severity(template, stream)
    source_ip = _draw_source_ip(stream)
    fields = {"region": region, "device_type": device_type, "source_ip": source_ip}
    description = _render_description(template, fields, stream)
    return SocEvent(
        id=event_id,
        created_at=created_at,
        region=region,
        device_type=device_type,
        severity=severity,
        source_ip=source_ip,
        description=description,
        template_id=template.id,
        status=status,
        injected=False,
    )


def draw_injected_event(
    *,
    seed: int,
    regions: Sequence[str],
    devices: Sequence[str],
    catalog: Sequence[LogTemplate],
    index: int,
    event_id: int,
    created_at: int,
    spec: Optional[dict] = None,
) -> SocEvent:
    """Draw injection number `index` from the separate injection stream.

    Unspecified fields default to status=genuine, severity=high, with region
    and device drawn from the injection stream so injections never perturb
    the generated stream.
    """
    spec = spec or {}
    stream = DrawStream(seed, STREAM_INJECTED, index)
    status = spec.get("status") or "genuine"
    template = _pick_template(catalog, status, stream)
    region = spec.get("region") or stream.choice(regions, _TAG_REGION)
    device_type = spec.get("deviceType") or _pick_device(template, devices, stream)
    severity = spec.get("severity") or "high"
    source_ip = _draw_source_ip(stream)
    fields = {"region": region, "device_type": device_type, "source_ip": source_ip}
    description = _render_description(template, fields, stream)
    return SocEvent(
        id=event_id,
        created_at=created_at,
        region=region,
        device_type=device_type,
        severity=severity,
        source_ip=source_ip,
        description=description,
        template_id=template.id,
        status=status,
        injected=True,
    )


class EventGenerator:
    """Pacing state plus the draw counters for one exercise.

    The scheduler owns nothing: it asks `owed()` how many events the elapsed
    time has earned (capped), then materializes them with `next_event()`.
    Changing the rate or pausing only moves timestamps; stream content is a
    function of the draw index alone.
    """

    def __init__(
        self,
        seed: int,
        catalog: Sequence[LogTemplate],
        regions: Sequence[str],
        devices: Sequence[str],
        rate_per_minute: float = DEFAULT_RATE_PER_MINUTE,
        fp_ratio: float = DEFAULT_FP_RATIO,
    ):
        self.seed = seed
        self.catalog = list(catalog)
        self.regions = tuple(regions)
        self.devices = tuple(devices)
        self.rate_per_minute = rate_per_minute
        self.fp_ratio = fp_ratio
        self.running = False  # exercises start paused until the briefing ends
        self.frozen = False  # endgame freeze: no further events or pacing changes
        self.draw_index = 0
        self.inject_index = 0
        self.last_emit: Optional[float] = None

    def state_payload(self) -> dict:
        # Seed intentionally omitted: with the seed a client could recompute
        # ground truth. It is printed at startup and lives in the export.
        return {
            "running": self.running,
            "ratePerMinute": self.rate_per_minute,
            "fpRatio": self.fp_ratio,
        }

    def set_pacing(
        self,
        *,
        now: float,
        rate_per_minute: Optional[float] = None,
        fp_ratio: Optional[float] = None,
        running: Optional[bool] = None,
    ) -> None:
        if self.frozen:
            raise PreconditionError("exercise already ended")
        if rate_per_minute is not None:
            if not (isinstance(rate_per_minute, (int, float)) and math.isfinite(rate_per_minute)
                    and rate_per_minute > 0):
                raise InvalidError("ratePerMinute must be a positive number")
        if fp_ratio is not None:
            if not (isinstance(fp_ratio, (int, float)) and 0.0 <= fp_ratio <= 1.0):
                raise InvalidError("fpRatio must be within [0, 1]")
        if rate_per_minute is not None:
            self.rate_per_minute = float(rate_per_minute)
        if fp_ratio is not None:
            self.fp_ratio = float(fp_ratio)
        if running is not None and running != self.running:
            self.running = running
            # Resume starts a fresh interval; the paused gap is never owed.
            self.last_emit = now if running else self.last_emit

    def owed(self, now: float) -> int:
        """Events earned by elapsed time, advancing last_emit; 0 while paused."""
        if not self.running or self.frozen:
            return 0
        if self.last_emit is None:
            self.last_emit = now
            return 0
        interval = 60.0 / self.rate_per_minute
        elapsed = now - self.last_emit
        if elapsed < interval:
            return 0
        count = int(elapsed / interval)
        if count > CATCH_UP_CAP:
            self.last_emit = now  # drop the backlog after a stall
            return CATCH_UP_CAP
        self.last_emit += count * interval
        return count

    def next_event(self, event_id: int, created_at: int) -> SocEvent:
        event = draw_event(
            seed=self.seed,
            fp_ratio=self.fp_ratio,
            regions=self.regions,
            devices=self.devices,
            catalog=self.catalog,
            index=self.draw_index,
            event_id=event_id,
            created_at=created_at,
        )
        self.draw_index += 1
        return event

    def next_injected(self, event_id: int, created_at: int, spec: Optional[dict] = None) -> SocEvent:
        if self.frozen:
            raise PreconditionError("exercise already ended")
        event = draw_injected_event(
            seed=self.seed,
            regions=self.regions,
            devices=self.devices,
            catalog=self.catalog,
            index=self.inject_index,
            event_id=event_id,
            created_at=created_at,
            spec=spec,
        )
        self.inject_index += 1
        return event

    def freeze(self) -> None:
        self.running = False
        self.frozen = True
