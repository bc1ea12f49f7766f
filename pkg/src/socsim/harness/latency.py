"""Commit-to-receive latency statistics over run transcripts.

Latency per frame is client receive time minus the server commit time the
frame carries in `at`. Harness and server are expected to share a host
(loopback), so one clock domain suffices.
"""

from __future__ import annotations

import statistics
from typing import Iterable

from .client import Transcript


def _stats(samples: list[float]) -> dict:
    ordered = sorted(samples)
    p95_index = max(0, int(len(ordered) * 0.95) - 1) if ordered else 0
    return {
        "count": len(ordered),
        "medianMs": statistics.median(ordered) if ordered else None,
        "p95Ms": ordered[p95_index] if ordered else None,
        "maxMs": ordered[-1] if ordered else None,
    }


def measure_latency(transcripts: Iterable[Transcript]) -> dict:
    """{overall: stats, byKind: {kind: stats}}; empty transcripts give empty stats."""
    by_kind: dict[str, list[float]] = {}
    overall: list[float] = []
    for transcript in transcripts:
        for entry in transcript.frames:
            frame = entry["frame"]
            sample = float(entry["recvAt"] - frame["at"])
            overall.append(sample)
            by_kind.setdefault(frame["kind"], []).append(sample)
    return {
        "overall": _stats(overall),
        "byKind": {kind: _stats(samples) for kind, samples in sorted(by_kind.items())},
    }
