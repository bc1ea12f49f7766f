"""Scenario scripts: timed client steps plus an optional student swarm.

A script is JSON:

    {
      "seed": 7,
      "durationSeconds": 120,
      "actors": [
        {"name": "teacher", "role": "teacher"},
        {"name": "late", "role": "student", "region": "Europe", "joinAt": 60}
      ],
      "swarm": {"studentCount": 20, "regionSpread": "auto",
                "chatRatePerStudentPerMinute": 1.0, "triageProbability": 0.3},
      "steps": [
        {"at": 0, "actor": "teacher", "kind": "teacher.pacing",
         "payload": {"running": true, "ratePerMinute": 60}}
      ]
    }

Step kinds are client frame kinds sent verbatim, plus one harness-side macro:
`harness.confirmEscalations {count}` makes a teacher actor confirm up to
`count` escalated-and-pending events it has seen (scripts cannot know event
ids in advance).

Swarm students are named student-1..student-N, join at t=0, and behave:
they chat at the given rate and triage a fraction of the events landing in
their region. With regionSpread "auto" the server assigns regions
round-robin; a list of region names cycles explicitly instead. All behavior
draws come from the script seed, so a run's decisions are replayable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

HARNESS_KINDS = ("harness.confirmEscalations",)


class ScriptError(Exception):
    pass


@dataclass
class ActorSpec:
    name: str
    role: str
    region: Optional[str] = None
    join_at: float = 0.0


@dataclass
class Step:
    at: float
    actor: str
    kind: str
    payload: dict = field(default_factory=dict)


@dataclass
class SwarmSpec:
    student_count: int = 0
    region_spread: Union[str, list] = "auto"
    chat_rate_per_student_per_minute: float = 0.0
    triage_probability: float = 0.0

    def student_names(self) -> list[str]:
        return [f"student-{i + 1}" for i in range(self.student_count)]

    def region_for(self, index: int) -> Optional[str]:
        if isinstance(self.region_spread, list) and self.region_spread:
            return self.region_spread[index % len(self.region_spread)]
        return None  # let the server auto-assign


@dataclass
class ScenarioScript:
    duration_seconds: float
    seed: int = 0
    actors: list = field(default_factory=list)
    swarm: SwarmSpec = field(default_factory=SwarmSpec)
    steps: list = field(default_factory=list)

    def validate(self) -> None:
        names = [a.name for a in self.actors] + self.swarm.student_names()
        if len(set(names)) != len(names):
            raise ScriptError("duplicate actor names")
        known = set(names)
        last_at = None
        for step in self.steps:
            if last_at is not None and step.at < last_at:
                raise ScriptError("step offsets must be non-decreasing")
            last_at = step.at
            if step.actor not in known:
                raise ScriptError(f"step references undeclared actor {step.actor!r}")
        if self.duration_seconds <= 0 and (self.actors or self.swarm.student_count):
            raise ScriptError("durationSeconds must be positive")


def script_from_dict(doc: dict) -> ScenarioScript:
    actors = [
        ActorSpec(
            name=a["name"],
            role=a.get("role", "student"),
            region=a.get("region"),
            join_at=float(a.get("joinAt", 0.0)),
        )
        for a in doc.get("actors", [])
    ]
    swarm_doc = doc.get("swarm") or {}
    swarm = SwarmSpec(
        student_count=int(swarm_doc.get("studentCount", 0)),
        region_spread=swarm_doc.get("regionSpread", "auto"),
        chat_rate_per_student_per_minute=float(
            swarm_doc.get("chatRatePerStudentPerMinute", 0.0)),
        triage_probability=float(swarm_doc.get("triageProbability", 0.0)),
    )
    steps = [
        Step(
            at=float(s["at"]),
            actor=s["actor"],
            kind=s["kind"],
            payload=s.get("payload", {}),
        )
        for s in doc.get("steps", [])
    ]
    script = ScenarioScript(
        duration_seconds=float(doc.get("durationSeconds", 0.0)),
        seed=int(doc.get("seed", 0)),
        actors=actors,
        swarm=swarm,
        steps=steps,
    )
    script.validate()
    return script


def load_script(path: Union[str, Path]) -> ScenarioScript:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ScriptError(f"cannot load script {path}: {exc}") from exc
    return script_from_dict(doc)
