"""Scenario execution: spawn all clients, run timed steps, collect transcripts."""

from __future__ import annotations

import asyncio
import random
from dataclasses import dataclass, field
from typing import Optional

import aiohttp

from .client import ScriptedClient, Transcript
from .scenario import ActorSpec, ScenarioScript


@dataclass
class RunResult:
    transcripts: dict = field(default_factory=dict)  # name -> Transcript
    faults: list = field(default_factory=list)
    export: Optional[dict] = None

    def all_faults(self) -> list[str]:
        faults = list(self.faults)
        for t in self.transcripts.values():
            faults.extend(f"{t.name}: {fault}" for fault in t.faults)
        return faults


def _urls(server_address: str) -> tuple[str, str]:
    """(ws_url, http_base) from either an http or ws address."""
    addr = server_address.rstrip("/")
    if addr.startswith("ws://") or addr.startswith("wss://"):
        http = "http" + addr[2:]
    elif addr.startswith("http://") or addr.startswith("https://"):
        http = addr
    else:
        http = "http://" + addr
    ws = "ws" + http[4:]
    return ws + "/ws", http


def _client_rng(seed: int, index: int) -> random.Random:
    # Stable per-actor stream so a rerun makes the same decisions.
    return random.Random((seed * 1_000_003 + index) & 0xFFFFFFFFFFFFFFFF)


async def run_scenario(
    script: ScenarioScript,
    server_address: str,
    teacher_token: Optional[str] = None,
) -> RunResult:
    """Run every actor against a live server and return all transcripts.

    Connection refusals and premature closes become transcript faults; the
    run itself always completes. If a teacher token is available the server's
    export document is fetched after the clients stop.
    """
    script.validate()
    ws_url, http_base = _urls(server_address)
    result = RunResult()

    actor_specs: list[ActorSpec] = list(script.actors)
    swarm = script.swarm
    for i, name in enumerate(swarm.student_names()):
        actor_specs.append(ActorSpec(
            name=name, role="student", region=swarm.region_for(i), join_at=0.0))

    async with aiohttp.ClientSession() as http:
        clients: dict[str, ScriptedClient] = {}
        for index, spec in enumerate(actor_specs):
            behaving = spec.name.startswith("student-")
            clients[spec.name] = ScriptedClient(
                spec.name, spec.role, http, ws_url,
                region=spec.region,
                teacher_token=teacher_token,
                rng=_client_rng(script.seed, index),
                chat_rate_per_minute=(
                    swarm.chat_rate_per_student_per_minute if behaving else 0.0),
                triage_probability=(
                    swarm.triage_probability if behaving else 0.0),
            )

        started = asyncio.get_running_loop().time()
        run_tasks = []

        async def launch(spec: ActorSpec) -> None:
            delay = started + spec.join_at - asyncio.get_running_loop().time()
            if delay > 0:
                await asyncio.sleep(delay)
            await clients[spec.name].run()

        for spec in actor_specs:
            run_tasks.append(asyncio.create_task(launch(spec)))

        async def run_steps() -> None:
            for step in script.steps:
                delay = started + step.at - asyncio.get_running_loop().time()
                if delay > 0:
                    await asyncio.sleep(delay)
                client = clients[step.actor]
                try:
                    await asyncio.wait_for(client.connected.wait(), timeout=10.0)
                    if step.kind == "harness.confirmEscalations":
                        await client.confirm_escalations(int(step.payload.get("count", 0)))
                    else:
                        await client.send(step.kind, step.payload)
                except Exception as exc:
                    result.faults.append(f"step {step.kind} by {step.actor}: {exc}")

        step_task = asyncio.create_task(run_steps())

        remaining = started + script.duration_seconds - asyncio.get_running_loop().time()
        if actor_specs and remaining > 0:
            await asyncio.sleep(remaining)

        step_task.cancel()
        for client in clients.values():
            await client.close()
        for task in run_tasks:
            task.cancel()
        await asyncio.gather(*run_tasks, return_exceptions=True)

        for name, client in clients.items():
            result.transcripts[name] = client.transcript

        if teacher_token:
            try:
                async with http.get(
                    http_base + "/api/export",
                    headers={"X-Teacher-Token": teacher_token},
                ) as resp:
                    if resp.status == 200:
                        result.export = await resp.json()
                    else:
                        result.faults.append(f"export fetch failed: HTTP {resp.status}")
            except Exception as exc:
                result.faults.append(f"export fetch failed: {exc}")

    return result


def write_transcripts(result: RunResult, out_dir) -> None:
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, transcript in result.transcripts.items():
        (out / f"{name}.jsonl").write_text(transcript.to_jsonl(), encoding="utf-8")
    if result.export is not None:
        import json

        (out / "export.json").write_text(
            json.dumps(result.export, indent=2), encoding="utf-8")
