"""Headless scripted clients for conformance, convergence, and load checks."""

from .latency import measure_latency
from .runner import RunResult, run_scenario
from .scenario import ScenarioScript, load_script
from .verify import verify_transcripts

__all__ = [
    "RunResult",
    "ScenarioScript",
    "load_script",
    "measure_latency",
    "run_scenario",
    "verify_transcripts",
]
