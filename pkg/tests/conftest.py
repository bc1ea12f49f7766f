from __future__ import annotations

import asyncio
import contextlib

import pytest

from socsim.config import ExerciseConfig
from socsim.exercise import Exercise
from socsim.model import default_template_catalog
from socsim.server import SocServer

TEACHER_TOKEN = "unit-test-secret"


def make_config(**overrides) -> ExerciseConfig:
    defaults = dict(
        bind_address="127.0.0.1",
        port=0,
        teacher_token=TEACHER_TOKEN,
        seed=42,
    )
    defaults.update(overrides)
    return ExerciseConfig(**defaults)


def make_exercise(**overrides) -> Exercise:
    return Exercise(make_config(**overrides), default_template_catalog())


def join_teacher(ex: Exercise, name: str = "Teach"):
    session, _ = ex.join(name, "teacher", None, TEACHER_TOKEN, at=1000)
    return session


def join_student(ex: Exercise, region: str | None = None, name: str = "Student"):
    session, _ = ex.join(name, "student", region, None, at=1000)
    return session


def run(coro):
    """Run an async test body; pytest-asyncio is intentionally not a dependency."""
    return asyncio.run(coro)


@contextlib.asynccontextmanager
async def live_server(**config_overrides):
    """A real SocServer bound to an ephemeral loopback port."""
    config = make_config(**config_overrides)
    server = SocServer(Exercise(config, default_template_catalog()), config)
    port = await server.start()
    try:
        yield server, f"ws://127.0.0.1:{port}"
    finally:
        await server.stop()


@pytest.fixture
def exercise() -> Exercise:
    return make_exercise()
