"""socsim: a self-contained SOC training simulator for instructor-led exercises."""

from .config import ExerciseConfig, load_config
from .exercise import Exercise
from .model import (
    Counters,
    LogTemplate,
    SocEvent,
    default_template_catalog,
    recount,
    redact_for_role,
    validate_template_catalog,
)

__version__ = "0.1.0"

__all__ = [
    "Counters",
    "Exercise",
    "ExerciseConfig",
    "LogTemplate",
    "SocEvent",
    "default_template_catalog",
    "load_config",
    "recount",
    "redact_for_role",
    "validate_template_catalog",
    "__version__",
]
