"""Process configuration: CLI flags over config file over built-in defaults."""

from __future__ import annotations

import argparse
import json
import os
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .eventgen import DEFAULT_FP_RATIO, DEFAULT_RATE_PER_MINUTE
from .model import (
    DEFAULT_DEVICES,
    DEFAULT_REGIONS,
    LogTemplate,
    default_template_catalog,
    validate_template_catalog,
)

ENV_TEACHER_TOKEN = "SOCSIM_TEACHER_TOKEN"

DEFAULT_PORT = 8080
DEFAULT_BIND = "0.0.0.0"
DEFAULT_MAX_TEACHERS = 2


class ConfigError(Exception):
    """Startup-time configuration failure listing every violation found."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class ExerciseConfig:
    bind_address: str = DEFAULT_BIND
    port: int = DEFAULT_PORT
    teacher_token: str = ""
    seed: int = 0
    rate_per_minute: float = DEFAULT_RATE_PER_MINUTE
    fp_ratio: float = DEFAULT_FP_RATIO
    regions: tuple = DEFAULT_REGIONS
    devices: tuple = DEFAULT_DEVICES
    template_catalog_path: Optional[str] = None
    export_path: Optional[str] = None
    max_teachers: int = DEFAULT_MAX_TEACHERS
    # Set when the token was generated rather than configured, so startup can
    # print it for the instructor.
    generated_token: bool = field(default=False, compare=False)

    def validate(self) -> list[str]:
        errors = []
        if not 1 <= self.port <= 65535:
            errors.append(f"port must be in 1-65535, got {self.port}")
        if not self.teacher_token:
            errors.append("teacherToken must be non-empty")
        if not self.rate_per_minute > 0:
            errors.append(f"ratePerMinute must be positive, got {self.rate_per_minute}")
        if not 0.0 <= self.fp_ratio <= 1.0:
            errors.append(f"fpRatio must be within [0, 1], got {self.fp_ratio}")
        for name, values in (("regions", self.regions), ("devices", self.devices)):
            if not values:
                errors.append(f"{name} must be non-empty")
            if len(set(values)) != len(values):
                errors.append(f"{name} contains duplicates")
        if self.max_teachers < 1:
            errors.append(f"maxTeachers must be at least 1, got {self.max_teachers}")
        if not 0 <= self.seed < 2 ** 64:
            errors.append("seed must fit in 64 bits")
        return errors

    def to_record(self, include_token: bool = False) -> dict:
        """Config as wire/export record; the token is elided unless asked for."""
        rec = {
            "bindAddress": self.bind_address,
            "port": self.port,
            "seed": self.seed,
            "ratePerMinute": self.rate_per_minute,
            "fpRatio": self.fp_ratio,
            "regions": list(self.regions),
            "devices": list(self.devices),
            "templateCatalogPath": self.template_catalog_path,
            "exportPath": self.export_path,
            "maxTeachers": self.max_teachers,
        }
        if include_token:
            rec["teacherToken"] = self.teacher_token
        return rec


def _parse_list(value) -> tuple:
    if isinstance(value, str):
        return tuple(part.strip() for part in value.split(",") if part.strip())
    return tuple(value)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socsim",
        description="Self-contained SOC training simulator server",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--port", type=int)
    parser.add_argument("--bind", metavar="ADDR")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--rate", type=float, help="events per minute")
    parser.add_argument("--fp-ratio", type=float, dest="fp_ratio",
                        help="probability a generated event is a false positive")
    parser.add_argument("--regions", help="comma-separated region names")
    parser.add_argument("--devices", help="comma-separated device names")
    parser.add_argument("--templates", metavar="PATH", help="template catalog JSON")
    parser.add_argument("--teacher-token", dest="teacher_token",
                        help=f"teacher secret (or env {ENV_TEACHER_TOKEN})")
    parser.add_argument("--export", metavar="PATH", dest="export_path",
                        help="transcript auto-export path, written at endgame")
    return parser


def _read_config_file(path: str) -> dict:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"unreadable config file {path}: {exc}"]) from exc
    try:
        doc = json.loads(raw)
    except ValueError as exc:
        raise ConfigError([f"invalid JSON in config file {path}: {exc}"]) from exc
    if not isinstance(doc, dict):
        raise ConfigError([f"config file {path} must hold a JSON object"])
    return doc


def load_template_catalog(path: str) -> list[LogTemplate]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
        doc = json.loads(raw)
    except (OSError, ValueError) as exc:
        raise ConfigError([f"unreadable template catalog {path}: {exc}"]) from exc
    if not isinstance(doc, list):
        raise ConfigError([f"template catalog {path} must hold a JSON array"])
    return [LogTemplate.from_record(rec) for rec in doc]


def load_config(
    argv: Optional[Sequence[str]] = None,
    env: Optional[dict] = None,
) -> tuple[ExerciseConfig, list[LogTemplate]]:
    """Resolve the effective configuration and template catalog.

    Precedence: CLI flag > environment (token only) > config file > default.
    Raises ConfigError listing every violation rather than the first one.
    """
    env = os.environ if env is None else env
    args = build_arg_parser().parse_args(argv)

    file_doc: dict = {}
    if args.config:
        file_doc = _read_config_file(args.config)

    def pick(cli_value, file_key, default):
        if cli_value is not None:
            return cli_value
        if file_key in file_doc and file_doc[file_key] is not None:
            return file_doc[file_key]
        return default

    token = args.teacher_token or env.get(ENV_TEACHER_TOKEN) or file_doc.get("teacherToken")
    generated = False
    if not token:
        token = secrets.token_urlsafe(12)
        generated = True

    seed = pick(args.seed, "seed", None)
    if seed is None:
        seed = secrets.randbits(64)

    config = ExerciseConfig(
        bind_address=pick(args.bind, "bindAddress", DEFAULT_BIND),
        port=int(pick(args.port, "port", DEFAULT_PORT)),
        teacher_token=str(token),
        seed=int(seed),
        rate_per_minute=float(pick(args.rate, "ratePerMinute", DEFAULT_RATE_PER_MINUTE)),
        fp_ratio=float(pick(args.fp_ratio, "fpRatio", DEFAULT_FP_RATIO)),
        regions=_parse_list(pick(args.regions, "regions", DEFAULT_REGIONS)),
        devices=_parse_list(pick(args.devices, "devices", DEFAULT_DEVICES)),
        template_catalog_path=pick(args.templates, "templateCatalogPath", None),
        export_path=pick(args.export_path, "exportPath", None),
        max_teachers=int(pick(None, "maxTeachers", DEFAULT_MAX_TEACHERS)),
        generated_token=generated,
    )

    errors = config.validate()

    if config.template_catalog_path:
        catalog = load_template_catalog(config.template_catalog_path)
    else:
        catalog = default_template_catalog()
    errors.extend(validate_template_catalog(catalog))

    if errors:
        raise ConfigError(errors)
    return config, catalog
