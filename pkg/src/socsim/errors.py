"""Typed command failures, each mapping to one wire error code."""

from __future__ import annotations


class CommandError(Exception):
    """Base for failures a client command can produce; `code` goes on the wire."""

    code = "invalid"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ForbiddenError(CommandError):
    code = "forbidden"


class NotFoundError(CommandError):
    code = "not_found"


class InvalidError(CommandError):
    code = "invalid"


class PreconditionError(CommandError):
    code = "precondition"


class UnknownKindError(CommandError):
    code = "unknown_kind"
