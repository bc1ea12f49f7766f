"""Client identity, role authorization, region assignment, and presence."""

from __future__ import annotations

import hmac
import uuid
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ForbiddenError, InvalidError
from .model import ROLE_STUDENT, ROLE_TEACHER

# Silent for longer than this and the access monitor shows you offline.
DISCONNECT_AFTER_S = 30.0

MAX_DISPLAY_NAME = 40


@dataclass
class ClientSession:
    client_id: str
    display_name: str
    role: str
    region: Optional[str]  # always set for students, None for teachers
    connected_at: int
    last_seen: int
    connected: bool = True

    def to_record(self) -> dict:
        return {
            "clientId": self.client_id,
            "displayName": self.display_name,
            "role": self.role,
            "region": self.region,
            "connectedAt": self.connected_at,
            "lastSeen": self.last_seen,
            "connected": self.connected,
        }


class SessionRegistry:
    """All sessions of the exercise, disconnected ones retained for export."""

    def __init__(self, regions: Sequence[str], teacher_token: str, max_teachers: int = 2):
        self.regions = tuple(regions)
        self._teacher_token = teacher_token
        self.max_teachers = max_teachers
        self.sessions: dict[str, ClientSession] = {}
        self._rr_next = 0  # round-robin cursor for region auto-assignment

    def join(
        self,
        display_name: str,
        role: str,
        now: int,
        region: Optional[str] = None,
        teacher_token: Optional[str] = None,
    ) -> ClientSession:
        name = (display_name or "").strip()
        if not 1 <= len(name) <= MAX_DISPLAY_NAME:
            raise InvalidError(f"displayName must be 1-{MAX_DISPLAY_NAME} characters")
        if role not in (ROLE_STUDENT, ROLE_TEACHER):
            raise InvalidError(f"unknown role {role!r}")

        if role == ROLE_TEACHER:
            if not teacher_token or not hmac.compare_digest(teacher_token, self._teacher_token):
                raise ForbiddenError("bad teacher token")
            connected_teachers = sum(
                1 for s in self.sessions.values()
                if s.role == ROLE_TEACHER and s.connected
            )
            if connected_teachers >= self.max_teachers:
                raise ForbiddenError(f"at most {self.max_teachers} teachers may be connected")
            region = None
        else:
            if region is None:
                region = self.regions[self._rr_next % len(self.regions)]
                self._rr_next += 1
            elif region not in self.regions:
                raise InvalidError(f"unknown region {region!r}")

        session = ClientSession(
            client_id=uuid.uuid4().hex[:12],
            display_name=name,
            role=role,
            region=region,
            connected_at=now,
            last_seen=now,
        )
        self.sessions[session.client_id] = session
        return session

    def get(self, client_id: str) -> Optional[ClientSession]:
        return self.sessions.get(client_id)

    def leave(self, client_id: str, now: int) -> Optional[ClientSession]:
        """Mark disconnected; unknown ids are ignored (idempotent)."""
        session = self.sessions.get(client_id)
        if session is None or not session.connected:
            return None
        session.connected = False
        session.last_seen = now
        return session

    def heartbeat(self, client_id: str, now: int) -> None:
        session = self.sessions.get(client_id)
        if session is not None:
            session.last_seen = now

    def assign_region(self, client_id: str, region: str) -> ClientSession:
        session = self.sessions.get(client_id)
        if session is None:
            raise InvalidError(f"unknown client {client_id!r}")
        if session.role != ROLE_STUDENT:
            raise InvalidError("only students have a region assignment")
        if region not in self.regions:
            raise InvalidError(f"unknown region {region!r}")
        session.region = region
        return session

    def sweep(self, now: int) -> list[ClientSession]:
        """Mark sessions silent for > 30 s as disconnected; returns the newly dropped."""
        cutoff = now - int(DISCONNECT_AFTER_S * 1000)
        dropped = []
        for session in self.sessions.values():
            if session.connected and session.last_seen < cutoff:
                session.connected = False
                dropped.append(session)
        return dropped

    def presence_payload(self) -> dict:
        return {"clients": [s.to_record() for s in self.sessions.values()]}

    def to_records(self) -> list[dict]:
        return [s.to_record() for s in self.sessions.values()]
