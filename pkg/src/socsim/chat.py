"""Region chat channels, the instructor help channel, and teacher broadcasts.

Visibility rules, not membership lists, drive delivery: a message is stored
once and every recipient is decided per frame. The instructor channel works
like a help desk; a student sees their own questions plus anything a teacher
posts there, never another student's traffic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ForbiddenError, InvalidError
from .model import ROLE_TEACHER
from .session import ClientSession

CHANNEL_INSTRUCTOR = "instructor"
CHANNEL_BROADCAST = "broadcast"

MAX_BODY = 1000


@dataclass
class ChatMessage:
    id: int  # shares the global audit seq space
    channel: str
    sender_id: str
    sender_name: str
    sender_role: str
    body: str
    at: int

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "channel": self.channel,
            "senderId": self.sender_id,
            "senderName": self.sender_name,
            "senderRole": self.sender_role,
            "body": self.body,
            "at": self.at,
        }


def message_from_record(rec: dict) -> ChatMessage:
    return ChatMessage(
        id=rec["id"],
        channel=rec["channel"],
        sender_id=rec["senderId"],
        sender_name=rec["senderName"],
        sender_role=rec["senderRole"],
        body=rec["body"],
        at=rec["at"],
    )


class ChatLog:
    """All messages of the exercise in id order, one list across channels."""

    def __init__(self, regions: Sequence[str]):
        self.regions = tuple(regions)
        self.messages: list[ChatMessage] = []

    def channels(self) -> tuple:
        return self.regions + (CHANNEL_INSTRUCTOR, CHANNEL_BROADCAST)

    def validate_post(self, sender: ClientSession, channel: str, body: str) -> str:
        """Check membership and body constraints; returns the trimmed body."""
        if channel not in self.channels():
            raise InvalidError(f"unknown channel {channel!r}")
        trimmed = (body or "").strip()
        if not trimmed:
            raise InvalidError("message body is empty")
        if len(trimmed) > MAX_BODY:
            raise InvalidError(f"message body exceeds {MAX_BODY} characters")
        if sender.role != ROLE_TEACHER:
            if channel == CHANNEL_BROADCAST:
                raise ForbiddenError("only teachers may post to broadcast")
            if channel != CHANNEL_INSTRUCTOR and channel != sender.region:
                raise ForbiddenError("students may post only to their region or the instructor channel")
        return trimmed

    def add(self, message: ChatMessage) -> None:
        self.messages.append(message)

    def visible_to(self, message: ChatMessage, session: ClientSession) -> bool:
        if session.role == ROLE_TEACHER:
            return True
        if message.channel == CHANNEL_BROADCAST:
            return True
        if message.channel == session.region:
            return True
        if message.channel == CHANNEL_INSTRUCTOR:
            return (message.sender_id == session.client_id
                    or message.sender_role == ROLE_TEACHER)
        return False

    def history_for(self, session: ClientSession, limit: Optional[int] = None) -> dict:
        """Per-channel history the session is entitled to, message id order."""
        channels: dict[str, list[dict]] = {}
        if session.role == ROLE_TEACHER:
            for ch in self.channels():
                channels[ch] = []
        else:
            channels[session.region] = []
            channels[CHANNEL_INSTRUCTOR] = []
            channels[CHANNEL_BROADCAST] = []
        for message in self.messages:
            if message.channel in channels and self.visible_to(message, session):
                channels[message.channel].append(message.to_record())
        if limit is not None:
            for ch in channels:
                channels[ch] = channels[ch][-limit:] if limit > 0 else []
        return channels

    def channel_history(self, session: ClientSession, channel: str, limit: int) -> list[dict]:
        """Last `limit` messages of one channel the caller is a member of."""
        if channel not in self.channels():
            raise InvalidError(f"unknown channel {channel!r}")
        if session.role != ROLE_TEACHER:
            if channel not in (session.region, CHANNEL_INSTRUCTOR, CHANNEL_BROADCAST):
                raise ForbiddenError("not a member of this channel")
        if limit <= 0:
            return []
        records = [m.to_record() for m in self.messages
                   if m.channel == channel and self.visible_to(m, session)]
        return records[-limit:]

    def all_histories(self) -> dict:
        """Unfiltered per-channel history for the export document."""
        channels: dict[str, list[dict]] = {ch: [] for ch in self.channels()}
        for message in self.messages:
            channels.setdefault(message.channel, []).append(message.to_record())
        return channels
