"""Thread-safe in-memory session store with lazy TTL eviction.

Sessions are short-lived dialogs, so there is no persistence: entries
expire a fixed time after their last touch and are swept opportunistically
on every store operation. Mutations to a session's state must hold that
session's lock; the store's own dict is guarded separately.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

from ..session import SessionState

DEFAULT_TTL_SECONDS = 3600.0


@dataclass
class StoredSession:
    id: str
    created_at: float
    last_access: float
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS, clock=time.monotonic):
        if ttl_seconds <= 0:
            raise ValueError(f"ttl_seconds must be > 0, got {ttl_seconds}")
        self._sessions: dict[str, StoredSession] = {}
        self._dict_lock = threading.Lock()
        self._ttl = ttl_seconds
        self._clock = clock

    def __len__(self) -> int:
        with self._dict_lock:
            return len(self._sessions)

    def _sweep_locked(self, now: float):
        expired = [
            sid
            for sid, entry in self._sessions.items()
            if now - entry.last_access > self._ttl
        ]
        for sid in expired:
            del self._sessions[sid]

    def create(self, state: SessionState) -> StoredSession:
        now = self._clock()
        entry = StoredSession(
            id=secrets.token_hex(16), created_at=now, last_access=now, state=state
        )
        with self._dict_lock:
            self._sweep_locked(now)
            self._sessions[entry.id] = entry
        return entry

    def get(self, session_id: str) -> StoredSession:
        """Fetch a live entry and refresh its TTL. Raises KeyError if the id
        is unknown or expired."""
        now = self._clock()
        with self._dict_lock:
            self._sweep_locked(now)
            entry = self._sessions[session_id]
            entry.last_access = now
            return entry

    def delete(self, session_id: str) -> None:
        """Idempotent: deleting an unknown id is a no-op."""
        now = self._clock()
        with self._dict_lock:
            self._sweep_locked(now)
            self._sessions.pop(session_id, None)
