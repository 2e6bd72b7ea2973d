"""HTTP session service: a thin JSON adapter over the consultation engine.

The service owns no rule logic. Every mutation delegates to exactly one
engine operation, so a scripted CLI run and an HTTP-driven run with the
same answers produce identical transcripts.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .engine import (
    AdviceEvent,
    AnswerEvent,
    Event,
    FinishedEvent,
    InvalidAnswer,
    QuestionEvent,
    SectionEnter,
    SectionExit,
    Session,
    SessionFinishedError,
    WarningEvent,
    start_session,
)
from .model import KnowledgeBase

DEFAULT_SESSION_TTL = 30 * 60.0  # seconds of idleness before a session expires


# ---------------------------------------------------------------------------
# Wire projections
# ---------------------------------------------------------------------------

def session_view(session_id: str, session: Session) -> dict[str, Any]:
    """Project a Session onto the wire shape clients consume."""
    question = session.question
    return {
        "id": session_id,
        "status": session.status,
        "question": None if question is None else {
            "param": question.param,
            "prompt": question.prompt,
            "ptype": question.ptype,
            "values": list(question.values),
        },
        "advice": session.advice_texts(),
        "finished_reason":
            session.finished.reason if session.finished is not None else None,
    }


def event_to_dict(event: Event) -> dict[str, Any]:
    if isinstance(event, SectionEnter):
        return {"type": "enter", "section": event.section}
    if isinstance(event, SectionExit):
        return {"type": "exit", "section": event.section}
    if isinstance(event, QuestionEvent):
        return {"type": "question", "param": event.param,
                "prompt": event.prompt}
    if isinstance(event, AnswerEvent):
        return {"type": "answer", "param": event.param, "value": event.value}
    if isinstance(event, AdviceEvent):
        return {"type": "advice", "section": event.section,
                "rule_index": event.rule_index, "text": event.text}
    if isinstance(event, FinishedEvent):
        return {"type": "finished", "reason": event.reason,
                "detail": event.detail}
    if isinstance(event, WarningEvent):
        return {"type": "warning", "message": event.message}
    raise TypeError(f"not a transcript event: {event!r}")


def event_from_dict(data: Mapping[str, Any]) -> Event:
    kind = data["type"]
    if kind == "enter":
        return SectionEnter(data["section"])
    if kind == "exit":
        return SectionExit(data["section"])
    if kind == "question":
        return QuestionEvent(data["param"], data["prompt"])
    if kind == "answer":
        return AnswerEvent(data["param"], data["value"])
    if kind == "advice":
        return AdviceEvent(data["text"], data["section"], data["rule_index"])
    if kind == "finished":
        return FinishedEvent(data["reason"], data.get("detail"))
    if kind == "warning":
        return WarningEvent(data["message"])
    raise ValueError(f"unknown event type: {kind!r}")


# ---------------------------------------------------------------------------
# Session store
# ---------------------------------------------------------------------------

@dataclass
class _Entry:
    session: Session
    last_used: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory session map with idle expiry.

    The store lock guards only the map; per-session work happens under
    each entry's own lock so long consultations don't serialize the
    whole service.
    """

    def __init__(self, ttl: float, clock: Callable[[], float]):
        self._ttl = ttl
        self._clock = clock
        self._entries: dict[str, _Entry] = {}
        self._lock = threading.Lock()

    def _sweep(self, now: float) -> None:
        dead = [sid for sid, entry in self._entries.items()
                if now - entry.last_used > self._ttl]
        for sid in dead:
            del self._entries[sid]

    def create(self, session: Session) -> str:
        with self._lock:
            now = self._clock()
            self._sweep(now)
            session_id = secrets.token_hex(16)
            while session_id in self._entries:  # vanishing odds, cheap guard
                session_id = secrets.token_hex(16)
            self._entries[session_id] = _Entry(session, now)
            return session_id

    def get(self, session_id: str) -> Optional[_Entry]:
        with self._lock:
            now = self._clock()
            self._sweep(now)
            entry = self._entries.get(session_id)
            if entry is not None:
                entry.last_used = now
            return entry

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


# ---------------------------------------------------------------------------
# Application factory
# ---------------------------------------------------------------------------

class CreateSessionRequest(BaseModel):
    kb: str


class AnswerRequest(BaseModel):
    value: str


def create_app(kbs: Mapping[str, KnowledgeBase],
               *,
               session_ttl: float = DEFAULT_SESSION_TTL,
               clock: Callable[[], float] = time.monotonic,
               static_dir: Optional[Path] = None) -> FastAPI:
    """Build the service around an immutable KB registry.

    `clock` exists so tests can drive idle expiry without sleeping.
    """
    registry = dict(kbs)
    store = SessionStore(session_ttl, clock)
    app = FastAPI(title="kbshell consultation service")

    @app.get("/api/kbs")
    def list_kbs() -> list[dict[str, str]]:
        return [{"name": name, "title": kb.title}
                for name, kb in registry.items()]

    @app.post("/api/sessions", status_code=201)
    def create_session(request: CreateSessionRequest) -> dict[str, Any]:
        kb = registry.get(request.kb)
        if kb is None:
            raise HTTPException(404, f"unknown knowledge base: {request.kb!r}")
        session_id = store.create(start_session(kb))
        entry = store.get(session_id)
        assert entry is not None
        return session_view(session_id, entry.session)

    def _entry_or_404(session_id: str) -> _Entry:
        entry = store.get(session_id)
        if entry is None:
            raise HTTPException(404, "no such session")
        return entry

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        entry = _entry_or_404(session_id)
        with entry.lock:
            return session_view(session_id, entry.session)

    @app.post("/api/sessions/{session_id}/answer")
    def post_answer(session_id: str,
                    request: AnswerRequest) -> dict[str, Any]:
        entry = _entry_or_404(session_id)
        with entry.lock:
            if entry.session.finished is not None:
                raise HTTPException(409, "session already finished")
            try:
                entry.session.submit_answer(request.value)
            except InvalidAnswer as exc:
                raise HTTPException(422, detail={
                    "message": exc.message,
                    "allowed": list(exc.allowed),
                }) from exc
            except SessionFinishedError as exc:
                raise HTTPException(409, str(exc)) from exc
            return session_view(session_id, entry.session)

    @app.get("/api/sessions/{session_id}/transcript")
    def get_transcript(session_id: str) -> dict[str, Any]:
        entry = _entry_or_404(session_id)
        with entry.lock:
            return {"events":
                    [event_to_dict(e) for e in entry.session.events]}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="static")

    return app
