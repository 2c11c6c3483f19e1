"""Request and response bodies for the REST API.

Request models are deliberately loose (Any-typed fields) so that shape
problems surface as 400s with useful messages from our own validation
rather than as framework-generated 422s; the 422 status is reserved for a
prior that fails normalization after name mapping.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel


class CreateSessionRequest(BaseModel):
    prior: Any = "uniform"
    initial_symptoms: Any = None
    max_questions: Any = None
    confidence_threshold: Any = None
    policy: Any = None


class AnswerRequest(BaseModel):
    symptom: Any = None
    answer: Any = None


class PendingQuestion(BaseModel):
    symptom: str
    index: int


class PosteriorEntry(BaseModel):
    condition: str
    probability: float


class HistoryEntry(BaseModel):
    symptom: str
    index: int
    answer: str
    initial: bool


class SessionConfigView(BaseModel):
    # prior is echoed post-normalization so a session is replayable from
    # this view alone
    prior: list[float]
    max_questions: int
    confidence_threshold: float
    policy: str


class SessionView(BaseModel):
    id: str
    status: str
    pending_question: PendingQuestion | None
    stop_reason: str | None
    posterior: list[PosteriorEntry]
    history: list[HistoryEntry]
    questions_asked: int
    config: SessionConfigView


class MatrixView(BaseModel):
    conditions: list[str]
    symptoms: list[str]
    n_conditions: int
    n_symptoms: int


class DeleteAck(BaseModel):
    ok: bool = True


class Health(BaseModel):
    status: str = "ok"
