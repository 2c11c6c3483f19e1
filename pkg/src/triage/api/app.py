"""FastAPI application factory for the diagnosis session service.

Names cross the wire; indices stay internal. The knowledge matrix is
clamped once at startup and shared immutably across requests; per-session
mutual exclusion comes from the store's entry locks. Endpoints are plain
functions so the framework runs them on its threadpool, which makes the
locking real rather than decorative.
"""

from __future__ import annotations

import math
import time

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from ..inference import Answer, SelectionPolicy, uniform_distribution, validate_distribution
from ..knowledge import DEFAULT_EPSILON, KnowledgeMatrix, clamp_probabilities
from ..session import (
    AnswerNotPendingError,
    SessionConfig,
    SessionFinishedError,
    create_session,
    differential,
    submit_answer,
)
from .schemas import (
    AnswerRequest,
    CreateSessionRequest,
    DeleteAck,
    Health,
    HistoryEntry,
    MatrixView,
    PendingQuestion,
    PosteriorEntry,
    SessionConfigView,
    SessionView,
)
from .store import DEFAULT_TTL_SECONDS, SessionStore, StoredSession


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=message)


def _resolve_prior(prior, matrix: KnowledgeMatrix) -> np.ndarray:
    if prior is None or prior == "uniform":
        return uniform_distribution(matrix.n_conditions)
    if not isinstance(prior, dict):
        raise _bad_request(
            "prior must be 'uniform' or an object mapping condition names to probabilities"
        )
    index = matrix.condition_index()
    vec = np.zeros(matrix.n_conditions)
    for name, value in prior.items():
        if name not in index:
            raise _bad_request(f"unknown condition name: {name!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _bad_request(f"probability for {name!r} must be a number")
        value = float(value)
        if not math.isfinite(value):
            raise _bad_request(f"probability for {name!r} is not finite")
        if value < 0:
            raise _bad_request(f"probability for {name!r} is negative")
        vec[index[name]] = value
    with np.errstate(over="ignore"):
        total = float(vec.sum())
    if total == 0.0:
        raise _bad_request("prior assigns zero probability to every condition")
    # Overflow in the sum (or underflow in the quotient) lands here as 422.
    try:
        return validate_distribution(vec / total, matrix.n_conditions)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=f"prior failed normalization: {exc}")


def _resolve_symptoms(names, matrix: KnowledgeMatrix) -> tuple[int, ...]:
    if names is None:
        return ()
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise _bad_request("initial_symptoms must be a list of symptom names")
    index = matrix.symptom_index()
    resolved = []
    for name in names:
        if name not in index:
            raise _bad_request(f"unknown symptom name: {name!r}")
        resolved.append(index[name])
    return tuple(resolved)


def _resolve_config(body: CreateSessionRequest, matrix: KnowledgeMatrix) -> SessionConfig:
    kwargs = {}
    if body.max_questions is not None:
        if isinstance(body.max_questions, bool) or not isinstance(body.max_questions, int):
            raise _bad_request("max_questions must be an integer")
        kwargs["max_questions"] = body.max_questions
    if body.confidence_threshold is not None:
        if isinstance(body.confidence_threshold, bool) or not isinstance(
            body.confidence_threshold, (int, float)
        ):
            raise _bad_request("confidence_threshold must be a number")
        kwargs["confidence_threshold"] = float(body.confidence_threshold)
    if body.policy is not None:
        try:
            kwargs["policy"] = SelectionPolicy(body.policy)
        except ValueError:
            choices = ", ".join(p.value for p in SelectionPolicy)
            raise _bad_request(f"policy must be one of: {choices}")
    try:
        return SessionConfig(
            prior=_resolve_prior(body.prior, matrix),
            initial_positive_symptoms=_resolve_symptoms(body.initial_symptoms, matrix),
            **kwargs,
        )
    except ValueError as exc:
        raise _bad_request(str(exc))


def _session_view(entry: StoredSession, matrix: KnowledgeMatrix) -> SessionView:
    state = entry.state
    pending = None
    if state.pending is not None:
        pending = PendingQuestion(symptom=matrix.symptoms[state.pending], index=state.pending)
    posterior = [
        PosteriorEntry(condition=matrix.conditions[i], probability=p)
        for i, p in differential(state)
    ]
    history = [
        HistoryEntry(
            symptom=matrix.symptoms[s],
            index=s,
            answer=a.value,
            initial=pos < state.n_initial,
        )
        for pos, (s, a) in enumerate(state.history)
    ]
    return SessionView(
        id=entry.id,
        status="finished" if state.is_finished else "awaiting_answer",
        pending_question=pending,
        stop_reason=state.stop_reason.value if state.stop_reason is not None else None,
        posterior=posterior,
        history=history,
        questions_asked=state.questions_asked,
        config=SessionConfigView(
            prior=[float(v) for v in state.config.prior],
            max_questions=state.config.max_questions,
            confidence_threshold=state.config.confidence_threshold,
            policy=state.config.policy.value,
        ),
    )


def create_app(
    matrix: KnowledgeMatrix,
    epsilon: float = DEFAULT_EPSILON,
    session_ttl_seconds: float = DEFAULT_TTL_SECONDS,
    clock=time.monotonic,
) -> FastAPI:
    matrix = clamp_probabilities(matrix, epsilon)
    store = SessionStore(ttl_seconds=session_ttl_seconds, clock=clock)
    app = FastAPI(title="triage", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.matrix = matrix
    app.state.store = store

    def _lookup(session_id: str) -> StoredSession:
        try:
            return store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session: {session_id}")

    @app.post("/v1/sessions", response_model=SessionView, status_code=201)
    def create_session_endpoint(body: CreateSessionRequest) -> SessionView:
        config = _resolve_config(body, matrix)
        try:
            state = create_session(config, matrix)
        except ValueError as exc:
            raise _bad_request(str(exc))
        entry = store.create(state)
        return _session_view(entry, matrix)

    @app.post("/v1/sessions/{session_id}/answers", response_model=SessionView)
    def post_answer_endpoint(session_id: str, body: AnswerRequest) -> SessionView:
        if not isinstance(body.symptom, str):
            raise _bad_request("symptom must be a symptom name")
        symptom_index = matrix.symptom_index().get(body.symptom)
        if symptom_index is None:
            raise _bad_request(f"unknown symptom name: {body.symptom!r}")
        try:
            answer = Answer(body.answer)
        except ValueError:
            choices = ", ".join(a.value for a in Answer)
            raise _bad_request(f"answer must be one of: {choices}")
        entry = _lookup(session_id)
        with entry.lock:
            try:
                entry.state = submit_answer(entry.state, symptom_index, answer)
            except (SessionFinishedError, AnswerNotPendingError) as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return _session_view(entry, matrix)

    @app.get("/v1/sessions/{session_id}", response_model=SessionView)
    def get_session_endpoint(session_id: str) -> SessionView:
        entry = _lookup(session_id)
        with entry.lock:
            return _session_view(entry, matrix)

    @app.delete("/v1/sessions/{session_id}", response_model=DeleteAck)
    def delete_session_endpoint(session_id: str) -> DeleteAck:
        store.delete(session_id)
        return DeleteAck()

    @app.get("/v1/matrix", response_model=MatrixView)
    def get_matrix_endpoint() -> MatrixView:
        return MatrixView(
            conditions=list(matrix.conditions),
            symptoms=list(matrix.symptoms),
            n_conditions=matrix.n_conditions,
            n_symptoms=matrix.n_symptoms,
        )

    @app.get("/healthz", response_model=Health)
    def healthz() -> Health:
        return Health()

    return app
