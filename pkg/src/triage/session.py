"""Stateful dialog engine: prior in, question loop, ranked differential out.

A session starts from an externally supplied prior (e.g. an image
classifier's softmax) plus any symptoms already known to be present,
then repeatedly asks the highest-scoring unasked symptom until one
condition's probability clears the confidence threshold, the question
budget runs out, or no symptoms remain.

States are immutable values; ``submit_answer`` returns a new state, which
makes replay and concurrency reasoning trivial. The knowledge matrix is
carried by reference and shared read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .inference import (
    Answer,
    SelectionPolicy,
    posterior_update,
    select_question,
    validate_distribution,
)
from .knowledge import KnowledgeMatrix

DEFAULT_MAX_QUESTIONS = 10
DEFAULT_CONFIDENCE_THRESHOLD = 0.95


class StopReason(str, Enum):
    THRESHOLD_REACHED = "threshold_reached"
    BUDGET_EXHAUSTED = "budget_exhausted"
    SYMPTOMS_EXHAUSTED = "symptoms_exhausted"


class SessionError(Exception):
    """Base for invalid session transitions."""


class SessionFinishedError(SessionError):
    """An answer was submitted to a finished session."""


class AnswerNotPendingError(SessionError):
    """The answered symptom is not the one currently pending."""


@dataclass(frozen=True)
class SessionConfig:
    prior: np.ndarray
    initial_positive_symptoms: tuple[int, ...] = ()
    max_questions: int = DEFAULT_MAX_QUESTIONS
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD
    policy: SelectionPolicy = SelectionPolicy.EXPECTED_IG


@dataclass(frozen=True)
class SessionState:
    """Snapshot of one dialog.

    Exactly one of ``pending`` / ``stop_reason`` is set. ``history`` holds
    every conditioned answer in order, with the initial symptoms recorded
    as yes answers up front, so folding ``posterior_update`` over it from
    the config prior reproduces ``posterior`` exactly.
    """

    config: SessionConfig
    matrix: KnowledgeMatrix
    posterior: np.ndarray
    history: tuple[tuple[int, Answer], ...]
    n_initial: int
    pending: int | None
    stop_reason: StopReason | None

    @property
    def is_finished(self) -> bool:
        return self.stop_reason is not None

    @property
    def questions_asked(self) -> int:
        return len(self.history) - self.n_initial

    @property
    def answered_symptoms(self) -> set[int]:
        return {s for s, _ in self.history}


def _validate_config(config: SessionConfig, matrix: KnowledgeMatrix) -> SessionConfig:
    prior = validate_distribution(config.prior, matrix.n_conditions)
    if config.max_questions < 1:
        raise ValueError(f"max_questions must be >= 1, got {config.max_questions}")
    if not 0.5 < config.confidence_threshold < 1.0:
        raise ValueError(
            f"confidence_threshold must be in (0.5, 1), got {config.confidence_threshold}"
        )
    initial = tuple(config.initial_positive_symptoms)
    if len(set(initial)) != len(initial):
        raise ValueError("initial_positive_symptoms contains duplicates")
    for s in initial:
        if not 0 <= s < matrix.n_symptoms:
            raise IndexError(
                f"initial symptom {s} out of range [0, {matrix.n_symptoms})"
            )
    return replace(
        config,
        prior=prior,
        initial_positive_symptoms=initial,
        policy=SelectionPolicy(config.policy),
    )


def _advance(state: SessionState) -> SessionState:
    """Apply stop rules in fixed precedence, else select the next question.

    Order matters and is part of the contract: threshold, then budget,
    then symptom exhaustion.
    """
    cfg = state.config
    if float(state.posterior.max()) >= cfg.confidence_threshold:
        return replace(state, pending=None, stop_reason=StopReason.THRESHOLD_REACHED)
    if state.questions_asked >= cfg.max_questions:
        return replace(state, pending=None, stop_reason=StopReason.BUDGET_EXHAUSTED)
    nxt = select_question(
        state.posterior, state.matrix, state.answered_symptoms, cfg.policy
    )
    if nxt is None:
        return replace(state, pending=None, stop_reason=StopReason.SYMPTOMS_EXHAUSTED)
    return replace(state, pending=nxt, stop_reason=None)


def create_session(config: SessionConfig, matrix: KnowledgeMatrix) -> SessionState:
    """Fold the initial symptoms into the prior and pick the first question.

    Stop rules are evaluated immediately, so a sufficiently confident prior
    finishes the session with zero questions asked.
    """
    config = _validate_config(config, matrix)
    posterior = config.prior
    history: list[tuple[int, Answer]] = []
    for s in config.initial_positive_symptoms:
        posterior = posterior_update(posterior, matrix, s, Answer.YES)
        history.append((s, Answer.YES))
    state = SessionState(
        config=config,
        matrix=matrix,
        posterior=posterior,
        history=tuple(history),
        n_initial=len(history),
        pending=None,
        stop_reason=None,
    )
    return _advance(state)


def submit_answer(state: SessionState, symptom: int, answer: Answer) -> SessionState:
    """Record the answer to the pending question and advance the session.

    The answered symptom must be the pending one; anything else leaves the
    state untouched and raises. Unknown answers still consume budget: the
    cost being modeled is asking, not learning.
    """
    if state.is_finished:
        raise SessionFinishedError(f"session already finished: {state.stop_reason.value}")
    if symptom != state.pending:
        raise AnswerNotPendingError(
            f"symptom {symptom} is not pending (expected {state.pending})"
        )
    answer = Answer(answer)
    posterior = posterior_update(state.posterior, state.matrix, symptom, answer)
    state = replace(
        state,
        posterior=posterior,
        history=state.history + ((symptom, answer),),
        pending=None,
    )
    return _advance(state)


def differential(state: SessionState, k: int | None = None) -> list[tuple[int, float]]:
    """Rank conditions by posterior, descending, ties toward lower index.

    Returns (condition index, probability) pairs, truncated to ``k`` when
    given; a ``k`` beyond the condition count returns the full ranking.
    """
    if k is not None and k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    order = np.argsort(-state.posterior, kind="stable")
    if k is not None:
        order = order[:k]
    return [(int(i), float(state.posterior[i])) for i in order]


def replay_posterior(
    prior: np.ndarray,
    matrix: KnowledgeMatrix,
    history: tuple[tuple[int, Answer], ...],
) -> np.ndarray:
    """Recompute the posterior by folding the history over the prior."""
    posterior = validate_distribution(prior, matrix.n_conditions)
    for symptom, answer in history:
        posterior = posterior_update(posterior, matrix, symptom, answer)
    return posterior
