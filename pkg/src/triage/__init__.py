"""Interactive triage engine: Bayes updates over a condition-symptom matrix,
information-driven question selection, and an evaluation harness."""

from .inference import (
    Answer,
    DegeneratePosteriorError,
    SelectionPolicy,
    entropy,
    expected_information_gain,
    posterior_update,
    score_symptoms,
    select_question,
    uniform_distribution,
    validate_distribution,
    yes_branch_score,
)
from .knowledge import (
    DEFAULT_EPSILON,
    KnowledgeMatrix,
    MatrixFormatError,
    clamp_probabilities,
    load_knowledge_matrix,
    load_matrix_file,
)
from .session import (
    AnswerNotPendingError,
    SessionConfig,
    SessionError,
    SessionFinishedError,
    SessionState,
    StopReason,
    create_session,
    differential,
    replay_posterior,
    submit_answer,
)
from .simulation import (
    EpisodeMode,
    EpisodeResult,
    MetricsReport,
    PriorNoiseModel,
    Vignette,
    answer_oracle,
    brute_force_best_symptom,
    default_benchmark_matrix,
    evaluate,
    run_episode,
    sample_vignette,
)

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "AnswerNotPendingError",
    "DEFAULT_EPSILON",
    "DegeneratePosteriorError",
    "EpisodeMode",
    "EpisodeResult",
    "KnowledgeMatrix",
    "MatrixFormatError",
    "MetricsReport",
    "PriorNoiseModel",
    "SelectionPolicy",
    "SessionConfig",
    "SessionError",
    "SessionFinishedError",
    "SessionState",
    "StopReason",
    "Vignette",
    "answer_oracle",
    "brute_force_best_symptom",
    "clamp_probabilities",
    "create_session",
    "default_benchmark_matrix",
    "differential",
    "entropy",
    "evaluate",
    "expected_information_gain",
    "load_knowledge_matrix",
    "load_matrix_file",
    "posterior_update",
    "replay_posterior",
    "run_episode",
    "sample_vignette",
    "score_symptoms",
    "select_question",
    "submit_answer",
    "uniform_distribution",
    "validate_distribution",
    "yes_branch_score",
    "__version__",
]
