"""Pure probabilistic core: Bayes updates, entropies, question scoring.

All functions are pure and operate on plain float64 numpy vectors over the
condition space of a shared :class:`~triage.knowledge.KnowledgeMatrix`.
Symptoms are treated as conditionally independent given the condition, so
each answer multiplies the posterior by a per-condition likelihood column
(or its complement) and renormalizes.

Entropies are in bits (base-2 log) with the 0 * log2(0) = 0 convention.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .knowledge import KnowledgeMatrix

DISTRIBUTION_SUM_TOL = 1e-9

# Unnormalized posterior mass below this is treated as numerically
# annihilated; unreachable once the matrix is clamped away from 0 and 1.
DEGENERATE_MASS = 1e-300


class Answer(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class SelectionPolicy(str, Enum):
    """Question-scoring variants.

    EXPECTED_IG scores a symptom by the full expected entropy reduction over
    both answer branches. YES_BRANCH scores it by the negative entropy of
    the posterior assuming the answer is yes, a cheaper heuristic kept for
    ablation; both share the same argmax interface.
    """

    EXPECTED_IG = "expected_ig"
    YES_BRANCH = "yes_branch"


class DegeneratePosteriorError(ArithmeticError):
    """Posterior mass vanished; the answer contradicts an unsmoothed matrix."""


def validate_distribution(probs, n_conditions: int | None = None) -> np.ndarray:
    """Check distribution invariants and return a float64 copy.

    Entries must be finite and nonnegative, sum to 1 within 1e-9, and (when
    ``n_conditions`` is given) match the condition count.
    """
    d = np.array(probs, dtype=np.float64)
    if d.ndim != 1:
        raise ValueError(f"distribution must be one-dimensional, got shape {d.shape}")
    if n_conditions is not None and d.shape[0] != n_conditions:
        raise ValueError(
            f"distribution has {d.shape[0]} entries for {n_conditions} conditions"
        )
    if not np.all(np.isfinite(d)):
        raise ValueError("distribution contains non-finite entries")
    if np.any(d < 0.0):
        raise ValueError("distribution contains negative entries")
    total = float(d.sum())
    if abs(total - 1.0) > DISTRIBUTION_SUM_TOL:
        raise ValueError(f"distribution sums to {total!r}, expected 1")
    return d


def uniform_distribution(n_conditions: int) -> np.ndarray:
    if n_conditions < 1:
        raise ValueError(f"need at least one condition, got {n_conditions}")
    return np.full(n_conditions, 1.0 / n_conditions)


def posterior_update(
    prior: np.ndarray, matrix: KnowledgeMatrix, symptom: int, answer: Answer
) -> np.ndarray:
    """One Bayes step: condition the prior on a single symptom answer.

    yes multiplies by the symptom's likelihood column, no by its complement,
    unknown leaves the prior unchanged. The result is renormalized.
    """
    prior = validate_distribution(prior, matrix.n_conditions)
    if not 0 <= symptom < matrix.n_symptoms:
        raise IndexError(f"symptom index {symptom} out of range [0, {matrix.n_symptoms})")
    answer = Answer(answer)
    if answer is Answer.UNKNOWN:
        return prior
    column = matrix.likelihood[:, symptom]
    like = column if answer is Answer.YES else 1.0 - column
    unnormalized = prior * like
    mass = float(unnormalized.sum())
    if mass < DEGENERATE_MASS:
        raise DegeneratePosteriorError(
            f"posterior mass {mass!r} after symptom {symptom} answer {answer.value}"
        )
    return unnormalized / mass


def entropy(dist: np.ndarray) -> float:
    """Shannon entropy in bits, -sum(p * log2 p)."""
    d = validate_distribution(dist)
    positive = d[d > 0.0]
    return float(-(positive * np.log2(positive)).sum())


def _neg_entropy_rows(columns: np.ndarray) -> np.ndarray:
    """sum(p * log2 p) down axis 0 for a matrix of per-column distributions."""
    safe = np.where(columns > 0.0, columns, 1.0)
    return (columns * np.log2(safe)).sum(axis=0)


def score_symptoms(
    dist: np.ndarray, matrix: KnowledgeMatrix, policy: SelectionPolicy
) -> np.ndarray:
    """Score every symptom at once under the given policy.

    Returns one score per symptom; higher is better. This is the single
    scoring implementation: the per-symptom helpers and
    :func:`select_question` all read from it, so argmax choices and
    reported per-symptom values can never disagree.
    """
    d = validate_distribution(dist, matrix.n_conditions)
    total = d.sum()
    if total > 0.0:
        d = d / total
    policy = SelectionPolicy(policy)

    joint_yes = d[:, None] * matrix.likelihood
    p_yes = joint_yes.sum(axis=0)
    # A zero branch probability means that branch is never taken; its
    # posterior is irrelevant, so substitute 1 to keep the division clean.
    post_yes = joint_yes / np.where(p_yes > 0.0, p_yes, 1.0)

    if policy is SelectionPolicy.YES_BRANCH:
        return _neg_entropy_rows(post_yes)

    joint_no = d[:, None] * (1.0 - matrix.likelihood)
    p_no = joint_no.sum(axis=0)
    post_no = joint_no / np.where(p_no > 0.0, p_no, 1.0)
    h_yes = -_neg_entropy_rows(post_yes)
    h_no = -_neg_entropy_rows(post_no)
    prior_positive = d[d > 0.0]
    h_prior = float(-(prior_positive * np.log2(prior_positive)).sum())
    gain = h_prior - (p_yes * h_yes + p_no * h_no)
    # Expected gain is nonnegative by Jensen; negatives are float noise.
    return np.maximum(gain, 0.0)


def expected_information_gain(
    dist: np.ndarray, matrix: KnowledgeMatrix, symptom: int
) -> float:
    """Expected entropy reduction, in bits, from asking one symptom.

    H(prior) minus the answer-probability-weighted entropy of the two
    branch posteriors. Always in [0, H(prior)] up to rounding.
    """
    if not 0 <= symptom < matrix.n_symptoms:
        raise IndexError(f"symptom index {symptom} out of range [0, {matrix.n_symptoms})")
    return float(score_symptoms(dist, matrix, SelectionPolicy.EXPECTED_IG)[symptom])


def yes_branch_score(dist: np.ndarray, matrix: KnowledgeMatrix, symptom: int) -> float:
    """Negative entropy of the posterior assuming the answer is yes.

    At most 0; maximized when a yes answer would pin down one condition.
    """
    if not 0 <= symptom < matrix.n_symptoms:
        raise IndexError(f"symptom index {symptom} out of range [0, {matrix.n_symptoms})")
    return float(score_symptoms(dist, matrix, SelectionPolicy.YES_BRANCH)[symptom])


def select_question(
    dist: np.ndarray,
    matrix: KnowledgeMatrix,
    excluded: set[int] = frozenset(),
    policy: SelectionPolicy = SelectionPolicy.EXPECTED_IG,
) -> int | None:
    """Pick the non-excluded symptom with the highest policy score.

    Ties break toward the lowest symptom index. Returns None when every
    symptom is excluded.
    """
    excluded = set(excluded)
    for s in excluded:
        if not 0 <= s < matrix.n_symptoms:
            raise IndexError(f"excluded symptom {s} out of range [0, {matrix.n_symptoms})")
    if len(excluded) >= matrix.n_symptoms:
        return None
    scores = score_symptoms(dist, matrix, policy)
    if excluded:
        scores = scores.copy()
        scores[list(excluded)] = -np.inf
    # argmax returns the first maximal index, which is the tie-break rule.
    return int(np.argmax(scores))
