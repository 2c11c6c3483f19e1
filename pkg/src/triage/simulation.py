"""Synthetic vignettes, episode runner, and top-K accuracy reports.

The harness stands in for a labeled evaluation set: each episode draws a
true condition, samples which symptoms the patient would report from the
knowledge matrix itself, fakes a classifier prior peaked at the truth (or
a decoy) with tunable reliability, and then runs the question loop in
three configurations: ranking by the prior alone, questioning from a
uniform prior, and questioning seeded with the prior.

Every random draw derives from (seed, episode index), so reports are
bit-reproducible and episodes could run in any order or in parallel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .inference import (
    Answer,
    SelectionPolicy,
    uniform_distribution,
    validate_distribution,
)
from .knowledge import KnowledgeMatrix
from .session import SessionConfig, StopReason, create_session, submit_answer

DEFAULT_UNREPORTED_FRACTION = 0.5
TOP_KS = (1, 2, 3)


class EpisodeMode(str, Enum):
    PRIOR_ONLY = "prior_only"
    QA_ONLY = "qa_only"
    COMBINED = "combined"


@dataclass(frozen=True)
class PriorNoiseModel:
    """Two-parameter model of a noisy classifier softmax.

    ``target_top1`` is the fraction of sampled priors whose argmax should
    hit the true condition; ``concentration`` controls how peaked each
    prior is. Internally the peak is placed on the truth or on a uniformly
    chosen decoy at a rate solved so the realized argmax hit rate matches
    ``target_top1`` (Gumbel noise occasionally moves the argmax off the
    peak, so using the target as the raw peak rate would undershoot).
    """

    target_top1: float = 0.5
    concentration: float = 3.0

    def __post_init__(self):
        if not 0.0 < self.target_top1 < 1.0:
            raise ValueError(f"target_top1 must be in (0, 1), got {self.target_top1}")
        if not self.concentration > 0.0:
            raise ValueError(f"concentration must be > 0, got {self.concentration}")

    def peak_on_truth_rate(self, n_conditions: int) -> float:
        """Rate at which the peak goes on the truth rather than a decoy."""
        if n_conditions < 2:
            return 1.0
        e = math.exp(self.concentration)
        hit_if_peaked = e / (e + n_conditions - 1)
        hit_if_not = (1.0 - hit_if_peaked) / (n_conditions - 1)
        if hit_if_peaked - hit_if_not < 1e-12:
            return 1.0
        rate = (self.target_top1 - hit_if_not) / (hit_if_peaked - hit_if_not)
        return min(max(rate, 0.0), 1.0)


@dataclass(frozen=True)
class Vignette:
    """One synthetic or externally supplied case.

    Symptoms absent from both sets are unreported; the answer oracle maps
    them to unknown.
    """

    true_condition: int
    positive_symptoms: frozenset[int]
    negative_symptoms: frozenset[int]
    prior: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positive_symptoms", frozenset(self.positive_symptoms))
        object.__setattr__(self, "negative_symptoms", frozenset(self.negative_symptoms))
        overlap = self.positive_symptoms & self.negative_symptoms
        if overlap:
            raise ValueError(f"symptoms marked both positive and negative: {sorted(overlap)}")
        object.__setattr__(self, "prior", validate_distribution(self.prior))
        if not 0 <= self.true_condition < len(self.prior):
            raise ValueError(
                f"true_condition {self.true_condition} out of range for "
                f"{len(self.prior)} conditions"
            )


@dataclass(frozen=True)
class EpisodeResult:
    true_condition: int
    final_posterior: np.ndarray
    questions_asked: int
    stop_reason: StopReason | None
    prior_rank: int
    final_rank: int


def rank_of(dist: np.ndarray, condition: int) -> int:
    """1-based rank of a condition, descending, ties toward lower index."""
    order = np.argsort(-np.asarray(dist, dtype=np.float64), kind="stable")
    return int(np.nonzero(order == condition)[0][0]) + 1


def sample_prior(
    n_conditions: int, true_condition: int, noise: PriorNoiseModel, rng
) -> np.ndarray:
    """Draw one simulated classifier output distribution."""
    rng = np.random.default_rng(rng)
    if rng.random() < noise.peak_on_truth_rate(n_conditions):
        peak = true_condition
    else:
        peak = int(rng.integers(n_conditions - 1))
        if peak >= true_condition:
            peak += 1
    logits = rng.gumbel(size=n_conditions)
    logits[peak] += noise.concentration
    logits -= logits.max()
    weights = np.exp(logits)
    return weights / weights.sum()


def sample_vignette(
    matrix: KnowledgeMatrix,
    true_condition: int,
    noise: PriorNoiseModel,
    seed,
    unreported_fraction: float = DEFAULT_UNREPORTED_FRACTION,
) -> Vignette:
    """Sample one case: symptom presence from the matrix row, prior from the
    noise model.

    Each symptom is present with its matrix probability for the true
    condition, then a fixed fraction of symptoms is hidden entirely to
    mimic descriptions that mention only a handful of findings. ``seed``
    may be an int (deterministic) or a numpy Generator.
    """
    if not 0 <= true_condition < matrix.n_conditions:
        raise IndexError(
            f"condition index {true_condition} out of range [0, {matrix.n_conditions})"
        )
    if not 0.0 <= unreported_fraction < 1.0:
        raise ValueError(f"unreported_fraction must be in [0, 1), got {unreported_fraction}")
    rng = np.random.default_rng(seed)
    present = rng.random(matrix.n_symptoms) < matrix.likelihood[true_condition]
    reported = rng.random(matrix.n_symptoms) >= unreported_fraction
    prior = sample_prior(matrix.n_conditions, true_condition, noise, rng)
    positive = frozenset(np.nonzero(present & reported)[0].tolist())
    negative = frozenset(np.nonzero(~present & reported)[0].tolist())
    return Vignette(true_condition, positive, negative, prior)


def answer_oracle(vignette: Vignette, symptom: int) -> Answer:
    """Answer as the vignette would: yes / no if reported, unknown otherwise."""
    if symptom in vignette.positive_symptoms:
        return Answer.YES
    if symptom in vignette.negative_symptoms:
        return Answer.NO
    return Answer.UNKNOWN


def run_episode(
    vignette: Vignette,
    matrix: KnowledgeMatrix,
    mode: EpisodeMode,
    max_questions: int = 10,
    confidence_threshold: float = 0.95,
    policy: SelectionPolicy = SelectionPolicy.EXPECTED_IG,
) -> EpisodeResult:
    """Run one case in one configuration and report ranks of the truth.

    prior_only ranks by the vignette prior with no questions; qa_only runs
    the session from a uniform prior; combined seeds it with the vignette
    prior. Questions are answered by the vignette until the session stops.
    """
    mode = EpisodeMode(mode)
    prior = validate_distribution(vignette.prior, matrix.n_conditions)
    prior_rank = rank_of(prior, vignette.true_condition)
    if mode is EpisodeMode.PRIOR_ONLY:
        return EpisodeResult(
            true_condition=vignette.true_condition,
            final_posterior=prior,
            questions_asked=0,
            stop_reason=None,
            prior_rank=prior_rank,
            final_rank=prior_rank,
        )
    start = uniform_distribution(matrix.n_conditions) if mode is EpisodeMode.QA_ONLY else prior
    state = create_session(
        SessionConfig(
            prior=start,
            max_questions=max_questions,
            confidence_threshold=confidence_threshold,
            policy=policy,
        ),
        matrix,
    )
    while not state.is_finished:
        pending = state.pending
        state = submit_answer(state, pending, answer_oracle(vignette, pending))
    return EpisodeResult(
        true_condition=vignette.true_condition,
        final_posterior=state.posterior,
        questions_asked=state.questions_asked,
        stop_reason=state.stop_reason,
        prior_rank=prior_rank,
        final_rank=rank_of(state.posterior, vignette.true_condition),
    )


@dataclass(frozen=True)
class AccuracyStats:
    """Fold-wise mean and standard deviation of top-K accuracy."""

    mean: dict[int, float]
    std: dict[int, float]

    def to_dict(self) -> dict:
        return {
            f"top{k}": {"mean": self.mean[k], "std": self.std[k]} for k in TOP_KS
        }


@dataclass(frozen=True)
class MetricsReport:
    episodes: int
    folds: int
    seed: int
    policy: str
    noise: PriorNoiseModel
    max_questions: int
    confidence_threshold: float
    unreported_fraction: float
    prior_only: AccuracyStats
    qa_only: AccuracyStats
    combined: AccuracyStats

    def stats(self, mode: EpisodeMode) -> AccuracyStats:
        return {
            EpisodeMode.PRIOR_ONLY: self.prior_only,
            EpisodeMode.QA_ONLY: self.qa_only,
            EpisodeMode.COMBINED: self.combined,
        }[EpisodeMode(mode)]

    def to_dict(self) -> dict:
        return {
            "episodes": self.episodes,
            "folds": self.folds,
            "seed": self.seed,
            "policy": self.policy,
            "noise": {
                "target_top1": self.noise.target_top1,
                "concentration": self.noise.concentration,
            },
            "session": {
                "max_questions": self.max_questions,
                "confidence_threshold": self.confidence_threshold,
                "unreported_fraction": self.unreported_fraction,
            },
            "configurations": {
                mode.value: self.stats(mode).to_dict() for mode in EpisodeMode
            },
        }


def _fold_accuracies(ranks: np.ndarray, folds: int) -> AccuracyStats:
    chunks = np.array_split(ranks, folds)
    mean: dict[int, float] = {}
    std: dict[int, float] = {}
    for k in TOP_KS:
        per_fold = np.array([(chunk <= k).mean() for chunk in chunks])
        mean[k] = float(per_fold.mean())
        std[k] = float(per_fold.std(ddof=1)) if folds > 1 else 0.0
    return AccuracyStats(mean, std)


def evaluate(
    matrix: KnowledgeMatrix,
    episodes: int,
    folds: int,
    noise: PriorNoiseModel,
    seed: int,
    policy: SelectionPolicy = SelectionPolicy.EXPECTED_IG,
    max_questions: int = 10,
    confidence_threshold: float = 0.95,
    unreported_fraction: float = DEFAULT_UNREPORTED_FRACTION,
) -> MetricsReport:
    """Run the three-configuration comparison and fold the accuracies.

    True conditions are drawn uniformly. The per-episode random stream
    depends only on (seed, episode index), so two calls with the same seed
    see identical vignettes regardless of policy or mode.
    """
    if folds < 1:
        raise ValueError(f"folds must be >= 1, got {folds}")
    if episodes < folds:
        raise ValueError(f"episodes ({episodes}) must be >= folds ({folds})")
    policy = SelectionPolicy(policy)
    ranks = {mode: np.zeros(episodes, dtype=np.int64) for mode in EpisodeMode}
    for e in range(episodes):
        rng = np.random.default_rng(np.random.SeedSequence([seed, e]))
        true_condition = int(rng.integers(matrix.n_conditions))
        vignette = sample_vignette(
            matrix, true_condition, noise, rng, unreported_fraction
        )
        for mode in EpisodeMode:
            result = run_episode(
                vignette,
                matrix,
                mode,
                max_questions=max_questions,
                confidence_threshold=confidence_threshold,
                policy=policy,
            )
            ranks[mode][e] = result.final_rank
    stats = {mode: _fold_accuracies(ranks[mode], folds) for mode in EpisodeMode}
    return MetricsReport(
        episodes=episodes,
        folds=folds,
        seed=seed,
        policy=policy.value,
        noise=noise,
        max_questions=max_questions,
        confidence_threshold=confidence_threshold,
        unreported_fraction=unreported_fraction,
        prior_only=stats[EpisodeMode.PRIOR_ONLY],
        qa_only=stats[EpisodeMode.QA_ONLY],
        combined=stats[EpisodeMode.COMBINED],
    )


def render_report_table(report: MetricsReport) -> str:
    """Aligned three-column accuracy table, one row per top-K."""
    header = (
        f"policy: {report.policy}  episodes: {report.episodes}  "
        f"folds: {report.folds}  seed: {report.seed}"
    )
    columns = [("prior-only", report.prior_only), ("qa-only", report.qa_only),
               ("combined", report.combined)]
    lines = [header, f"{'':8}" + "".join(f"{title:>20}" for title, _ in columns)]
    for k in TOP_KS:
        cells = []
        for _, stats in columns:
            cells.append(f"{100 * stats.mean[k]:6.2f} +- {100 * stats.std[k]:.2f}%")
        lines.append(f"Top-{k:<4}" + "".join(f"{c:>20}" for c in cells))
    return "\n".join(lines)


def reports_to_json(reports: dict[str, MetricsReport]) -> str:
    """Stable JSON for one or more per-policy reports."""
    return json.dumps(
        {name: report.to_dict() for name, report in reports.items()}, indent=2
    )


def brute_force_best_symptom(
    dist, matrix: KnowledgeMatrix, excluded: set[int] = frozenset()
) -> int | None:
    """Reference argmax for question selection, written from scratch.

    Scores every candidate by directly building both answer-branch
    posteriors with plain Python floats and weighing their entropies.
    Deliberately shares no code with the selection path it checks. Ties
    break toward the lowest index; returns None when nothing is left.
    """
    probs = [float(p) for p in dist]
    total = sum(probs)
    probs = [p / total for p in probs]
    h_prior = -sum(p * math.log2(p) for p in probs if p > 0.0)

    best_index = None
    best_score = None
    for s in range(matrix.n_symptoms):
        if s in excluded:
            continue
        joint_yes = [p * matrix.likelihood_at(i, s) for i, p in enumerate(probs)]
        joint_no = [p * (1.0 - matrix.likelihood_at(i, s)) for i, p in enumerate(probs)]
        p_yes = sum(joint_yes)
        p_no = sum(joint_no)
        h_yes = -sum(
            (q / p_yes) * math.log2(q / p_yes) for q in joint_yes if q > 0.0
        ) if p_yes > 0.0 else 0.0
        h_no = -sum(
            (q / p_no) * math.log2(q / p_no) for q in joint_no if q > 0.0
        ) if p_no > 0.0 else 0.0
        gain = h_prior - (p_yes * h_yes + p_no * h_no)
        if gain < 0.0:
            gain = 0.0
        if best_score is None or gain > best_score:
            best_index = s
            best_score = gain
    return best_index


BENCHMARK_CONDITIONS = (
    "atopic_dermatitis",
    "lupus",
    "shingles",
    "cellulitis",
    "chickenpox",
    "hives",
    "psoriasis",
    "gout",
    "melanoma",
)

BENCHMARK_GROUP_SIZE = 3
BENCHMARK_GROUP_MARKERS = 10
BENCHMARK_PRIVATE_MARKERS = 2


def default_benchmark_matrix(
    n_symptoms: int = 330, seed: int = 20240917
) -> KnowledgeMatrix:
    """Synthetic 9-condition matrix with deliberately overlapping structure.

    Conditions come in groups of three that share group markers with
    identical probabilities, so questions alone can find the group but
    carry no signal within it; each condition adds a couple of rare
    private markers. That makes questioning from a uniform start weak at
    the final ranking while an informative prior, refined by the same
    questions, resolves the within-group ambiguity. Everything else is
    background noise near the smoothing floor.
    """
    rng = np.random.default_rng(seed)
    n_conditions = len(BENCHMARK_CONDITIONS)
    table = rng.uniform(1e-4, 0.01, size=(n_conditions, n_symptoms))
    slots = rng.permutation(n_symptoms)
    cursor = 0
    for first in range(0, n_conditions, BENCHMARK_GROUP_SIZE):
        members = range(first, min(first + BENCHMARK_GROUP_SIZE, n_conditions))
        shared = slots[cursor : cursor + BENCHMARK_GROUP_MARKERS]
        cursor += BENCHMARK_GROUP_MARKERS
        shared_probs = rng.uniform(0.35, 0.75, size=shared.size)
        for member in members:
            table[member, shared] = shared_probs
        for member in members:
            private = slots[cursor : cursor + BENCHMARK_PRIVATE_MARKERS]
            cursor += BENCHMARK_PRIVATE_MARKERS
            table[member, private] = rng.uniform(0.15, 0.35, size=private.size)
    symptoms = tuple(f"symptom_{j:03d}" for j in range(n_symptoms))
    return KnowledgeMatrix(BENCHMARK_CONDITIONS, symptoms, table)


def load_vignettes(source, matrix: KnowledgeMatrix) -> list[Vignette]:
    """Parse the JSON vignette file format against a matrix's name spaces.

    Expects an array of objects with keys true_condition, prior (name to
    probability map), positive_symptoms, negative_symptoms.
    """
    text = source.read_text(encoding="utf-8") if hasattr(source, "read_text") else source
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    doc = json.loads(text)
    if not isinstance(doc, list):
        raise ValueError("vignette file must be a JSON array")
    cond_index = matrix.condition_index()
    symp_index = matrix.symptom_index()
    vignettes = []
    for i, entry in enumerate(doc):
        try:
            true_condition = cond_index[entry["true_condition"]]
            positive = frozenset(symp_index[s] for s in entry["positive_symptoms"])
            negative = frozenset(symp_index[s] for s in entry["negative_symptoms"])
            prior = np.zeros(matrix.n_conditions)
            for name, value in entry["prior"].items():
                prior[cond_index[name]] = value
        except KeyError as exc:
            raise ValueError(f"vignette {i}: unknown name or missing key {exc}") from exc
        vignettes.append(Vignette(true_condition, positive, negative, prior))
    return vignettes
