"""Condition-symptom knowledge matrix: loading, validation, smoothing, lookup.

The matrix is a dense table of p(symptom present | condition), one row per
condition and one column per symptom. Identity is positional: the engine
works with integer indices, names are metadata carried alongside for the
API boundary.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_EPSILON = 1e-4


class MatrixFormatError(ValueError):
    """Raised when a matrix document is malformed or violates invariants."""


def _as_text(source) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _check_unique(kind: str, names, problems: list[str]) -> None:
    seen = set()
    for name in names:
        if name in seen:
            problems.append(f"duplicate {kind} identifier: {name!r}")
        seen.add(name)


@dataclass(frozen=True)
class KnowledgeMatrix:
    """Immutable table of p(symptom | condition).

    ``likelihood`` has shape (len(conditions), len(symptoms)) and is made
    read-only on construction, so one instance can be shared freely across
    concurrent sessions.
    """

    conditions: tuple[str, ...]
    symptoms: tuple[str, ...]
    likelihood: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))
        object.__setattr__(self, "symptoms", tuple(self.symptoms))
        table = np.array(self.likelihood, dtype=np.float64)
        problems: list[str] = []
        if len(self.conditions) == 0:
            problems.append("matrix must declare at least one condition")
        if len(self.symptoms) == 0:
            problems.append("matrix must declare at least one symptom")
        _check_unique("condition", self.conditions, problems)
        _check_unique("symptom", self.symptoms, problems)
        expected = (len(self.conditions), len(self.symptoms))
        if table.shape != expected:
            problems.append(
                f"likelihood table shape {table.shape} does not match "
                f"{expected[0]} conditions x {expected[1]} symptoms"
            )
        else:
            bad = ~(np.isfinite(table) & (table >= 0.0) & (table <= 1.0))
            for i, j in zip(*np.nonzero(bad)):
                problems.append(
                    f"entry ({self.conditions[i]!r}, {self.symptoms[j]!r}) = "
                    f"{float(table[i, j])!r} is not a probability in [0, 1]"
                )
        if problems:
            raise MatrixFormatError("; ".join(problems))
        table.setflags(write=False)
        object.__setattr__(self, "likelihood", table)

    @property
    def n_conditions(self) -> int:
        return len(self.conditions)

    @property
    def n_symptoms(self) -> int:
        return len(self.symptoms)

    def likelihood_at(self, condition: int, symptom: int) -> float:
        """Return p(symptom | condition) for zero-based indices."""
        if not 0 <= condition < self.n_conditions:
            raise IndexError(
                f"condition index {condition} out of range [0, {self.n_conditions})"
            )
        if not 0 <= symptom < self.n_symptoms:
            raise IndexError(
                f"symptom index {symptom} out of range [0, {self.n_symptoms})"
            )
        return float(self.likelihood[condition, symptom])

    def condition_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.conditions)}

    def symptom_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.symptoms)}


def clamp_probabilities(
    matrix: KnowledgeMatrix, epsilon: float = DEFAULT_EPSILON
) -> KnowledgeMatrix:
    """Clamp every entry into [epsilon, 1 - epsilon].

    A literal 0 or 1 in the table lets a single contradictory answer zero a
    condition forever; smoothing keeps every update reversible. Idempotent,
    and entries already inside the band are untouched.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must be in (0, 0.5), got {epsilon}")
    clamped = np.clip(matrix.likelihood, epsilon, 1.0 - epsilon)
    return KnowledgeMatrix(matrix.conditions, matrix.symptoms, clamped)


def _parse_json(text: str) -> KnowledgeMatrix:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MatrixFormatError("top-level JSON value must be an object")
    missing = [
        k for k in ("conditions", "symptoms", "p_symptom_given_condition") if k not in doc
    ]
    if missing:
        raise MatrixFormatError(f"missing keys: {', '.join(missing)}")
    conditions = doc["conditions"]
    symptoms = doc["symptoms"]
    rows = doc["p_symptom_given_condition"]
    if not (isinstance(conditions, list) and all(isinstance(c, str) for c in conditions)):
        raise MatrixFormatError("'conditions' must be an array of strings")
    if not (isinstance(symptoms, list) and all(isinstance(s, str) for s in symptoms)):
        raise MatrixFormatError("'symptoms' must be an array of strings")
    if not isinstance(rows, list):
        raise MatrixFormatError("'p_symptom_given_condition' must be an array of rows")

    problems: list[str] = []
    if len(rows) != len(conditions):
        problems.append(
            f"{len(rows)} likelihood rows for {len(conditions)} conditions"
        )
    table = np.zeros((len(conditions), len(symptoms)))
    for i, row in enumerate(rows[: len(conditions)]):
        if not isinstance(row, list) or len(row) != len(symptoms):
            problems.append(
                f"row {i} has {len(row) if isinstance(row, list) else 'non-array'} "
                f"entries, expected {len(symptoms)}"
            )
            continue
        for j, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                problems.append(f"entry ({i}, {j}) is not a number: {value!r}")
            else:
                table[i, j] = value
    if problems:
        raise MatrixFormatError("; ".join(problems))
    return KnowledgeMatrix(tuple(conditions), tuple(symptoms), table)


def _parse_csv(text: str) -> KnowledgeMatrix:
    try:
        records = list(csv.reader(io.StringIO(text)))
    except csv.Error as exc:
        raise MatrixFormatError(f"invalid CSV: {exc}") from exc
    records = [r for r in records if r]
    if not records:
        raise MatrixFormatError("empty CSV document")
    header = records[0]
    if not header or header[0] != "condition":
        raise MatrixFormatError("CSV header must start with 'condition'")
    symptoms = tuple(header[1:])

    problems: list[str] = []
    conditions: list[str] = []
    table = np.zeros((len(records) - 1, len(symptoms)))
    for i, row in enumerate(records[1:]):
        conditions.append(row[0] if row else "")
        if len(row) - 1 != len(symptoms):
            problems.append(
                f"row {i} ({row[0]!r}) has {len(row) - 1} values, "
                f"expected {len(symptoms)}"
            )
            continue
        for j, cell in enumerate(row[1:]):
            try:
                table[i, j] = float(cell)
            except ValueError:
                problems.append(f"entry ({row[0]!r}, {symptoms[j]!r}) is not a number: {cell!r}")
    if problems:
        raise MatrixFormatError("; ".join(problems))
    return KnowledgeMatrix(tuple(conditions), symptoms, table)


def load_knowledge_matrix(source, fmt: str = "json") -> KnowledgeMatrix:
    """Parse a matrix document from bytes, text, a file object, or a path.

    ``fmt`` is ``"json"`` or ``"csv"``. Entries are validated to lie in
    [0, 1] but are not smoothed; apply :func:`clamp_probabilities` before
    running inference.
    """
    text = _as_text(source)
    if fmt == "json":
        return _parse_json(text)
    if fmt == "csv":
        return _parse_csv(text)
    raise ValueError(f"unknown format {fmt!r}, expected 'json' or 'csv'")


def load_matrix_file(path, fmt: str | None = None) -> KnowledgeMatrix:
    """Load a matrix from disk, inferring the format from the extension."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    return load_knowledge_matrix(path, fmt)


def to_json(matrix: KnowledgeMatrix) -> str:
    """Serialize to the JSON document format; floats round-trip exactly."""
    doc = {
        "conditions": list(matrix.conditions),
        "symptoms": list(matrix.symptoms),
        "p_symptom_given_condition": [
            [float(v) for v in row] for row in matrix.likelihood
        ],
    }
    return json.dumps(doc, indent=2)


def to_csv(matrix: KnowledgeMatrix) -> str:
    """Serialize to the CSV document format; floats round-trip exactly."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["condition", *matrix.symptoms])
    for name, row in zip(matrix.conditions, matrix.likelihood):
        writer.writerow([name, *(repr(float(v)) for v in row)])
    return out.getvalue()
