"""Operator entry points.

Four subcommands: validate a matrix file, run the accuracy comparison,
serve the HTTP API, and hold an interactive question dialog in the
terminal. Exit codes: 0 success, 1 domain failure (invalid matrix,
aborted dialog), 2 usage or I/O failure (argparse's own convention).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .inference import Answer, SelectionPolicy, validate_distribution, uniform_distribution
from .knowledge import (
    DEFAULT_EPSILON,
    KnowledgeMatrix,
    MatrixFormatError,
    clamp_probabilities,
    load_matrix_file,
)
from .session import SessionConfig, create_session, differential, submit_answer
from .simulation import (
    DEFAULT_UNREPORTED_FRACTION,
    PriorNoiseModel,
    default_benchmark_matrix,
    evaluate,
    render_report_table,
    reports_to_json,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

_ANSWER_WORDS = {
    "y": Answer.YES,
    "yes": Answer.YES,
    "n": Answer.NO,
    "no": Answer.NO,
    "u": Answer.UNKNOWN,
    "unknown": Answer.UNKNOWN,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triage",
        description="Bayesian symptom-question triage engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a matrix file, report dimensions")
    p.add_argument("--matrix", required=True, help="matrix file (.json or .csv)")

    p = sub.add_parser("eval", help="run the three-configuration accuracy comparison")
    p.add_argument("--matrix", help="matrix file; defaults to the built-in synthetic benchmark")
    p.add_argument("--episodes", type=int, default=1500, help="number of simulated cases")
    p.add_argument("--folds", type=int, default=5, help="folds for mean/std reporting")
    p.add_argument("--seed", type=int, default=7, help="base seed; fixes every random draw")
    p.add_argument("--noise-top1", type=float, default=0.5,
                   help="target top-1 rate of the simulated classifier prior")
    p.add_argument("--concentration", type=float, default=3.0,
                   help="peakedness of the simulated prior")
    p.add_argument("--unreported-fraction", type=float, default=DEFAULT_UNREPORTED_FRACTION,
                   help="fraction of symptoms a vignette leaves unreported")
    p.add_argument("--max-questions", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "table"],
                   help="emit a single rendering; default emits table then JSON")

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--matrix", help="matrix file (or env TRIAGE_MATRIX)")
    p.add_argument("--port", type=int, help="listen port (or env TRIAGE_PORT; default 8080)")
    p.add_argument("--epsilon", type=float,
                   help="probability smoothing floor (or env TRIAGE_EPSILON)")
    p.add_argument("--session-ttl-seconds", type=float,
                   help="idle session lifetime (or env TRIAGE_SESSION_TTL_SECONDS)")

    p = sub.add_parser("interactive", help="answer questions at the terminal")
    p.add_argument("--matrix", required=True, help="matrix file (.json or .csv)")
    p.add_argument("--prior", help="JSON file mapping condition names to weights; default uniform")
    p.add_argument("--max-questions", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--policy", choices=[pol.value for pol in SelectionPolicy],
                   default=SelectionPolicy.EXPECTED_IG.value)
    return parser


def _load_matrix_or_exit(path) -> KnowledgeMatrix | int:
    """Load and return a matrix, or an exit code when that fails."""
    try:
        return load_matrix_file(path)
    except MatrixFormatError as exc:
        print(f"invalid matrix: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"cannot read matrix file: {exc}", file=sys.stderr)
        return EXIT_USAGE


def cmd_validate(args) -> int:
    loaded = _load_matrix_or_exit(args.matrix)
    if isinstance(loaded, int):
        return loaded
    print(f"OK: {loaded.n_conditions} conditions, {loaded.n_symptoms} symptoms")
    return EXIT_OK


def cmd_eval(args, parser: argparse.ArgumentParser) -> int:
    if args.folds < 1:
        parser.error(f"--folds must be >= 1, got {args.folds}")
    if args.episodes < args.folds:
        parser.error(f"--episodes must be >= --folds, got {args.episodes} < {args.folds}")
    try:
        noise = PriorNoiseModel(
            target_top1=args.noise_top1, concentration=args.concentration
        )
    except ValueError as exc:
        parser.error(str(exc))
    if args.matrix is None:
        matrix = default_benchmark_matrix()
    else:
        matrix = _load_matrix_or_exit(args.matrix)
        if isinstance(matrix, int):
            return matrix
    matrix = clamp_probabilities(matrix)
    reports = {}
    for policy in SelectionPolicy:
        try:
            reports[policy.value] = evaluate(
                matrix,
                episodes=args.episodes,
                folds=args.folds,
                noise=noise,
                seed=args.seed,
                policy=policy,
                max_questions=args.max_questions,
                confidence_threshold=args.threshold,
                unreported_fraction=args.unreported_fraction,
            )
        except ValueError as exc:
            parser.error(str(exc))
    if args.format == "json":
        text = reports_to_json(reports)
    elif args.format == "table":
        text = "\n\n".join(render_report_table(r) for r in reports.values())
    else:
        tables = "\n\n".join(render_report_table(r) for r in reports.values())
        text = tables + "\n\n" + reports_to_json(reports)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"cannot write report: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        print(text)
    return EXIT_OK


def cmd_serve(args, parser: argparse.ArgumentParser) -> int:
    def from_env(flag_value, name, cast, default):
        if flag_value is not None:
            return flag_value
        raw = os.environ.get(f"TRIAGE_{name}")
        if raw is None:
            return default
        try:
            return cast(raw)
        except ValueError:
            parser.error(f"TRIAGE_{name} is not a valid {cast.__name__}: {raw!r}")

    matrix_path = args.matrix or os.environ.get("TRIAGE_MATRIX")
    if not matrix_path:
        parser.error("serve needs --matrix or TRIAGE_MATRIX")
    port = from_env(args.port, "PORT", int, 8080)
    epsilon = from_env(args.epsilon, "EPSILON", float, DEFAULT_EPSILON)
    ttl = from_env(args.session_ttl_seconds, "SESSION_TTL_SECONDS", float, 3600.0)
    loaded = _load_matrix_or_exit(matrix_path)
    if isinstance(loaded, int):
        return loaded
    from .api import create_app
    import uvicorn

    app = create_app(loaded, epsilon=epsilon, session_ttl_seconds=ttl)
    uvicorn.run(app, host="0.0.0.0", port=port)
    return EXIT_OK


def _load_prior_file(path, matrix: KnowledgeMatrix) -> np.ndarray:
    """Parse a name→weight JSON map; normalizes, raising ValueError on bad data."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValueError("prior file must be a JSON object of condition: weight pairs")
    index = matrix.condition_index()
    vec = np.zeros(matrix.n_conditions)
    for name, value in doc.items():
        if name not in index:
            raise ValueError(f"unknown condition name: {name!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"weight for {name!r} must be a number")
        vec[index[name]] = float(value)
    total = vec.sum()
    if not np.isfinite(total) or total <= 0:
        raise ValueError("prior weights must be finite with positive total")
    return validate_distribution(vec / total, matrix.n_conditions)


def _print_differential(state, matrix: KnowledgeMatrix, k: int | None, out) -> None:
    for rank, (i, prob) in enumerate(differential(state, k), start=1):
        print(f"  {rank}. {matrix.conditions[i]:<24} {100 * prob:6.2f}%", file=out)


def run_interactive(
    matrix: KnowledgeMatrix,
    prior: np.ndarray,
    max_questions: int = 10,
    confidence_threshold: float = 0.95,
    policy: SelectionPolicy = SelectionPolicy.EXPECTED_IG,
    input_fn=None,
    out=None,
) -> int:
    """Terminal dialog loop; separated from arg parsing so tests can drive it.

    Malformed input re-prompts without touching the session, so it never
    costs question budget.
    """
    input_fn = input_fn if input_fn is not None else input
    out = out if out is not None else sys.stdout
    state = create_session(
        SessionConfig(
            prior=prior,
            max_questions=max_questions,
            confidence_threshold=confidence_threshold,
            policy=policy,
        ),
        matrix,
    )
    while not state.is_finished:
        pending = state.pending
        prompt = (
            f"Q{state.questions_asked + 1}/{state.config.max_questions} "
            f"{matrix.symptoms[pending]}? [y/n/u] "
        )
        try:
            raw = input_fn(prompt)
        except EOFError:
            print("aborted", file=out)
            return EXIT_DOMAIN
        answer = _ANSWER_WORDS.get(raw.strip().lower())
        if answer is None:
            print("please answer y(es), n(o), or u(nknown)", file=out)
            continue
        state = submit_answer(state, pending, answer)
        _print_differential(state, matrix, 3, out)
    print(f"stopped: {state.stop_reason.value}", file=out)
    print("final differential:", file=out)
    _print_differential(state, matrix, None, out)
    return EXIT_OK


def cmd_interactive(args, parser: argparse.ArgumentParser) -> int:
    if args.max_questions < 1:
        parser.error(f"--max-questions must be >= 1, got {args.max_questions}")
    if not 0.5 < args.threshold < 1.0:
        parser.error(f"--threshold must be in (0.5, 1), got {args.threshold}")
    loaded = _load_matrix_or_exit(args.matrix)
    if isinstance(loaded, int):
        return loaded
    matrix = clamp_probabilities(loaded)
    if args.prior is None:
        prior = uniform_distribution(matrix.n_conditions)
    else:
        try:
            prior = _load_prior_file(args.prior, matrix)
        except OSError as exc:
            print(f"cannot read prior file: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except (ValueError, json.JSONDecodeError) as exc:
            print(f"invalid prior: {exc}", file=sys.stderr)
            return EXIT_DOMAIN
    return run_interactive(
        matrix,
        prior,
        max_questions=args.max_questions,
        confidence_threshold=args.threshold,
        policy=SelectionPolicy(args.policy),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args)
    if args.command == "eval":
        return cmd_eval(args, parser)
    if args.command == "serve":
        return cmd_serve(args, parser)
    return cmd_interactive(args, parser)


if __name__ == "__main__":
    sys.exit(main())
