"""End-to-end acceptance checks.

Each test is one release criterion run at its stated tolerance and prints
a single PASS line with the measured numbers (visible with -s or -rP).
Thresholds here are contractual; do not loosen them to make a failure go
away.
"""

import json
import subprocess
import sys
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from triage import (
    Answer,
    EpisodeMode,
    KnowledgeMatrix,
    PriorNoiseModel,
    SelectionPolicy,
    brute_force_best_symptom,
    clamp_probabilities,
    default_benchmark_matrix,
    entropy,
    evaluate,
    posterior_update,
    replay_posterior,
    run_episode,
    sample_vignette,
    score_symptoms,
    select_question,
)
from triage.api import create_app

BENCH_SEED = 7


def random_instance(rng, max_conditions=6, max_symptoms=12):
    n = int(rng.integers(2, max_conditions + 1))
    m = int(rng.integers(1, max_symptoms + 1))
    matrix = KnowledgeMatrix(
        tuple(f"c{i}" for i in range(n)),
        tuple(f"s{j}" for j in range(m)),
        rng.uniform(0.01, 0.99, (n, m)),
    )
    dist = rng.dirichlet(np.ones(n))
    return dist, matrix


@pytest.fixture(scope="module")
def benchmark_matrix():
    return clamp_probabilities(default_benchmark_matrix())


@pytest.fixture(scope="module")
def benchmark_reports(benchmark_matrix):
    """One evaluation per policy on the default benchmark, with timings."""
    noise = PriorNoiseModel()
    reports = {}
    timings = {}
    for policy in SelectionPolicy:
        start = time.perf_counter()
        reports[policy.value] = evaluate(
            benchmark_matrix, episodes=1500, folds=5, noise=noise, seed=BENCH_SEED,
            policy=policy,
        )
        timings[policy.value] = time.perf_counter() - start
    return reports, timings


def test_question_selection_matches_brute_force_oracle():
    rng = np.random.default_rng(20240917)
    start = time.perf_counter()
    checked = ties = 0
    for trial in range(1000):
        if trial % 4 == 0:
            # duplicated columns force exact ties; both sides must break
            # them toward the lower index
            dist, base = random_instance(rng, max_symptoms=6)
            table = np.concatenate([base.likelihood, base.likelihood], axis=1)
            matrix = KnowledgeMatrix(
                base.conditions,
                base.symptoms + tuple(f"dup_{s}" for s in base.symptoms),
                table,
            )
            ties += 1
        else:
            dist, matrix = random_instance(rng)
        expected = brute_force_best_symptom(dist, matrix)
        assert select_question(dist, matrix) == expected
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(
        f"PASS oracle equivalence: {checked} instances ({ties} with forced ties) "
        f"agree exactly in {elapsed:.2f}s"
    )


def test_bayes_update_correctness():
    rng = np.random.default_rng(20240918)
    answers = (Answer.YES, Answer.NO, Answer.UNKNOWN)
    worst = 0.0
    for trial in range(10_000):
        n = int(rng.integers(2, 9))
        col = rng.uniform(0.01, 0.99, n)
        prior = rng.dirichlet(np.ones(n))
        answer = answers[trial % 3]
        matrix = KnowledgeMatrix(
            tuple(f"c{i}" for i in range(n)), ("s",), col.reshape(n, 1)
        )
        post = posterior_update(prior, matrix, 0, answer)
        assert abs(post.sum() - 1.0) <= 1e-9
        assert np.all(post >= 0.0)
        if answer is Answer.YES:
            ref = prior * col
        elif answer is Answer.NO:
            ref = prior * (1.0 - col)
        else:
            ref = prior.copy()
        ref = ref / ref.sum()
        worst = max(worst, float(np.max(np.abs(post - ref))))
        assert np.allclose(post, ref, rtol=0.0, atol=1e-12)
    order_worst = 0.0
    for _ in range(2_000):
        n = int(rng.integers(2, 9))
        table = rng.uniform(0.01, 0.99, (n, 2))
        matrix = KnowledgeMatrix(
            tuple(f"c{i}" for i in range(n)), ("s0", "s1"), table
        )
        prior = rng.dirichlet(np.ones(n))
        a0, a1 = answers[rng.integers(3)], answers[rng.integers(3)]
        forward = posterior_update(posterior_update(prior, matrix, 0, a0), matrix, 1, a1)
        reverse = posterior_update(posterior_update(prior, matrix, 1, a1), matrix, 0, a0)
        order_worst = max(order_worst, float(np.max(np.abs(forward - reverse))))
        assert np.allclose(forward, reverse, rtol=0.0, atol=1e-9)
    print(
        f"PASS bayes correctness: 10000 triples within {worst:.2e} of reference; "
        f"2000 two-step orderings within {order_worst:.2e}"
    )


def test_information_gain_bounds():
    rng = np.random.default_rng(20240919)
    scored = 0
    constant_cols = 0
    while scored < 10_000:
        dist, matrix = random_instance(rng, max_conditions=8, max_symptoms=24)
        scores = score_symptoms(dist, matrix, SelectionPolicy.EXPECTED_IG)
        upper = entropy(dist) + 1e-12
        assert np.all(scores >= -1e-12)
        assert np.all(scores <= upper)
        scored += matrix.n_symptoms
        # a column constant across conditions carries no information
        flat = KnowledgeMatrix(
            matrix.conditions,
            ("flat",),
            np.full((matrix.n_conditions, 1), float(rng.uniform(0.05, 0.95))),
        )
        flat_score = score_symptoms(dist, flat, SelectionPolicy.EXPECTED_IG)[0]
        assert 0.0 <= flat_score <= 1e-12
        constant_cols += 1
    print(
        f"PASS information gain bounds: {scored} scores in [-1e-12, H(prior)+1e-12]; "
        f"{constant_cols} constant columns scored 0 within 1e-12"
    )


def test_stop_rule_conformance(benchmark_matrix):
    noise = PriorNoiseModel()
    episodes = 0
    threshold_hits = 0
    for i in range(5_000):
        rng = np.random.default_rng(np.random.SeedSequence([20240920, i]))
        truth = int(rng.integers(benchmark_matrix.n_conditions))
        vignette = sample_vignette(benchmark_matrix, truth, noise, rng)
        for mode in (EpisodeMode.COMBINED, EpisodeMode.QA_ONLY):
            result = run_episode(vignette, benchmark_matrix, mode)
            episodes += 1
            assert result.questions_asked <= 10
            if result.stop_reason is not None and result.stop_reason.value == "threshold_reached":
                threshold_hits += 1
                assert result.final_posterior.max() >= 0.95
    print(
        f"PASS stop rules: {episodes} episodes within budget; "
        f"{threshold_hits} threshold stops all at top-1 >= 0.95"
    )


def test_benchmark_margins(benchmark_reports):
    reports, timings = benchmark_reports
    report = reports["expected_ig"]
    elapsed = timings["expected_ig"]
    prior1 = report.prior_only.mean[1]
    qa1 = report.qa_only.mean[1]
    combined1 = report.combined.mean[1]
    assert 0.45 <= prior1 <= 0.55, "noise calibration drifted"
    assert combined1 >= prior1 + 0.05
    assert combined1 >= qa1 + 0.15
    for stats in (report.prior_only, report.qa_only, report.combined):
        assert stats.mean[1] <= stats.mean[2] <= stats.mean[3]
    assert elapsed < 60.0
    print(
        f"PASS benchmark margins: combined {100 * combined1:.2f}% vs prior "
        f"{100 * prior1:.2f}% (+{100 * (combined1 - prior1):.1f}pp) vs qa "
        f"{100 * qa1:.2f}% (+{100 * (combined1 - qa1):.1f}pp) in {elapsed:.1f}s"
    )


def test_cli_eval_is_byte_identical(tmp_path):
    argv = [
        sys.executable, "-m", "triage.cli", "eval",
        "--episodes", "200", "--folds", "5", "--seed", "11", "--format", "json",
    ]
    runs = [
        subprocess.run(argv, capture_output=True, check=True, cwd=tmp_path)
        for _ in range(2)
    ]
    assert runs[0].stdout == runs[1].stdout
    assert len(runs[0].stdout) > 0
    doc = json.loads(runs[0].stdout)
    assert set(doc) == {"expected_ig", "yes_branch"}
    print(f"PASS determinism: two CLI runs emitted {len(runs[0].stdout)} identical bytes")


def test_policy_variants_both_complete(benchmark_reports):
    reports, _ = benchmark_reports
    ig = reports["expected_ig"].combined.mean[1]
    yb = reports["yes_branch"].combined.mean[1]
    assert ig >= yb - 0.02
    print(
        f"PASS policy comparison: expected_ig combined top-1 {100 * ig:.2f}% vs "
        f"yes_branch {100 * yb:.2f}%"
    )


def test_service_concurrency_and_replay(benchmark_matrix):
    app = create_app(benchmark_matrix)
    clients = [TestClient(app), TestClient(app)]
    outcomes = []
    for trial in range(100):
        body = clients[0].post("/v1/sessions", json={}).json()
        sid = body["id"]
        pending = body["pending_question"]["symptom"]
        codes = []
        barrier = threading.Barrier(2)

        def submit(client, answer):
            barrier.wait()
            r = client.post(
                f"/v1/sessions/{sid}/answers",
                json={"symptom": pending, "answer": answer},
            )
            codes.append(r.status_code)

        threads = [
            threading.Thread(target=submit, args=(c, a))
            for c, a in zip(clients, ("yes", "no"))
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        outcomes.append(tuple(sorted(codes)))
        view = clients[0].get(f"/v1/sessions/{sid}").json()
        assert len(view["history"]) == 1
        clients[0].delete(f"/v1/sessions/{sid}")
    assert outcomes == [(200, 409)] * 100

    # replay: run a full dialog, then recompute the posterior from the GET
    # body alone
    client = clients[0]
    rng = np.random.default_rng(20240921)
    worst = 0.0
    for _ in range(10):
        body = client.post("/v1/sessions", json={}).json()
        sid = body["id"]
        while body["status"] == "awaiting_answer":
            answer = ("yes", "no", "unknown")[rng.integers(3)]
            body = client.post(
                f"/v1/sessions/{sid}/answers",
                json={"symptom": body["pending_question"]["symptom"], "answer": answer},
            ).json()
        view = client.get(f"/v1/sessions/{sid}").json()
        history = [(e["index"], Answer(e["answer"])) for e in view["history"]]
        replayed = replay_posterior(
            np.array(view["config"]["prior"]), benchmark_matrix, history
        )
        by_name = {e["condition"]: e["probability"] for e in view["posterior"]}
        served = np.array([by_name[c] for c in benchmark_matrix.conditions])
        worst = max(worst, float(np.max(np.abs(served - replayed))))
        assert np.allclose(served, replayed, rtol=0.0, atol=1e-9)
    print(
        f"PASS service contract: 100/100 races gave exactly one 200 and one 409; "
        f"replay within {worst:.2e}"
    )
