"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The whole suite is oracle- and property-based and needs no network
or UI; the labeling frontend is exercised by its own test suite against the
HTTP service.
"""

import filecmp
import json
import os
import random
import threading
import time

import numpy as np
import pytest

from meanbirds.corpus import SyntheticSpec, generate_synthetic_corpus, load_planted_labels
from meanbirds.features import ks_two_sample
from meanbirds.graph import (
    build_graph,
    closeness_all,
    clustering_coefficient,
    eigenvector_centrality,
    hits,
    louvain,
    modularity,
)
from meanbirds.groundtruth import fleiss_kappa
from meanbirds.model import (
    auc_rank,
    balance,
    cross_validate,
    kappa_from_confusion,
    predict_proba,
    rmse_from_probs,
    smote_points,
    stratified_split,
    train_forest,
)
from meanbirds.pipeline import load_config, run_pipeline
from meanbirds.sessionizer import sessionize, split_sizes
from meanbirds.spamfilter import filter_spammers
from meanbirds.textprep import levenshtein, similarity
from oracles import (
    auc_all_pairs,
    clustering_oracle,
    closeness_oracle,
    eigenvector_oracle,
    hits_oracle,
    ks_d_brute,
    levenshtein_dp,
    random_digraph,
)

PASS = "[PASS]"


def announce(line):
    print(f"\n{PASS} {line}")


# ---------------------------------------------------------------------------
# 1. String metrics
# ---------------------------------------------------------------------------

def test_string_metrics():
    t0 = time.monotonic()
    rng = random.Random(20240501)
    alphabet = "abcdefgh -!"
    for _ in range(10_000):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 41)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 41)))
        assert levenshtein(a, b) == levenshtein_dp(a, b)
    assert abs(similarity("kitten", "sitting") - (1 - 3 / 7)) < 1e-12
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    announce(f"string metrics: 10,000 pairs exact vs DP oracle in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. Spam filter on the seed-7 synthetic corpus
# ---------------------------------------------------------------------------

def test_spam_filter_separation():
    t0 = time.monotonic()
    spec = SyntheticSpec.from_total(1000)
    corpus, planted, _ = generate_synthetic_corpus(spec, seed=7)
    kept, verdicts = filter_spammers(corpus)
    removed = {v.user_id for v in verdicts if v.removed}
    spammers = {u for u, lab in planted.items() if lab == "spammer"}
    normals = {u for u, lab in planted.items() if lab == "normal"}
    assert spammers <= removed, "every planted spammer must be removed"
    assert not (removed & normals), "no planted normal user may be removed"
    sim_share = sum(1 for v in verdicts if v.intra_similarity > 0.8) / len(verdicts)
    assert 0.03 <= sim_share <= 0.07  # ~5% of users post near-duplicates
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    announce(
        f"spam filter: {len(spammers)}/{len(spammers)} planted spammers removed, "
        f"0/{len(normals)} normals removed, {sim_share:.1%} above the similarity "
        f"cutoff, in {elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 3. Sessionization
# ---------------------------------------------------------------------------

def test_sessionization():
    from conftest import make_tweet

    tws = [
        make_tweet(tweet_id=f"t{i}", created_at=h * 3600)
        for i, h in enumerate((0, 7, 16))
    ]
    sessions = sessionize(tws, gap_hours=8)
    assert [[t.created_at // 3600 for t in s.tweets] for s in sessions] == [[0, 7], [16]]
    for n in range(5, 201):
        sizes = split_sizes(n)
        assert sum(sizes) == n
        assert all(5 <= s <= 10 for s in sizes)
    announce("sessionization: 8h gap split exact; batch sizes in [5,10] for n=5..200")


# ---------------------------------------------------------------------------
# 4. Graph metrics vs dense oracles
# ---------------------------------------------------------------------------

def test_graph_metrics_vs_oracles():
    t0 = time.monotonic()
    rng = np.random.default_rng(424242)
    for _ in range(50):
        g = build_graph(edge_list=random_digraph(rng, max_nodes=100))
        hub, auth, _ = hits(g, tol=1e-12, max_iter=20000)
        oh, oa = hits_oracle(g)
        assert np.allclose([hub[v] for v in g.nodes], oh, atol=1e-6)
        assert np.allclose([auth[v] for v in g.nodes], oa, atol=1e-6)
        eig, _ = eigenvector_centrality(g, tol=1e-12, max_iter=20000)
        assert np.allclose(
            [eig[v] for v in g.nodes], eigenvector_oracle(g), atol=1e-6
        )
        clo = closeness_all(g)
        assert np.allclose([clo[v] for v in g.nodes], closeness_oracle(g), atol=1e-6)
        assert np.allclose(
            [clustering_coefficient(g, v) for v in g.nodes],
            clustering_oracle(g),
            atol=1e-6,
        )
    edges = []
    for p in ("x", "y"):
        for i in range(5):
            for j in range(i + 1, 5):
                edges.append((f"{p}{i}", f"{p}{j}"))
    edges.append(("x0", "y0"))
    g = build_graph(edge_list=edges)
    comm, mod = louvain(g, seed=0)
    groups = {}
    for v, c in comm.items():
        groups.setdefault(c, set()).add(v)
    assert sorted(map(sorted, groups.values())) == [
        [f"x{i}" for i in range(5)], [f"y{i}" for i in range(5)],
    ]
    assert mod > 0
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    announce(
        f"graph metrics: 50 random graphs within 1e-6 of dense oracles; "
        f"two-clique Louvain recovered (Q={mod:.3f}) in {elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 5. KS statistics
# ---------------------------------------------------------------------------

def test_ks_statistics():
    rng = random.Random(555)
    for _ in range(1000):
        a = [rng.randint(0, 30) + rng.random() for _ in range(rng.randint(1, 80))]
        b = [rng.randint(0, 30) + rng.random() for _ in range(rng.randint(1, 80))]
        assert ks_two_sample(a, b).d == ks_d_brute(a, b)
    assert ks_two_sample([1, 2, 3], [1, 2, 3]).d == 0.0
    assert ks_two_sample([1, 2, 3], [10, 11, 12]).d == 1.0
    announce("KS: 1000 random pairs exactly match brute-force sup-ECDF; D=0/D=1 edges")


# ---------------------------------------------------------------------------
# 6. Classifier
# ---------------------------------------------------------------------------

def _separable(n=200, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal((-2, -2), 0.5, size=(half, 2)),
        rng.normal((2, 2), 0.5, size=(n - half, 2)),
    ])
    y = np.array(["neg"] * half + ["pos"] * (n - half))
    return X, y


def test_classifier():
    X, y = _separable(200)
    report, oof = cross_validate(X, y, folds=10, repeats=10, seed=3)
    assert report.accuracy >= 0.95

    rng = np.random.default_rng(8)
    for _ in range(20):
        n_pos = int(rng.integers(1, 250))
        n_neg = int(rng.integers(1, 250))
        pos = np.round(rng.random(n_pos), 2)
        neg = np.round(rng.random(n_neg), 2)
        assert abs(auc_rank(pos, neg) - auc_all_pairs(pos, neg)) < 1e-12

    assert abs(kappa_from_confusion([[2, 1], [0, 3]]) - 2 / 3) < 1e-9
    assert abs(rmse_from_probs(["a"], [[0.6, 0.4]], ["a", "b"]) - 0.4) < 1e-9
    assert rmse_from_probs(["a", "b"], [[1, 0], [0, 1]], ["a", "b"]) == 0.0

    m1 = train_forest(X, y, seed=99)
    m2 = train_forest(X, y, seed=99)
    assert m1.to_json() == m2.to_json()

    probs = predict_proba(m1, X)
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) < 1e-12)
    announce(
        f"classifier: 10x10-fold accuracy {report.accuracy:.3f} on the separable set; "
        "AUC = rank oracle; kappa/RMSE hand oracles; bit-reproducible; probs sum to 1"
    )


# ---------------------------------------------------------------------------
# 7. Balancing
# ---------------------------------------------------------------------------

def test_balancing():
    rng = np.random.default_rng(12)
    X_class = rng.normal(size=(20, 6))
    pts, parents = smote_points(X_class, 500, 5, rng, return_parents=True)
    for p, (i, j) in zip(pts, parents):
        lo = np.minimum(X_class[i], X_class[j]) - 1e-12
        hi = np.maximum(X_class[i], X_class[j]) + 1e-12
        assert np.all(p >= lo) and np.all(p <= hi)

    X = rng.normal(size=(60 + 45 + 340, 5))
    y = np.array(["bully"] * 60 + ["aggressive"] * 45 + ["normal"] * 340)
    train_idx, test_idx = stratified_split(y, 0.1, seed=5)
    X_test_before = X[test_idx].copy()
    Xb, yb = balance(
        X[train_idx], y[train_idx],
        {"bully": 349, "aggressive": 386, "normal": 340}, seed=5,
    )
    assert (yb == "bully").sum() == 349
    assert (yb == "aggressive").sum() == 386
    assert (yb == "normal").sum() == 340
    assert np.array_equal(X[test_idx], X_test_before)
    assert set(train_idx) & set(test_idx) == set()
    announce("balancing: SMOTE inside parent boxes; targets 349/386/340 exact; test untouched")


# ---------------------------------------------------------------------------
# 8. End-to-end pipeline
# ---------------------------------------------------------------------------

def _weighted_auc_vs_planted(workdir):
    planted = load_planted_labels(os.path.join(workdir, "planted_labels.jsonl"))
    rows = []
    with open(os.path.join(workdir, "predictions.csv")) as f:
        header = f.readline().strip().split(",")
        classes = [h[2:] for h in header[2:]]
        for line in f:
            parts = line.strip().split(",")
            rows.append((parts[0], [float(x) for x in parts[2:]]))
    total = 0.0
    weight = 0
    for k, c in enumerate(classes):
        pos = [p[k] for uid, p in rows if planted[uid] == c]
        neg = [p[k] for uid, p in rows if planted[uid] != c]
        if pos and neg:
            auc = auc_rank(pos, neg)
            total += auc * len(pos)
            weight += len(pos)
    return total / weight


@pytest.mark.slow
def test_end_to_end(tmp_path):
    t0 = time.monotonic()
    d1 = tmp_path / "n1"
    cfg1 = load_config(None, workdir=str(d1), seed=7, workers=1)
    run_pipeline(cfg1, log=lambda *_: None)
    elapsed = time.monotonic() - t0
    assert elapsed < 300.0

    auc = _weighted_auc_vs_planted(str(d1))
    assert auc >= 0.85

    d8 = tmp_path / "n8"
    cfg8 = load_config(None, workdir=str(d8), seed=7, workers=8)
    run_pipeline(cfg8, log=lambda *_: None)
    artifacts = [
        "tweets.jsonl", "accounts.jsonl", "edges.txt", "planted_labels.jsonl",
        "verdicts.jsonl", "kept_tweets.jsonl", "kept_accounts.jsonl",
        "sessions.jsonl", "batches.jsonl", "annotations.jsonl",
        "groundtruth.jsonl", "metrics.jsonl", "features.csv", "model.json",
        "report.json", "predictions.csv", "ecdf_data.csv", "ranking.csv",
    ]
    for name in artifacts:
        assert filecmp.cmp(d1 / name, d8 / name, shallow=False), name
    for png in sorted((d1 / "figures").glob("*.png")):
        assert filecmp.cmp(png, d8 / "figures" / png.name, shallow=False), png.name
    announce(
        f"end-to-end: 3-class AUC vs planted labels {auc:.3f} >= 0.85; "
        f"N=1 and N=8 artifacts identical; {elapsed:.0f}s < 5 min"
    )


# ---------------------------------------------------------------------------
# 9. Ground truth
# ---------------------------------------------------------------------------

def test_ground_truth():
    assert fleiss_kappa([[5, 0], [0, 5], [5, 0]]) == 1.0
    assert abs(fleiss_kappa([[2, 0], [1, 1]]) - (-1 / 3)) < 1e-9

    from test_service import make_store

    store = make_store(n_real=90, n_controls=60)
    errors = []
    barrier = threading.Barrier(50)

    def worker_flow(i):
        try:
            wid = store.register_worker({}, f"tok{i}")
            barrier.wait()
            a = store.next_assignment(wid)
            if a is None:
                return
            for b in a.batch_ids:
                store.submit_label(wid, b, "normal")
        except Exception as e:
            errors.append(e)

    threads = [threading.Thread(target=worker_flow, args=(i,)) for i in range(50)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert max(store.labels_per_batch.values()) <= 5
    announce(
        "ground truth: Fleiss kappa oracles exact; 50 concurrent submitters never "
        "push a batch past 5 labels"
    )
