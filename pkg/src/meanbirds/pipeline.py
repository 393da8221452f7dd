"""End-to-end pipeline orchestration with resumable stages.

Stages run in a fixed order, each persisting its artifacts into the working
directory. A manifest records content hashes of every stage's inputs and
outputs plus its config signature: rerunning a completed stage with
unchanged inputs is a no-op. Stage-internal work parallelizes over user
shards with per-task seeds, so results are identical for any worker count.
"""

import csv
import hashlib
import json
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import corpus as corpus_mod
from . import features as features_mod
from . import graph as graph_mod
from . import model as model_mod
from . import report as report_mod
from . import sessionizer, spamfilter
from .groundtruth import LABELS, AnnotationRecord, export_ground_truth, save_ground_truth

STAGES = (
    "ingest",
    "spamfilter",
    "sessionize",
    "batch",
    "annotate",
    "graph",
    "extract",
    "train",
    "report",
)


@dataclass
class PipelineConfig:
    workdir: str = "."
    seed: int = 7
    workers: int = 1
    stages: tuple = STAGES
    # ingest: either synth or provided files
    synth_users: int = 1000
    tweets_path: str = None
    accounts_path: str = None
    edges_path: str = None
    # stage knobs (defaults are the reference operating point)
    hashtag_cutoff: float = 5.0
    sim_cutoff: float = 0.8
    max_pairwise_tweets: int = 500
    gap_hours: float = 8.0
    min_tweets: int = 5
    batch_min: int = 5
    batch_max: int = 10
    noise: float = 0.1
    panel: int = 5
    trees: int = 10
    folds: int = 10
    repeats: int = 10
    classes: int = 3
    balance: bool = False
    balance_targets: dict = None
    feature_mask: str = "all"  # "model18" additionally emits the masked table
    render_figures: bool = True

    def path(self, name):
        return os.path.join(self.workdir, name)

    def signature(self, keys):
        return json.dumps({k: getattr(self, k) for k in sorted(keys)},
                          sort_keys=True, default=str)


def load_config(toml_path=None, **overrides):
    data = {}
    if toml_path:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(toml_path, "rb") as f:
            data = tomllib.load(f)
    cfg = PipelineConfig()
    for k, v in {**data, **overrides}.items():
        if v is None:
            continue
        if not hasattr(cfg, k):
            raise ValueError(f"unknown config key {k!r}")
        if k == "stages" and isinstance(v, str):
            v = tuple(s.strip() for s in v.split(",") if s.strip())
        setattr(cfg, k, v)
    return cfg


def parallel_map(fn, items, workers):
    """Order-preserving map; results must not depend on the worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    def __init__(self, path):
        self.path = path
        self.data = {"stages": {}}
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                self.data = json.load(f)

    def save(self):
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump(self.data, f, indent=2, sort_keys=True)
            f.write("\n")

    def fresh(self, stage, inputs, outputs, signature):
        entry = self.data["stages"].get(stage)
        if entry is None or entry.get("signature") != signature:
            return False
        for path in list(inputs) + list(outputs):
            if not os.path.exists(path):
                return False
        if entry.get("inputs") != {p: sha256_file(p) for p in inputs}:
            return False
        if entry.get("outputs") != {p: sha256_file(p) for p in outputs}:
            return False
        return True

    def record(self, stage, inputs, outputs, signature):
        self.data["stages"][stage] = {
            "signature": signature,
            "inputs": {p: sha256_file(p) for p in inputs},
            "outputs": {p: sha256_file(p) for p in outputs},
        }
        self.save()


# ---------------------------------------------------------------------------
# Stage bodies
# ---------------------------------------------------------------------------

def stage_ingest(cfg):
    """Synth a corpus (default) or canonicalize provided JSONL files."""
    tweets_out = cfg.path("tweets.jsonl")
    accounts_out = cfg.path("accounts.jsonl")
    edges_out = cfg.path("edges.txt")
    if cfg.tweets_path:
        corp, summary = corpus_mod.load_corpus(cfg.tweets_path, cfg.accounts_path)
        corpus_mod.save_corpus(corp, tweets_out, accounts_out)
        if cfg.edges_path and os.path.abspath(cfg.edges_path) != os.path.abspath(edges_out):
            with open(cfg.edges_path, encoding="utf-8") as src, \
                    open(edges_out, "w", encoding="utf-8") as dst:
                dst.write(src.read())
        elif not os.path.exists(edges_out):
            open(edges_out, "w").close()
        return {"rejected_tweets": summary.rejected_tweets}
    spec = corpus_mod.SyntheticSpec.from_total(cfg.synth_users)
    corp, planted, edges = corpus_mod.generate_synthetic_corpus(spec, cfg.seed)
    corpus_mod.save_corpus(corp, tweets_out, accounts_out)
    corpus_mod.save_edges(edges, edges_out)
    corpus_mod.save_planted_labels(planted, cfg.path("planted_labels.jsonl"))
    return {"users": len(corp.accounts), "tweets": len(corp.tweets)}


def stage_spamfilter(cfg):
    corp, _ = corpus_mod.load_corpus(cfg.path("tweets.jsonl"), cfg.path("accounts.jsonl"))
    kept, verdicts = spamfilter.filter_spammers(
        corp,
        hashtag_cutoff=cfg.hashtag_cutoff,
        sim_cutoff=cfg.sim_cutoff,
        max_pairwise_tweets=cfg.max_pairwise_tweets,
        pmap=lambda fn, xs: parallel_map(fn, xs, cfg.workers),
    )
    spamfilter.save_verdicts(verdicts, cfg.path("verdicts.jsonl"))
    corpus_mod.save_corpus(kept, cfg.path("kept_tweets.jsonl"), cfg.path("kept_accounts.jsonl"))
    return {"removed": sum(1 for v in verdicts if v.removed)}


def _load_kept(cfg):
    corp, _ = corpus_mod.load_corpus(
        cfg.path("kept_tweets.jsonl"), cfg.path("kept_accounts.jsonl")
    )
    return corp


def stage_sessionize(cfg):
    corp = _load_kept(cfg)
    active = sessionizer.drop_inactive(corp, cfg.min_tweets)
    sessions = sessionizer.sessionize_corpus(
        active, cfg.gap_hours, pmap=lambda fn, xs: parallel_map(fn, xs, cfg.workers)
    )
    sessionizer.save_sessions(sessions, cfg.path("sessions.jsonl"))
    return {"sessions": len(sessions), "active_users": len(active.accounts)}


def _load_sessions(cfg, corp):
    tweets_by_id = {t.tweet_id: t for t in corp.tweets}
    sessions = []
    with open(cfg.path("sessions.jsonl"), encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            tws = [tweets_by_id[i] for i in obj["tweet_ids"] if i in tweets_by_id]
            if not tws:
                continue
            sessions.append(
                sessionizer.Session(
                    session_id=obj["session_id"],
                    user_id=obj["user_id"],
                    tweets=tws,
                    start=obj["start"],
                    end=obj["end"],
                )
            )
    return sessions


def stage_batch(cfg):
    corp = _load_kept(cfg)
    sessions = _load_sessions(cfg, corp)
    batches = sessionizer.batchify_all(sessions, cfg.batch_min, cfg.batch_max)
    sessionizer.save_batches(batches, cfg.path("batches.jsonl"))
    return {"batches": len(batches)}


def simulate_annotations(batches, planted, noise, seed, panel=5):
    """Deterministic simulated rater panel for every batch.

    Each rater emits the batch owner's planted label with probability
    1 - noise, otherwise a uniformly random other label. Randomness is
    derived per (seed, batch, rater), so record order and parallelism
    cannot change the outcome.
    """
    records = []
    for b in batches:
        truth = planted.get(b.user_id)
        if truth is None:
            continue
        for i in range(panel):
            rng = random.Random(f"{seed}:{b.batch_id}:{i}")
            if rng.random() < noise:
                label = rng.choice([c for c in LABELS if c != truth])
            else:
                label = truth
            records.append(
                AnnotationRecord(
                    worker_id=f"sim{i}",
                    batch_id=b.batch_id,
                    label=label,
                    submitted_at=0,
                )
            )
    return records


def stage_annotate(cfg):
    """Simulated crowd labeling against the planted labels."""
    batches = sessionizer.load_batches(cfg.path("batches.jsonl"))
    planted = corpus_mod.load_planted_labels(cfg.path("planted_labels.jsonl"))
    records = simulate_annotations(batches, planted, cfg.noise, cfg.seed, cfg.panel)
    with open(cfg.path("annotations.jsonl"), "w", encoding="utf-8") as f:
        for r in records:
            f.write(r.to_json() + "\n")
    mapping = {b.batch_id: b.user_id for b in batches}
    export = export_ground_truth(records, mapping)
    save_ground_truth(export, cfg.path("groundtruth.jsonl"))
    return {
        "annotated_batches": len(mapping),
        "labeled_users": len(export.user_labels),
        "distribution": export.distribution,
    }


def stage_graph(cfg):
    g = graph_mod.build_graph(cfg.path("edges.txt"))
    corp = _load_kept(cfg)
    mentions = {}
    for t in corp.tweets:
        if t.mentions:
            mentions.setdefault(t.user_id, []).extend(t.mentions)
    metrics = graph_mod.compute_node_metrics(
        g,
        accounts=corp.accounts,
        mentions_by_user=mentions,
        seed=cfg.seed,
        pmap=lambda fn, xs: parallel_map(fn, xs, cfg.workers),
    )
    graph_mod.save_node_metrics(metrics, cfg.path("metrics.jsonl"))
    return {"nodes": g.n_nodes, "edges": g.n_edges}


def stage_extract(cfg):
    corp = _load_kept(cfg)
    active = sessionizer.drop_inactive(corp, cfg.min_tweets)
    sessions = _load_sessions(cfg, corp)
    batches = sessionizer.load_batches(cfg.path("batches.jsonl"))
    metrics = graph_mod.load_node_metrics(cfg.path("metrics.jsonl"))
    lexicons = features_mod.Lexicons.load_default()
    by_user = active.tweets_by_user()
    sessions_by_user = {}
    for s in sessions:
        sessions_by_user.setdefault(s.user_id, []).append(s)
    batch_tweets_by_user = {}
    for b in batches:
        batch_tweets_by_user.setdefault(b.user_id, []).extend(b.tweets)

    def one(uid):
        return features_mod.extract_features(
            active.accounts[uid],
            by_user[uid],
            sessions_by_user.get(uid, []),
            metrics,
            lexicons,
            active.observation_window,
            batch_tweets=batch_tweets_by_user.get(uid),
        )

    users = sorted(by_user)
    vectors = parallel_map(one, users, cfg.workers)
    features_mod.save_features_csv(vectors, cfg.path("features.csv"))
    if cfg.feature_mask == "model18":
        features_mod.save_masked_csv(vectors, cfg.path("features_model18.csv"))
    return {"users": len(vectors)}


def _load_training_table(cfg):
    from .groundtruth import load_ground_truth

    vectors = features_mod.load_features_csv(cfg.path("features.csv"))
    labels = load_ground_truth(cfg.path("groundtruth.jsonl"))
    if cfg.classes == 3:
        labels = {u: l for u, l in labels.items() if l != "spammer"}
    rows = [fv for fv in vectors if fv.user_id in labels]
    ids, X = features_mod.to_matrix(rows, features_mod.MODEL18)
    y = [labels[u] for u in ids]
    return ids, X, y


def stage_train(cfg):
    ids, X, y = _load_training_table(cfg)
    pmap = lambda fn, xs: parallel_map(fn, xs, cfg.workers)
    report, oof = model_mod.cross_validate(
        X, y, folds=cfg.folds, repeats=cfg.repeats, n_trees=cfg.trees,
        seed=cfg.seed, pmap=pmap,
    )
    classes = sorted(set(y))
    final_model = model_mod.train_forest(
        X, y, n_trees=cfg.trees, seed=cfg.seed, pmap=pmap
    )
    with open(cfg.path("model.json"), "w", encoding="utf-8") as f:
        f.write(final_model.to_json() + "\n")
    with open(cfg.path("report.json"), "w", encoding="utf-8") as f:
        f.write(report.to_json() + "\n")
    with open(cfg.path("predictions.csv"), "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user_id", "label"] + [f"p_{c}" for c in classes])
        for uid, true, probs in zip(ids, y, oof):
            w.writerow([uid, true] + [repr(float(p)) for p in probs])
    out = {"instances": len(y), "auc": report.auc, "accuracy": report.accuracy}
    if cfg.balance:
        targets = cfg.balance_targets or {}
        if not targets:
            # default: bring every class to the size of the largest
            from collections import Counter

            counts = Counter(y)
            top = max(counts.values())
            targets = {c: top for c in counts}
        _, bal_report = model_mod.balanced_experiment(
            X, y, targets, n_trees=cfg.trees, seed=cfg.seed
        )
        with open(cfg.path("report_balanced.json"), "w", encoding="utf-8") as f:
            f.write(bal_report.to_json() + "\n")
        out["balanced_auc"] = bal_report.auc
    return out


def stage_report(cfg):
    from .groundtruth import load_ground_truth

    vectors = features_mod.load_features_csv(cfg.path("features.csv"))
    labels = load_ground_truth(cfg.path("groundtruth.jsonl"))
    rows = report_mod.ecdf_table(vectors, labels)
    report_mod.save_ecdf_csv(rows, cfg.path("ecdf_data.csv"))
    ids, X, y = _load_training_table(cfg)
    ranking = model_mod.info_gain_ranking(X, y, feature_names=list(features_mod.MODEL18))
    report_mod.save_ranking_csv(ranking, cfg.path("ranking.csv"))
    outputs = [cfg.path("ecdf_data.csv"), cfg.path("ranking.csv")]
    if cfg.render_figures:
        fig_dir = cfg.path("figures")
        outputs += report_mod.render_ecdf_figures(vectors, labels, fig_dir)
        outputs.append(
            report_mod.render_ranking_figure(
                ranking, os.path.join(fig_dir, "info_gain.png")
            )
        )
    return {"outputs": len(outputs)}


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

_STAGE_IO = {
    "ingest": (
        (),
        ("tweets.jsonl", "accounts.jsonl", "edges.txt"),
        ("seed", "synth_users", "tweets_path", "accounts_path", "edges_path"),
        stage_ingest,
    ),
    "spamfilter": (
        ("tweets.jsonl", "accounts.jsonl"),
        ("verdicts.jsonl", "kept_tweets.jsonl", "kept_accounts.jsonl"),
        ("hashtag_cutoff", "sim_cutoff", "max_pairwise_tweets"),
        stage_spamfilter,
    ),
    "sessionize": (
        ("kept_tweets.jsonl", "kept_accounts.jsonl"),
        ("sessions.jsonl",),
        ("gap_hours", "min_tweets"),
        stage_sessionize,
    ),
    "batch": (
        ("kept_tweets.jsonl", "sessions.jsonl"),
        ("batches.jsonl",),
        ("batch_min", "batch_max"),
        stage_batch,
    ),
    "annotate": (
        ("batches.jsonl", "planted_labels.jsonl"),
        ("annotations.jsonl", "groundtruth.jsonl"),
        ("noise", "seed", "panel"),
        stage_annotate,
    ),
    "graph": (
        ("edges.txt", "kept_tweets.jsonl", "kept_accounts.jsonl"),
        ("metrics.jsonl",),
        ("seed",),
        stage_graph,
    ),
    "extract": (
        ("kept_tweets.jsonl", "kept_accounts.jsonl", "sessions.jsonl",
         "batches.jsonl", "metrics.jsonl"),
        ("features.csv",),
        ("min_tweets", "feature_mask"),
        stage_extract,
    ),
    "train": (
        ("features.csv", "groundtruth.jsonl"),
        ("model.json", "report.json", "predictions.csv"),
        ("trees", "folds", "repeats", "classes", "balance", "seed"),
        stage_train,
    ),
    "report": (
        ("features.csv", "groundtruth.jsonl"),
        ("ecdf_data.csv", "ranking.csv"),
        ("classes", "render_figures"),
        stage_report,
    ),
}


class PipelineError(RuntimeError):
    pass


def run_pipeline(cfg, log=print):
    """Execute the configured stages in order; returns per-stage summaries."""
    os.makedirs(cfg.workdir, exist_ok=True)
    manifest = Manifest(cfg.path("manifest.json"))
    manifest.data.setdefault("config", {})
    manifest.data["config"].update({"seed": cfg.seed})
    summaries = {}
    for stage in STAGES:
        if stage not in cfg.stages:
            continue
        inputs_rel, outputs_rel, keys, fn = _STAGE_IO[stage]
        inputs = [cfg.path(p) for p in inputs_rel]
        outputs = [cfg.path(p) for p in outputs_rel]
        missing = [p for p in inputs if not os.path.exists(p)]
        if missing:
            upstream = _producer_of(missing[0], cfg)
            raise PipelineError(
                f"stage {stage!r} is missing {missing[0]!r}; run stage "
                f"{upstream!r} first"
            )
        signature = cfg.signature(keys)
        if manifest.fresh(stage, inputs, outputs, signature):
            log(f"[{stage}] up to date, skipping")
            summaries[stage] = {"skipped": True}
            continue
        log(f"[{stage}] running")
        summaries[stage] = fn(cfg)
        manifest.record(stage, inputs, outputs, signature)
        log(f"[{stage}] done: {summaries[stage]}")
    return summaries


def _producer_of(path, cfg):
    name = os.path.basename(path)
    for stage, (_, outputs, _, _) in _STAGE_IO.items():
        if name in outputs:
            return stage
    if name in ("tweets.jsonl", "accounts.jsonl", "edges.txt", "planted_labels.jsonl"):
        return "ingest"
    return "unknown"
