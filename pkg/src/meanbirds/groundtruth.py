"""Aggregation of per-worker batch labels into user-level ground truth.

Each batch is judged by a fixed panel of workers (5 by default) and resolved
by plurality vote; plurality ties stay UNRESOLVED and are excluded from
training. A user owning several batches gets a second-level plurality over
the resolved batch labels. Fleiss' kappa measures panel agreement.
"""

import json
from collections import Counter
from dataclasses import dataclass, field, asdict

LABELS = ("bully", "aggressive", "spammer", "normal")
UNRESOLVED = "UNRESOLVED"
PANEL_SIZE = 5


@dataclass
class AnnotationRecord:
    worker_id: str
    batch_id: str
    label: str
    submitted_at: int = 0

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class WorkerProfile:
    worker_id: str
    gender: str = "unknown"
    age_band: str = "unknown"
    nationality: str = "unknown"
    education: str = "unknown"
    income_band: str = "unknown"
    control_correct: int = 0
    control_seen: int = 0

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class GroundTruthLabel:
    batch_id: str
    user_id: str
    final_label: str
    vote_histogram: dict = field(default_factory=dict)


def plurality(labels):
    """Winning label, or UNRESOLVED on a tie for the top count."""
    counts = Counter(labels)
    if not counts:
        return UNRESOLVED
    ranked = counts.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return UNRESOLVED
    return ranked[0][0]


def majority_vote(labels, batch_id="", user_id=""):
    """Resolve one batch's rater labels into a GroundTruthLabel."""
    if not labels:
        raise ValueError("majority_vote needs at least one label")
    for lab in labels:
        if lab not in LABELS:
            raise ValueError(f"unknown label {lab!r}")
    hist = dict(Counter(labels))
    return GroundTruthLabel(
        batch_id=batch_id,
        user_id=user_id,
        final_label=plurality(labels),
        vote_histogram=hist,
    )


def fleiss_kappa(assignments):
    """Fleiss' kappa for an items x categories count matrix.

    Every row must sum to the same rater count n >= 2. The degenerate case
    where expected agreement is 1 (all raters always pick one category) is
    defined as 1.0.
    """
    rows = [list(r) for r in assignments]
    if not rows:
        raise ValueError("empty assignment matrix")
    n = sum(rows[0])
    if n < 2:
        raise ValueError("need at least 2 raters per item")
    for r in rows:
        if sum(r) != n:
            raise ValueError("rows must all sum to the same rater count")
    big_n = len(rows)
    p_item = [
        (sum(c * c for c in r) - n) / (n * (n - 1))
        for r in rows
    ]
    p_bar = sum(p_item) / big_n
    totals = [sum(r[j] for r in rows) for j in range(len(rows[0]))]
    grand = big_n * n
    p_cat = [t / grand for t in totals]
    pe = sum(p * p for p in p_cat)
    if pe >= 1.0:
        return 1.0
    return (p_bar - pe) / (1.0 - pe)


def control_accuracy(worker):
    """Fraction of control batches this worker answered correctly."""
    if worker.control_seen < 1:
        raise ValueError("worker saw no control cases")
    return worker.control_correct / worker.control_seen


def records_to_matrix(records, labels=LABELS):
    """Group annotation records into a batch x label count matrix.

    Only batches whose panel is complete (all panels the same size) can be
    compared; returns (batch_ids, matrix) over batches with the modal panel
    size.
    """
    per_batch = {}
    for r in records:
        per_batch.setdefault(r.batch_id, []).append(r.label)
    if not per_batch:
        return [], []
    sizes = Counter(len(v) for v in per_batch.values())
    panel = sizes.most_common(1)[0][0]
    ids = sorted(b for b, v in per_batch.items() if len(v) == panel)
    matrix = []
    for b in ids:
        c = Counter(per_batch[b])
        matrix.append([c.get(lab, 0) for lab in labels])
    return ids, matrix


@dataclass
class GroundTruthExport:
    user_labels: dict
    batch_labels: list
    distribution: dict
    unresolved_batches: int = 0
    excluded_users: int = 0


def export_ground_truth(records, batches):
    """Resolve records into per-user labels.

    `batches` maps batch_id -> user_id (control batches should be excluded
    by the caller). Users whose batches are all UNRESOLVED are excluded and
    counted. The distribution summarises final user labels.
    """
    per_batch = {}
    for r in records:
        per_batch.setdefault(r.batch_id, []).append(r)
    batch_labels = []
    per_user = {}
    unresolved = 0
    for batch_id in sorted(per_batch):
        if batch_id not in batches:
            continue
        user_id = batches[batch_id]
        labels = [r.label for r in per_batch[batch_id]]
        gt = majority_vote(labels, batch_id=batch_id, user_id=user_id)
        batch_labels.append(gt)
        if gt.final_label == UNRESOLVED:
            unresolved += 1
        else:
            per_user.setdefault(user_id, []).append(gt.final_label)
    user_labels = {}
    excluded = 0
    batch_users = set(batches.values())
    for user_id in sorted(batch_users):
        if user_id not in per_user:
            if any(b.user_id == user_id for b in batch_labels):
                excluded += 1
            continue
        final = plurality(per_user[user_id])
        if final == UNRESOLVED:
            excluded += 1
        else:
            user_labels[user_id] = final
    dist = Counter(user_labels.values())
    total = max(len(user_labels), 1)
    distribution = {lab: dist.get(lab, 0) / total for lab in LABELS}
    return GroundTruthExport(
        user_labels=user_labels,
        batch_labels=batch_labels,
        distribution=distribution,
        unresolved_batches=unresolved,
        excluded_users=excluded,
    )


def save_ground_truth(export, path):
    with open(path, "w", encoding="utf-8") as f:
        hist_by_user = {}
        for b in export.batch_labels:
            hist_by_user.setdefault(b.user_id, Counter()).update(b.vote_histogram)
        for uid in sorted(export.user_labels):
            f.write(
                json.dumps(
                    {
                        "user_id": uid,
                        "final_label": export.user_labels[uid],
                        "vote_histogram": dict(hist_by_user.get(uid, {})),
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_ground_truth(path):
    out = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                out[obj["user_id"]] = obj["final_label"]
    return out


def save_workers(workers, path):
    with open(path, "w", encoding="utf-8") as f:
        for w in sorted(workers, key=lambda w: w.worker_id):
            f.write(w.to_json() + "\n")
