"""Random-Forest classifier with repeated cross-validation and balancing.

The forest is built from scratch: each tree trains on a bootstrap sample,
considers floor(log2(d)) + 1 randomly chosen features per node, and splits
by information gain until leaves are pure or unsplittable. All randomness
derives from per-task seeds spawned off the master seed, so results are
bit-reproducible for a fixed seed no matter how work is scheduled.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np


# ---------------------------------------------------------------------------
# Forest
# ---------------------------------------------------------------------------

def _entropy(counts):
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def default_features_per_split(d):
    return int(math.floor(math.log2(d))) + 1 if d > 0 else 0


def _best_split(X, y_idx, n_classes, feat_ids):
    """Best (feature, threshold, gain) over candidate features by info gain."""
    n = len(y_idx)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx] = 1.0
    parent = onehot.sum(axis=0)
    h_parent = _entropy(parent)
    best = (None, 0.0, 0.0)  # feature, threshold, gain
    for f in feat_ids:
        vals = X[:, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        cum = np.cumsum(onehot[order], axis=0)
        # split after position i (0-based) keeps i+1 samples on the left
        boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
        if boundaries.size == 0:
            continue
        left = cum[boundaries]
        right = parent - left
        nl = left.sum(axis=1)
        nr = right.sum(axis=1)

        def ent(counts, totals):
            with np.errstate(divide="ignore", invalid="ignore"):
                p = counts / totals[:, None]
                logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
            return -(p * logp).sum(axis=1)

        gains = h_parent - (nl / n) * ent(left, nl) - (nr / n) * ent(right, nr)
        k = int(np.argmax(gains))
        if gains[k] > best[2] + 1e-15:
            thr = (sv[boundaries[k]] + sv[boundaries[k] + 1]) / 2.0
            best = (f, float(thr), float(gains[k]))
    return best


def _grow_tree(X, y_idx, n_classes, rng, max_depth, features_per_split, depth=0):
    counts = np.bincount(y_idx, minlength=n_classes).astype(float)
    if (
        counts.max() == counts.sum()
        or (max_depth is not None and depth >= max_depth)
        or len(y_idx) < 2
    ):
        return {"h": counts.tolist()}
    d = X.shape[1]
    k = min(features_per_split, d)
    feat_ids = np.sort(rng.choice(d, size=k, replace=False))
    f, thr, gain = _best_split(X, y_idx, n_classes, feat_ids)
    if f is None or gain <= 0.0:
        return {"h": counts.tolist()}
    mask = X[:, f] <= thr
    left = _grow_tree(X[mask], y_idx[mask], n_classes, rng, max_depth,
                      features_per_split, depth + 1)
    right = _grow_tree(X[~mask], y_idx[~mask], n_classes, rng, max_depth,
                       features_per_split, depth + 1)
    return {"f": int(f), "t": thr, "l": left, "r": right}


@dataclass
class ForestModel:
    trees: list
    classes: list
    n_features: int
    n_trees: int
    features_per_split: int
    max_depth: int = None
    seed: int = 0

    def to_json(self):
        return json.dumps(
            {
                "classes": self.classes,
                "n_features": self.n_features,
                "n_trees": self.n_trees,
                "features_per_split": self.features_per_split,
                "max_depth": self.max_depth,
                "seed": self.seed,
                "trees": self.trees,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(
            trees=obj["trees"],
            classes=obj["classes"],
            n_features=obj["n_features"],
            n_trees=obj["n_trees"],
            features_per_split=obj["features_per_split"],
            max_depth=obj["max_depth"],
            seed=obj["seed"],
        )


def train_forest(X, y, n_trees=10, max_depth=None, seed=0,
                 features_per_split=None, pmap=None):
    """Train the ensemble; y may hold arbitrary (sortable) class labels."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if len(X) != len(y) or len(y) == 0:
        raise ValueError("X and y must be equally sized and non-empty")
    classes = sorted({str(c) for c in y})
    class_index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([class_index[str(c)] for c in y])
    d = X.shape[1]
    fps = features_per_split or default_features_per_split(d)
    seeds = np.random.SeedSequence(seed).spawn(n_trees)

    def one_tree(ss):
        rng = np.random.default_rng(ss)
        boot = rng.integers(0, len(y_idx), size=len(y_idx))
        return _grow_tree(X[boot], y_idx[boot], len(classes), rng, max_depth, fps)

    run = pmap if pmap is not None else lambda fn, xs: [fn(x) for x in xs]
    trees = list(run(one_tree, seeds))
    return ForestModel(
        trees=trees,
        classes=classes,
        n_features=d,
        n_trees=n_trees,
        features_per_split=fps,
        max_depth=max_depth,
        seed=seed,
    )


def _leaf_probs(tree, x):
    node = tree
    while "f" in node:
        node = node["l"] if x[node["f"]] <= node["t"] else node["r"]
    h = np.asarray(node["h"], dtype=float)
    total = h.sum()
    return h / total if total > 0 else np.full(len(h), 1.0 / len(h))


def predict_proba(model, X):
    """Per-row class probabilities: mean of leaf histograms across trees."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(
            f"input width {X.shape[1]} != model width {model.n_features}"
        )
    out = np.zeros((X.shape[0], len(model.classes)))
    for i, x in enumerate(X):
        acc = np.zeros(len(model.classes))
        for tree in model.trees:
            acc += _leaf_probs(tree, x)
        out[i] = acc / len(model.trees)
    return out


def predict(model, x):
    """(class, probability vector) for one sample; argmax ties go to the
    lexicographically first class label."""
    probs = predict_proba(model, [x])[0]
    return model.classes[int(np.argmax(probs))], probs


# ---------------------------------------------------------------------------
# Evaluation metrics
# ---------------------------------------------------------------------------

def auc_rank(pos_scores, neg_scores):
    """Probability a random positive outranks a random negative, ties 1/2."""
    pos = np.asarray(pos_scores, dtype=float)
    neg = np.asarray(neg_scores, dtype=float)
    if len(pos) == 0 or len(neg) == 0:
        return None
    allv = np.concatenate([pos, neg])
    order = np.argsort(allv, kind="mergesort")
    ranks = np.empty(len(allv))
    ranks[order] = np.arange(1, len(allv) + 1)
    # average ranks over ties
    sv = allv[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        if j > i:
            ranks[order[i:j + 1]] = (i + 1 + j + 1) / 2.0
        i = j + 1
    r_pos = ranks[: len(pos)].sum()
    return float((r_pos - len(pos) * (len(pos) + 1) / 2.0) / (len(pos) * len(neg)))


@dataclass
class EvalReport:
    classes: list
    per_class: dict            # class -> {precision, recall, auc, support}
    precision: float = 0.0     # weighted by class support
    recall: float = 0.0
    auc: float = 0.0
    accuracy: float = 0.0
    kappa: float = 0.0
    rmse: float = 0.0
    confusion: list = field(default_factory=list)
    std: dict = field(default_factory=dict)  # per-fold standard deviations
    zero_precision_classes: list = field(default_factory=list)

    def to_json(self):
        return json.dumps(
            {
                "classes": self.classes,
                "per_class": self.per_class,
                "precision": self.precision,
                "recall": self.recall,
                "auc": self.auc,
                "accuracy": self.accuracy,
                "kappa": self.kappa,
                "rmse": self.rmse,
                "confusion": self.confusion,
                "std": self.std,
                "zero_precision_classes": self.zero_precision_classes,
            },
            sort_keys=True,
            indent=2,
        )


def confusion_matrix(y_true, y_pred, classes):
    idx = {c: i for i, c in enumerate(classes)}
    m = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true, y_pred):
        m[idx[str(t)], idx[str(p)]] += 1
    return m


def kappa_from_confusion(m):
    m = np.asarray(m, dtype=float)
    total = m.sum()
    if total == 0:
        return 0.0
    acc = np.trace(m) / total
    expected = float((m.sum(axis=1) * m.sum(axis=0)).sum()) / (total * total)
    if expected >= 1.0:
        return 1.0 if acc == 1.0 else 0.0
    return float((acc - expected) / (1.0 - expected))


def rmse_from_probs(y_true, probs, classes):
    probs = np.asarray(probs, dtype=float)
    idx = {c: i for i, c in enumerate(classes)}
    onehot = np.zeros_like(probs)
    for i, t in enumerate(y_true):
        onehot[i, idx[str(t)]] = 1.0
    return float(np.sqrt(np.mean((probs - onehot) ** 2)))


def compute_metrics(y_true, probs, classes):
    """All EvalReport fields from true labels and probability records."""
    if len(y_true) == 0:
        raise ValueError("no scored instances")
    probs = np.asarray(probs, dtype=float)
    y_true = [str(t) for t in y_true]
    y_pred = [classes[int(np.argmax(p))] for p in probs]
    m = confusion_matrix(y_true, y_pred, classes)
    support = m.sum(axis=1)
    per_class = {}
    zero_flag = []
    total = support.sum()
    w_prec = w_rec = w_auc = 0.0
    auc_weight = 0
    for i, c in enumerate(classes):
        tp = m[i, i]
        pred_pos = m[:, i].sum()
        prec = tp / pred_pos if pred_pos > 0 else 0.0
        if pred_pos == 0:
            zero_flag.append(c)
        rec = tp / support[i] if support[i] > 0 else 0.0
        mask = np.array([t == c for t in y_true])
        auc = auc_rank(probs[mask, i], probs[~mask, i])
        per_class[c] = {
            "precision": float(prec),
            "recall": float(rec),
            "auc": auc,
            "support": int(support[i]),
        }
        w_prec += prec * support[i]
        w_rec += rec * support[i]
        if auc is not None:
            w_auc += auc * support[i]
            auc_weight += support[i]
    return EvalReport(
        classes=list(classes),
        per_class=per_class,
        precision=float(w_prec / total),
        recall=float(w_rec / total),
        auc=float(w_auc / auc_weight) if auc_weight else 0.0,
        accuracy=float(np.trace(m) / total),
        kappa=kappa_from_confusion(m),
        rmse=rmse_from_probs(y_true, probs, classes),
        confusion=m.tolist(),
        zero_precision_classes=zero_flag,
    )


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------

def stratified_folds(y, folds, rng):
    """Fold id per instance; each class dealt round-robin after a shuffle."""
    y = np.asarray([str(v) for v in y])
    assignment = np.empty(len(y), dtype=int)
    for c in sorted(set(y)):
        members = np.nonzero(y == c)[0]
        if len(members) < folds:
            raise ValueError(
                f"class {c!r} has {len(members)} members, fewer than {folds} folds"
            )
        members = members[rng.permutation(len(members))]
        for pos, inst in enumerate(members):
            assignment[inst] = pos % folds
    return assignment


def cross_validate(X, y, folds=10, repeats=10, n_trees=10, max_depth=None,
                   seed=0, pmap=None):
    """Repeated stratified k-fold evaluation (no balancing).

    Returns (EvalReport, oof_probs) where oof_probs[i] is instance i's mean
    out-of-fold probability vector across repeats.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray([str(v) for v in y])
    classes = sorted(set(y))
    master = np.random.SeedSequence(seed)
    repeat_seeds = master.spawn(repeats)

    def one_repeat(args):
        rep, ss = args
        children = ss.spawn(folds + 1)
        rng = np.random.default_rng(children[0])
        fold_of = stratified_folds(y, folds, rng)
        fold_metrics = []
        probs_sum = np.zeros((len(y), len(classes)))
        conf = np.zeros((len(classes), len(classes)), dtype=int)
        for k in range(folds):
            test = fold_of == k
            fold_seed = int(children[k + 1].generate_state(1, np.uint64)[0])
            model = train_forest(
                X[~test], y[~test], n_trees=n_trees, max_depth=max_depth,
                seed=fold_seed,
            )
            probs = predict_proba(model, X[test])
            # fold model may not have seen every class; expand columns
            full = np.zeros((probs.shape[0], len(classes)))
            for j, c in enumerate(model.classes):
                full[:, classes.index(c)] = probs[:, j]
            probs_sum[test] = full
            rep_metrics = compute_metrics(y[test], full, classes)
            fold_metrics.append(rep_metrics)
            conf += np.asarray(rep_metrics.confusion, dtype=int)
        return fold_metrics, probs_sum, conf

    run = pmap if pmap is not None else lambda fn, xs: [fn(x) for x in xs]
    results = list(run(one_repeat, list(enumerate(repeat_seeds))))

    all_fold_metrics = [fm for fms, _, _ in results for fm in fms]
    oof = np.mean([p for _, p, _ in results], axis=0)
    conf_mean = np.mean([c for _, _, c in results], axis=0)

    def agg(getter):
        vals = [getter(r) for r in all_fold_metrics]
        vals = [v for v in vals if v is not None]
        return (float(np.mean(vals)), float(np.std(vals))) if vals else (0.0, 0.0)

    scalar_fields = {
        "precision": lambda r: r.precision,
        "recall": lambda r: r.recall,
        "auc": lambda r: r.auc,
        "accuracy": lambda r: r.accuracy,
        "kappa": lambda r: r.kappa,
        "rmse": lambda r: r.rmse,
    }
    means, stds = {}, {}
    for name, getter in scalar_fields.items():
        means[name], stds[name] = agg(getter)
    per_class = {}
    for c in classes:
        entry = {}
        for metric in ("precision", "recall", "auc"):
            mean, std = agg(lambda r, c=c, m=metric: r.per_class[c][m])
            entry[metric] = mean
            entry[f"{metric}_std"] = std
        entry["support"] = int(np.sum(y == c))
        per_class[c] = entry
    return (
        EvalReport(
            classes=classes,
            per_class=per_class,
            precision=means["precision"],
            recall=means["recall"],
            auc=means["auc"],
            accuracy=means["accuracy"],
            kappa=means["kappa"],
            rmse=means["rmse"],
            confusion=conf_mean.tolist(),
            std=stds,
        ),
        oof,
    )


# ---------------------------------------------------------------------------
# Balancing: SMOTE oversampling + undersampling of the training split
# ---------------------------------------------------------------------------

def smote_points(X_class, n_new, k_neighbors, rng, return_parents=False):
    """Synthetic points on segments between class members and their
    nearest same-class neighbors (uniform interpolation coefficient)."""
    n = len(X_class)
    if n < 2:
        raise ValueError("SMOTE needs at least 2 members in the class")
    k = min(k_neighbors, n - 1)
    d2 = ((X_class[:, None, :] - X_class[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    neighbor_ids = np.argsort(d2, axis=1, kind="stable")[:, :k]
    out = np.empty((n_new, X_class.shape[1]))
    parents = []
    for i in range(n_new):
        base = int(rng.integers(0, n))
        nb = int(neighbor_ids[base, rng.integers(0, k)])
        u = rng.random()
        out[i] = X_class[base] + u * (X_class[nb] - X_class[base])
        parents.append((base, nb))
    if return_parents:
        return out, parents
    return out


def balance(X, y, targets, k_neighbors=5, seed=0):
    """Resample a TRAINING split to exact per-class target counts.

    Classes above their target are undersampled without replacement;
    classes below are topped up with SMOTE points. Returns (X_bal, y_bal).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray([str(v) for v in y])
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for c in sorted(targets):
        members = np.nonzero(y == c)[0]
        target = targets[c]
        if len(members) == 0:
            raise ValueError(f"class {c!r} absent from the training split")
        if target <= len(members):
            chosen = rng.choice(members, size=target, replace=False)
            xs.append(X[chosen])
            ys.extend([c] * target)
        else:
            xs.append(X[members])
            ys.extend([c] * len(members))
            extra = smote_points(X[members], target - len(members), k_neighbors, rng)
            xs.append(extra)
            ys.extend([c] * (target - len(members)))
    return np.vstack(xs), np.array(ys)


def stratified_split(y, test_fraction=0.1, seed=0):
    """(train_indices, test_indices), stratified per class."""
    y = np.asarray([str(v) for v in y])
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in sorted(set(y)):
        members = np.nonzero(y == c)[0]
        members = members[rng.permutation(len(members))]
        n_test = max(1, round(len(members) * test_fraction))
        test.extend(members[:n_test])
        train.extend(members[n_test:])
    return np.array(sorted(train)), np.array(sorted(test))


def balanced_experiment(X, y, targets, test_fraction=0.1, k_neighbors=5,
                        n_trees=10, max_depth=None, seed=0):
    """90/10 split, balance the training part only, evaluate on raw test."""
    X = np.asarray(X, dtype=float)
    y = np.asarray([str(v) for v in y])
    train_idx, test_idx = stratified_split(y, test_fraction, seed)
    X_bal, y_bal = balance(X[train_idx], y[train_idx], targets,
                           k_neighbors=k_neighbors, seed=seed)
    model = train_forest(X_bal, y_bal, n_trees=n_trees, max_depth=max_depth, seed=seed)
    probs = predict_proba(model, X[test_idx])
    classes = model.classes
    full_classes = sorted(set(y) | set(classes))
    full = np.zeros((probs.shape[0], len(full_classes)))
    for j, c in enumerate(classes):
        full[:, full_classes.index(c)] = probs[:, j]
    report = compute_metrics(y[test_idx], full, full_classes)
    return model, report


# ---------------------------------------------------------------------------
# Information-gain feature ranking
# ---------------------------------------------------------------------------

def _discretize(col, bins=10):
    qs = np.quantile(col, np.linspace(0, 1, bins + 1)[1:-1])
    return np.searchsorted(qs, col, side="left")


def info_gain_ranking(X, y, feature_names=None, bins=10):
    """Features ranked by label-entropy reduction after equal-frequency
    discretization; gains reported as percentage shares of the total."""
    X = np.asarray(X, dtype=float)
    y = np.asarray([str(v) for v in y])
    classes = sorted(set(y))
    y_idx = np.array([classes.index(v) for v in y])
    h_y = _entropy(np.bincount(y_idx).astype(float))
    names = feature_names or [f"f{i}" for i in range(X.shape[1])]
    gains = []
    for j in range(X.shape[1]):
        binned = _discretize(X[:, j], bins)
        gain = h_y
        for b in np.unique(binned):
            mask = binned == b
            gain -= mask.mean() * _entropy(
                np.bincount(y_idx[mask], minlength=len(classes)).astype(float)
            )
        gains.append(max(gain, 0.0))
    total = sum(gains)
    ranked = sorted(zip(names, gains), key=lambda kv: (-kv[1], kv[0]))
    return [
        (name, gain, (100.0 * gain / total if total > 0 else 0.0))
        for name, gain in ranked
    ]
