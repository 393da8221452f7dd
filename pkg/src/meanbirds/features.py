"""Per-user feature assembly, the model-feature mask, and KS statistics.

Thirty named attributes per user in three groups (10 user, 9 text,
11 network). The model mask keeps the 18 attributes that carry signal;
the excluded ones are still extracted and exported. Text features average
over the user's annotated-batch tweets when batches exist, otherwise over
all their tweets.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import lexfeatures
from .graph import NodeMetrics
from .textprep import normalize_text, surface_stats

USER_FEATURES = (
    "avg_posts_per_day",
    "account_age_days",
    "verified",
    "subscribed_lists",
    "median_interarrival_seconds",
    "default_profile_image",
    "session_count",
    "session_size_avg",
    "session_size_median",
    "session_size_std",
)

TEXT_FEATURES = (
    "avg_hashtags",
    "avg_emoticons",
    "avg_uppercase",
    "avg_urls",
    "avg_sentiment",
    "emotion_scores",
    "hate_score",
    "embed_average",
    "curse_fraction",
)

NETWORK_FEATURES = (
    "friends",
    "followers",
    "ratio",
    "reciprocity",
    "hub",
    "authority",
    "eigenvector",
    "closeness",
    "clustering",
    "community_id",
    "power_diff",
)

ALL_FEATURES = USER_FEATURES + TEXT_FEATURES + NETWORK_FEATURES

# Attributes kept for modeling; the rest add noise and are dropped.
MODEL18 = (
    "avg_posts_per_day",
    "account_age_days",
    "subscribed_lists",
    "median_interarrival_seconds",
    "avg_hashtags",
    "avg_emoticons",
    "avg_uppercase",
    "avg_urls",
    "avg_sentiment",
    "friends",
    "followers",
    "ratio",
    "reciprocity",
    "hub",
    "authority",
    "eigenvector",
    "clustering",
    "power_diff",
)

assert len(ALL_FEATURES) == 30
assert len(MODEL18) == 18


@dataclass
class Lexicons:
    stopwords: set
    emoticons: set
    sentiment: object
    hate: dict
    swear: set
    emotion: dict = None
    vectors: object = None

    @classmethod
    def load_default(cls):
        from .textprep import DEFAULT_EMOTICONS, DEFAULT_STOPWORDS

        return cls(
            stopwords=DEFAULT_STOPWORDS,
            emoticons=DEFAULT_EMOTICONS,
            sentiment=lexfeatures.load_sentiment_lexicon(),
            hate=lexfeatures.load_hate_lexicon(),
            swear=lexfeatures.load_swear_list(),
            emotion=lexfeatures.load_emotion_lexicon(),
            vectors=None,
        )


@dataclass
class FeatureVector:
    user_id: str
    values: dict = field(default_factory=dict)


def extract_features(account, tweets, sessions, node_metrics, lexicons,
                     window, batch_tweets=None):
    """Assemble the 30-attribute vector for one user.

    `window` is the corpus observation window (start, end); `batch_tweets`
    restricts text features to the user's annotated-batch tweets when
    given. A user with fewer than two tweets gets the window length as
    interarrival time; users absent from the graph get zero network
    metrics.
    """
    start, end = window
    window_seconds = max(end - start, 1)
    window_days = window_seconds / 86400.0
    uid = account.user_id
    tweets = sorted(tweets, key=lambda t: (t.created_at, t.tweet_id))
    values = {}

    # user-based
    values["avg_posts_per_day"] = len(tweets) / window_days
    values["account_age_days"] = (end - account.account_created_at) / 86400.0
    values["verified"] = 1.0 if account.verified else 0.0
    values["subscribed_lists"] = float(account.listed_count)
    if len(tweets) >= 2:
        gaps = [b.created_at - a.created_at for a, b in zip(tweets, tweets[1:])]
        values["median_interarrival_seconds"] = float(np.median(gaps))
    else:
        values["median_interarrival_seconds"] = float(window_seconds)
    values["default_profile_image"] = 1.0 if account.default_profile_image else 0.0
    sizes = [len(s.tweets) for s in sessions]
    values["session_count"] = float(len(sessions))
    values["session_size_avg"] = float(np.mean(sizes)) if sizes else 0.0
    values["session_size_median"] = float(np.median(sizes)) if sizes else 0.0
    values["session_size_std"] = float(np.std(sizes)) if sizes else 0.0

    # text-based, averaged over the annotated-batch tweets when available
    text_tweets = batch_tweets if batch_tweets else tweets
    stats = [surface_stats(t, lexicons.emoticons) for t in text_tweets]
    n = max(len(stats), 1)
    values["avg_hashtags"] = sum(s[0] for s in stats) / n
    values["avg_emoticons"] = sum(s[1] for s in stats) / n
    values["avg_uppercase"] = sum(s[2] for s in stats) / n
    values["avg_urls"] = sum(s[3] for s in stats) / n
    token_lists = [
        normalize_text(t.text, lexicons.stopwords, lexicons.emoticons).tokens
        for t in text_tweets
    ]
    if token_lists:
        values["avg_sentiment"] = sum(
            lexfeatures.sentiment_score(toks, lexicons.sentiment)
            for toks in token_lists
        ) / len(token_lists)
        emo = [lexfeatures.emotion_scores(toks, lexicons.emotion) for toks in token_lists]
        values["emotion_scores"] = tuple(
            sum(e[name] for e in emo) / len(emo) for name in lexfeatures.EMOTIONS
        )
        values["hate_score"] = sum(
            lexfeatures.hate_score(toks, lexicons.hate) for toks in token_lists
        ) / len(token_lists)
    else:
        values["avg_sentiment"] = 0.0
        values["emotion_scores"] = (0.0,) * 6
        values["hate_score"] = 0.0
    if lexicons.vectors is not None and token_lists:
        vecs = [lexfeatures.embed_average(toks, lexicons.vectors) for toks in token_lists]
        values["embed_average"] = tuple(float(x) for x in np.mean(vecs, axis=0))
    else:
        values["embed_average"] = (0.0,)
    values["curse_fraction"] = lexfeatures.curse_fraction(token_lists, lexicons.swear)

    # network-based
    nm = node_metrics.get(uid) or NodeMetrics(user_id=uid)
    values["friends"] = float(nm.friends)
    values["followers"] = float(nm.followers)
    values["ratio"] = float(nm.ratio)
    values["reciprocity"] = float(nm.reciprocity)
    values["hub"] = float(nm.hub)
    values["authority"] = float(nm.authority)
    values["eigenvector"] = float(nm.eigenvector)
    values["closeness"] = float(nm.closeness)
    values["clustering"] = float(nm.clustering)
    values["community_id"] = float(nm.community_id)
    values["power_diff"] = float(nm.power_diff)

    missing = [k for k in ALL_FEATURES if k not in values]
    if missing:
        raise RuntimeError(f"unpopulated attributes: {missing}")
    return FeatureVector(user_id=uid, values=values)


def to_matrix(feature_vectors, mask=MODEL18):
    """(user_ids, X) with columns in mask order; scalars only."""
    ids = [fv.user_id for fv in feature_vectors]
    X = np.array(
        [[float(fv.values[name]) for name in mask] for fv in feature_vectors],
        dtype=float,
    )
    return ids, X


def _cell(value):
    if isinstance(value, tuple):
        if all(v == 0.0 for v in value):
            return "0" if len(value) <= 1 else ";".join("0" for _ in value)
        return ";".join(repr(float(v)) for v in value)
    return repr(float(value))


def save_features_csv(feature_vectors, path):
    """features.csv: user_id plus the 30 canonical attribute columns.

    Tuple-valued attributes (emotion_scores, embed_average) are packed as
    ';'-separated components in their single column.
    """
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(("user_id",) + ALL_FEATURES)
        for fv in sorted(feature_vectors, key=lambda v: v.user_id):
            w.writerow([fv.user_id] + [_cell(fv.values[k]) for k in ALL_FEATURES])


def save_masked_csv(feature_vectors, path, mask=MODEL18):
    """The model-ready table: user_id plus the 18 masked scalar columns."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(("user_id",) + tuple(mask))
        for fv in sorted(feature_vectors, key=lambda v: v.user_id):
            w.writerow([fv.user_id] + [repr(float(fv.values[k])) for k in mask])


def load_features_csv(path):
    out = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        names = header[1:]
        for row in reader:
            values = {}
            for name, cell in zip(names, row[1:]):
                if ";" in cell:
                    values[name] = tuple(float(x) for x in cell.split(";"))
                else:
                    values[name] = float(cell)
            out.append(FeatureVector(user_id=row[0], values=values))
    return out


# ---------------------------------------------------------------------------
# Distribution comparison
# ---------------------------------------------------------------------------

@dataclass
class KSResult:
    d: float
    p_value: float


def ecdf(values):
    """Right-continuous empirical CDF: (sorted support, cumulative fractions)."""
    if len(values) == 0:
        raise ValueError("ecdf of an empty sample is undefined")
    xs = np.sort(np.asarray(values, dtype=float))
    support, counts = np.unique(xs, return_counts=True)
    cum = np.cumsum(counts) / len(xs)
    return support, cum


def ecdf_eval(support, cum, x):
    """Evaluate a step ECDF at point x (fraction of sample <= x)."""
    i = np.searchsorted(support, x, side="right")
    return 0.0 if i == 0 else float(cum[i - 1])


def _kolmogorov_sf(lam):
    """Asymptotic Kolmogorov survival function Q(lambda)."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # theta-function form converges fast for small lambda
        q = math.exp(-math.pi ** 2 / (8.0 * lam * lam))
        cdf = (math.sqrt(2.0 * math.pi) / lam) * (q + q ** 9 + q ** 25 + q ** 49)
        return max(0.0, min(1.0, 1.0 - cdf))
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return max(0.0, min(1.0, total))


def ks_two_sample(sample_a, sample_b):
    """Two-sample KS statistic with the asymptotic p-value.

    D is the exact sup gap between the two ECDFs; the p-value evaluates the
    Kolmogorov distribution at sqrt(n_eff) * D with effective size
    n_a * n_b / (n_a + n_b).
    """
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("ks_two_sample needs two non-empty samples")
    merged = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, merged, side="right") / len(a)
    cdf_b = np.searchsorted(b, merged, side="right") / len(b)
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = len(a) * len(b) / (len(a) + len(b))
    p = _kolmogorov_sf(math.sqrt(n_eff) * d)
    return KSResult(d=d, p_value=p)
