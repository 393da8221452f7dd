"""Lexicon- and vector-based text scoring.

Sentiment works on a [-4, 4] scale and combines the strongest positive and
strongest negative matched term; hate terms carry a [0, 100] hatefulness
score; the curse list is binary per tweet. All lexicons are immutable after
load and the scoring functions are pure, so they parallelize per tweet.
"""

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

EMOTIONS = ("anger", "disgust", "fear", "joy", "sadness", "surprise")

SENT_MIN, SENT_MAX = -4.0, 4.0


@dataclass
class SentimentLexicon:
    scores: dict
    negations: set = field(default_factory=set)
    boosters: set = field(default_factory=set)


@dataclass
class VectorTable:
    vectors: dict
    dim: int


def _open_default(name):
    return resources.files("meanbirds.data").joinpath(name).read_text(encoding="utf-8")


def load_sentiment_lexicon(path=None):
    """Parse sentiment.tsv: term<TAB>score, optional third column marking
    the term as a negation or booster instead of a scored term."""
    text = _open_default("sentiment.tsv") if path is None else open(path, encoding="utf-8").read()
    scores, negations, boosters = {}, set(), set()
    for ln in text.splitlines():
        if not ln.strip() or ln.startswith("#"):
            continue
        parts = ln.split("\t")
        term = parts[0].strip().lower()
        kind = parts[2].strip().lower() if len(parts) > 2 else ""
        if kind == "negation":
            negations.add(term)
        elif kind == "booster":
            boosters.add(term)
        else:
            score = float(parts[1])
            if not SENT_MIN <= score <= SENT_MAX:
                raise ValueError(f"sentiment score out of [-4,4] for {term!r}")
            scores[term] = score
    return SentimentLexicon(scores=scores, negations=negations, boosters=boosters)


def load_hate_lexicon(path=None):
    """Parse hate.csv: term,score with scores on [0, 100]."""
    text = _open_default("hate.csv") if path is None else open(path, encoding="utf-8").read()
    out = {}
    for ln in text.splitlines()[1:]:
        if not ln.strip():
            continue
        term, score = ln.rsplit(",", 1)
        score = float(score)
        if not 0 <= score <= 100:
            raise ValueError(f"hate score out of [0,100] for {term!r}")
        out[term.strip().lower()] = score
    return out


def load_swear_list(path=None):
    text = _open_default("swear.txt") if path is None else open(path, encoding="utf-8").read()
    return {ln.strip().lower() for ln in text.splitlines() if ln.strip()}


def load_emotion_lexicon(path=None):
    """Parse emotion.csv: term,emotion,score. Returns term -> {emotion: score}."""
    text = _open_default("emotion.csv") if path is None else open(path, encoding="utf-8").read()
    out = {}
    for ln in text.splitlines()[1:]:
        if not ln.strip():
            continue
        term, emotion, score = ln.split(",")
        emotion = emotion.strip().lower()
        if emotion not in EMOTIONS:
            raise ValueError(f"unknown emotion {emotion!r}")
        out.setdefault(term.strip().lower(), {})[emotion] = float(score)
    return out


def load_vector_table(path):
    """Parse vectors.txt: header 'V D', then term followed by D reals."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError("vector file header must be 'V D'")
        n_vec, dim = int(header[0]), int(header[1])
        vectors = {}
        for ln in f:
            parts = ln.split()
            if not parts:
                continue
            term = parts[0]
            vals = np.array([float(x) for x in parts[1:]], dtype=float)
            if vals.shape[0] != dim:
                raise ValueError(f"vector for {term!r} has dimension {vals.shape[0]}, want {dim}")
            vectors[term] = vals
    if len(vectors) != n_vec:
        raise ValueError(f"header promised {n_vec} vectors, file has {len(vectors)}")
    return VectorTable(vectors=vectors, dim=dim)


def _clamp(x):
    return max(SENT_MIN, min(SENT_MAX, x))


def sentiment_score(tokens, lexicon):
    """Strongest-positive plus strongest-negative matched term score.

    A negation term directly before a matched term (or before its booster)
    flips the term's sign; a booster directly before pushes the score one
    further from zero. Returns 0 when nothing matches.
    """
    best_pos = 0.0
    best_neg = 0.0
    for i, tok in enumerate(tokens):
        score = lexicon.scores.get(tok)
        if score is None or score == 0:
            continue
        prev1 = tokens[i - 1] if i >= 1 else None
        prev2 = tokens[i - 2] if i >= 2 else None
        if prev1 in lexicon.boosters:
            score = _clamp(score + math.copysign(1.0, score))
            if prev2 in lexicon.negations:
                score = -score
        elif prev1 in lexicon.negations:
            score = -score
        if score > best_pos:
            best_pos = score
        if score < best_neg:
            best_neg = score
    return _clamp(best_pos + best_neg)


def hate_score(tokens, hate_lexicon):
    """Mean hatefulness of matched terms; 0 when nothing matches."""
    matched = [hate_lexicon[t] for t in tokens if t in hate_lexicon]
    if not matched:
        return 0.0
    return sum(matched) / len(matched)


def curse_flag(tokens, swear_list):
    """True iff any token is in the swear list."""
    return any(t in swear_list for t in tokens)


def curse_fraction(token_lists, swear_list):
    """Per-user feature: fraction of tweets with at least one swear term."""
    if not token_lists:
        return 0.0
    flagged = sum(1 for toks in token_lists if curse_flag(toks, swear_list))
    return flagged / len(token_lists)


def embed_average(tokens, table):
    """Mean vector of in-vocabulary tokens; the zero vector when none are."""
    if table is None:
        return np.zeros(0)
    hits = [table.vectors[t] for t in tokens if t in table.vectors]
    if not hits:
        return np.zeros(table.dim)
    return np.mean(hits, axis=0)


def emotion_scores(tokens, emotion_lexicon):
    """Per-emotion mean of matched term scores; all zeros when the lexicon is absent."""
    if not emotion_lexicon:
        return {e: 0.0 for e in EMOTIONS}
    sums = {e: 0.0 for e in EMOTIONS}
    counts = {e: 0 for e in EMOTIONS}
    for tok in tokens:
        entry = emotion_lexicon.get(tok)
        if not entry:
            continue
        for emotion, score in entry.items():
            sums[emotion] += score
            counts[emotion] += 1
    return {
        e: (sums[e] / counts[e] if counts[e] else 0.0)
        for e in EMOTIONS
    }
