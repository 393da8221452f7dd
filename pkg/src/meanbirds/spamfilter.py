"""First-level spam account removal.

Two indicators: a high average hashtag count per tweet, and a high average
pairwise similarity between a user's tweets (near-duplicate posting). Both
cutoffs are strict: a user sitting exactly at a cutoff is kept. Verdicts are
independent per user, so the filter is embarrassingly parallel.
"""

import json
from dataclasses import dataclass, asdict

from .corpus import Corpus
from .textprep import similarity, strip_urls

HASHTAG_CUTOFF = 5.0
SIM_CUTOFF = 0.8
MAX_PAIRWISE_TWEETS = 500


@dataclass
class SpamVerdict:
    user_id: str
    avg_hashtags: float
    intra_similarity: float
    removed: bool
    reason: str  # hashtags | similarity | both | none

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def avg_hashtags(user_tweets):
    """Mean hashtag count per tweet; the tweets' metadata arrays are trusted."""
    if not user_tweets:
        raise ValueError("avg_hashtags of an empty tweet list is undefined")
    return sum(len(t.hashtags) for t in user_tweets) / len(user_tweets)


def intra_similarity(user_tweets, max_tweets=MAX_PAIRWISE_TWEETS):
    """Mean pairwise similarity over all unordered tweet pairs.

    Defined as 0 for fewer than two tweets. Similarity is computed on the
    text with URL tokens stripped (near-duplicate spammers tend to vary only
    the link). Users with more than `max_tweets` tweets are subsampled to
    the most recent ones; the mean estimator is unaffected in expectation.
    """
    if len(user_tweets) < 2:
        return 0.0
    tweets = user_tweets
    if len(tweets) > max_tweets:
        tweets = sorted(tweets, key=lambda t: (t.created_at, t.tweet_id))[-max_tweets:]
    texts = [strip_urls(t.text) for t in tweets]
    total = 0.0
    pairs = 0
    for i in range(len(texts)):
        ti = texts[i]
        for j in range(i + 1, len(texts)):
            total += similarity(ti, texts[j])
            pairs += 1
    return total / pairs


def judge_user(user_id, tweets, hashtag_cutoff=HASHTAG_CUTOFF, sim_cutoff=SIM_CUTOFF,
               max_pairwise_tweets=MAX_PAIRWISE_TWEETS):
    h = avg_hashtags(tweets) if tweets else 0.0
    s = intra_similarity(tweets, max_tweets=max_pairwise_tweets)
    over_h = h > hashtag_cutoff
    over_s = s > sim_cutoff
    if over_h and over_s:
        reason = "both"
    elif over_h:
        reason = "hashtags"
    elif over_s:
        reason = "similarity"
    else:
        reason = "none"
    return SpamVerdict(
        user_id=user_id,
        avg_hashtags=h,
        intra_similarity=s,
        removed=reason != "none",
        reason=reason,
    )


def filter_spammers(corpus, hashtag_cutoff=HASHTAG_CUTOFF, sim_cutoff=SIM_CUTOFF,
                    max_pairwise_tweets=MAX_PAIRWISE_TWEETS, pmap=None):
    """Split a corpus into (kept_corpus, verdicts).

    Every user with at least one tweet gets a verdict; removed users'
    tweets are excluded from the kept corpus. `pmap` may be a parallel
    map(fn, items) implementation; results do not depend on it.
    """
    by_user = corpus.tweets_by_user()
    users = sorted(by_user)
    run = pmap if pmap is not None else lambda fn, xs: [fn(x) for x in xs]
    verdicts = run(
        lambda uid: judge_user(
            uid, by_user[uid], hashtag_cutoff, sim_cutoff, max_pairwise_tweets
        ),
        users,
    )
    removed = {v.user_id for v in verdicts if v.removed}
    kept_tweets = [t for t in corpus.tweets if t.user_id not in removed]
    kept_accounts = {
        uid: acct for uid, acct in corpus.accounts.items() if uid not in removed
    }
    kept = Corpus(
        tweets=kept_tweets,
        accounts=kept_accounts,
        observation_window=corpus.observation_window,
    )
    return kept, list(verdicts)


def save_verdicts(verdicts, path):
    with open(path, "w", encoding="utf-8") as f:
        for v in verdicts:
            f.write(v.to_json() + "\n")
