"""Time-gap sessionization and annotation batch construction.

A session is a user's maximal run of tweets whose consecutive inter-arrival
gaps stay within the threshold (strictly greater starts a new session).
Sessions are then cut into 5-10 tweet batches for annotators; oversized
sessions are split into near-equal chronological chunks so no chunk falls
below the minimum.
"""

import json
import math
from dataclasses import dataclass

from .corpus import Corpus, Tweet

GAP_HOURS = 8
MIN_TWEETS = 5
BATCH_MIN = 5
BATCH_MAX = 10


@dataclass
class Session:
    session_id: str
    user_id: str
    tweets: list
    start: int
    end: int


@dataclass
class Batch:
    batch_id: str
    user_id: str
    tweets: list
    source_session_id: str
    is_control: bool = False
    gold_label: str = None

    def to_json(self):
        return json.dumps(
            {
                "batch_id": self.batch_id,
                "user_id": self.user_id,
                "source_session_id": self.source_session_id,
                "is_control": self.is_control,
                "gold_label": self.gold_label,
                "tweets": [
                    {
                        "tweet_id": t.tweet_id,
                        "user_id": t.user_id,
                        "created_at": t.created_at,
                        "text": t.text,
                        "hashtags": t.hashtags,
                        "urls": t.urls,
                        "mentions": t.mentions,
                        "is_retweet": t.is_retweet,
                    }
                    for t in self.tweets
                ],
            },
            sort_keys=True,
            ensure_ascii=False,
        )


def drop_inactive(corpus, min_tweets=MIN_TWEETS):
    """Remove users tweeting fewer than `min_tweets` times in the window."""
    by_user = corpus.tweets_by_user()
    keep = {uid for uid, tws in by_user.items() if len(tws) >= min_tweets}
    return Corpus(
        tweets=[t for t in corpus.tweets if t.user_id in keep],
        accounts={u: a for u, a in corpus.accounts.items() if u in keep},
        observation_window=corpus.observation_window,
    )


def sessionize(user_tweets, gap_hours=GAP_HOURS):
    """Split one user's tweets into sessions at gaps exceeding the threshold."""
    if not user_tweets:
        return []
    gap = gap_hours * 3600
    ordered = sorted(user_tweets, key=lambda t: (t.created_at, t.tweet_id))
    uid = ordered[0].user_id
    sessions = []
    current = [ordered[0]]
    for tw in ordered[1:]:
        if tw.created_at - current[-1].created_at > gap:
            sessions.append(current)
            current = [tw]
        else:
            current.append(tw)
    sessions.append(current)
    return [
        Session(
            session_id=f"{uid}:s{i}",
            user_id=uid,
            tweets=s,
            start=s[0].created_at,
            end=s[-1].created_at,
        )
        for i, s in enumerate(sessions)
    ]


def split_sizes(n, minimum=BATCH_MIN, maximum=BATCH_MAX):
    """Near-equal chunk sizes for n items: k = ceil(n/max) chunks.

    For any n >= minimum the sizes differ by at most one and each lies in
    [minimum, maximum]. Below the minimum there are no chunks at all.
    """
    if n < minimum:
        return []
    k = math.ceil(n / maximum)
    base, extra = divmod(n, k)
    return [base + 1] * extra + [base] * (k - extra)


def batchify(session, minimum=BATCH_MIN, maximum=BATCH_MAX):
    """Cut one session into chronological annotation batches."""
    sizes = split_sizes(len(session.tweets), minimum, maximum)
    batches = []
    pos = 0
    for i, size in enumerate(sizes):
        chunk = session.tweets[pos:pos + size]
        pos += size
        batches.append(
            Batch(
                batch_id=f"{session.session_id}#b{i}",
                user_id=session.user_id,
                tweets=chunk,
                source_session_id=session.session_id,
            )
        )
    return batches


def sessionize_corpus(corpus, gap_hours=GAP_HOURS, pmap=None):
    """All users' sessions, in deterministic (user_id, session index) order."""
    by_user = corpus.tweets_by_user()
    users = sorted(by_user)
    run = pmap if pmap is not None else lambda fn, xs: [fn(x) for x in xs]
    per_user = run(lambda uid: sessionize(by_user[uid], gap_hours), users)
    out = []
    for sessions in per_user:
        out.extend(sessions)
    return out


def batchify_all(sessions, minimum=BATCH_MIN, maximum=BATCH_MAX):
    out = []
    for s in sessions:
        out.extend(batchify(s, minimum, maximum))
    return out


def save_sessions(sessions, path):
    with open(path, "w", encoding="utf-8") as f:
        for s in sessions:
            f.write(
                json.dumps(
                    {
                        "session_id": s.session_id,
                        "user_id": s.user_id,
                        "start": s.start,
                        "end": s.end,
                        "tweet_ids": [t.tweet_id for t in s.tweets],
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def save_batches(batches, path):
    with open(path, "w", encoding="utf-8") as f:
        for b in batches:
            f.write(b.to_json() + "\n")


def load_batches(path):
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(
                Batch(
                    batch_id=obj["batch_id"],
                    user_id=obj["user_id"],
                    tweets=[Tweet(**tw) for tw in obj["tweets"]],
                    source_session_id=obj["source_session_id"],
                    is_control=obj.get("is_control", False),
                    gold_label=obj.get("gold_label"),
                )
            )
    return out
