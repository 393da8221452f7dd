"""Tweet/account records, JSONL ingestion, and the synthetic corpus generator.

Timestamps are integer epoch seconds UTC everywhere. A Corpus is immutable
after load and safe for shared concurrent reads; tweets are kept in a
canonical order (user_id, created_at, tweet_id) so that loading a shuffled
file produces an identical Corpus.
"""

import json
import random
from dataclasses import dataclass, field, asdict

CLASS_LABELS = ("bully", "aggressive", "spammer", "normal")

# Default planted class mix for the generator (fractions of all users).
DEFAULT_PROPORTIONS = {
    "bully": 0.045,
    "aggressive": 0.034,
    "spammer": 0.318,
    "normal": 0.603,
}

OBSERVATION_DAYS = 90
WINDOW_START = 1_464_739_200  # 2016-06-01 00:00:00 UTC
DAY = 86_400


class CorpusError(ValueError):
    """Malformed or schema-violating input record."""


@dataclass
class Tweet:
    tweet_id: str
    user_id: str
    created_at: int
    text: str
    hashtags: list = field(default_factory=list)
    urls: list = field(default_factory=list)
    mentions: list = field(default_factory=list)
    is_retweet: bool = False

    def to_json(self):
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


@dataclass
class UserAccount:
    user_id: str
    account_created_at: int
    verified: bool = False
    default_profile_image: bool = False
    statuses_count: int = 0
    listed_count: int = 0
    followers_count: int = 0
    friends_count: int = 0
    profile_description: str = ""

    def to_json(self):
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


@dataclass
class Corpus:
    tweets: list
    accounts: dict
    observation_window: tuple

    def tweets_by_user(self):
        """Map user_id -> that user's tweets, time-ordered (ties by tweet_id)."""
        out = {}
        for t in self.tweets:
            out.setdefault(t.user_id, []).append(t)
        return out

    @property
    def user_ids(self):
        return set(self.accounts)

    def window_days(self):
        start, end = self.observation_window
        return max((end - start) / DAY, 1.0 / DAY)


@dataclass
class LoadSummary:
    n_tweets: int = 0
    n_accounts: int = 0
    rejected_tweets: int = 0
    warnings: list = field(default_factory=list)


TWEET_REQUIRED = ("tweet_id", "user_id", "created_at", "text")


def parse_tweet_record(line, lineno=None):
    """Parse one JSONL tweet record; unknown extra fields are ignored."""
    where = f" (line {lineno})" if lineno is not None else ""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusError(f"malformed JSON{where}: {e}") from e
    if not isinstance(obj, dict):
        raise CorpusError(f"record is not an object{where}")
    missing = [k for k in TWEET_REQUIRED if k not in obj]
    if missing:
        raise CorpusError(f"missing required fields {missing}{where}")
    return Tweet(
        tweet_id=str(obj["tweet_id"]),
        user_id=str(obj["user_id"]),
        created_at=int(obj["created_at"]),
        text=str(obj["text"]),
        hashtags=list(obj.get("hashtags") or []),
        urls=list(obj.get("urls") or []),
        mentions=list(obj.get("mentions") or []),
        is_retweet=bool(obj.get("is_retweet", False)),
    )


def parse_account_record(line, lineno=None):
    where = f" (line {lineno})" if lineno is not None else ""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusError(f"malformed JSON{where}: {e}") from e
    if "user_id" not in obj or "account_created_at" not in obj:
        raise CorpusError(f"missing user_id/account_created_at{where}")
    acct = UserAccount(
        user_id=str(obj["user_id"]),
        account_created_at=int(obj["account_created_at"]),
        verified=bool(obj.get("verified", False)),
        default_profile_image=bool(obj.get("default_profile_image", False)),
        statuses_count=int(obj.get("statuses_count", 0)),
        listed_count=int(obj.get("listed_count", 0)),
        followers_count=int(obj.get("followers_count", 0)),
        friends_count=int(obj.get("friends_count", 0)),
        profile_description=str(obj.get("profile_description") or ""),
    )
    for name in ("statuses_count", "listed_count", "followers_count", "friends_count"):
        if getattr(acct, name) < 0:
            raise CorpusError(f"negative {name}{where}")
    return acct


def _canonical(tweets):
    return sorted(tweets, key=lambda t: (t.user_id, t.created_at, t.tweet_id))


def load_corpus(tweets_path, accounts_path):
    """Load and cross-reference both JSONL files.

    Returns (Corpus, LoadSummary). Tweets whose user_id has no account are
    rejected and counted, not fatal; unreferenced accounts are kept.
    """
    accounts = {}
    with open(accounts_path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            if not line.strip():
                continue
            acct = parse_account_record(line, lineno=i)
            accounts[acct.user_id] = acct

    summary = LoadSummary(n_accounts=len(accounts))
    tweets = []
    with open(tweets_path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            if not line.strip():
                continue
            tw = parse_tweet_record(line, lineno=i)
            if tw.user_id not in accounts:
                summary.rejected_tweets += 1
                continue
            tweets.append(tw)

    tweets = _canonical(tweets)
    earliest = {}
    for t in tweets:
        if t.user_id not in earliest:
            earliest[t.user_id] = t.created_at
    for uid, ts in earliest.items():
        if accounts[uid].account_created_at > ts:
            summary.warnings.append(
                f"account {uid} created after its earliest tweet"
            )
    summary.n_tweets = len(tweets)
    if tweets:
        window = (min(t.created_at for t in tweets), max(t.created_at for t in tweets))
    else:
        window = (0, 0)
    return Corpus(tweets=tweets, accounts=accounts, observation_window=window), summary


def save_corpus(corpus, tweets_path, accounts_path):
    with open(tweets_path, "w", encoding="utf-8") as f:
        for t in _canonical(corpus.tweets):
            f.write(t.to_json() + "\n")
    with open(accounts_path, "w", encoding="utf-8") as f:
        for uid in sorted(corpus.accounts):
            f.write(corpus.accounts[uid].to_json() + "\n")


# ---------------------------------------------------------------------------
# Synthetic corpus generation
# ---------------------------------------------------------------------------
# The real dataset cannot ship, so the generator plants users of each class
# with behavior that downstream stages can provably separate:
#   * spammers violate at least one spam-filter cutoff by construction
#     (>5 hashtags per tweet on average, or near-duplicate tweet texts);
#     roughly 5% of all users are of the near-duplicate flavor;
#   * bullies burst negative posts at a repeated victim and sit in a sparse,
#     unpopular corner of the follow graph;
#   * aggressors post negative one-offs but keep a normal-ish network;
#   * normal users post neutral text with moderate everything.
# All class mixes below keep avg hashtags <= 3 and pairwise text similarity
# low for non-spammers so the spam filter provably keeps them.

NEUTRAL_WORDS = """
    morning coffee sunshine weekend garden music concert movie book chapter
    recipe dinner kitchen travel flight beach mountain river city street
    market friday photo camera laptop update project meeting office deadline
    lunch salad pasta guitar piano painting museum library puppy kitten
    soccer match score season team player coach training workout yoga
    weather forecast rain snow spring summer autumn winter holiday festival
    birthday party cake candle gift neighbor community event volunteer
    science space rocket planet star telescope report article podcast episode
    interview question answer idea plan sketch design pattern fabric thread
    bicycle commute traffic bridge tunnel station platform ticket schedule
    breakfast orange apple banana grape lemon honey bread butter cheese
    novel poem author editor draft revision margin note page cover
    tomato pepper onion basil soup stew roast grill picnic blanket
    lake trail forest cabin canoe paddle sunrise sunset horizon cloud
""".split()

NEGATIVE_WORDS = """
    hate idiot idiots loser losers pathetic disgusting trash garbage useless
    stupid dumb awful terrible horrible worst ugly scum vile wretched
    failure creep annoying mad angry destroy attack hurt shut quit
""".split()

PROMO_WORDS = """
    deal sale discount offer free click buy now shop cheap promo bonus
    winner prize claim limited exclusive subscribe follow link earn cash
""".split()

NEUTRAL_TAGS = [
    "#monday", "#coffee", "#travel", "#music", "#art", "#books", "#fitness",
    "#foodie", "#nature", "#photography", "#sports", "#movies", "#tech",
]

SPAM_TAGS = [
    "#deal", "#sale", "#free", "#win", "#promo", "#click", "#buy", "#offer",
    "#cash", "#prize", "#bonus", "#cheap", "#now", "#shop", "#earn",
]


@dataclass
class SyntheticSpec:
    """Per-class user counts plus knobs for the planted behaviors."""

    counts: dict
    hashtag_cutoff: float = 5.0
    sim_cutoff: float = 0.8
    similar_user_fraction: float = 0.05  # of ALL users, near-duplicate spammers

    @classmethod
    def from_total(cls, n_users, proportions=None):
        props = dict(proportions or DEFAULT_PROPORTIONS)
        counts = {
            "bully": round(n_users * props["bully"]),
            "aggressive": round(n_users * props["aggressive"]),
            "spammer": round(n_users * props["spammer"]),
        }
        counts["normal"] = n_users - sum(counts.values())
        return cls(counts=counts)

    def validate(self):
        for label, n in self.counts.items():
            if label not in CLASS_LABELS:
                raise ValueError(f"unknown class {label!r}")
            if n < 0:
                raise ValueError(f"negative count for {label}")
        if sum(self.counts.values()) <= 0:
            raise ValueError("empty corpus spec")


def _words(rng, pool, k):
    return " ".join(rng.choice(pool) for _ in range(k))


def _session_starts(rng, n_sessions):
    # two-day grid keeps inter-session gaps far above the 8h threshold
    days = rng.sample(range(0, OBSERVATION_DAYS - 2, 2), n_sessions)
    return sorted(WINDOW_START + d * DAY + rng.randrange(0, 6 * 3600) for d in days)


class _UserPlan:
    """Behavior plan for one synthetic user; tweet text varies per class."""

    def __init__(self, uid, label, rng, all_ids, victims):
        self.uid = uid
        self.label = label
        self.rng = rng
        self.all_ids = all_ids
        self.spam_kind = None
        # a bully keeps hammering the same one or two targets
        if label == "bully":
            self.victims = rng.sample(victims, min(2, len(victims)))
        else:
            self.victims = victims

    def account(self):
        rng = self.rng
        if self.label == "bully":
            followers = rng.randint(3, 60)
            friends = rng.randint(40, 220)
            listed = rng.randint(0, 12)
            statuses = rng.randint(80, 2500)
            age_days = rng.randint(900, 2600)
        elif self.label == "aggressive":
            followers = rng.randint(220, 1800)
            friends = rng.randint(60, 400)
            listed = rng.randint(8, 60)
            statuses = rng.randint(200, 5000)
            age_days = rng.randint(700, 2400)
        elif self.label == "spammer":
            followers = rng.randint(5, 250)
            friends = rng.randint(300, 2500)
            listed = rng.randint(0, 6)
            statuses = rng.randint(1000, 40000)
            age_days = rng.randint(10, 400)
        else:
            followers = rng.randint(120, 2200)
            friends = rng.randint(80, 900)
            listed = rng.randint(25, 180)
            statuses = rng.randint(300, 15000)
            age_days = rng.randint(100, 2000)
        return UserAccount(
            user_id=self.uid,
            account_created_at=WINDOW_START - age_days * DAY,
            verified=self.label == "normal" and self.rng.random() < 0.03,
            default_profile_image=self.rng.random()
            < (0.4 if self.label == "spammer" else 0.05),
            statuses_count=statuses,
            listed_count=listed,
            followers_count=followers,
            friends_count=friends,
            profile_description=f"synthetic {self.uid}",
        )

    def _tweet_text(self):
        rng = self.rng
        if self.label == "normal":
            body = _words(rng, NEUTRAL_WORDS, rng.randint(7, 12))
            if rng.random() < 0.25:
                body += " " + rng.choice(NEUTRAL_TAGS)
            if rng.random() < 0.30:
                body += f" http://pics.example/{rng.randrange(10**6)}"
            if rng.random() < 0.20:
                body += " @" + rng.choice(self.all_ids)
            return body
        if self.label == "aggressive":
            body = _words(rng, NEUTRAL_WORDS, rng.randint(3, 6))
            body += " " + _words(rng, NEGATIVE_WORDS, rng.randint(2, 4))
            if rng.random() < 0.5:
                body += " @" + rng.choice(self.all_ids)
            if rng.random() < 0.4:
                body += " " + rng.choice(NEUTRAL_TAGS)
            if rng.random() < 0.35:
                body += f" http://rant.example/{rng.randrange(10**6)}"
            if rng.random() < 0.3:
                body = "WOW " + body
            return body
        if self.label == "bully":
            victim = rng.choice(self.victims)
            body = "@" + victim + " " + _words(rng, NEGATIVE_WORDS, rng.randint(3, 5))
            body += " " + _words(rng, NEUTRAL_WORDS, rng.randint(3, 6))
            tags = rng.sample(NEUTRAL_TAGS, rng.randint(1, 3))
            body += " " + " ".join(tags)
            if rng.random() < 0.4:
                body += f" http://pile.example/{rng.randrange(10**6)}"
            if rng.random() < 0.35:
                body = "LOSER " + body
            return body
        # spammer
        if self.spam_kind == "similarity":
            # near-duplicate: shared base per user, one word swapped per tweet
            tail = rng.choice(PROMO_WORDS)
            return f"{self.spam_base} {tail}"
        tags = rng.sample(SPAM_TAGS, rng.randint(6, 9))
        body = _words(rng, PROMO_WORDS, rng.randint(3, 5))
        return body + " " + " ".join(tags) + f" http://spam.example/{rng.randrange(10**6)}"

    def tweets(self, id_counter):
        rng = self.rng
        if self.label == "bully":
            n_sessions = rng.randint(3, 5)
            gap_range = (45, 420)  # seconds: rapid bursts
        elif self.label == "aggressive":
            n_sessions = rng.randint(2, 3)
            gap_range = (120, 900)
        elif self.label == "spammer":
            n_sessions = rng.randint(2, 3)
            gap_range = (300, 3600)
        else:
            n_sessions = rng.randint(1, 4)
            gap_range = (600, 7000)
        if self.label == "spammer" and self.spam_kind == "similarity":
            base_words = _words(rng, PROMO_WORDS, 9)
            self.spam_base = f"limited {base_words} visit megastore and claim today"
        out = []
        for start in _session_starts(rng, n_sessions):
            ts = start
            for _ in range(rng.randint(5, 10)):
                text = self._tweet_text()
                toks = text.split()
                out.append(
                    Tweet(
                        tweet_id=f"t{next(id_counter):07d}",
                        user_id=self.uid,
                        created_at=ts,
                        text=text,
                        hashtags=[t for t in toks if t.startswith("#")],
                        urls=[t for t in toks if t.startswith("http")],
                        mentions=[t[1:] for t in toks if t.startswith("@") and len(t) > 1],
                        is_retweet=rng.random() < 0.08,
                    )
                )
                ts += rng.randint(*gap_range)
        return out


def _plan_edges(rng, plans, label_of):
    """Directed follower->followee edges with class-dependent popularity."""
    ids = [p.uid for p in plans]
    # normal users are followed the most, bullies the least
    weights = {"normal": 6, "aggressive": 3, "spammer": 1, "bully": 1}
    pool = []
    for p in plans:
        pool.extend([p.uid] * weights[p.label])
    reciprocate = {"bully": 0.55, "aggressive": 0.40, "normal": 0.20, "spammer": 0.04}
    out_deg = {"bully": (4, 12), "aggressive": (15, 45), "normal": (20, 60), "spammer": (40, 120)}
    edges = set()
    for p in plans:
        lo, hi = out_deg[p.label]
        for _ in range(rng.randint(lo, min(hi, len(ids) - 1))):
            tgt = rng.choice(pool)
            if tgt == p.uid:
                continue
            edges.add((p.uid, tgt))
            if rng.random() < reciprocate[label_of[tgt]]:
                edges.add((tgt, p.uid))
    return sorted(edges)


def generate_synthetic_corpus(spec, seed):
    """Build a deterministic corpus with planted class behavior.

    Returns (Corpus, planted_labels, edges): planted_labels maps every
    user_id to its ground-truth class; edges is the follower->followee list.
    """
    spec.validate()
    rng = random.Random(seed)
    labels = []
    for label in CLASS_LABELS:
        labels.extend([label] * spec.counts.get(label, 0))
    rng.shuffle(labels)
    n = len(labels)
    ids = [f"u{i:05d}" for i in range(n)]
    label_of = dict(zip(ids, labels))

    victims = [u for u in ids if label_of[u] == "normal"]
    if not victims:
        victims = ids[:]

    # near-duplicate spammers: a fixed share of ALL users
    spam_ids = [u for u in ids if label_of[u] == "spammer"]
    n_similar = min(len(spam_ids), round(n * spec.similar_user_fraction))
    similar_set = set(spam_ids[:n_similar])  # label shuffle already randomized ids

    plans = []
    for uid in ids:
        plan = _UserPlan(uid, label_of[uid], rng, ids, victims)
        if uid in similar_set:
            plan.spam_kind = "similarity"
        elif label_of[uid] == "spammer":
            plan.spam_kind = "hashtags"
        plans.append(plan)

    accounts = {p.uid: p.account() for p in plans}
    counter = iter(range(10**7))
    tweets = []
    for p in plans:
        tweets.extend(p.tweets(counter))
    edges = _plan_edges(rng, plans, label_of)
    corpus = Corpus(
        tweets=_canonical(tweets),
        accounts=accounts,
        observation_window=(WINDOW_START, WINDOW_START + OBSERVATION_DAYS * DAY),
    )
    return corpus, label_of, edges


def save_planted_labels(labels, path):
    with open(path, "w", encoding="utf-8") as f:
        for uid in sorted(labels):
            f.write(json.dumps({"user_id": uid, "label": labels[uid]}) + "\n")


def load_planted_labels(path):
    out = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                out[obj["user_id"]] = obj["label"]
    return out


def save_edges(edges, path):
    with open(path, "w", encoding="utf-8") as f:
        for a, b in edges:
            f.write(f"{a} {b}\n")
