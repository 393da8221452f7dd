"""Tweet text cleaning, surface statistics, and string distances.

Everything here is pure and stateless: the same inputs always produce the
same outputs, so all operations can run in parallel per tweet.
"""

import re
from dataclasses import dataclass, field
from importlib import resources

URL_RE = re.compile(r"^(https?://|www\.)", re.IGNORECASE)
REPEAT_RE = re.compile(r"(.)\1{2,}")

# Unicode emoji blocks (emoticons, symbols/pictographs, transport, supplemental,
# flags, dingbats, misc symbols).
EMOJI_RANGES = (
    (0x1F600, 0x1F64F),
    (0x1F300, 0x1F5FF),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x1FA70, 0x1FAFF),
    (0x1F1E6, 0x1F1FF),
    (0x2600, 0x27BF),
)


def _load_lines(name):
    text = resources.files("meanbirds.data").joinpath(name).read_text(encoding="utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def load_stopwords(path=None):
    """Load the stopword set: one lowercase term per line."""
    if path is None:
        return set(_load_lines("stopwords.txt"))
    with open(path, encoding="utf-8") as f:
        return {ln.strip().lower() for ln in f if ln.strip()}


def load_emoticons(path=None):
    """Load the emoticon pattern list: one pattern per line, matched token-exact."""
    if path is None:
        return set(_load_lines("emoticons.txt"))
    with open(path, encoding="utf-8") as f:
        return {ln.strip() for ln in f if ln.strip()}


DEFAULT_STOPWORDS = load_stopwords()
DEFAULT_EMOTICONS = load_emoticons()


@dataclass
class CleanText:
    """Normalized token list plus surface counts taken on the raw text."""

    tokens: list = field(default_factory=list)
    original_length: int = 0
    uppercase_token_count: int = 0
    emoticon_count: int = 0


def _is_emoji(ch):
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in EMOJI_RANGES)


def count_emoticons(raw, emoticons=None):
    """Count emoticon tokens (exact match against the pattern list) plus emoji chars."""
    if emoticons is None:
        emoticons = DEFAULT_EMOTICONS
    n = sum(1 for tok in raw.split() if tok in emoticons)
    n += sum(1 for ch in raw if _is_emoji(ch))
    return n


def count_uppercase_tokens(raw):
    """Count fully-uppercase alphabetic tokens of length >= 2 (edge punctuation ignored)."""
    n = 0
    for tok in raw.split():
        core = tok.strip("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")
        if len(core) >= 2 and core.isalpha() and core.isupper():
            n += 1
    return n


def normalize_text(raw, stopwords=None, emoticons=None):
    """Clean one tweet's text into lowercase tokens.

    Removes URL tokens, punctuation, digits, and stopwords, lowercases,
    and collapses runs of 3+ identical characters to a single occurrence.
    Uppercase and emoticon counts are measured on the raw text before
    any lowering.
    """
    if stopwords is None:
        stopwords = DEFAULT_STOPWORDS
    upper = count_uppercase_tokens(raw)
    emo = count_emoticons(raw, emoticons)
    tokens = []
    for tok in raw.split():
        if URL_RE.match(tok):
            continue
        core = "".join(ch for ch in tok if ch.isalpha())
        if not core:
            continue
        core = REPEAT_RE.sub(r"\1", core.lower())
        if core and core not in stopwords:
            tokens.append(core)
    return CleanText(
        tokens=tokens,
        original_length=len(raw),
        uppercase_token_count=upper,
        emoticon_count=emo,
    )


def surface_stats(tweet, emoticons=None):
    """Per-tweet surface counts used by the text features.

    Returns (hashtag_count, emoticon_count, uppercase_count, url_count,
    mention_count). Hashtags, URLs and mentions come from the tweet's
    metadata arrays when non-empty, otherwise they are extracted from the
    text by pattern ('#'-prefixed, scheme-prefixed, '@'-prefixed tokens).
    """
    text = tweet.text
    toks = text.split()
    hashtags = len(tweet.hashtags) if tweet.hashtags else sum(
        1 for t in toks if len(t) > 1 and t.startswith("#")
    )
    urls = len(tweet.urls) if tweet.urls else sum(1 for t in toks if URL_RE.match(t))
    mentions = len(tweet.mentions) if tweet.mentions else sum(
        1 for t in toks if len(t) > 1 and t.startswith("@")
    )
    return (
        hashtags,
        count_emoticons(text, emoticons),
        count_uppercase_tokens(text),
        urls,
        mentions,
    )


def strip_urls(raw):
    """Drop scheme-prefixed tokens; used before near-duplicate comparison."""
    return " ".join(tok for tok in raw.split() if not URL_RE.match(tok))


def levenshtein(a, b):
    """Minimum number of single-character insertions, deletions, substitutions.

    Bit-parallel (Myers/Hyyrö) scan: one pass over `b` with bitmask state
    over `a`, so cost is O(len(b)) big-int operations rather than a full
    DP matrix.
    """
    if a == b:
        return 0
    # strip common prefix/suffix; cheap and dominant for near-duplicates
    lo = 0
    hi_a, hi_b = len(a), len(b)
    while lo < hi_a and lo < hi_b and a[lo] == b[lo]:
        lo += 1
    while hi_a > lo and hi_b > lo and a[hi_a - 1] == b[hi_b - 1]:
        hi_a -= 1
        hi_b -= 1
    a, b = a[lo:hi_a], b[lo:hi_b]
    if not a:
        return len(b)
    if not b:
        return len(a)
    m = len(a)
    peq = {}
    for i, ch in enumerate(a):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    mask = (1 << m) - 1
    last = 1 << (m - 1)
    pv = mask
    mv = 0
    score = m
    get = peq.get
    for ch in b:
        eq = get(ch, 0)
        xv = eq | mv
        xh = ((((eq & pv) + pv) & mask) ^ pv) | eq
        ph = mv | (mask & ~(xh | pv))
        mh = pv & xh
        if ph & last:
            score += 1
        elif mh & last:
            score -= 1
        ph = ((ph << 1) | 1) & mask
        mh = (mh << 1) & mask
        pv = mh | (mask & ~(xv | ph))
        mv = ph & xv
    return score


def similarity(a, b):
    """Normalized string similarity: 1 - levenshtein / max length, in [0, 1]."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))
