import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from meanbirds.corpus import Corpus, Tweet, UserAccount


def make_tweet(tweet_id="t1", user_id="u1", created_at=1000, text="hello world",
               hashtags=None, urls=None, mentions=None, is_retweet=False):
    return Tweet(
        tweet_id=tweet_id,
        user_id=user_id,
        created_at=created_at,
        text=text,
        hashtags=hashtags or [],
        urls=urls or [],
        mentions=mentions or [],
        is_retweet=is_retweet,
    )


def make_account(user_id="u1", created_at=0, **kwargs):
    return UserAccount(user_id=user_id, account_created_at=created_at, **kwargs)


def make_corpus(tweets, accounts=None):
    if accounts is None:
        accounts = {
            uid: make_account(uid) for uid in {t.user_id for t in tweets}
        }
    if tweets:
        window = (min(t.created_at for t in tweets), max(t.created_at for t in tweets))
    else:
        window = (0, 0)
    return Corpus(tweets=list(tweets), accounts=accounts, observation_window=window)


@pytest.fixture
def tweet_factory():
    return make_tweet


@pytest.fixture(scope="session")
def synth_small():
    """Small deterministic synthetic corpus shared across tests."""
    from meanbirds.corpus import SyntheticSpec, generate_synthetic_corpus

    spec = SyntheticSpec.from_total(200)
    return generate_synthetic_corpus(spec, seed=11)
