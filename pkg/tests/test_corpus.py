import json
import random

import pytest

from meanbirds.corpus import (
    CorpusError,
    SyntheticSpec,
    Tweet,
    generate_synthetic_corpus,
    load_corpus,
    parse_tweet_record,
    save_corpus,
)


class TestParse:
    def test_defaults(self):
        t = parse_tweet_record('{"tweet_id":"1","user_id":"u1","created_at":100,"text":"hi"}')
        assert t.hashtags == [] and t.urls == [] and t.mentions == []
        assert t.is_retweet is False

    def test_retweet_passthrough(self):
        t = parse_tweet_record(
            '{"tweet_id":"1","user_id":"u1","created_at":100,"text":"hi","is_retweet":true}'
        )
        assert t.is_retweet is True

    def test_malformed_names_line(self):
        with pytest.raises(CorpusError, match="line 17"):
            parse_tweet_record("not-json", lineno=17)

    def test_missing_required(self):
        with pytest.raises(CorpusError, match="missing required"):
            parse_tweet_record('{"tweet_id":"1"}')

    def test_unknown_fields_ignored(self):
        t = parse_tweet_record(
            '{"tweet_id":"1","user_id":"u1","created_at":100,"text":"hi","lang":"en","geo":null}'
        )
        assert t.tweet_id == "1"

    def test_round_trip(self):
        t = Tweet("t9", "u3", 123, "hey #x", hashtags=["#x"], mentions=["u4"])
        assert parse_tweet_record(t.to_json()) == t


class TestLoad:
    def _write(self, tmp_path, tweets, accounts):
        tw = tmp_path / "tweets.jsonl"
        ac = tmp_path / "accounts.jsonl"
        tw.write_text("\n".join(tweets) + ("\n" if tweets else ""))
        ac.write_text("\n".join(accounts) + ("\n" if accounts else ""))
        return str(tw), str(ac)

    def test_basic(self, tmp_path):
        tweets = [
            json.dumps({"tweet_id": f"t{i}", "user_id": "u1", "created_at": 100 + i, "text": "x"})
            for i in range(3)
        ]
        accounts = [json.dumps({"user_id": "u1", "account_created_at": 1})]
        corpus, summary = load_corpus(*self._write(tmp_path, tweets, accounts))
        assert len(corpus.tweets) == 3
        assert len(corpus.accounts) == 1
        assert summary.rejected_tweets == 0

    def test_unknown_user_rejected(self, tmp_path):
        tweets = [json.dumps({"tweet_id": "t1", "user_id": "u9", "created_at": 5, "text": "x"})]
        accounts = [json.dumps({"user_id": "u1", "account_created_at": 1})]
        corpus, summary = load_corpus(*self._write(tmp_path, tweets, accounts))
        assert len(corpus.tweets) == 0
        assert summary.rejected_tweets == 1

    def test_empty_tweets_file(self, tmp_path):
        accounts = [json.dumps({"user_id": "u1", "account_created_at": 1})]
        corpus, summary = load_corpus(*self._write(tmp_path, [], accounts))
        assert corpus.tweets == []
        assert corpus.observation_window == (0, 0)

    def test_order_insensitive(self, tmp_path):
        rows = [
            json.dumps({"tweet_id": f"t{i}", "user_id": "u1", "created_at": 1000 - i, "text": f"x{i}"})
            for i in range(20)
        ]
        accounts = [json.dumps({"user_id": "u1", "account_created_at": 1})]
        c1, _ = load_corpus(*self._write(tmp_path, rows, accounts))
        shuffled = rows[:]
        random.Random(5).shuffle(shuffled)
        c2, _ = load_corpus(*self._write(tmp_path, shuffled, accounts))
        assert c1.tweets == c2.tweets
        assert c1.accounts == c2.accounts

    def test_late_account_warns(self, tmp_path):
        tweets = [json.dumps({"tweet_id": "t1", "user_id": "u1", "created_at": 5, "text": "x"})]
        accounts = [json.dumps({"user_id": "u1", "account_created_at": 999})]
        _, summary = load_corpus(*self._write(tmp_path, tweets, accounts))
        assert any("created after" in w for w in summary.warnings)


class TestSynthetic:
    def test_deterministic(self, tmp_path):
        spec = SyntheticSpec(counts={"normal": 60, "spammer": 32, "bully": 5, "aggressive": 3})
        c1, l1, e1 = generate_synthetic_corpus(spec, seed=7)
        c2, l2, e2 = generate_synthetic_corpus(spec, seed=7)
        a1 = tmp_path / "a_t.jsonl"
        a2 = tmp_path / "b_t.jsonl"
        save_corpus(c1, a1, tmp_path / "a_a.jsonl")
        save_corpus(c2, a2, tmp_path / "b_a.jsonl")
        assert a1.read_bytes() == a2.read_bytes()
        assert (tmp_path / "a_a.jsonl").read_bytes() == (tmp_path / "b_a.jsonl").read_bytes()
        assert l1 == l2 and e1 == e2

    def test_different_seeds_differ(self):
        spec = SyntheticSpec(counts={"normal": 30, "spammer": 10, "bully": 3, "aggressive": 2})
        c1, _, _ = generate_synthetic_corpus(spec, seed=1)
        c2, _, _ = generate_synthetic_corpus(spec, seed=2)
        assert [t.text for t in c1.tweets] != [t.text for t in c2.tweets]

    def test_paper_proportions_at_1000(self):
        spec = SyntheticSpec.from_total(1000)
        assert spec.counts == {"bully": 45, "aggressive": 34, "spammer": 318, "normal": 603}

    def test_labels_cover_every_user(self, synth_small):
        corpus, labels, _ = synth_small
        assert set(labels) == set(corpus.accounts)
        assert all(t.user_id in labels for t in corpus.tweets)

    def test_window_spans_tweets(self, synth_small):
        corpus, _, _ = synth_small
        start, end = corpus.observation_window
        assert all(start <= t.created_at <= end for t in corpus.tweets)

    def test_every_user_active(self, synth_small):
        corpus, _, _ = synth_small
        by_user = corpus.tweets_by_user()
        assert all(len(tws) >= 5 for tws in by_user.values())

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            SyntheticSpec(counts={"normal": -1}).validate()
        with pytest.raises(ValueError):
            SyntheticSpec(counts={"martian": 5}).validate()
