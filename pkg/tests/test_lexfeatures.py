import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meanbirds.lexfeatures import (
    EMOTIONS,
    SentimentLexicon,
    VectorTable,
    curse_flag,
    curse_fraction,
    embed_average,
    emotion_scores,
    hate_score,
    load_hate_lexicon,
    load_sentiment_lexicon,
    load_swear_list,
    load_vector_table,
    sentiment_score,
)

LEX = SentimentLexicon(
    scores={"love": 3.0, "hate": -4.0, "good": 2.0, "awful": -3.0},
    negations={"not", "never"},
    boosters={"very", "really"},
)


class TestSentiment:
    def test_no_match_is_zero(self):
        assert sentiment_score(["completely", "unscored"], LEX) == 0.0

    def test_single_positive(self):
        assert sentiment_score(["love"], LEX) == 3.0

    def test_negation_flips(self):
        assert sentiment_score(["not", "love"], LEX) == -3.0

    def test_strongest_positive_plus_strongest_negative(self):
        assert sentiment_score(["love", "hate"], LEX) == -1.0

    def test_booster_amplifies(self):
        assert sentiment_score(["very", "good"], LEX) == 3.0
        assert sentiment_score(["very", "awful"], LEX) == -4.0

    def test_booster_clamped(self):
        assert sentiment_score(["very", "hate"], LEX) == -4.0

    def test_negated_booster(self):
        assert sentiment_score(["not", "very", "good"], LEX) == -3.0

    @given(st.lists(st.sampled_from(sorted(LEX.scores) + ["filler", "words"]), max_size=8))
    @settings(max_examples=300, deadline=None)
    def test_bounds(self, tokens):
        assert -4.0 <= sentiment_score(tokens, LEX) <= 4.0

    @given(st.sampled_from(sorted(LEX.scores)))
    @settings(max_examples=20, deadline=None)
    def test_sign_flip_under_negation(self, term):
        assert sentiment_score(["not", term], LEX) == -sentiment_score([term], LEX)

    def test_default_lexicon_loads_in_range(self):
        lex = load_sentiment_lexicon()
        assert lex.scores and lex.negations and lex.boosters
        assert all(-4 <= s <= 4 for s in lex.scores.values())


HATE = {"scum": 80.0, "vermin": 40.0}


class TestHate:
    def test_no_match(self):
        assert hate_score(["hello"], HATE) == 0.0

    def test_single(self):
        assert hate_score(["scum"], HATE) == 80.0

    def test_mean(self):
        assert hate_score(["scum", "vermin"], HATE) == 60.0

    def test_default_in_range(self):
        hl = load_hate_lexicon()
        assert all(0 <= v <= 100 for v in hl.values())


class TestCurse:
    SWEAR = {"damn", "hell"}

    def test_flag(self):
        assert curse_flag(["damn", "it"], self.SWEAR) is True
        assert curse_flag(["fine"], self.SWEAR) is False

    def test_fraction(self):
        lists = [["damn"], ["ok"], ["hell", "no"], ["sure"]]
        assert curse_fraction(lists, self.SWEAR) == 0.5

    def test_default_loads(self):
        assert "damn" in load_swear_list()


class TestEmbed:
    TABLE = VectorTable(vectors={"a": np.array([1.0, 0.0]), "b": np.array([0.0, 2.0])}, dim=2)

    def test_single_token(self):
        assert np.allclose(embed_average(["a"], self.TABLE), [1.0, 0.0])

    def test_out_of_vocab_zero(self):
        assert np.allclose(embed_average(["zzz"], self.TABLE), [0.0, 0.0])

    def test_two_token_mean(self):
        assert np.allclose(embed_average(["a", "b"], self.TABLE), [0.5, 1.0])

    def test_permutation_and_duplication_invariance(self):
        v1 = embed_average(["a", "b"], self.TABLE)
        v2 = embed_average(["b", "a"], self.TABLE)
        v3 = embed_average(["a", "b", "a", "b"], self.TABLE)
        assert np.allclose(v1, v2) and np.allclose(v1, v3)

    def test_vector_file_round_trip(self, tmp_path):
        p = tmp_path / "vectors.txt"
        p.write_text("2 3\nfoo 1 2 3\nbar 0.5 0 -1\n")
        table = load_vector_table(p)
        assert table.dim == 3
        assert np.allclose(table.vectors["bar"], [0.5, 0, -1])

    def test_dimension_mismatch(self, tmp_path):
        p = tmp_path / "vectors.txt"
        p.write_text("1 3\nfoo 1 2\n")
        with pytest.raises(ValueError):
            load_vector_table(p)


EMO = {"furious": {"anger": 0.9}, "cheery": {"joy": 0.4}, "grin": {"joy": 0.6}}


class TestEmotion:
    def test_absent_lexicon_all_zero(self):
        out = emotion_scores(["furious"], None)
        assert out == {e: 0.0 for e in EMOTIONS}

    def test_single_term(self):
        out = emotion_scores(["furious"], EMO)
        assert out["anger"] == 0.9
        assert all(out[e] == 0.0 for e in EMOTIONS if e != "anger")

    def test_mean_within_emotion(self):
        out = emotion_scores(["cheery", "grin"], EMO)
        assert abs(out["joy"] - 0.5) < 1e-12
