"""Sentiment, emotionality and complexity scoring plus the 6x6 matrices.

Golden values were computed once against the shipped wordlist and the
reference routines in oracles.py, then frozen here.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commstab.events import EMAIL, MessageEvent
from commstab.text_metrics import (
    SEMANTIC_VARS,
    ConstantScorer,
    LexiconScorer,
    author_semantic_values,
    build_corpus_model,
    build_token_table,
    complexity,
    default_scorer,
    emotionality,
    load_lexicon,
    message_text,
    sentiment,
    subject_body_correlation,
    tokenize,
)

import oracles
from conftest import T0

GOLDEN_SENTENCE = ("The new build looks wonderful and everyone seemed happy, "
                   "except one slow test.")
GOLDEN_SENTIMENT = 2.0 / 3.0


def email(mid, ts, sender, subject, body):
    return MessageEvent(message_id=mid, timestamp=ts, sender=sender,
                        recipients=("x",), channel=EMAIL,
                        subject_text=subject, body_text=body)


class TestTokenize:
    def test_lowercase_and_punctuation(self):
        assert tokenize("Hello, World!") == ["hello", "world"]

    def test_underscores_split(self):
        assert tokenize("snake_case_name") == ["snake", "case", "name"]

    def test_digits_kept(self):
        assert tokenize("v2 beta3") == ["v2", "beta3"]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("... !!") == []


class TestLexiconScorer:
    def test_empty_text_neutral(self):
        assert sentiment("") == 0.5

    def test_no_hits_neutral(self):
        assert sentiment("the quarterly meeting moved to tuesday") == 0.5

    def test_all_positive_is_one(self):
        scorer = LexiconScorer(frozenset({"good", "fine"}), frozenset())
        assert scorer("good fine good") == 1.0

    def test_balanced_hits_neutral(self):
        assert sentiment("great but broken") == 0.5

    def test_golden_sentence_frozen(self):
        assert sentiment(GOLDEN_SENTENCE) == pytest.approx(GOLDEN_SENTIMENT)

    def test_scores_stay_in_unit_interval(self):
        scorer = default_scorer()
        for text in (GOLDEN_SENTENCE, "awful terrible", "ok", ""):
            assert 0.0 <= scorer(text) <= 1.0


class TestLoadLexicon:
    def test_default_wordlist(self):
        scorer = load_lexicon(None)
        assert scorer.name == "lexicon:default"
        assert "wonderful" in scorer.positive and "happy" in scorer.positive
        assert "slow" in scorer.negative and "broken" in scorer.negative
        assert not (scorer.positive & scorer.negative)
        assert len(scorer.positive) >= 50 and len(scorer.negative) >= 50

    def test_custom_file(self, tmp_path):
        p = tmp_path / "tiny.lex"
        p.write_text("# comment\n[positive]\nUp\n\n[negative]\ndown\n",
                     encoding="utf-8")
        scorer = load_lexicon(str(p))
        assert scorer.positive == frozenset({"up"})
        assert scorer.negative == frozenset({"down"})
        assert scorer.name == f"lexicon:{p}"

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "bad.lex"
        p.write_text("[sarcastic]\nyeah\n", encoding="utf-8")
        with pytest.raises(ValueError, match="unknown lexicon section"):
            load_lexicon(str(p))

    def test_token_before_section_rejected(self, tmp_path):
        p = tmp_path / "bad.lex"
        p.write_text("lonely\n[positive]\n", encoding="utf-8")
        with pytest.raises(ValueError, match="before any section"):
            load_lexicon(str(p))

    def test_multiword_line_rejected(self, tmp_path):
        p = tmp_path / "bad.lex"
        p.write_text("[positive]\ntwo words\n", encoding="utf-8")
        with pytest.raises(ValueError, match="bad lexicon entry"):
            load_lexicon(str(p))


class TestEmotionality:
    def test_uniformly_neutral(self):
        assert emotionality([0.5, 0.5, 0.5]) == 0.0

    def test_uniformly_extreme(self):
        assert emotionality([0.0, 1.0]) == 1.0

    def test_mixed(self):
        assert emotionality([0.5, 1.0]) == 0.5

    def test_empty_undefined(self):
        assert emotionality([]) is None

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=30))
    @settings(max_examples=60, deadline=None)
    def test_bounds(self, scores):
        value = emotionality(scores)
        assert 0.0 <= value <= 1.0


class TestComplexity:
    def test_single_type_corpus_zero_bits(self):
        model = build_corpus_model(["a a a a"])
        assert complexity("a a a a", model) == 0.0

    def test_uniform_corpus_log2_vocab(self):
        vocab = [f"w{i:02d}" for i in range(16)]
        model = build_corpus_model([" ".join(vocab)] * 3)
        assert complexity("w00", model) == pytest.approx(4.0)
        assert complexity("w00 w01 w02", model) == pytest.approx(4.0)

    def test_rare_scores_higher_than_common(self):
        model = build_corpus_model(["common " * 99 + "rare"])
        assert complexity("rare", model) > complexity("common", model)

    def test_unseen_token_scoreable(self):
        model = build_corpus_model(["alpha beta"])
        value = complexity("gamma", model)
        assert value == pytest.approx(-math.log2(1 / (2 + 2)))

    def test_empty_text_undefined(self):
        model = build_corpus_model(["something"])
        assert complexity("", model) is None
        assert complexity("!!!", model) is None

    def test_empty_model_undefined(self):
        assert complexity("abc", build_corpus_model([])) is None

    def test_matches_direct_formula(self):
        corpus = ["the cat sat", "the dog sat", "the cat ran far"]
        model = build_corpus_model(corpus)
        corpus_tokens = [t for doc in corpus for t in tokenize(doc)]
        for text in ("the cat", "far away", "dog dog dog"):
            assert complexity(text, model) == pytest.approx(
                oracles.surprisal_direct(tokenize(text), corpus_tokens),
                abs=1e-12)

    def test_duplication_invariance_balanced_corpus(self):
        vocab = [f"t{i:03d}" for i in range(100)]
        doc = " ".join(v for v in vocab for _ in range(100))
        base = build_corpus_model([doc])
        doubled = build_corpus_model([doc, doc])
        assert base.total >= 10_000
        probe = " ".join(vocab[:37])
        assert abs(complexity(probe, base) - complexity(probe, doubled)) <= 1e-6

    def test_duplication_error_shrinks_with_corpus_size(self):
        rng = np.random.default_rng(7)
        vocab = [f"t{i:03d}" for i in range(150)]
        weights = 1.0 / np.arange(1, 151)
        weights /= weights.sum()
        probe = " ".join(rng.choice(vocab, size=60, p=weights))
        diffs = []
        for size in (2_000, 20_000, 200_000):
            doc = " ".join(rng.choice(vocab, size=size, p=weights))
            m1 = build_corpus_model([doc])
            m2 = build_corpus_model([doc, doc])
            diffs.append(abs(complexity(probe, m1) - complexity(probe, m2)))
        assert diffs[0] > diffs[1] > diffs[2]

    @given(st.lists(st.sampled_from(["aa", "bb", "cc", "dd"]),
                    min_size=1, max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_nonnegative(self, toks):
        model = build_corpus_model([" ".join(toks)])
        assert complexity(" ".join(toks[:5]), model) >= 0.0


class TestAuthorAggregation:
    def _events(self):
        return [
            email("m1", T0, "ann", "status wonderful", "happy happy team"),
            email("m2", T0 + 1, "ann", "plain note", "nothing special here"),
            email("m3", T0 + 2, "bob", "bad news", "broken slow awful"),
        ]

    def test_author_means_exact(self):
        evs = self._events()
        scorer = default_scorer()
        table = author_semantic_values(evs, scorer)
        per_msg = [scorer(message_text(e)) for e in evs]
        assert table["ann"].sentiment == pytest.approx((per_msg[0] + per_msg[1]) / 2)
        assert table["bob"].sentiment == pytest.approx(per_msg[2])
        assert table["ann"].n_messages == 2
        emos = [2 * abs(v - 0.5) for v in per_msg[:2]]
        assert table["ann"].emotionality == pytest.approx(sum(emos) / 2)
        mean = sum(emos) / 2
        assert table["ann"].emotionality_var == pytest.approx(
            sum((e - mean) ** 2 for e in emos) / 2)

    def test_constant_scorer_zeroes_emotionality(self):
        table = author_semantic_values(self._events(), ConstantScorer(0.5))
        assert all(rec.emotionality == 0.0 for rec in table.values())

    def test_complexity_model_built_from_given_events(self):
        evs = self._events()
        model = build_corpus_model(message_text(e) for e in evs)
        table = author_semantic_values(evs, default_scorer())
        want = [complexity(message_text(e), model) for e in evs]
        assert table["ann"].complexity == pytest.approx((want[0] + want[1]) / 2)
        assert table["bob"].complexity == pytest.approx(want[2])

    def test_token_table_route_matches_slow_route(self):
        evs = self._events()
        scorer = default_scorer()
        slow = author_semantic_values(evs, scorer)
        fast = author_semantic_values(evs, scorer,
                                      token_table=build_token_table(evs, scorer))
        assert set(slow) == set(fast)
        for node in slow:
            assert fast[node].sentiment == pytest.approx(slow[node].sentiment)
            assert fast[node].emotionality == pytest.approx(slow[node].emotionality)
            assert fast[node].complexity == pytest.approx(slow[node].complexity)

    def test_token_table_subset_scores_against_subset_corpus(self):
        evs = self._events()
        scorer = default_scorer()
        table = build_token_table(evs, scorer)
        subset = evs[:2]
        fast = author_semantic_values(subset, scorer, token_table=table)
        slow = author_semantic_values(subset, scorer)
        assert fast["ann"].complexity == pytest.approx(slow["ann"].complexity)

    def test_empty_events(self):
        assert author_semantic_values([], default_scorer()) == {}


class TestSubjectBodyCorrelation:
    def test_identical_subject_and_body_diagonal_pairs(self):
        texts = ["wonderful table", "broken night", "plain words here",
                 "happy go lucky", "slow tuesday"]
        evs = [email(f"m{i}", T0 + i, f"a{i % 2}", t, t)
               for i, t in enumerate(texts)]
        res = subject_body_correlation(evs, min_author_msgs=1)
        m = res.email_level
        vars_ = list(SEMANTIC_VARS)
        for var in ("sentiment", "complexity", "emotionality"):
            i = vars_.index(f"body_{var}")
            j = vars_.index(f"subject_{var}")
            if m.r[i][j] is not None:
                assert m.r[i][j] == pytest.approx(1.0)

    def test_matrix_symmetry_and_unit_diagonal(self):
        rng = np.random.default_rng(3)
        words = ["wonderful", "broken", "table", "night", "carrot", "slow",
                 "happy", "graph"]
        evs = []
        for i in range(24):
            subj = " ".join(rng.choice(words, size=3))
            body = " ".join(rng.choice(words, size=8))
            evs.append(email(f"m{i:02d}", T0 + i, f"a{i % 4}", subj, body))
        m = subject_body_correlation(evs).email_level
        k = len(SEMANTIC_VARS)
        for i in range(k):
            if m.r[i][i] is not None:
                assert m.r[i][i] == pytest.approx(1.0)
            for j in range(k):
                assert m.r[i][j] == m.r[j][i]
                assert m.n_pairs[i][j] == m.n_pairs[j][i]
        assert m.n_rows == 24

    def test_too_few_messages_flagged(self):
        evs = [email("m1", T0, "a", "s", "b"), email("m2", T0 + 1, "a", "s", "b")]
        flags = []
        res = subject_body_correlation(evs, flags=flags)
        assert res.email_level is None and res.author_level is None
        assert flags == ["fewer than 3 messages with both subject and body"]

    def test_subjectless_messages_do_not_qualify(self):
        evs = [email(f"m{i}", T0 + i, "a", None, "body text") for i in range(5)]
        flags = []
        res = subject_body_correlation(evs, flags=flags)
        assert res.email_level is None
        assert flags == ["fewer than 3 messages with both subject and body"]

    def test_too_few_qualifying_authors_flagged(self):
        evs = [email(f"m{i}", T0 + i, "solo", "wonderful day", "broken night")
               for i in range(6)]
        flags = []
        res = subject_body_correlation(evs, min_author_msgs=3, flags=flags)
        assert res.email_level is not None
        assert res.author_level is None
        assert flags == ["fewer than 3 authors meet the message minimum"]

    def test_author_minimum_filters_rows(self):
        evs = []
        for a in range(4):
            for i in range(3 if a < 3 else 1):
                evs.append(email(f"m{a}{i}", T0 + a * 10 + i, f"a{a}",
                                 "wonderful plan", "slow broken start"))
        res = subject_body_correlation(evs, min_author_msgs=3)
        assert res.author_level is not None
        assert res.author_level.n_rows == 3

    def test_author_style_beats_email_level(self):
        rng = np.random.default_rng(11)
        pos = ["wonderful", "happy", "great", "good"]
        neg = ["broken", "slow", "awful", "bad"]
        filler = [f"f{i:02d}" for i in range(40)]
        evs = []
        mid = 0
        for a in range(12):
            bias = rng.uniform(0, 1)
            for i in range(8):
                def _line(n_tokens):
                    toks = list(rng.choice(filler, size=n_tokens))
                    for _ in range(2):
                        pool = pos if rng.uniform(0, 1) < bias else neg
                        toks.append(str(rng.choice(pool)))
                    rng.shuffle(toks)
                    return " ".join(toks)
                evs.append(email(f"m{mid:03d}", T0 + mid, f"a{a:02d}",
                                 _line(3), _line(12)))
                mid += 1
        res = subject_body_correlation(evs, min_author_msgs=3)
        i = SEMANTIC_VARS.index("body_sentiment")
        j = SEMANTIC_VARS.index("subject_sentiment")
        assert res.author_level.r[i][j] > res.email_level.r[i][j]
