import math
from collections import Counter

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import as_records, synth_captions
from wfpp.errors import ConfigMismatch, DomainError, EmptyCaption, EmptyTable
from wfpp.frequency import FrequencyTable, count_corpus
from wfpp.scoring import (
    ScoringConfig,
    joint_score,
    read_scores,
    score_corpus,
    score_text,
    word_discard_prob,
    write_scores,
)
from wfpp.tokenizer import TokenizerConfig, tokenize

T = 1e-7


class TestWordDiscardProb:
    def test_analytic_quarter(self):
        # t/f = 1/4 exactly, so P = 1 - 1/2 exactly.
        assert word_discard_prob(4e-7, T) == 0.5

    def test_boundary_f_equals_t(self):
        assert word_discard_prob(T, T) == 1.0

    def test_unseen_token(self):
        assert word_discard_prob(0.0, T) == 1.0

    def test_high_frequency_against_mpmath(self):
        # Independent arbitrary-precision evaluation of 1 - sqrt(t/f).
        with mpmath.workdps(50):
            expected = float(1 - mpmath.sqrt(mpmath.mpf(T) / mpmath.mpf(0.9)))
        assert word_discard_prob(0.9, T) == pytest.approx(expected, rel=1e-15)
        assert word_discard_prob(0.9, T) == pytest.approx(0.999667, abs=1e-6)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            word_discard_prob(-0.1, T)
        with pytest.raises(DomainError):
            word_discard_prob(1.1, T)
        with pytest.raises(DomainError):
            word_discard_prob(0.5, 0.0)
        with pytest.raises(DomainError):
            word_discard_prob(0.5, 1.0)

    @given(
        st.floats(min_value=1e-6, max_value=1.0),
        st.floats(min_value=1e-6, max_value=1.0),
    )
    def test_monotone_in_frequency(self, f1, f2):
        if f1 == f2:
            return
        lo, hi = sorted((f1, f2))
        assert word_discard_prob(hi, T) > word_discard_prob(lo, T)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_range(self, f):
        p = word_discard_prob(f, T)
        assert 0.0 < p <= 1.0

    def test_threshold_monotonicity(self):
        for f in (1e-5, 1e-3, 0.1, 0.9):
            assert word_discard_prob(f, 1e-6) <= word_discard_prob(f, 1e-7)


class TestJointScore:
    def test_table1_barcode_row(self):
        assert joint_score([0.9980, 0.9861, 0.9978, 0.8342], True) == pytest.approx(
            0.20479, abs=5e-5
        )

    def test_table1_dog_row(self):
        assert joint_score([0.9980, 0.9861, 0.9978, 0.9878], True) == pytest.approx(
            0.24249, abs=5e-5
        )

    def test_empty_rejected(self):
        with pytest.raises(EmptyCaption):
            joint_score([], True)

    @given(st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=30))
    def test_normalized_is_unnormalized_over_n(self, probs):
        # Same rounding path: the normalized score is the product divided by n.
        assert joint_score(probs, True) == joint_score(probs, False) / len(probs)

    @given(st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=30))
    def test_ranges(self, probs):
        n = len(probs)
        assert 0.0 < joint_score(probs, False) <= 1.0
        assert 0.0 < joint_score(probs, True) <= 1.0 / n


@pytest.fixture(scope="module")
def corpus_table():
    return count_corpus(as_records(synth_captions(300, seed=21)))


class TestScoreText:
    def test_fields_align(self, corpus_table):
        scored = score_text("a dog on the beach", corpus_table)
        assert len(scored.tokens) == len(scored.word_probs) == scored.n == 5

    def test_score_matches_probs(self, corpus_table):
        scored = score_text("a dog on the beach", corpus_table)
        assert scored.score == joint_score(scored.word_probs, True)

    def test_single_rare_token_scores_one(self):
        # One caption with one very frequent filler so the target is rare enough.
        table = count_corpus(as_records(["x " * 100 for _ in range(100)] + ["qq"]))
        scored = score_text("qq", table, ScoringConfig(t=1e-3))
        assert scored.word_probs == [1.0]
        assert scored.score == 1.0

    def test_unseen_tokens_are_neutral(self, corpus_table):
        base = score_text("a dog", corpus_table, ScoringConfig(normalize_by_length=False))
        extended = score_text(
            "a dog zzzunseen", corpus_table, ScoringConfig(normalize_by_length=False)
        )
        assert extended.score == base.score

    def test_empty_caption_raises(self, corpus_table):
        with pytest.raises(EmptyCaption):
            score_text("   ", corpus_table)

    def test_empty_table_raises(self):
        with pytest.raises(EmptyTable):
            score_text("a dog", count_corpus(as_records([])))

    def test_config_mismatch(self, corpus_table):
        with pytest.raises(ConfigMismatch):
            score_text("a dog", corpus_table, tokenizer=TokenizerConfig(lowercase=False))

    def test_more_frequent_replacement_raises_score(self, corpus_table):
        counts = Counter(corpus_table.counts)
        frequent, rare = counts.most_common()[0][0], counts.most_common()[-1][0]
        low = score_text(f"picture of {rare}", corpus_table)
        high = score_text(f"picture of {frequent}", corpus_table)
        assert high.score > low.score


def brute_force_score(caption, captions, t, normalize):
    """Direct evaluation of frequency, per-word probability and joint score."""
    counts = Counter()
    for c in captions:
        counts.update(tokenize(c))
    total = sum(counts.values())
    tokens = tokenize(caption)
    if not tokens:
        return None
    product = 1.0
    for tok in tokens:
        f = counts[tok] / total
        product *= (1.0 - math.sqrt(t / f)) if f > t else 1.0
    return product / len(tokens) if normalize else product


class TestScoreCorpus:
    def test_identical_captions_identical_scores(self, corpus_table):
        records = as_records(["a dog", "a dog"])
        entries = list(score_corpus(records, corpus_table))
        assert entries[0].score == entries[1].score

    def test_ordering_matches_table1_story(self):
        # Rarer final word => lower joint score => kept by wfpp.
        captions = ["a picture of barcode"] + ["a picture of dog"] * 50
        table = count_corpus(as_records(captions))
        entries = list(score_corpus(as_records(captions[:2]), table, ScoringConfig(t=1e-3)))
        assert entries[0].score < entries[1].score

    def test_brute_force_oracle(self):
        captions = synth_captions(100, seed=33)
        table = count_corpus(as_records(captions))
        entries = list(score_corpus(as_records(captions), table))
        for caption, entry in zip(captions, entries):
            expected = brute_force_score(caption, captions, 1e-7, True)
            assert entry.score == pytest.approx(expected, rel=1e-12)

    def test_empty_captions_get_sentinel(self, corpus_table):
        records = as_records(["a dog", "", "a cat"])
        entries = list(score_corpus(records, corpus_table))
        assert [e.is_empty for e in entries] == [False, True, False]
        assert entries[1].score is None

    def test_worker_counts_agree(self, corpus_table):
        records = as_records(synth_captions(500, seed=44))
        seq = list(score_corpus(records, corpus_table, workers=1))
        par = list(score_corpus(records, corpus_table, workers=4, batch_size=32))
        assert seq == par

    def test_rare_word_neutrality_on_corpus(self):
        captions = synth_captions(50, seed=55)
        table = count_corpus(as_records(captions + ["zzzrare"]))
        cfg = ScoringConfig(t=0.5, normalize_by_length=False)
        with_rare = score_text(captions[0] + " zzzrare", table, cfg)
        without = score_text(captions[0], table, cfg)
        assert with_rare.score == without.score


class TestSidecar:
    def test_round_trip_exact(self, tmp_path, corpus_table):
        records = as_records(synth_captions(80, seed=66) + [""])
        cfg = ScoringConfig()
        entries = list(score_corpus(records, corpus_table, cfg))
        path = tmp_path / "scores.tsv"
        assert write_scores(entries, str(path), cfg, corpus_table) == len(entries)
        header, back = read_scores(str(path))
        assert back == entries
        assert header["scoring"]["t"] == cfg.t
        assert header["tokenizer_config_hash"] == corpus_table.tokenizer_config_hash
