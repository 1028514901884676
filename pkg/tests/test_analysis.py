import json
from collections import Counter

import pytest

from conftest import as_records, synth_captions
from wfpp.analysis import (
    retention_report,
    sample_caption_listing,
    sample_word_listing,
    vocab_buckets,
    write_caption_listing,
    write_distribution_csv,
    write_vocab_buckets,
    write_word_listing,
)
from wfpp.errors import ConfigMismatch, SubsetViolation
from wfpp.frequency import FrequencyTable, count_corpus
from wfpp.pruning import apply_selection, prune_wfpp
from wfpp.scoring import score_corpus, word_discard_prob
from wfpp.tokenizer import TokenizerConfig, tokenize


CONFIG = TokenizerConfig()


def table(counts):
    return FrequencyTable(dict(counts), sum(counts.values()), CONFIG)


class TestRetention:
    def test_simple_rate(self):
        report = retention_report(table({"a": 10}), table({"a": 4}))
        assert report.per_word["a"] == (10, 4, 0.4)

    def test_identity_pruning(self):
        t = table({"a": 3, "b": 1})
        report = retention_report(t, t)
        assert all(rate == 1.0 for _, _, rate in report.per_word.values())

    def test_subset_violation(self):
        with pytest.raises(SubsetViolation):
            retention_report(table({"a": 2}), table({"a": 3}))
        with pytest.raises(SubsetViolation):
            retention_report(table({"a": 2}), table({"a": 1, "b": 1}))

    def test_config_mismatch(self):
        before = table({"a": 2})
        after = FrequencyTable({"a": 1}, 1, TokenizerConfig(lowercase=False))
        with pytest.raises(ConfigMismatch):
            retention_report(before, after)

    def test_rates_in_unit_interval(self):
        captions = synth_captions(300, seed=8)
        before = count_corpus(as_records(captions))
        entries = list(score_corpus(as_records(captions), before))
        sel = prune_wfpp(entries, 0.5)
        kept = list(apply_selection(as_records(captions), sel))
        after = count_corpus(kept)
        report = retention_report(before, after)
        assert all(0.0 <= rate <= 1.0 for _, _, rate in report.per_word.values())

    def test_head_ordering_and_truncation(self):
        report = retention_report(
            table({"a": 5, "b": 9, "c": 1}), table({"a": 2, "b": 3, "c": 1}), top_k=2
        )
        assert report.head() == [("b", 9, 3), ("a", 5, 2)]


class TestDistributionCsv:
    def test_format(self, tmp_path):
        report = retention_report(table({"a": 5, ",": 3}), table({"a": 2, ",": 3}))
        path = tmp_path / "distribution.csv"
        write_distribution_csv(report, str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "rank,token,count_before,count_after"
        assert lines[1] == "1,a,5,2"
        assert lines[2] == '2,",",3,3'  # csv-quoted comma token


class TestVocabBuckets:
    def test_threshold_counting(self):
        report = vocab_buckets(table({"a": 6, "b": 3}), table({"a": 6, "b": 3}), [5])
        assert report.counts_before[5] == 1
        assert report.counts_after[5] == 1

    def test_identity(self):
        t = table({"a": 200, "b": 50, "c": 3})
        report = vocab_buckets(t, t, [5, 100])
        assert report.counts_before == report.counts_after

    def test_monotone_in_threshold(self):
        t = table({f"w{i}": i for i in range(1, 200)})
        report = vocab_buckets(t, t, [5, 100])
        assert report.counts_before[100] <= report.counts_before[5]

    def test_brute_force_recount(self, tmp_path):
        captions = synth_captions(400, seed=13)
        before = count_corpus(as_records(captions))
        entries = list(score_corpus(as_records(captions), before))
        kept = list(apply_selection(as_records(captions), prune_wfpp(entries, 0.5)))
        after = count_corpus(kept)
        report = vocab_buckets(before, after, [5, 100])
        recount = Counter()
        for r in kept:
            recount.update(tokenize(r.caption))
        for theta in (5, 100):
            assert report.counts_after[theta] == sum(
                1 for c in recount.values() if c > theta
            )

    def test_json_output(self, tmp_path):
        report = vocab_buckets(table({"a": 6}), table({"a": 6}), [5])
        path = tmp_path / "vocab_buckets.json"
        write_vocab_buckets(report, str(path))
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["counts_before"]["5"] == 1


class TestListings:
    def test_empty_listing(self):
        assert sample_word_listing(table({"a": 1}), 1e-7, 0, seed=0) == []
        assert sample_caption_listing([], 0, seed=0) == []

    def test_seed_determinism(self):
        t = table({f"w{i}": i + 1 for i in range(50)})
        assert sample_word_listing(t, 1e-7, 10, seed=3) == sample_word_listing(
            t, 1e-7, 10, seed=3
        )

    def test_listed_probabilities_recompute(self):
        t = table({f"w{i}": i + 1 for i in range(50)})
        for word, p in sample_word_listing(t, 1e-3, 20, seed=5):
            assert p == word_discard_prob(t.frequency(word), 1e-3)

    def test_tsv_outputs(self, tmp_path):
        t = table({"a": 9, "b": 1})
        write_word_listing(sample_word_listing(t, 1e-3, 2, seed=0),
                           str(tmp_path / "words.tsv"))
        write_caption_listing(sample_caption_listing([("a dog", 0.2)], 1, seed=0),
                              str(tmp_path / "caps.tsv"))
        words = (tmp_path / "words.tsv").read_text(encoding="utf-8").splitlines()
        caps = (tmp_path / "caps.tsv").read_text(encoding="utf-8").splitlines()
        assert words[0] == "word\tP"
        assert caps[1] == "a dog\t0.20000"


def test_wfpp_flattens_frequency_ratio():
    # Kept subset should have a lower max/median token-frequency ratio;
    # only meaningful on a corpus with a power-law head.
    from conftest import zipf_captions

    captions = zipf_captions(20000, seed=99, vocab_size=2000)
    before = count_corpus(as_records(captions))
    entries = list(score_corpus(as_records(captions), before))
    kept = list(apply_selection(as_records(captions), prune_wfpp(entries, 0.5)))
    after = count_corpus(kept)

    def ratio(t):
        counts = sorted(t.counts.values())
        return counts[-1] / counts[len(counts) // 2]

    assert ratio(after) <= ratio(before)
