"""Distributional reports: per-word retention, vocabulary buckets, listings."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from typing import Sequence

from wfpp.corpus_io import escape_tsv
from wfpp.errors import ConfigMismatch, SubsetViolation
from wfpp.frequency import FrequencyTable
from wfpp.kernel import discard_prob

DEFAULT_TOP_K = 300
DEFAULT_BUCKETS = (5, 100)


@dataclass(frozen=True)
class RetentionReport:
    """Per-word (count_before, count_after, retention_rate), head-truncated export."""

    per_word: dict[str, tuple[int, int, float]]
    top_k: int

    def head(self) -> list[tuple[str, int, int]]:
        """Top-k tokens by descending before-count (ties: token order)."""
        ranked = sorted(self.per_word.items(), key=lambda kv: (-kv[1][0], kv[0]))
        return [(tok, before, after) for tok, (before, after, _) in ranked[: self.top_k]]


@dataclass(frozen=True)
class VocabBucketReport:
    thresholds: tuple[int, ...]
    counts_before: dict[int, int]
    counts_after: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "counts_before": {str(k): v for k, v in self.counts_before.items()},
            "counts_after": {str(k): v for k, v in self.counts_after.items()},
        }


def _check_pair(before: FrequencyTable, after: FrequencyTable):
    if before.tokenizer_config_hash != after.tokenizer_config_hash:
        raise ConfigMismatch("before/after tables use different tokenizer configs")


def retention_report(
    before: FrequencyTable, after: FrequencyTable, top_k: int = DEFAULT_TOP_K
) -> RetentionReport:
    """How much of each word survived pruning; after must be a sub-corpus."""
    _check_pair(before, after)
    per_word: dict[str, tuple[int, int, float]] = {}
    for token, count_before in before.counts.items():
        count_after = after.counts.get(token, 0)
        if count_after > count_before:
            raise SubsetViolation(
                f"token {token!r}: after-count {count_after} exceeds before-count {count_before}"
            )
        per_word[token] = (count_before, count_after, count_after / count_before)
    extras = set(after.counts) - set(before.counts)
    if extras:
        raise SubsetViolation(f"tokens absent from the full corpus: {sorted(extras)[:5]}")
    return RetentionReport(per_word=per_word, top_k=top_k)


def write_distribution_csv(report: RetentionReport, path: str):
    """rank,token,count_before,count_after — plot-ready head of the distribution."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "token", "count_before", "count_after"])
        for rank, (token, count_before, count_after) in enumerate(report.head(), start=1):
            writer.writerow([rank, token, count_before, count_after])


def vocab_buckets(
    before: FrequencyTable,
    after: FrequencyTable,
    thresholds: Sequence[int] = DEFAULT_BUCKETS,
) -> VocabBucketReport:
    """Vocabulary sizes above each occurrence threshold, before and after."""
    _check_pair(before, after)
    thresholds = tuple(thresholds)
    counts_before = {
        theta: sum(1 for c in before.counts.values() if c > theta) for theta in thresholds
    }
    counts_after = {
        theta: sum(1 for c in after.counts.values() if c > theta) for theta in thresholds
    }
    return VocabBucketReport(thresholds, counts_before, counts_after)


def write_vocab_buckets(report: VocabBucketReport, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_dict(), fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def sample_word_listing(
    table: FrequencyTable, t: float, k: int, seed: int
) -> list[tuple[str, float]]:
    """k seeded-random (word, discard probability) pairs, highest P first."""
    vocab = sorted(table.counts)
    k = min(k, len(vocab))
    rng = random.Random(seed)
    words = rng.sample(vocab, k) if k else []
    rows = [(w, discard_prob(table.counts[w], table.total, t)) for w in words]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def sample_caption_listing(
    captions_with_scores: Sequence[tuple[str, float]], k: int, seed: int
) -> list[tuple[str, float]]:
    """k seeded-random (caption, score) pairs, highest score first."""
    k = min(k, len(captions_with_scores))
    rng = random.Random(seed)
    rows = rng.sample(list(captions_with_scores), k) if k else []
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def write_word_listing(rows: list[tuple[str, float]], path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("word\tP\n")
        for word, p in rows:
            fh.write(f"{escape_tsv(word)}\t{p:.4f}\n")


def write_caption_listing(rows: list[tuple[str, float]], path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("caption\tS\n")
        for caption, score in rows:
            fh.write(f"{escape_tsv(caption)}\t{score:.5f}\n")
