"""Corpus-wide word-frequency tables: streaming, parallel-mergeable counting."""

from __future__ import annotations

import itertools
import json
import multiprocessing
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from wfpp import kernel
from wfpp.corpus_io import PairRecord
from wfpp.errors import ConfigMismatch, EmptyTable, FormatError
from wfpp.tokenizer import TokenizerConfig

TABLE_FORMAT_VERSION = 1
DEFAULT_BATCH = 8192


@dataclass(frozen=True)
class FrequencyTable:
    """Exact token counts for one corpus; frequencies derived lazily.

    Immutable after construction; mergeable with tables built under the
    same tokenizer config.
    """

    counts: dict[str, int]
    total: int
    tokenizer_config: TokenizerConfig = field(default_factory=TokenizerConfig)
    corpus_id: str = "corpus"

    @property
    def tokenizer_config_hash(self) -> str:
        return self.tokenizer_config.digest()

    @property
    def vocabulary_size(self) -> int:
        return len(self.counts)

    def is_empty(self) -> bool:
        return self.total == 0

    def frequency(self, token: str) -> float:
        """f(token) = count/total; 0.0 for unseen tokens."""
        if self.total == 0:
            raise EmptyTable("frequency lookup against an empty table")
        return self.counts.get(token, 0) / self.total

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        """Element-wise sum of counts; associative and commutative."""
        if self.tokenizer_config_hash != other.tokenizer_config_hash:
            raise ConfigMismatch(
                "cannot merge tables built with different tokenizer configs"
            )
        merged = dict(self.counts)
        for token, count in other.counts.items():
            merged[token] = merged.get(token, 0) + count
        return FrequencyTable(
            counts=merged,
            total=self.total + other.total,
            tokenizer_config=self.tokenizer_config,
            corpus_id=self.corpus_id,
        )


def _count_batch(args):
    captions, kernel_args = args
    return kernel.count_tokens(captions, *kernel_args)


def _caption_batches(records: Iterable[PairRecord], batch_size: int) -> Iterator[list[str]]:
    it = (r.caption for r in records)
    while True:
        batch = list(itertools.islice(it, batch_size))
        if not batch:
            return
        yield batch


def count_corpus(
    records: Iterable[PairRecord],
    config: TokenizerConfig = TokenizerConfig(),
    workers: int = 1,
    corpus_id: str = "corpus",
    batch_size: int = DEFAULT_BATCH,
) -> FrequencyTable:
    """One streaming pass over the corpus; deterministic for any worker count.

    Counting is embarrassingly parallel over caption batches; the integer
    merge is commutative, so out-of-order completion cannot change the result.
    """
    kernel_args = config.kernel_args()
    counts: dict[str, int] = {}
    total = 0
    batches = _caption_batches(records, batch_size)
    if workers <= 1:
        partials = (_count_batch((b, kernel_args)) for b in batches)
        for part, subtotal in partials:
            total += subtotal
            for token, count in part.items():
                counts[token] = counts.get(token, 0) + count
    else:
        with multiprocessing.Pool(workers) as pool:
            jobs = ((b, kernel_args) for b in batches)
            for part, subtotal in pool.imap_unordered(_count_batch, jobs):
                total += subtotal
                for token, count in part.items():
                    counts[token] = counts.get(token, 0) + count
    return FrequencyTable(
        counts=counts, total=total, tokenizer_config=config, corpus_id=corpus_id
    )


def save_table(table: FrequencyTable, path: str):
    """Serialize: one JSON header line, then token<TAB>count sorted
    lexicographically (byte-exact reproducibility)."""
    header = {
        "format_version": TABLE_FORMAT_VERSION,
        "corpus_id": table.corpus_id,
        "total": table.total,
        "tokenizer": table.tokenizer_config.to_dict(),
        "tokenizer_config_hash": table.tokenizer_config_hash,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False))
        fh.write("\n")
        for token in sorted(table.counts):
            fh.write(f"{token}\t{table.counts[token]}\n")


def load_table(path: str) -> FrequencyTable:
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as e:
            raise FormatError(1, f"invalid table header: {e.msg}") from e
        config = TokenizerConfig.from_dict(header["tokenizer"])
        counts: dict[str, int] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            token, _, count = line.rpartition("\t")
            if not token:
                raise FormatError(lineno, "expected token<TAB>count")
            counts[token] = int(count)
    table = FrequencyTable(
        counts=counts,
        total=header["total"],
        tokenizer_config=config,
        corpus_id=header.get("corpus_id", "corpus"),
    )
    if table.total != sum(counts.values()):
        raise FormatError(1, "header total does not match sum of counts")
    return table
