"""Per-word discard probabilities and per-caption joint discard scores."""

from __future__ import annotations

import itertools
import json
import math
import multiprocessing
from dataclasses import dataclass
from typing import Iterable, Iterator

from wfpp import kernel
from wfpp.corpus_io import PairRecord
from wfpp.errors import ConfigMismatch, DomainError, EmptyCaption, EmptyTable, FormatError
from wfpp.frequency import DEFAULT_BATCH, FrequencyTable
from wfpp.tokenizer import TokenizerConfig

SIDECAR_FORMAT_VERSION = 1
EMPTY_SENTINEL = "empty"


@dataclass(frozen=True)
class ScoringConfig:
    """Discard threshold and length-normalization switch."""

    t: float = 1e-7
    normalize_by_length: bool = True

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise DomainError(f"threshold t must be in (0, 1), got {self.t}")

    def to_dict(self) -> dict:
        return {"t": self.t, "normalize_by_length": self.normalize_by_length}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoringConfig":
        return cls(t=d.get("t", 1e-7), normalize_by_length=d.get("normalize_by_length", True))


@dataclass(frozen=True)
class ScoredRecord:
    """A record with its tokens, per-token discard probabilities and score."""

    record: PairRecord
    tokens: list[str]
    word_probs: list[float]
    score: float

    @property
    def n(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class ScoreEntry:
    """Lightweight sidecar row; score is None for empty captions."""

    index: int
    n: int
    score: float | None

    @property
    def is_empty(self) -> bool:
        return self.n == 0


def word_discard_prob(f: float, t: float) -> float:
    """P(w) = 1 - sqrt(t/f) when f > t, else exactly 1 (rare words are neutral)."""
    if not (0.0 <= f <= 1.0):
        raise DomainError(f"frequency must be in [0, 1], got {f}")
    if not (0.0 < t < 1.0):
        raise DomainError(f"threshold must be in (0, 1), got {t}")
    if f > t:
        return 1.0 - math.sqrt(t / f)
    return 1.0


def joint_score(word_probs: Iterable[float], normalize: bool) -> float:
    """Joint discard score from explicit per-word probabilities.

    Same log-domain path the kernel uses, so scores coming out of either
    route agree bitwise.
    """
    probs = list(word_probs)
    if not probs:
        raise EmptyCaption("cannot score an empty probability list")
    log_sum = 0.0
    for p in probs:
        if p < kernel.MIN_PROB:
            p = kernel.MIN_PROB
        log_sum += math.log(p)
    score = math.exp(log_sum)
    if normalize:
        score /= len(probs)
    return score


def _check_config(table: FrequencyTable, tokenizer: TokenizerConfig | None) -> TokenizerConfig:
    if tokenizer is None:
        return table.tokenizer_config
    if tokenizer.digest() != table.tokenizer_config_hash:
        raise ConfigMismatch("tokenizer config differs from the one the table was built with")
    return tokenizer


def score_text(
    caption: str,
    table: FrequencyTable,
    scoring: ScoringConfig = ScoringConfig(),
    tokenizer: TokenizerConfig | None = None,
) -> ScoredRecord:
    """Score one caption, keeping tokens and per-word probabilities."""
    tokenizer = _check_config(table, tokenizer)
    if table.is_empty():
        raise EmptyTable("cannot score against an empty frequency table")
    tokens = kernel.tokenize(caption, *tokenizer.kernel_args())
    if not tokens:
        raise EmptyCaption(f"caption tokenized to zero tokens: {caption!r}")
    probs = [
        kernel.discard_prob(table.counts.get(tok, 0), table.total, scoring.t)
        for tok in tokens
    ]
    score = kernel.score_tokens(tokens, table.counts, table.total, scoring.t,
                                scoring.normalize_by_length)
    record = PairRecord(index=0, image_ref="", caption=caption)
    return ScoredRecord(record=record, tokens=tokens, word_probs=probs, score=score)


def _score_batch(args):
    captions, counts, total, t, normalize, kernel_args = args
    return kernel.score_batch(captions, counts, total, t, normalize, *kernel_args)


def score_corpus(
    records: Iterable[PairRecord],
    table: FrequencyTable,
    scoring: ScoringConfig = ScoringConfig(),
    tokenizer: TokenizerConfig | None = None,
    workers: int = 1,
    batch_size: int = DEFAULT_BATCH,
) -> Iterator[ScoreEntry]:
    """Score a record stream in manifest order; deterministic for any worker count.

    Empty captions come out with n == 0 and score None rather than aborting
    the stream; pruning decides their fate.
    """
    tokenizer = _check_config(table, tokenizer)
    if table.is_empty():
        raise EmptyTable("cannot score against an empty frequency table")
    kernel_args = tokenizer.kernel_args()

    def batches():
        it = iter(records)
        while True:
            chunk = list(itertools.islice(it, batch_size))
            if not chunk:
                return
            captions = [r.caption for r in chunk]
            indices = [r.index for r in chunk]
            yield indices, (captions, table.counts, table.total, scoring.t,
                            scoring.normalize_by_length, kernel_args)

    def emit(indices, results):
        for index, (n, score) in zip(indices, results):
            yield ScoreEntry(index=index, n=n, score=None if n == 0 else score)

    if workers <= 1:
        for indices, args in batches():
            yield from emit(indices, _score_batch(args))
    else:
        with multiprocessing.Pool(workers) as pool:
            index_chunks = []
            # imap preserves submission order, so indices pair up positionally.
            def args_iter():
                for indices, args in batches():
                    index_chunks.append(indices)
                    yield args

            for results in pool.imap(_score_batch, args_iter()):
                yield from emit(index_chunks.pop(0), results)


def write_scores(entries: Iterable[ScoreEntry], path: str, scoring: ScoringConfig,
                 table: FrequencyTable) -> int:
    """Sidecar: JSON header line, then index<TAB>n<TAB>score rows.

    Scores printed with 17 significant digits so parsing them back is exact.
    """
    header = {
        "format_version": SIDECAR_FORMAT_VERSION,
        "scoring": scoring.to_dict(),
        "tokenizer_config_hash": table.tokenizer_config_hash,
    }
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False))
        fh.write("\n")
        for entry in entries:
            score = EMPTY_SENTINEL if entry.score is None else f"{entry.score:.17g}"
            fh.write(f"{entry.index}\t{entry.n}\t{score}\n")
            count += 1
    return count


def read_scores(path: str) -> tuple[dict, list[ScoreEntry]]:
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as e:
            raise FormatError(1, f"invalid sidecar header: {e.msg}") from e
        entries = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(lineno, "expected index<TAB>n<TAB>score")
            index, n, raw = int(parts[0]), int(parts[1]), parts[2]
            score = None if raw == EMPTY_SENTINEL else float(raw)
            entries.append(ScoreEntry(index=index, n=n, score=score))
    return header, entries
