"""Retention-subset selection: WFPP, second-half, random, length, metadata."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from wfpp.corpus_io import PairRecord
from wfpp.errors import (
    ConfigError,
    EmptyCorpus,
    EmptyEntryList,
    IndexOutOfRange,
)
from wfpp.scoring import ScoreEntry, ScoringConfig
from wfpp.tokenizer import TokenizerConfig, tokenize

STRATEGIES = ("wfpp", "wfpp_second_half", "random", "length", "metadata")


@dataclass(frozen=True)
class PruneConfig:
    strategy: str = "wfpp"
    fraction: float = 0.5
    seed: int = 0
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    metadata_entries: tuple[str, ...] | None = None
    per_entry_cap: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if not (0.0 < self.fraction <= 1.0):
            raise ConfigError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.strategy == "metadata":
            if not self.metadata_entries:
                raise EmptyEntryList("metadata strategy requires a non-empty entry list")
            if self.per_entry_cap is None or self.per_entry_cap <= 0:
                raise ConfigError("metadata strategy requires a positive per_entry_cap")


@dataclass(frozen=True)
class Selection:
    """Sorted kept indices plus an echo of how they were chosen."""

    kept_indices: list[int]
    strategy: str
    fraction: float
    seed: int | None = None
    total: int = 0
    undershoot: bool = False

    @property
    def kept(self) -> int:
        return len(self.kept_indices)

    @property
    def removed(self) -> int:
        return self.total - self.kept

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "fraction": self.fraction,
            "seed": self.seed,
            "total": self.total,
            "kept": self.kept,
            "removed": self.removed,
            "undershoot": self.undershoot,
            "kept_indices": self.kept_indices,
        }

    def write(self, path: str):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def read(cls, path: str) -> "Selection":
        with open(path, "r", encoding="utf-8") as fh:
            d = json.load(fh)
        return cls(
            kept_indices=list(d["kept_indices"]),
            strategy=d["strategy"],
            fraction=d["fraction"],
            seed=d.get("seed"),
            total=d["total"],
            undershoot=d.get("undershoot", False),
        )


def target_size(fraction: float, n: int) -> int:
    """floor(fraction * n), but at least 1 for a non-empty corpus."""
    return max(1, math.floor(fraction * n))


def _sort_key(entry: ScoreEntry) -> float:
    # Empty captions carry no supervision signal: treated as the highest
    # possible score, so wfpp discards them first and second-half keeps them.
    return math.inf if entry.score is None else entry.score


def prune_wfpp(scored: Sequence[ScoreEntry], fraction: float) -> Selection:
    """Keep the lowest-score fraction (infrequent words survive pruning)."""
    if not scored:
        raise EmptyCorpus("cannot prune an empty corpus")
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    k = target_size(fraction, len(scored))
    ordered = sorted(scored, key=lambda e: (_sort_key(e), e.index))
    kept = sorted(e.index for e in ordered[:k])
    return Selection(kept, "wfpp", fraction, total=len(scored))


def prune_wfpp_second_half(scored: Sequence[ScoreEntry], fraction: float) -> Selection:
    """Adversarial variant: keep the highest-score fraction."""
    if not scored:
        raise EmptyCorpus("cannot prune an empty corpus")
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    k = target_size(fraction, len(scored))
    ordered = sorted(scored, key=lambda e: (-_sort_key(e), e.index))
    kept = sorted(e.index for e in ordered[:k])
    return Selection(kept, "wfpp_second_half", fraction, total=len(scored))


def prune_random(n_records: int, fraction: float, seed: int) -> Selection:
    """Uniform sample without replacement; pure function of (n, fraction, seed)."""
    if n_records < 1:
        raise EmptyCorpus("cannot prune an empty corpus")
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    k = target_size(fraction, n_records)
    rng = random.Random(seed)
    kept = sorted(rng.sample(range(n_records), k))
    return Selection(kept, "random", fraction, seed=seed, total=n_records)


def prune_length(entries: Sequence[ScoreEntry], fraction: float) -> Selection:
    """Keep the records with the most tokens; ties go to the lower index."""
    if not entries:
        raise EmptyCorpus("cannot prune an empty corpus")
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    k = target_size(fraction, len(entries))
    ordered = sorted(entries, key=lambda e: (-e.n, e.index))
    kept = sorted(e.index for e in ordered[:k])
    return Selection(kept, "length", fraction, total=len(entries))


def prune_metadata(
    records: Iterable[PairRecord],
    entries: Sequence[str],
    per_entry_cap: int,
    seed: int,
    tokenizer: TokenizerConfig = TokenizerConfig(),
) -> Selection:
    """Simplified metadata balancing: keep up to per_entry_cap matches per entry.

    An entry matches a record when its tokenization occurs as a contiguous
    subsequence of the record's tokens. May keep fewer than fraction*N
    records; the undershoot flag is set instead of padding.
    """
    if not entries:
        raise EmptyEntryList("metadata strategy requires a non-empty entry list")
    entry_tokens = {e: tokenize(e, tokenizer) for e in entries}
    if any(not toks for toks in entry_tokens.values()):
        raise ConfigError("metadata entries must tokenize to at least one token")
    matches: dict[str, list[int]] = {e: [] for e in entries}
    total = 0
    for record in records:
        total += 1
        tokens = tokenize(record.caption, tokenizer)
        for entry, needle in entry_tokens.items():
            if _contains(tokens, needle):
                matches[entry].append(record.index)
    if total == 0:
        raise EmptyCorpus("cannot prune an empty corpus")
    kept: set[int] = set()
    for entry in entries:
        found = matches[entry]
        if len(found) <= per_entry_cap:
            kept.update(found)
        else:
            rng = random.Random(f"{seed}:{entry}")
            kept.update(rng.sample(found, per_entry_cap))
    return Selection(
        sorted(kept),
        "metadata",
        fraction=len(kept) / total if total else 0.0,
        seed=seed,
        total=total,
        undershoot=True,
    )


def _contains(tokens: list[str], needle: list[str]) -> bool:
    n, m = len(tokens), len(needle)
    if m > n:
        return False
    first = needle[0]
    for i in range(n - m + 1):
        if tokens[i] == first and tokens[i : i + m] == needle:
            return True
    return False


def apply_selection(records: Iterable[PairRecord], selection: Selection) -> Iterator[PairRecord]:
    """Emit exactly the kept records in original order."""
    wanted = set(selection.kept_indices)
    seen = 0
    for record in records:
        if record.index in wanted:
            wanted.discard(record.index)
            yield record
        seen += 1
    if wanted:
        missing = sorted(wanted)[:5]
        raise IndexOutOfRange(
            f"selection references indices missing from the stream: {missing}..."
        )


def prune(
    scored: Sequence[ScoreEntry],
    config: PruneConfig,
    records: Iterable[PairRecord] | None = None,
    tokenizer: TokenizerConfig = TokenizerConfig(),
) -> Selection:
    """Dispatch on strategy. `records` is required for the metadata strategy."""
    if config.strategy == "wfpp":
        return prune_wfpp(scored, config.fraction)
    if config.strategy == "wfpp_second_half":
        return prune_wfpp_second_half(scored, config.fraction)
    if config.strategy == "random":
        return prune_random(len(scored), config.fraction, config.seed)
    if config.strategy == "length":
        return prune_length(scored, config.fraction)
    if records is None:
        raise ConfigError("metadata strategy requires the record stream")
    return prune_metadata(
        records, config.metadata_entries or (), config.per_entry_cap or 1,
        config.seed, tokenizer,
    )
