"""Command-line interface: count, score, prune, analyze, and composite run."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from wfpp import __version__, analysis, corpus_io, pruning, scoring
from wfpp.errors import (
    ConfigError,
    DomainError,
    EmptyEntryList,
    WfppError,
)
from wfpp.frequency import count_corpus, load_table, save_table
from wfpp.pruning import PruneConfig, Selection, apply_selection
from wfpp.scoring import ScoringConfig, read_scores, score_corpus, write_scores
from wfpp.tokenizer import TokenizerConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _progress(msg: str):
    print(msg, file=sys.stderr, flush=True)


def _summary(stage: str, input_records: int, output_records: int, started: float):
    print(
        json.dumps(
            {
                "stage": stage,
                "input_records": input_records,
                "output_records": output_records,
                "wall_seconds": round(time.monotonic() - started, 3),
            }
        ),
        flush=True,
    )


def _tokenizer_from_args(args) -> TokenizerConfig:
    return TokenizerConfig(
        lowercase=not args.no_lowercase,
        split_punctuation=not args.no_split_punctuation,
        max_tokens=args.max_tokens,
        placeholder_atoms=tuple(args.placeholder_atom or ()),
    )


def _add_tokenizer_flags(p: argparse.ArgumentParser):
    p.add_argument("--no-lowercase", action="store_true",
                   help="keep caption case instead of lowercasing")
    p.add_argument("--no-split-punctuation", action="store_true",
                   help="split on whitespace only")
    p.add_argument("--max-tokens", type=int, default=None,
                   help="truncate captions to this many tokens")
    p.add_argument("--placeholder-atom", action="append", metavar="LITERAL",
                   help="literal string kept as a single token (repeatable)")


def _add_input_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="manifest path")
    p.add_argument("--format", choices=corpus_io.FORMATS, default="jsonl")


def cmd_count(args) -> int:
    started = time.monotonic()
    config = _tokenizer_from_args(args)
    reader = corpus_io.ManifestReader(args.input, args.format)
    table = count_corpus(reader, config, workers=args.workers, corpus_id=args.corpus_id)
    save_table(table, args.output)
    if args.skip_report:
        reader.skip_report.write(args.skip_report)
    _progress(f"counted {table.total} tokens, vocabulary {table.vocabulary_size}")
    _summary("count", reader.skip_report.total_lines, table.vocabulary_size, started)
    return EXIT_OK


def cmd_score(args) -> int:
    started = time.monotonic()
    table = load_table(args.freq)
    cfg = ScoringConfig(t=args.t, normalize_by_length=not args.no_length_norm)
    reader = corpus_io.ManifestReader(args.input, args.format)
    entries = score_corpus(reader, table, cfg, workers=args.workers)
    written = write_scores(entries, args.output, cfg, table)
    _progress(f"scored {written} records")
    _summary("score", reader.skip_report.total_lines, written, started)
    return EXIT_OK


def _load_entries_file(path: str) -> tuple[str, ...]:
    with open(path, "r", encoding="utf-8") as fh:
        return tuple(line.strip() for line in fh if line.strip())


def _select(args, entries, tokenizer: TokenizerConfig) -> Selection:
    strategy = args.strategy
    if strategy == "random":
        base = pruning.prune_random(len(entries), args.fraction, args.seed)
        kept = sorted(entries[i].index for i in base.kept_indices)
        return Selection(kept, "random", args.fraction, seed=args.seed, total=base.total)
    if strategy == "wfpp":
        return pruning.prune_wfpp(entries, args.fraction)
    if strategy == "wfpp_second_half":
        return pruning.prune_wfpp_second_half(entries, args.fraction)
    if strategy == "length":
        return pruning.prune_length(entries, args.fraction)
    if not args.entries:
        raise EmptyEntryList("--entries is required for the metadata strategy")
    if not args.cap:
        raise ConfigError("--cap is required for the metadata strategy")
    records = corpus_io.read_manifest(args.input, args.format)
    return pruning.prune_metadata(
        records, _load_entries_file(args.entries), args.cap, args.seed, tokenizer
    )


def cmd_prune(args) -> int:
    started = time.monotonic()
    tokenizer = TokenizerConfig()
    if args.strategy in ("wfpp", "wfpp_second_half", "random", "length"):
        if not args.scores:
            raise ConfigError(f"--scores is required for strategy {args.strategy}")
        _, entries = read_scores(args.scores)
    else:
        entries = []
        if args.freq:
            tokenizer = load_table(args.freq).tokenizer_config
    selection = _select(args, entries, tokenizer)
    kept = corpus_io.write_manifest(
        apply_selection(corpus_io.read_manifest(args.input, args.format), selection),
        args.output,
        args.format,
    )
    if args.emit_selection:
        selection.write(args.emit_selection)
    _progress(f"kept {kept} of {selection.total} records ({args.strategy})")
    _summary("prune", selection.total, kept, started)
    return EXIT_OK


def cmd_analyze(args) -> int:
    started = time.monotonic()
    before = load_table(args.before)
    after = load_table(args.after)
    thresholds = tuple(int(x) for x in args.buckets.split(",") if x)
    os.makedirs(args.out_dir, exist_ok=True)

    report = analysis.retention_report(before, after, top_k=args.top_k)
    analysis.write_distribution_csv(report, os.path.join(args.out_dir, "distribution.csv"))
    buckets = analysis.vocab_buckets(before, after, thresholds)
    analysis.write_vocab_buckets(buckets, os.path.join(args.out_dir, "vocab_buckets.json"))

    t = args.t
    scored_rows: list[tuple[str, float]] = []
    if args.scores:
        header, entries = read_scores(args.scores)
        t = header.get("scoring", {}).get("t", t)
        if args.input:
            by_index = {e.index: e for e in entries}
            for record in corpus_io.read_manifest(args.input, args.format):
                entry = by_index.get(record.index)
                if entry is not None and entry.score is not None:
                    scored_rows.append((record.caption, entry.score))
    words = analysis.sample_word_listing(before, t, args.listing_k, args.seed)
    analysis.write_word_listing(words, os.path.join(args.out_dir, "word_listing.tsv"))
    captions = analysis.sample_caption_listing(scored_rows, args.listing_k, args.seed)
    analysis.write_caption_listing(captions, os.path.join(args.out_dir, "caption_listing.tsv"))

    _progress(f"reports written to {args.out_dir}")
    _summary("analyze", before.vocabulary_size, after.vocabulary_size, started)
    return EXIT_OK


DEFAULT_PIPELINE = {
    "input": {"path": None, "format": "jsonl"},
    "tokenizer": TokenizerConfig().to_dict(),
    "scoring": ScoringConfig().to_dict(),
    "prune": {"strategy": "wfpp", "fraction": 0.5, "seed": 0, "entries": None, "cap": None},
    "analysis": {"top_k": analysis.DEFAULT_TOP_K, "buckets": list(analysis.DEFAULT_BUCKETS),
                 "listing_k": 50, "listing_seed": 0},
    "output_dir": None,
    "corpus_id": "corpus",
    "workers": 1,
}


def _merge_config(defaults: dict, user: dict) -> dict:
    out = {}
    for key, value in defaults.items():
        if isinstance(value, dict) and isinstance(user.get(key), dict):
            out[key] = _merge_config(value, user[key])
        else:
            out[key] = user.get(key, value)
    unknown = set(user) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return out


def load_pipeline_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
    cfg = _merge_config(DEFAULT_PIPELINE, user)
    if not cfg["input"]["path"]:
        raise ConfigError("config must set input.path")
    if not cfg["output_dir"]:
        raise ConfigError("config must set output_dir")
    if cfg["input"]["format"] not in corpus_io.FORMATS:
        raise ConfigError(f"unknown input format {cfg['input']['format']!r}")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if os.path.abspath(cfg["input"]["path"]).startswith(
        os.path.abspath(cfg["output_dir"]) + os.sep
    ):
        raise ConfigError("input manifest must not live inside output_dir")
    return cfg


def run_pipeline(cfg: dict) -> int:
    fmt = cfg["input"]["format"]
    manifest = cfg["input"]["path"]
    out_dir = cfg["output_dir"]
    workers = cfg["workers"]
    os.makedirs(out_dir, exist_ok=True)
    reports_dir = os.path.join(out_dir, "reports")

    tokenizer = TokenizerConfig.from_dict(cfg["tokenizer"])
    scoring_cfg = ScoringConfig.from_dict(cfg["scoring"])
    prune_cfg = cfg["prune"]
    # Validates strategy/fraction/entry settings before any work happens.
    PruneConfig(
        strategy=prune_cfg["strategy"],
        fraction=prune_cfg["fraction"],
        seed=prune_cfg["seed"],
        scoring=scoring_cfg,
        metadata_entries=tuple(prune_cfg["entries"]) if prune_cfg["entries"] else None,
        per_entry_cap=prune_cfg["cap"],
    )

    freq_path = os.path.join(out_dir, "freq.tsv")
    scores_path = os.path.join(out_dir, "scores.tsv")
    pruned_path = os.path.join(out_dir, f"pruned.{fmt}")
    selection_path = os.path.join(out_dir, "selection.json")
    skip_path = os.path.join(out_dir, "skip_report.json")
    freq_pruned_path = os.path.join(out_dir, "freq_pruned.tsv")

    # Stage 1: count
    started = time.monotonic()
    reader = corpus_io.ManifestReader(manifest, fmt)
    table = count_corpus(reader, tokenizer, workers=workers, corpus_id=cfg["corpus_id"])
    save_table(table, freq_path)
    reader.skip_report.write(skip_path)
    total_lines = reader.skip_report.total_lines
    _summary("count", total_lines, table.vocabulary_size, started)

    # Stage 2: score
    started = time.monotonic()
    entries = list(
        score_corpus(corpus_io.read_manifest(manifest, fmt), table, scoring_cfg,
                     workers=workers)
    )
    write_scores(entries, scores_path, scoring_cfg, table)
    _summary("score", total_lines, len(entries), started)

    # Stage 3: prune
    started = time.monotonic()
    strategy = prune_cfg["strategy"]
    if strategy == "random":
        base = pruning.prune_random(len(entries), prune_cfg["fraction"], prune_cfg["seed"])
        selection = Selection(
            sorted(entries[i].index for i in base.kept_indices),
            "random", prune_cfg["fraction"], seed=prune_cfg["seed"], total=base.total,
        )
    elif strategy == "wfpp":
        selection = pruning.prune_wfpp(entries, prune_cfg["fraction"])
    elif strategy == "wfpp_second_half":
        selection = pruning.prune_wfpp_second_half(entries, prune_cfg["fraction"])
    elif strategy == "length":
        selection = pruning.prune_length(entries, prune_cfg["fraction"])
    else:
        selection = pruning.prune_metadata(
            corpus_io.read_manifest(manifest, fmt),
            tuple(prune_cfg["entries"]),
            prune_cfg["cap"],
            prune_cfg["seed"],
            tokenizer,
        )
    kept = corpus_io.write_manifest(
        apply_selection(corpus_io.read_manifest(manifest, fmt), selection),
        pruned_path, fmt,
    )
    selection.write(selection_path)
    _summary("prune", selection.total, kept, started)

    # Stage 4: analyze
    started = time.monotonic()
    after = count_corpus(
        corpus_io.read_manifest(pruned_path, fmt), tokenizer,
        workers=workers, corpus_id=cfg["corpus_id"],
    )
    save_table(after, freq_pruned_path)
    os.makedirs(reports_dir, exist_ok=True)
    acfg = cfg["analysis"]
    report = analysis.retention_report(table, after, top_k=acfg["top_k"])
    analysis.write_distribution_csv(report, os.path.join(reports_dir, "distribution.csv"))
    buckets = analysis.vocab_buckets(table, after, tuple(acfg["buckets"]))
    analysis.write_vocab_buckets(buckets, os.path.join(reports_dir, "vocab_buckets.json"))
    words = analysis.sample_word_listing(table, scoring_cfg.t, acfg["listing_k"],
                                         acfg["listing_seed"])
    analysis.write_word_listing(words, os.path.join(reports_dir, "word_listing.tsv"))
    by_index = {e.index: e for e in entries}
    rows = []
    for record in corpus_io.read_manifest(manifest, fmt):
        entry = by_index.get(record.index)
        if entry is not None and entry.score is not None:
            rows.append((record.caption, entry.score))
    captions = analysis.sample_caption_listing(rows, acfg["listing_k"], acfg["listing_seed"])
    analysis.write_caption_listing(captions, os.path.join(reports_dir, "caption_listing.tsv"))
    _summary("analyze", table.vocabulary_size, after.vocabulary_size, started)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_pipeline_config(args.config)
    if args.dump_config:
        with open(args.dump_config, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(cfg, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
    return run_pipeline(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfpp",
        description="Word-frequency-based pruning of image-text pair corpora.",
    )
    parser.add_argument("--version", action="version", version=f"wfpp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="build a word-frequency table")
    _add_input_flags(p)
    _add_tokenizer_flags(p)
    p.add_argument("--output", required=True, help="frequency table path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--corpus-id", default="corpus")
    p.add_argument("--skip-report", help="write malformed-line report here")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("score", help="score captions against a frequency table")
    _add_input_flags(p)
    p.add_argument("--freq", required=True, help="frequency table path")
    p.add_argument("--t", type=float, default=1e-7, help="discard threshold")
    p.add_argument("--no-length-norm", action="store_true",
                   help="use the unnormalized product score")
    p.add_argument("--output", required=True, help="score sidecar path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("prune", help="select a retention subset")
    _add_input_flags(p)
    p.add_argument("--scores", help="score sidecar (wfpp/second-half/length/random)")
    p.add_argument("--freq", help="frequency table (metadata strategy tokenizer)")
    p.add_argument("--strategy", choices=pruning.STRATEGIES, default="wfpp")
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="pruned manifest path")
    p.add_argument("--emit-selection", help="write the selection JSON here")
    p.add_argument("--entries", help="metadata entries file, one per line")
    p.add_argument("--cap", type=int, help="per-entry keep cap (metadata)")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("analyze", help="distribution, buckets, and listings reports")
    p.add_argument("--before", required=True, help="full-corpus frequency table")
    p.add_argument("--after", required=True, help="pruned-corpus frequency table")
    p.add_argument("--top-k", type=int, default=analysis.DEFAULT_TOP_K)
    p.add_argument("--buckets", default="5,100", help="comma-separated thresholds")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--input", help="manifest for the caption listing")
    p.add_argument("--format", choices=corpus_io.FORMATS, default="jsonl")
    p.add_argument("--scores", help="score sidecar for the caption listing")
    p.add_argument("--t", type=float, default=1e-7)
    p.add_argument("--listing-k", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("run", help="chain count, score, prune, analyze from a config")
    p.add_argument("--config", required=True, help="pipeline config (JSON)")
    p.add_argument("--dump-config", help="write the fully-resolved config here")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, EmptyEntryList, ValueError) as e:
        _progress(f"config error: {e}")
        return EXIT_CONFIG
    except OSError as e:
        _progress(f"I/O error: {e}")
        return EXIT_IO
    except WfppError as e:
        _progress(f"internal error: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
