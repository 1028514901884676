#!/usr/bin/env python3
"""Benchmark: compiled kernel vs pure-Python fallback.

Times tokenize, count, and score over a synthetic corpus and prints a
side-by-side table. Both backends are imported directly, so one process
measures both.
"""

import argparse
import random
import time

import wfpp._pykernel as pykernel

try:
    import wfpp._kernel as cykernel
except ImportError:
    cykernel = None


def make_corpus(n_captions, vocab_size, seed):
    rng = random.Random(seed)
    vocab = [f"word{i}" for i in range(vocab_size)]
    weights = [1.0 / (i + 1) ** 1.1 for i in range(vocab_size)]
    return [
        " ".join(rng.choices(vocab, weights=weights, k=rng.randint(6, 18)))
        for _ in range(n_captions)
    ]


def bench(label, fn, repeats=3):
    best = min(timed(fn) for _ in range(repeats))
    print(f"  {label:<28} {best:8.3f}s")
    return best


def timed(fn):
    started = time.perf_counter()
    fn()
    return time.perf_counter() - started


def run_backend(name, kern, captions):
    print(f"{name}:")
    t_tok = bench("tokenize all captions", lambda: [
        kern.tokenize(c, True, True, (), -1) for c in captions
    ])
    counts = total = None

    def do_count():
        nonlocal counts, total
        counts, total = kern.count_tokens(captions)

    t_cnt = bench("count corpus", do_count)
    t_sco = bench("score corpus", lambda: kern.score_batch(
        captions, counts, total, 1e-7, True
    ))
    return t_tok, t_cnt, t_sco


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--captions", type=int, default=200000)
    parser.add_argument("--vocab", type=int, default=10000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"corpus: {args.captions} captions, vocab {args.vocab}")
    captions = make_corpus(args.captions, args.vocab, args.seed)

    py_times = run_backend("pure python", pykernel, captions)
    if cykernel is None:
        print("compiled kernel not built; run pip install -e . --no-build-isolation")
        return
    cy_times = run_backend("cython", cykernel, captions)

    print("speedup (python / cython):")
    for label, py_t, cy_t in zip(("tokenize", "count", "score"), py_times, cy_times):
        print(f"  {label:<28} {py_t / cy_t:8.2f}x")


if __name__ == "__main__":
    main()
