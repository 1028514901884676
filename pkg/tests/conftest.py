import json
import random

import pytest

from wfpp.corpus_io import PairRecord


WORDS = (
    "a the of in dog cat beach sunset picture photo person wallpaper "
    "mountain river tiny huge red blue green market festival barcode "
    "vintage portrait skyline harbor lantern mosaic"
).split()


def synth_captions(n, seed, vocab=WORDS, min_len=1, max_len=12):
    """Deterministic synthetic captions with a mildly skewed word choice."""
    rng = random.Random(seed)
    weights = [1.0 / (i + 1) for i in range(len(vocab))]
    captions = []
    for _ in range(n):
        length = rng.randint(min_len, max_len)
        captions.append(" ".join(rng.choices(vocab, weights=weights, k=length)))
    return captions


def zipf_captions(n, seed, vocab_size=10000, exponent=1.1, min_len=6, max_len=18):
    """Power-law token draw; the desk-scale stand-in for a web-crawled corpus."""
    import numpy as np

    rng = np.random.default_rng(seed)
    p = np.arange(1, vocab_size + 1, dtype=float) ** -exponent
    p /= p.sum()
    lengths = rng.integers(min_len, max_len + 1, size=n)
    words = np.array([f"w{i}" for i in range(vocab_size)])
    tok_ids = rng.choice(vocab_size, size=int(lengths.sum()), p=p)
    captions = []
    pos = 0
    for length in lengths:
        captions.append(" ".join(words[tok_ids[pos : pos + length]]))
        pos += length
    return captions


def as_records(captions):
    return [
        PairRecord(index=i, image_ref=f"img/{i}.jpg", caption=c)
        for i, c in enumerate(captions)
    ]


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({"image": r.image_ref, "text": r.caption},
                                ensure_ascii=False) + "\n")


@pytest.fixture
def small_manifest(tmp_path):
    records = as_records(synth_captions(50, seed=7))
    path = tmp_path / "small.jsonl"
    write_jsonl(path, records)
    return path, records


@pytest.fixture
def fixture_1k(tmp_path):
    """The bundled-style 1k-caption fixture used by determinism checks."""
    records = as_records(synth_captions(1000, seed=1234))
    path = tmp_path / "fixture_1k.jsonl"
    write_jsonl(path, records)
    return path, records
