"""wfpp: word-frequency-based pruning of image-text pair corpora.

Scores every caption by the joint discard probability of its words and
keeps the lowest-scoring fraction, producing a corpus with a flatter
word-frequency distribution. Ships baseline strategies (random, length,
second-half, metadata-balanced) and distributional analysis reports.
"""

__version__ = "0.1.0"

from wfpp.corpus_io import PairRecord, read_manifest, write_manifest
from wfpp.frequency import FrequencyTable, count_corpus, load_table, save_table
from wfpp.pruning import PruneConfig, Selection, apply_selection, prune
from wfpp.scoring import (
    ScoredRecord,
    ScoringConfig,
    joint_score,
    score_corpus,
    score_text,
    word_discard_prob,
)
from wfpp.tokenizer import TokenizerConfig, tokenize

__all__ = [
    "__version__",
    "PairRecord",
    "read_manifest",
    "write_manifest",
    "FrequencyTable",
    "count_corpus",
    "load_table",
    "save_table",
    "PruneConfig",
    "Selection",
    "apply_selection",
    "prune",
    "ScoredRecord",
    "ScoringConfig",
    "joint_score",
    "score_corpus",
    "score_text",
    "word_discard_prob",
    "TokenizerConfig",
    "tokenize",
]
