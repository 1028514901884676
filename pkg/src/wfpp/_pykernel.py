"""Pure-Python hot kernels: tokenization, counting, caption scoring.

Fallback for environments where the compiled extension (wfpp._kernel)
is unavailable; selected via wfpp.kernel. The two backends must stay
bit-identical — same character classification (str.isalnum is the same
predicate as Py_UNICODE_ISALNUM), same log-domain accumulation order.
"""

from math import exp, log, sqrt

# Unreachable for t < 1 (min P is 1 - sqrt(t) > 0), kept for totality.
MIN_PROB = 1e-300


def tokenize(text, lowercase=True, split_punctuation=True, atoms=(), max_tokens=-1):
    """Split a caption into word tokens.

    Word characters are Unicode alphanumerics; apostrophes are kept when
    flanked by word characters ("don't" is one token). Every other
    non-space character becomes a standalone token. `atoms` are literal
    strings emitted as single tokens when found at a token boundary;
    they must already match the lowercasing of the text.
    """
    if lowercase:
        text = text.lower()
    if not split_punctuation:
        tokens = text.split()
    else:
        tokens = []
        n = len(text)
        i = 0
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if atoms:
                atom = _match_atom(text, i, atoms)
                if atom is not None:
                    tokens.append(atom)
                    i += len(atom)
                    continue
            if ch.isalnum():
                j = i + 1
                while j < n:
                    cj = text[j]
                    if cj.isalnum():
                        j += 1
                    elif cj == "'" and j + 1 < n and text[j + 1].isalnum():
                        j += 2
                    else:
                        break
                tokens.append(text[i:j])
                i = j
            else:
                tokens.append(ch)
                i += 1
    if max_tokens >= 0:
        del tokens[max_tokens:]
    return tokens


def _match_atom(text, i, atoms):
    for atom in atoms:
        if text.startswith(atom, i):
            return atom
    return None


def count_tokens(captions, lowercase=True, split_punctuation=True, atoms=(),
                 max_tokens=-1):
    """Count token occurrences over an iterable of captions.

    Returns (counts dict, total token count).
    """
    counts = {}
    total = 0
    for caption in captions:
        toks = tokenize(caption, lowercase, split_punctuation, atoms, max_tokens)
        total += len(toks)
        for tok in toks:
            counts[tok] = counts.get(tok, 0) + 1
    return counts, total


def discard_prob(count, total, t):
    """Per-word discard probability: 1 - sqrt(t/f) above threshold, else 1."""
    if count <= 0 or total <= 0:
        return 1.0
    f = count / total
    if f > t:
        return 1.0 - sqrt(t / f)
    return 1.0


def score_tokens(tokens, counts, total, t, normalize):
    """Joint discard score of a token list against a count table.

    Product of per-word probabilities accumulated as a sum of logs to
    survive long captions; divided by the token count when normalizing.
    """
    log_sum = 0.0
    for tok in tokens:
        p = discard_prob(counts.get(tok, 0), total, t)
        if p < MIN_PROB:
            p = MIN_PROB
        log_sum += log(p)
    score = exp(log_sum)
    if normalize:
        score /= len(tokens)
    return score


def score_batch(captions, counts, total, t, normalize, lowercase=True,
                split_punctuation=True, atoms=(), max_tokens=-1):
    """Score a batch of captions; yields (n, score) pairs.

    Captions with zero tokens produce (0, 0.0); callers treat n == 0 as
    the unscorable sentinel.
    """
    out = []
    for caption in captions:
        toks = tokenize(caption, lowercase, split_punctuation, atoms, max_tokens)
        if not toks:
            out.append((0, 0.0))
        else:
            out.append((len(toks), score_tokens(toks, counts, total, t, normalize)))
    return out
