# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels: tokenization, counting, caption scoring.

Mirror of wfpp._pykernel; both backends must produce bit-identical
output (same character predicates, same log-domain accumulation order).
"""

from libc.math cimport exp, log, sqrt

cdef extern from "Python.h":
    bint Py_UNICODE_ISALNUM(Py_UCS4)
    bint Py_UNICODE_ISSPACE(Py_UCS4)

# Unreachable for t < 1 (min P is 1 - sqrt(t) > 0), kept for totality.
MIN_PROB = 1e-300
cdef double _MIN_PROB = 1e-300


cpdef list tokenize(text, bint lowercase=True, bint split_punctuation=True,
                    tuple atoms=(), Py_ssize_t max_tokens=-1):
    """Split a caption into word tokens. See wfpp._pykernel.tokenize."""
    cdef list tokens
    cdef Py_ssize_t n, i, j
    cdef Py_UCS4 ch, cj
    cdef str s
    if lowercase:
        text = text.lower()
    s = <str>text
    if not split_punctuation:
        tokens = s.split()
    else:
        tokens = []
        n = len(s)
        i = 0
        while i < n:
            ch = s[i]
            if Py_UNICODE_ISSPACE(ch):
                i += 1
                continue
            if atoms:
                atom = _match_atom(s, i, atoms)
                if atom is not None:
                    tokens.append(atom)
                    i += len(<str>atom)
                    continue
            if Py_UNICODE_ISALNUM(ch):
                j = i + 1
                while j < n:
                    cj = s[j]
                    if Py_UNICODE_ISALNUM(cj):
                        j += 1
                    elif cj == u"'" and j + 1 < n and Py_UNICODE_ISALNUM(<Py_UCS4>s[j + 1]):
                        j += 2
                    else:
                        break
                tokens.append(s[i:j])
                i = j
            else:
                tokens.append(s[i:i + 1])
                i += 1
    if max_tokens >= 0:
        del tokens[max_tokens:]
    return tokens


cdef inline object _match_atom(str text, Py_ssize_t i, tuple atoms):
    for atom in atoms:
        if text.startswith(atom, i):
            return atom
    return None


def count_tokens(captions, bint lowercase=True, bint split_punctuation=True,
                 tuple atoms=(), Py_ssize_t max_tokens=-1):
    """Count token occurrences; returns (counts dict, total token count)."""
    cdef dict counts = {}
    cdef long long total = 0
    cdef list toks
    for caption in captions:
        toks = tokenize(caption, lowercase, split_punctuation, atoms, max_tokens)
        total += len(toks)
        for tok in toks:
            prev = counts.get(tok)
            if prev is None:
                counts[tok] = 1
            else:
                counts[tok] = <long long>prev + 1
    return counts, total


cpdef double discard_prob(long long count, long long total, double t):
    """Per-word discard probability: 1 - sqrt(t/f) above threshold, else 1."""
    cdef double f
    if count <= 0 or total <= 0:
        return 1.0
    f = (<double>count) / (<double>total)
    if f > t:
        return 1.0 - sqrt(t / f)
    return 1.0


cpdef double score_tokens(list tokens, dict counts, long long total, double t,
                          bint normalize):
    """Joint discard score of a token list; log-domain product."""
    cdef double log_sum = 0.0
    cdef double p, score
    cdef long long c
    for tok in tokens:
        obj = counts.get(tok)
        c = 0 if obj is None else <long long>obj
        p = discard_prob(c, total, t)
        if p < _MIN_PROB:
            p = _MIN_PROB
        log_sum += log(p)
    score = exp(log_sum)
    if normalize:
        score /= <double>len(tokens)
    return score


def score_batch(captions, dict counts, long long total, double t, bint normalize,
                bint lowercase=True, bint split_punctuation=True, tuple atoms=(),
                Py_ssize_t max_tokens=-1):
    """Score a batch of captions; yields (n, score), n == 0 marks empty."""
    cdef list out = []
    cdef list toks
    for caption in captions:
        toks = tokenize(caption, lowercase, split_punctuation, atoms, max_tokens)
        if not toks:
            out.append((0, 0.0))
        else:
            out.append((len(toks), score_tokens(toks, counts, total, t, normalize)))
    return out
