"""Backend selection for the hot kernels.

Prefers the compiled extension; falls back to the pure-Python module
when the extension is missing or WFPP_PURE_PYTHON=1 is set. Both
backends are bit-identical (enforced by tests/test_kernel_equivalence).
"""

import os

if os.environ.get("WFPP_PURE_PYTHON") == "1":
    from wfpp import _pykernel as _impl
    BACKEND = "python"
else:
    try:
        from wfpp import _kernel as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from wfpp import _pykernel as _impl
        BACKEND = "python"

tokenize = _impl.tokenize
count_tokens = _impl.count_tokens
discard_prob = _impl.discard_prob
score_tokens = _impl.score_tokens
score_batch = _impl.score_batch
MIN_PROB = _impl.MIN_PROB
