"""Backend selection for the hot kernels.

The compiled extension is preferred; set ``SENTIBENCH_PURE_PYTHON=1`` to force
the numpy/Python fallback. ``BACKEND`` names the implementation in use.
"""

import os

from . import _kernels_py

if os.environ.get("SENTIBENCH_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

csr_matvec = _impl.csr_matvec
csr_rmatvec = _impl.csr_rmatvec
auc_sorted = _impl.auc_sorted
seed_state = _impl.seed_state
fisher_yates = _impl.fisher_yates
count_ngrams = _impl.count_ngrams
doc_term_counts = _impl.doc_term_counts

__all__ = [
    "BACKEND",
    "csr_matvec",
    "csr_rmatvec",
    "auc_sorted",
    "seed_state",
    "fisher_yates",
    "count_ngrams",
    "doc_term_counts",
]
