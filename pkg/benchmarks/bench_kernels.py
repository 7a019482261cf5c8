"""Time the compiled kernels against the numpy/Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Both backends are checked to agree bit for bit before timing.
"""

import argparse
import random
import sys
import timeit

import numpy as np

from sentibench import _kernels_py

try:
    from sentibench import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def make_inputs(scale: float, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    n_rows, n_cols = int(100_000 * scale), 50_000
    nnz_per_row = rng.integers(1, 40, size=n_rows)
    indptr = np.concatenate([[0], np.cumsum(nnz_per_row)]).astype(np.int64)
    indices = rng.integers(0, n_cols, size=indptr[-1]).astype(np.int64)
    data = rng.random(indptr[-1])
    scores = np.sort(np.round(rng.random(int(1_000_000 * scale)), 3))
    labels = rng.integers(0, 2, size=scores.shape[0]).astype(np.int64)
    py = random.Random(seed)
    vocab = [f"w{i}" for i in range(3000)]
    docs = [[py.choice(vocab) for _ in range(py.randint(3, 25))] for _ in range(int(20_000 * scale))]
    index = {g: i for i, g in enumerate(vocab[:1500])}
    return {
        "csr": (indptr, indices, data, rng.random(n_cols), rng.random(n_rows), n_rows, n_cols),
        "auc": (scores, labels),
        "docs": docs,
        "index": index,
        "n_shuffle": int(1_000_000 * scale),
    }


def cases(k, x):
    indptr, indices, data, w, r, n_rows, n_cols = x["csr"]
    return {
        "csr_matvec": lambda: k.csr_matvec(indptr, indices, data, w, 0, n_rows),
        "csr_rmatvec": lambda: k.csr_rmatvec(indptr, indices, data, r, 0, n_rows, n_cols),
        "auc_sorted": lambda: k.auc_sorted(*x["auc"]),
        "fisher_yates": lambda: k.fisher_yates(x["n_shuffle"], k.seed_state(42)),
        "count_ngrams": lambda: k.count_ngrams(x["docs"], 1, 3),
        "doc_term_counts": lambda: [k.doc_term_counts(d, 1, 1, x["index"]) for d in x["docs"]],
    }


def same(a, b) -> bool:
    if isinstance(a, np.ndarray):
        return a.tobytes() == b.tobytes()
    return a == b


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1
    x = make_inputs(args.scale)
    py_cases, c_cases = cases(_kernels_py, x), cases(_kernels_c, x)
    print(f"{'kernel':<16} {'python (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}  agree")
    for name in py_cases:
        agree = same(py_cases[name](), c_cases[name]())
        t_py = min(timeit.repeat(py_cases[name], number=1, repeat=args.repeat)) * 1e3
        t_c = min(timeit.repeat(c_cases[name], number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16} {t_py:>12.2f} {t_c:>14.2f} {t_py / t_c:>7.1f}x  {'yes' if agree else 'NO'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
