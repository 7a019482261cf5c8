"""Reference implementations of the hot kernels (numpy / plain Python).

Used when the compiled ``_kernels`` extension is unavailable or when
``SENTIBENCH_PURE_PYTHON=1``. Every function here has the same signature and,
for the numeric kernels, the same floating-point accumulation order as its
compiled twin, so both backends produce bit-identical results.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def csr_matvec(indptr, indices, data, w, start, end):
    """Return ``X[start:end] @ w`` for a CSR matrix given by its arrays."""
    n = end - start
    lo, hi = int(indptr[start]), int(indptr[end])
    prod = data[lo:hi] * w[indices[lo:hi]]
    rows = np.repeat(np.arange(n), np.diff(indptr[start:end + 1]))
    return np.bincount(rows, weights=prod, minlength=n).astype(np.float64)


def csr_rmatvec(indptr, indices, data, r, start, end, n_cols):
    """Return ``X[start:end].T @ r[start:end]`` as a dense vector of ``n_cols``."""
    lo, hi = int(indptr[start]), int(indptr[end])
    lens = np.diff(indptr[start:end + 1])
    contrib = data[lo:hi] * np.repeat(r[start:end], lens)
    return np.bincount(indices[lo:hi], weights=contrib, minlength=n_cols).astype(np.float64)


def auc_sorted(scores, labels):
    """Mann-Whitney AUC of scores sorted ascending with aligned 0/1 labels.

    Tied scores form one group; each positive in a group earns one point per
    negative strictly below the group and half a point per negative inside it.
    Counting is done in integers so the result is exact up to the final division.
    """
    n = scores.shape[0]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(scores)) + 1))
    sizes = np.diff(np.concatenate((starts, [n])))
    pos = np.add.reduceat(labels.astype(np.int64), starts)
    neg = sizes - pos
    neg_below = np.cumsum(neg) - neg
    n_pos = int(pos.sum())
    n_neg = n - n_pos
    twice_u = int(np.sum(2 * pos * neg_below + pos * neg))
    return twice_u / (2.0 * n_pos * n_neg)


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


def seed_state(seed):
    """Expand a 64-bit seed into a xoshiro256** state with SplitMix64."""
    x = seed & _MASK64
    state = np.empty(4, dtype=np.uint64)
    for i in range(4):
        x, out = _splitmix64(x)
        state[i] = out
    return state


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK64


def fisher_yates(n, state):
    """Return a permutation of ``range(n)`` and advance ``state`` in place.

    xoshiro256** drives a descending Fisher-Yates shuffle; each swap index is
    drawn without modulo bias by rejecting draws below ``2**64 mod bound``.
    """
    s0, s1, s2, s3 = (int(v) for v in state)
    perm = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        bound = i + 1
        threshold = (-bound & _MASK64) % bound
        while True:
            result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
            t = (s1 << 17) & _MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = _rotl(s3, 45)
            if result >= threshold:
                break
        j = result % bound
        perm[i], perm[j] = perm[j], perm[i]
    state[:] = np.array([s0, s1, s2, s3], dtype=np.uint64)
    return perm


def count_ngrams(docs, lo, hi):
    """Count n-grams of length ``lo..hi`` over token lists.

    Returns ``{ngram: [tf_total, df]}``; n-grams are tokens joined by one space.
    """
    counts = {}
    for toks in docs:
        n = len(toks)
        seen = set()
        for size in range(lo, hi + 1):
            for i in range(n - size + 1):
                gram = toks[i] if size == 1 else " ".join(toks[i:i + size])
                entry = counts.get(gram)
                if entry is None:
                    counts[gram] = [1, 1]
                    seen.add(gram)
                else:
                    entry[0] += 1
                    if gram not in seen:
                        entry[1] += 1
                        seen.add(gram)
    return counts


def doc_term_counts(toks, lo, hi, index):
    """Map one document to ``{column: count}`` over n-grams present in ``index``."""
    out = {}
    n = len(toks)
    for size in range(lo, hi + 1):
        for i in range(n - size + 1):
            gram = toks[i] if size == 1 else " ".join(toks[i:i + size])
            col = index.get(gram)
            if col is not None:
                out[col] = out.get(col, 0) + 1
    return out
