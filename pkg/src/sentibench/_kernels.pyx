# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Signatures and accumulation order match the Python versions exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


def csr_matvec(const int64_t[::1] indptr, const int64_t[::1] indices,
               const double[::1] data, const double[::1] w,
               Py_ssize_t start, Py_ssize_t end):
    cdef Py_ssize_t n = end - start
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, k
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(indptr[start + i], indptr[start + i + 1]):
                s = s + data[k] * w[indices[k]]
            out[i] = s
    return out_arr


def csr_rmatvec(const int64_t[::1] indptr, const int64_t[::1] indices,
                const double[::1] data, const double[::1] r,
                Py_ssize_t start, Py_ssize_t end, Py_ssize_t n_cols):
    out_arr = np.zeros(n_cols, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, k
    cdef double ri
    with nogil:
        for i in range(start, end):
            ri = r[i]
            for k in range(indptr[i], indptr[i + 1]):
                out[indices[k]] = out[indices[k]] + data[k] * ri
    return out_arr


def auc_sorted(const double[::1] scores, const int64_t[::1] labels):
    cdef Py_ssize_t n = scores.shape[0]
    cdef Py_ssize_t i = 0, j
    cdef int64_t pos, neg, neg_below = 0, n_pos = 0, twice_u = 0
    with nogil:
        while i < n:
            j = i
            pos = 0
            while j < n and scores[j] == scores[i]:
                pos = pos + labels[j]
                j = j + 1
            neg = (j - i) - pos
            twice_u = twice_u + 2 * pos * neg_below + pos * neg
            neg_below = neg_below + neg
            n_pos = n_pos + pos
            i = j
    return twice_u / (2.0 * n_pos * (n - n_pos))


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _splitmix64(uint64_t* x) nogil:
    x[0] = x[0] + <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = x[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


def seed_state(seed):
    cdef uint64_t x = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    state = np.empty(4, dtype=np.uint64)
    cdef uint64_t[::1] st = state
    cdef int i
    for i in range(4):
        st[i] = _splitmix64(&x)
    return state


def fisher_yates(Py_ssize_t n, uint64_t[::1] state):
    perm_arr = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] perm = perm_arr
    cdef uint64_t s0 = state[0], s1 = state[1], s2 = state[2], s3 = state[3]
    cdef uint64_t result, t, bound, threshold
    cdef Py_ssize_t i
    cdef int64_t j, tmp
    with nogil:
        i = n - 1
        while i > 0:
            bound = <uint64_t>(i + 1)
            threshold = (0 - bound) % bound
            while True:
                result = _rotl(s1 * 5, 7) * 9
                t = s1 << 17
                s2 ^= s0
                s3 ^= s1
                s1 ^= s2
                s0 ^= s3
                s2 ^= t
                s3 = _rotl(s3, 45)
                if result >= threshold:
                    break
            j = <int64_t>(result % bound)
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
            i = i - 1
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return perm_arr


def count_ngrams(docs, int lo, int hi):
    cdef dict counts = {}
    cdef set seen
    cdef object toks
    cdef list entry
    cdef Py_ssize_t n, i
    cdef int size
    cdef str gram
    for toks in docs:
        n = len(toks)
        seen = set()
        for size in range(lo, hi + 1):
            for i in range(n - size + 1):
                if size == 1:
                    gram = toks[i]
                else:
                    gram = " ".join(toks[i:i + size])
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


def doc_term_counts(toks, int lo, int hi, dict index):
    cdef dict out = {}
    cdef Py_ssize_t n = len(toks), i
    cdef int size
    cdef str gram
    cdef object col
    for size in range(lo, hi + 1):
        for i in range(n - size + 1):
            if size == 1:
                gram = toks[i]
            else:
                gram = " ".join(toks[i:i + size])
            col = index.get(gram)
            if col is not None:
                out[col] = out.get(col, 0) + 1
    return out
