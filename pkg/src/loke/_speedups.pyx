# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Levenshtein kernel.

Inner loop of candidate re-ranking: every query is compared against its
whole top-10 candidate pool, so this dominates linking time. Semantics
must stay bit-identical to loke._fallback.levenshtein.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc


def levenshtein(str a, str b):
    """Character-level edit distance (insert/delete/substitute, unit cost)."""
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    # keep the DP rows over the shorter string
    if lb > la:
        a, b = b, a
        la, lb = lb, la

    cdef Py_ssize_t *prev = <Py_ssize_t *> PyMem_Malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *curr = <Py_ssize_t *> PyMem_Malloc((lb + 1) * sizeof(Py_ssize_t))
    if prev == NULL or curr == NULL:
        PyMem_Free(prev)
        PyMem_Free(curr)
        raise MemoryError()

    cdef Py_ssize_t i, j, cost, best
    cdef Py_UCS4 ca
    cdef Py_ssize_t *tmp
    try:
        for j in range(lb + 1):
            prev[j] = j
        for i in range(1, la + 1):
            curr[0] = i
            ca = a[i - 1]
            for j in range(1, lb + 1):
                cost = 0 if ca == <Py_UCS4> b[j - 1] else 1
                best = prev[j - 1] + cost
                if prev[j] + 1 < best:
                    best = prev[j] + 1
                if curr[j - 1] + 1 < best:
                    best = curr[j - 1] + 1
                curr[j] = best
            tmp = prev
            prev = curr
            curr = tmp
        return prev[lb]
    finally:
        PyMem_Free(prev)
        PyMem_Free(curr)
