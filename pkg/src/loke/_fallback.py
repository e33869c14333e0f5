"""Pure-Python Levenshtein kernel, used when the compiled one is absent.

Must stay bit-identical in behavior to loke._speedups.levenshtein.
"""

from __future__ import annotations


def levenshtein(a: str, b: str) -> int:
    """Character-level edit distance (insert/delete/substitute, unit cost)."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    # keep the DP rows over the shorter string
    if lb > la:
        a, b = b, a
        la, lb = lb, la

    prev = list(range(lb + 1))
    curr = [0] * (lb + 1)
    for i in range(1, la + 1):
        curr[0] = i
        ca = a[i - 1]
        for j in range(1, lb + 1):
            best = prev[j - 1] + (0 if ca == b[j - 1] else 1)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if curr[j - 1] + 1 < best:
                best = curr[j - 1] + 1
            curr[j] = best
        prev, curr = curr, prev
    return prev[lb]
