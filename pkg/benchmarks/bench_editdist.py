"""Benchmark the compiled edit-distance kernel against the pure-Python one.

Edit distance dominates linking time (10 candidate re-rankings per
term, three terms per triple), so this is the one loop worth compiling.
Run from the repository root:

    python3 benchmarks/bench_editdist.py
"""

import random
import string
import time

from loke import _fallback

try:
    from loke import _speedups
except ImportError:
    _speedups = None


def make_pairs(n: int, seed: int = 1234) -> list:
    """Label-like string pairs, weighted toward short multi-word names."""
    rng = random.Random(seed)
    alphabet = string.ascii_lowercase + "-'"

    def word() -> str:
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(3, 12)))

    def label() -> str:
        return " ".join(word() for _ in range(rng.randint(1, 4)))

    pairs = []
    for _ in range(n):
        a = label()
        # half the pairs are near-misses: a few random edits of the same label
        if rng.random() < 0.5:
            chars = list(a)
            for _ in range(rng.randint(1, 4)):
                pos = rng.randrange(len(chars))
                chars[pos] = rng.choice(alphabet)
            b = "".join(chars)
        else:
            b = label()
        pairs.append((a, b))
    return pairs


def bench(fn, pairs, repeats: int = 5) -> float:
    """Best-of-N total seconds for one pass over the pairs."""
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    pairs = make_pairs(20000)
    sanity = pairs[:500]
    if _speedups is not None:
        mismatches = [
            (a, b)
            for a, b in sanity
            if _speedups.levenshtein(a, b) != _fallback.levenshtein(a, b)
        ]
        if mismatches:
            raise SystemExit(f"kernels disagree on {len(mismatches)} pairs: {mismatches[:3]}")

    t_py = bench(_fallback.levenshtein, pairs)
    print(f"pure python : {t_py:8.3f} s  ({t_py / len(pairs) * 1e6:7.2f} us/call)")
    if _speedups is None:
        print("compiled    : not built (pip install -e . with Cython available)")
        return
    t_c = bench(_speedups.levenshtein, pairs)
    print(f"compiled    : {t_c:8.3f} s  ({t_c / len(pairs) * 1e6:7.2f} us/call)")
    print(f"speedup     : {t_py / t_c:8.1f}x over {len(pairs)} pairs")


if __name__ == "__main__":
    main()
