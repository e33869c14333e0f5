"""Hot-kernel selection: compiled extension when built, else pure Python.

``KERNEL_BACKEND`` reports which implementation is active ("c" or
"python"); benchmarks/bench_editdist.py compares the two.
"""

from __future__ import annotations

try:
    from loke._speedups import levenshtein

    KERNEL_BACKEND = "c"
except ImportError:  # extension not built; fall back
    from loke._fallback import levenshtein

    KERNEL_BACKEND = "python"

__all__ = ["levenshtein", "KERNEL_BACKEND"]
