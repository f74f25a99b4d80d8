"""Multi-indices (1-based, strictly increasing tuples) and permutation signs."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

MultiIndex = tuple[int, ...]


def enumerate_multiindices(n: int, t: int) -> list[MultiIndex]:
    """All strictly increasing t-tuples from 1..n in lexicographic order."""
    if not 0 <= t <= n:
        raise ValueError(f"tuple size {t} out of range for 1..{n}")
    return list(combinations(range(1, n + 1), t))


def complement(mi: Sequence[int], n: int) -> MultiIndex:
    """Increasing complement of ``mi`` inside 1..n."""
    taken = set(mi)
    return tuple(i for i in range(1, n + 1) if i not in taken)


def shift(mi: Sequence[int], offset: int) -> MultiIndex:
    return tuple(i + offset for i in mi)


def permutation_sign(seq: Sequence[int]) -> int:
    """Parity sign (+1 or -1) of a permutation of 1..n."""
    n = len(seq)
    if sorted(seq) != list(range(1, n + 1)):
        raise ValueError(f"{tuple(seq)} is not a permutation of 1..{n}")
    # cycle decomposition: sign = (-1)^(n - #cycles)
    seen = [False] * (n + 1)
    parity = 0
    for start in range(1, n + 1):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = seq[j - 1]
            length += 1
        parity ^= (length - 1) & 1
    return -1 if parity else 1
