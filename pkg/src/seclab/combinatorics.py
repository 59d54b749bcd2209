"""Set partitions as restricted growth strings."""

from __future__ import annotations

from functools import lru_cache


@lru_cache(maxsize=None)
def set_partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """All partitions of ``range(n)``, coarsest first, then lexicographic.

    Each partition is a restricted growth string ``r`` with ``r[i]`` the block
    of element ``i``; block indices appear in order of first use.
    """
    if n == 0:
        return ((),)
    out = []

    def grow(prefix, top):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for b in range(top + 2):
            grow(prefix + [b], max(top, b))

    grow([0], 0)
    return tuple(sorted(out, key=lambda r: (max(r), r)))
