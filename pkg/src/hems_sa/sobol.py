"""Unscrambled Sobol low-discrepancy sequence (Gray-code ordering)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._joe_kuo import JOE_KUO_TABLE
from .exceptions import DimensionUnsupported

BITS = 32
_SCALE = 2.0 ** -BITS


def _parse_table():
    rows = {}
    for line in JOE_KUO_TABLE.strip().splitlines():
        dim, s, a, *m = (int(tok) for tok in line.split())
        assert len(m) == s, f"bad direction-number row for dimension {dim}"
        rows[dim] = (s, a, m)
    return rows


_TABLE = _parse_table()
MAX_DIMENSION = 1 + len(_TABLE)


@lru_cache(maxsize=None)
def direction_numbers(dim: int) -> np.ndarray:
    """The BITS direction integers v_1..v_BITS of 1-based dimension `dim`."""
    if dim == 1:
        m = [1] * BITS
    else:
        s, a, m = _TABLE[dim]
        m = list(m)
        for i in range(s, BITS):
            new = m[i - s] ^ (m[i - s] << s)
            for k in range(1, s):
                if (a >> (s - 1 - k)) & 1:
                    new ^= m[i - k] << k
            m.append(new)
    v = np.array([m[i] << (BITS - 1 - i) for i in range(BITS)], dtype=np.uint64)
    v.setflags(write=False)
    return v


def sobol_points(dimension: int, count: int, skip: int = 0) -> np.ndarray:
    """Points ``skip .. skip+count-1`` of the Sobol sequence as a (count, dimension) array.

    Point 0 is the origin.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    if dimension > MAX_DIMENSION:
        raise DimensionUnsupported(
            f"dimension {dimension} exceeds the {MAX_DIMENSION} shipped direction-number rows")
    if count < 0 or skip < 0:
        raise ValueError("count and skip must be >= 0")
    if skip + count > 2 ** BITS:
        raise ValueError(f"at most 2**{BITS} points are available")

    idx = np.arange(skip, skip + count, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    V = np.stack([direction_numbers(j + 1) for j in range(dimension)], axis=1)  # (BITS, d)
    out = np.zeros((count, dimension), dtype=np.uint64)
    for bit in range(BITS):
        mask = ((gray >> np.uint64(bit)) & np.uint64(1)).astype(bool)
        if not mask.any():
            continue
        out[mask] ^= V[bit]
    return out.astype(np.float64) * _SCALE


class SobolGenerator:
    """Stateful wrapper that hands out consecutive blocks of the sequence."""

    def __init__(self, dimension: int, skip: int = 0):
        if dimension > MAX_DIMENSION:
            raise DimensionUnsupported(f"dimension {dimension} > {MAX_DIMENSION}")
        self.dimension = dimension
        self.next_index = skip

    def draw(self, n: int) -> np.ndarray:
        pts = sobol_points(self.dimension, n, self.next_index)
        self.next_index += n
        return pts

    def reset(self, skip: int = 0) -> None:
        self.next_index = skip
