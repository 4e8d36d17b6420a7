"""Gradient-support structure: sparsity per line, separation, distinct supports.

Separation naming follows the definitions literally: ``min_sep_rows``
compares two members that share their *second* coordinate (so it measures
gaps down a column), ``min_sep_cols`` compares members sharing the first
coordinate (gaps along a row).  Distances are linear, ``|j - k| / N``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .core_ops import diff1, diff2

__all__ = [
    "StructureReport",
    "Support2D",
    "column_cardinality",
    "distinct_column_supports",
    "distinct_row_supports",
    "gradient_supports",
    "min_sep_cols",
    "min_sep_rows",
    "row_cardinality",
    "sign_pattern",
    "structure_summary",
    "support_of",
]


class Support2D:
    """Subset of ``{1..N}^2`` stored as an ``N x N`` boolean mask.

    Members are reported 1-based, ``(k, j)`` meaning row ``k``, column ``j``.
    """

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask=None):
        self.n = int(n)
        if mask is None:
            mask = np.zeros((self.n, self.n), dtype=bool)
        mask = np.array(mask, dtype=bool)
        if mask.shape != (self.n, self.n):
            raise ValueError(f"mask shape {mask.shape} does not match n={self.n}")
        mask.flags.writeable = False
        self.mask = mask

    @classmethod
    def from_members(cls, n: int, members: Iterable[tuple[int, int]]) -> Support2D:
        mask = np.zeros((n, n), dtype=bool)
        for k, j in members:
            if not (1 <= k <= n and 1 <= j <= n):
                raise ValueError(f"({k}, {j}) is outside {{1..{n}}}^2")
            mask[k - 1, j - 1] = True
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> Support2D:
        return cls(n, np.ones((n, n), dtype=bool))

    def complement(self) -> Support2D:
        return Support2D(self.n, ~self.mask)

    def column(self, j: int) -> tuple[int, ...]:
        """Row indices (1-based) of members in column ``j`` (1-based)."""
        return tuple(int(k) + 1 for k in np.flatnonzero(self.mask[:, j - 1]))

    def row(self, k: int) -> tuple[int, ...]:
        return tuple(int(j) + 1 for j in np.flatnonzero(self.mask[k - 1, :]))

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for k, j in zip(*np.nonzero(self.mask)):
            yield int(k) + 1, int(j) + 1

    def __contains__(self, member) -> bool:
        k, j = member
        return 1 <= k <= self.n and 1 <= j <= self.n and bool(self.mask[k - 1, j - 1])

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Support2D):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.n, self.mask.tobytes()))

    def __repr__(self) -> str:
        return f"Support2D(n={self.n}, size={len(self)})"


def support_of(z, tol: float = 0.0) -> Support2D:
    """Positions where ``|z| > tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    z = np.asarray(z)
    return Support2D(z.shape[0], np.abs(z) > tol)


def column_cardinality(delta: Support2D) -> int:
    """Largest number of members in any single column."""
    return int(delta.mask.sum(axis=0).max(initial=0))


def row_cardinality(delta: Support2D) -> int:
    return int(delta.mask.sum(axis=1).max(initial=0))


def _min_gap(lines: np.ndarray) -> int | None:
    # lines: boolean array, one line per row; smallest gap between members of the same line
    best = None
    for line in lines:
        idx = np.flatnonzero(line)
        if idx.size >= 2:
            g = int(np.diff(idx).min())
            best = g if best is None else min(best, g)
    return best


def min_sep_rows(delta: Support2D) -> float | None:
    """Smallest ``|j - k| / N`` over pairs ``(j, n), (k, n)`` in ``delta``; ``None`` if no such pair."""
    g = _min_gap(delta.mask.T)
    return None if g is None else g / delta.n


def min_sep_cols(delta: Support2D) -> float | None:
    """Smallest ``|j - k| / N`` over pairs ``(n, j), (n, k)`` in ``delta``; ``None`` if no such pair."""
    g = _min_gap(delta.mask)
    return None if g is None else g / delta.n


def _canonical(z: np.ndarray) -> np.ndarray:
    # + 0.0 turns -0.0 into 0.0 so equal values have equal bytes
    return np.ascontiguousarray(np.asarray(z, dtype=np.complex128) + 0.0)


def distinct_column_supports(z) -> int:
    """Number of distinct columns of ``z`` compared as exact vectors."""
    z = _canonical(z)
    return len({z[:, j].tobytes() for j in range(z.shape[1])})


def distinct_row_supports(z) -> int:
    z = _canonical(z)
    return len({z[k, :].tobytes() for k in range(z.shape[0])})


def sign_pattern(w) -> np.ndarray:
    """Entrywise ``w / |w|`` with ``0`` where ``w == 0``."""
    w = np.asarray(w, dtype=np.complex128)
    mag = np.abs(w)
    out = np.zeros_like(w)
    nz = mag > 0
    out[nz] = w[nz] / mag[nz]
    return out


def default_tol(x) -> float:
    g1, g2 = diff1(x), diff2(x)
    peak = max(np.abs(g1).max(initial=0.0), np.abs(g2).max(initial=0.0))
    return 1e-9 * float(peak)


def gradient_supports(x, tol: float | None = None) -> tuple[Support2D, Support2D]:
    """Supports of the vertical and horizontal differences of ``x``."""
    x = np.asarray(x)
    if tol is None:
        tol = default_tol(x)
    return support_of(diff1(x), tol), support_of(diff2(x), tol)


@dataclass(frozen=True)
class StructureReport:
    """Structure quantities of a signal's gradient supports.

    ``nu_row`` is the separation down the columns of the vertical-difference
    support, ``nu_col`` the separation along the rows of the
    horizontal-difference support (``None`` when undefined).  ``M1`` and
    ``M2`` are the bandwidths implied by those separations.
    """

    n: int
    s1: int
    s2: int
    nu_row: float | None
    nu_col: float | None
    T1: int
    T2: int
    M1: int
    M2: int

    def to_text(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            lines.append(f"{key} = {'undefined' if value is None else value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> StructureReport:
        values = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if value == "undefined":
                values[key] = None
            elif key.startswith("nu"):
                values[key] = float(value)
            else:
                values[key] = int(value)
        return cls(**values)


def _bandwidth(gap: int | None, n: int, default: int) -> int:
    if gap is None:
        return default
    # floor(2 / (gap / n)) in exact arithmetic, capped at n so that [M] stays inside [N]
    return min(n, int(Fraction(2 * n, gap)))


def structure_summary(x, tol: float | None = None, bandwidth: int | None = None) -> StructureReport:
    """Compute the structure report of ``x``.

    ``bandwidth`` is used for ``M1``/``M2`` when the corresponding
    separation is undefined (at most one jump per line); it defaults to
    ``N // 4``.
    """
    x = np.asarray(x)
    n = x.shape[0]
    if tol is None:
        tol = default_tol(x)
    d1, d2 = gradient_supports(x, tol)
    pattern1 = np.where(d1.mask, sign_pattern(diff1(x)), 0)
    pattern2 = np.where(d2.mask, sign_pattern(diff2(x)), 0)
    gap1 = _min_gap(d1.mask.T)
    gap2 = _min_gap(d2.mask)
    default = bandwidth if bandwidth is not None else max(1, n // 4)
    return StructureReport(
        n=n,
        s1=column_cardinality(d1),
        s2=row_cardinality(d2),
        nu_row=None if gap1 is None else gap1 / n,
        nu_col=None if gap2 is None else gap2 / n,
        T1=distinct_column_supports(pattern1),
        T2=distinct_row_supports(pattern2),
        M1=_bandwidth(gap1, n, default),
        M2=_bandwidth(gap2, n, default),
    )
