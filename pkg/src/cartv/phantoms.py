"""Piecewise-constant test images with controlled gradient structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .io import read_tvls
from .sampling import make_rng
from .structure import StructureReport, Support2D, gradient_supports, structure_summary

__all__ = ["KINDS", "Phantom", "make_phantom", "separated_breakpoints"]

KINDS = ("rect", "line-grid", "random-piecewise", "stripes", "from-file")


@dataclass(frozen=True)
class Phantom:
    image: np.ndarray
    kind: str
    delta1: Support2D
    delta2: Support2D
    structure: StructureReport
    params: dict = field(default_factory=dict)


def separated_breakpoints(n: int, count: int, min_gap: int, rng) -> np.ndarray:
    """``count`` sorted positions in ``0..n-1`` with circular gaps of at least ``min_gap``.

    The spare room ``n - count * min_gap`` is split into a uniformly random
    composition over the gaps and the pattern is rotated uniformly, so tight
    requests (``count * min_gap == n``) succeed without rejection loops.
    """
    if count == 0:
        return np.zeros(0, dtype=int)
    if count * min_gap > n:
        raise ValueError(f"cannot place {count} breakpoints {min_gap} apart on a circle of {n}")
    slack = n - count * min_gap
    cuts = np.sort(rng.choice(slack + count - 1, size=count - 1, replace=False))
    extra = np.diff(np.r_[-1, cuts, slack + count - 1]) - 1
    gaps = min_gap + extra
    start = int(rng.integers(n))
    return np.sort((start + np.r_[0, np.cumsum(gaps)[:-1]]) % n)


def _piece_labels(n: int, breaks: np.ndarray) -> np.ndarray:
    # label[i] = index of the piece containing position i; pieces start at breakpoints and wrap
    if breaks.size == 0:
        return np.zeros(n, dtype=int)
    labels = np.searchsorted(breaks, np.arange(n), side="right") - 1
    labels[labels < 0] = breaks.size - 1
    return labels


def _rect(n, rng, rows=(1, 2), cols=(1, 2), value=1.0):
    x = np.zeros((n, n))
    x[rows[0] - 1 : rows[1] - 1, cols[0] - 1 : cols[1] - 1] = value
    return x


def _line_grid(n, rng, K1=4, K2=4, offset1=None, offset2=None):
    # K equispaced jump lines per direction, independent normal block values; offsets random unless given
    offset1 = int(rng.integers(n)) if offset1 is None else offset1
    offset2 = int(rng.integers(n)) if offset2 is None else offset2
    b1 = (offset1 + np.round(np.arange(K1) * n / K1).astype(int)) % n
    b2 = (offset2 + np.round(np.arange(K2) * n / K2).astype(int)) % n
    values = rng.standard_normal((max(K1, 1), max(K2, 1)))
    return values[np.ix_(_piece_labels(n, np.sort(b1)), _piece_labels(n, np.sort(b2)))]


def _random_piecewise(n, rng, s1=3, s2=3, sep=0.125, levels=None):
    # block values uniform on [-2, 2], or drawn from ``levels`` (equal neighbours then merge)
    if s1 * sep > 1 or s2 * sep > 1:
        raise ValueError(f"separation {sep} is infeasible for {max(s1, s2)} jumps per line")
    gap = math.ceil(sep * n - 1e-9)
    b1 = separated_breakpoints(n, s1, gap, rng)
    b2 = separated_breakpoints(n, s2, gap, rng)
    shape = (max(s1, 1), max(s2, 1))
    if levels is None:
        values = rng.uniform(-2.0, 2.0, size=shape)
    else:
        values = rng.choice(np.asarray(levels, dtype=float), size=shape)
    return values[np.ix_(_piece_labels(n, b1), _piece_labels(n, b2))]


def _stripes(n, rng, s1=6, sep=0.125, bars=2, bar_height=12, bar_width=None):
    # full-width horizontal stripes plus bars whose rows carry two jumps each
    if s1 * sep > 1:
        raise ValueError(f"separation {sep} is infeasible for {s1} jumps per column")
    gap = math.ceil(sep * n - 1e-9)
    breaks = separated_breakpoints(n, s1, gap, rng)
    levels = rng.uniform(-2.0, 2.0, size=max(s1, 1))
    x = np.repeat(levels[_piece_labels(n, breaks)][:, None], n, axis=1)
    width = n // 2 if bar_width is None else bar_width
    for _ in range(bars):
        rows = (rng.integers(n) + np.arange(bar_height)) % n
        cols = (rng.integers(n) + np.arange(width)) % n
        x[np.ix_(rows, cols)] += rng.uniform(1.0, 2.0)
    return x


_BUILDERS = {
    "rect": _rect,
    "line-grid": _line_grid,
    "random-piecewise": _random_piecewise,
    "stripes": _stripes,
}


def make_phantom(kind: str, n: int = 64, seed=0, tol: float | None = None, **params) -> Phantom:
    """Build a phantom and attach its gradient supports and structure report.

    Kinds: ``rect`` (``rows``/``cols`` as 1-based half-open ranges),
    ``line-grid`` (``K1`` x ``K2`` equispaced blocks), ``random-piecewise``
    (``s1``/``s2`` jumps per line at least ``sep`` apart), ``stripes``
    (horizontal stripes plus bars) and ``from-file`` (``path`` to a TVLS
    image).
    """
    if kind == "from-file":
        image = read_tvls(params["path"])
        n = image.shape[0]
    elif kind in _BUILDERS:
        rng = make_rng(seed, 0)
        image = _BUILDERS[kind](n, rng, **params).astype(np.complex128)
    else:
        raise ValueError(f"unknown phantom kind {kind!r}; choose from {KINDS}")
    d1, d2 = gradient_supports(image, tol)
    return Phantom(image, kind, d1, d2, structure_summary(image, tol), dict(params))
