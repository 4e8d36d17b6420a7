"""Fourier transforms, circular differences, projections and TV norms.

Conventions
-----------
Frequencies live in the signed range ``[N] = {-ceil(N/2)+1, ..., floor(N/2)}``
and are stored at array position ``k mod N`` (the usual FFT layout).
Spatial indices run over ``{1, ..., N}`` and are stored 0-based, so the
spatial sample ``j`` sits at array index ``j - 1``.  Because the transform
sums ``z_j exp(-2 pi i k j / N)`` with ``j`` starting at 1, every output
carries the unit-modulus factor ``exp(-2 pi i k / N)`` relative to a plain
FFT.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from typing import NamedTuple

import numpy as np

__all__ = [
    "GradientPair",
    "IndexSet2D",
    "adjoint_diff",
    "as_image",
    "dft1",
    "dft2",
    "dft2_direct",
    "diff1",
    "diff2",
    "freq_range",
    "freq_to_pos",
    "gradient",
    "idft1",
    "idft2",
    "line_energy_identity_check",
    "pos_to_freq",
    "project",
    "tv_norm",
    "tv_restricted",
]


def freq_range(n: int) -> np.ndarray:
    """Signed frequencies ``[n]`` in increasing order."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return np.arange(-((n + 1) // 2) + 1, n // 2 + 1)


def freq_to_pos(k, n: int):
    """Storage position of signed frequency ``k`` (``k mod n``)."""
    k = np.asarray(k)
    lo, hi = -((n + 1) // 2) + 1, n // 2
    if np.any((k < lo) | (k > hi)):
        raise ValueError(f"frequency outside [{n}] = {{{lo}..{hi}}}: {k}")
    pos = np.mod(k, n)
    return int(pos) if pos.ndim == 0 else pos


def pos_to_freq(p, n: int):
    """Inverse of :func:`freq_to_pos`."""
    p = np.asarray(p)
    k = np.where(p > n // 2, p - n, p)
    return int(k) if k.ndim == 0 else k


def _phase(n: int) -> np.ndarray:
    # exp(-2 pi i k / n) for k = pos_to_freq(0..n-1); accounts for 1-based spatial indexing
    k = pos_to_freq(np.arange(n), n)
    return np.exp(-2j * np.pi * k / n)


def as_image(z) -> np.ndarray:
    """Validate and return ``z`` as a square complex128 array."""
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ValueError(f"expected a square image, got shape {z.shape}")
    if z.shape[0] < 2:
        raise ValueError("image side length must be at least 2")
    return z


def dft1(z, axis: int = -1) -> np.ndarray:
    """Discrete Fourier transform ``(A z)_k = sum_j z_j exp(-2 pi i k j / N)``.

    Applied along ``axis``; the output is in storage order (position
    ``k mod N`` holds frequency ``k``).
    """
    z = np.asarray(z, dtype=np.complex128)
    n = z.shape[axis]
    shape = [1] * z.ndim
    shape[axis] = n
    return np.fft.fft(z, axis=axis) * _phase(n).reshape(shape)


def idft1(w, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`dft1` (includes the ``1/N`` factor)."""
    w = np.asarray(w, dtype=np.complex128)
    n = w.shape[axis]
    shape = [1] * w.ndim
    shape[axis] = n
    return np.fft.ifft(w * np.conj(_phase(n)).reshape(shape), axis=axis)


def dft2(z) -> np.ndarray:
    """Two-dimensional transform: :func:`dft1` down columns, then along rows."""
    return dft1(dft1(as_image(z), axis=0), axis=1)


def idft2(w) -> np.ndarray:
    return idft1(idft1(as_image(w), axis=1), axis=0)


def dft2_direct(z) -> np.ndarray:
    """O(N^4) evaluation of the 2D transform by explicit double sums.

    Kept only as a reference for testing the fast path.
    """
    z = as_image(z)
    n = z.shape[0]
    j = np.arange(1, n + 1)
    k = pos_to_freq(np.arange(n), n)
    out = np.empty((n, n), dtype=np.complex128)
    for p1 in range(n):
        for p2 in range(n):
            e = np.exp(-2j * np.pi * (k[p1] * j[:, None] + k[p2] * j[None, :]) / n)
            out[p1, p2] = np.sum(z * e)
    return out


class GradientPair(NamedTuple):
    """Vertical (``d1``) and horizontal (``d2``) circular differences."""

    d1: np.ndarray
    d2: np.ndarray


def diff1(z) -> np.ndarray:
    """``z[k, j] - z[k-1, j]`` with row 0 wrapping to row N."""
    z = np.asarray(z)
    return z - np.roll(z, 1, axis=0)


def diff2(z) -> np.ndarray:
    """``z[k, j] - z[k, j-1]`` with column 0 wrapping to column N."""
    z = np.asarray(z)
    return z - np.roll(z, 1, axis=1)


def gradient(z) -> GradientPair:
    return GradientPair(diff1(z), diff2(z))


def adjoint_diff(g) -> np.ndarray:
    """Adjoint of :func:`gradient` (a negative divergence)."""
    d1, d2 = g
    d1 = np.asarray(d1)
    d2 = np.asarray(d2)
    if d1.shape != d2.shape:
        raise ValueError(f"gradient components differ in shape: {d1.shape} vs {d2.shape}")
    return (d1 - np.roll(d1, -1, axis=0)) + (d2 - np.roll(d2, -1, axis=1))


class IndexSet2D:
    """A set of signed 2D frequencies ``(k1, k2)`` in ``[N]^2``.

    Backed by a boolean mask in storage order, so membership is O(1).
    """

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask=None):
        self.n = int(n)
        if mask is None:
            mask = np.zeros((self.n, self.n), dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n, self.n):
            raise ValueError(f"mask shape {mask.shape} does not match n={self.n}")
        self.mask = mask
        self.mask.flags.writeable = False

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> IndexSet2D:
        mask = np.zeros((n, n), dtype=bool)
        for k1, k2 in pairs:
            mask[freq_to_pos(k1, n), freq_to_pos(k2, n)] = True
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> IndexSet2D:
        return cls(n, np.ones((n, n), dtype=bool))

    def __contains__(self, pair) -> bool:
        k1, k2 = pair
        try:
            return bool(self.mask[freq_to_pos(k1, self.n), freq_to_pos(k2, self.n)])
        except ValueError:
            return False

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for p1, p2 in zip(*np.nonzero(self.mask)):
            yield pos_to_freq(int(p1), self.n), pos_to_freq(int(p2), self.n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet2D):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.n, self.mask.tobytes()))

    def __repr__(self) -> str:
        return f"IndexSet2D(n={self.n}, size={len(self)})"


def _mask_of(omega, n: int) -> np.ndarray:
    mask = getattr(omega, "mask", None)
    if mask is None:
        omega_set = getattr(omega, "omega", None)
        mask = getattr(omega_set, "mask", omega)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (n, n):
        raise ValueError(f"index set of shape {mask.shape} cannot act on a {n}x{n} image")
    return mask


def project(omega, z) -> np.ndarray:
    """Keep entries of ``z`` whose position lies in ``omega``; zero the rest.

    ``omega`` may be an :class:`IndexSet2D`, a ``SampleSet``, a support
    object with a ``mask`` attribute, or a boolean array.
    """
    z = np.asarray(z)
    mask = _mask_of(omega, z.shape[0])
    return np.where(mask, z, 0)


def tv_norm(z) -> float:
    """Anisotropic TV: ``||diff1 z||_1 + ||diff2 z||_1``."""
    return float(np.abs(diff1(z)).sum() + np.abs(diff2(z)).sum())


def tv_restricted(z, delta1, delta2) -> float:
    """TV counted only on the positions in ``delta1`` (vertical) and ``delta2`` (horizontal)."""
    z = np.asarray(z)
    n = z.shape[0]
    m1 = _mask_of(delta1, n)
    m2 = _mask_of(delta2, n)
    return float(np.abs(diff1(z)[m1]).sum() + np.abs(diff2(z)[m2]).sum())


def line_energy_identity_check(omega1, z, orientation: str = "rows") -> tuple[float, float]:
    """Both sides of the line-sampling energy identity.

    For ``orientation="rows"`` returns
    ``(||P_{omega1 x [N]} dft2(z)||^2, N * sum_k ||P_omega1 A z[:, k]||^2)``;
    for ``"cols"`` the set is ``[N] x omega1`` and the sum runs over rows of ``z``.
    """
    z = as_image(z)
    n = z.shape[0]
    pos = np.array(sorted({freq_to_pos(k, n) for k in omega1}), dtype=int)
    spectrum = dft2(z)
    if orientation == "rows":
        lhs = np.sum(np.abs(spectrum[pos, :]) ** 2)
        per_line = dft1(z, axis=0)[pos, :]
    elif orientation == "cols":
        lhs = np.sum(np.abs(spectrum[:, pos]) ** 2)
        per_line = dft1(z, axis=1)[:, pos]
    else:
        raise ValueError(f"orientation must be 'rows' or 'cols', got {orientation!r}")
    rhs = n * np.sum(np.abs(per_line) ** 2)
    return float(lhs), float(rhs)
