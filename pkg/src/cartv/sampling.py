"""Cartesian line sampling sets, pointwise baselines and sample budgets."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core_ops import IndexSet2D, freq_range, freq_to_pos

__all__ = [
    "Budget",
    "LineSamplingSpec",
    "SampleSet",
    "cartesian_line_set",
    "draw_theorem_sampling",
    "make_rng",
    "oriented_line_sampling",
    "theorem_budget",
    "unif_without_replacement",
    "uniform_pointwise_mask",
    "variable_density_mask",
]


def make_rng(seed, *stream: int) -> np.random.Generator:
    """Counter-based (Philox) generator for ``seed`` and an optional stream key.

    Distinct stream keys give statistically independent generators, so
    trials and purposes (phantom, sampling, noise) can be drawn in any
    order or in parallel without changing results.  A ``Generator`` passed
    as ``seed`` is returned unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def unif_without_replacement(population: Iterable[int], m: int, seed) -> frozenset[int]:
    """Draw ``m`` distinct members of ``population`` uniformly at random."""
    pool = sorted(set(int(v) for v in population))
    if not 0 <= m <= len(pool):
        raise ValueError(f"cannot draw {m} elements from a set of size {len(pool)}")
    rng = make_rng(seed)
    idx = rng.choice(len(pool), size=m, replace=False)
    return frozenset(pool[i] for i in idx)


@dataclass(frozen=True)
class SampleSet:
    """A 2D frequency set together with its line structure.

    ``omega1`` lists the horizontal k-space lines ``{k1} x [N]`` and
    ``omega2`` the vertical lines ``[N] x {k2}``.  Pointwise masks have
    empty line sets.
    """

    n: int
    omega: IndexSet2D
    omega1: tuple[int, ...] = ()
    omega2: tuple[int, ...] = ()
    kind: str = "lines"

    @property
    def mask(self) -> np.ndarray:
        return self.omega.mask

    @property
    def m(self) -> int:
        return len(self.omega)

    @property
    def includes_zero(self) -> bool:
        return (0, 0) in self.omega

    @property
    def m1(self) -> int:
        return len(self.omega1)

    @property
    def m2(self) -> int:
        return len(self.omega2)

    def transpose(self) -> SampleSet:
        return SampleSet(self.n, IndexSet2D(self.n, self.mask.T.copy()), self.omega2, self.omega1, self.kind)


def cartesian_line_set(omega1: Iterable[int], omega2: Iterable[int], n: int) -> SampleSet:
    """``{(0,0)} | (omega1 x [N]) | ([N] x omega2)``."""
    o1 = tuple(sorted(set(int(k) for k in omega1)))
    o2 = tuple(sorted(set(int(k) for k in omega2)))
    mask = np.zeros((n, n), dtype=bool)
    mask[0, 0] = True
    if o1:
        mask[freq_to_pos(np.array(o1), n), :] = True
    if o2:
        mask[:, freq_to_pos(np.array(o2), n)] = True
    return SampleSet(n, IndexSet2D(n, mask), o1, o2, "lines")


class Budget(NamedTuple):
    m1: int
    m2: int
    consistent1: bool
    consistent2: bool


def _line_budget(s, T, M, eps, C):
    m = math.ceil(C * s * math.log(T * s / eps) * math.log(T * M / eps))
    return min(int(M), m), s * math.log(T * s / eps) >= math.log(T * M / eps)


def theorem_budget(s1, s2, T1, T2, M1, M2, eps, C: float = 1.0) -> Budget:
    """Line counts ``m_i = min(M_i, ceil(C s_i log(T_i s_i/eps) log(T_i M_i/eps)))``.

    ``C`` stands in for the unspecified constant of the recovery guarantee.
    ``consistent*`` report whether ``s_i log(T_i s_i/eps) >= log(T_i M_i/eps)``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if C <= 0:
        raise ValueError("C must be positive")
    for name, v in (("s1", s1), ("s2", s2), ("T1", T1), ("T2", T2), ("M1", M1), ("M2", M2)):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    m1, ok1 = _line_budget(s1, T1, M1, eps, C)
    m2, ok2 = _line_budget(s2, T2, M2, eps, C)
    return Budget(m1, m2, ok1, ok2)


@dataclass(frozen=True)
class LineSamplingSpec:
    n: int
    M1: int
    M2: int
    m1: int = 0
    m2: int = 0
    seed: int = 0
    deterministic: bool = False
    stream: tuple[int, ...] = field(default=())

    def __post_init__(self):
        for name in ("M1", "M2"):
            M = getattr(self, name)
            if not 1 <= M <= self.n:
                raise ValueError(f"{name}={M} must lie in [1, n={self.n}]")
        if not self.deterministic:
            if not 0 <= self.m1 <= self.M1 or not 0 <= self.m2 <= self.M2:
                raise ValueError(f"line counts ({self.m1}, {self.m2}) exceed bandwidths ({self.M1}, {self.M2})")


def draw_theorem_sampling(spec: LineSamplingSpec) -> SampleSet:
    """Random lines ``Unif([M1], m1)`` and ``Unif([M2], m2)``, or all of them when deterministic."""
    if spec.deterministic:
        return cartesian_line_set(freq_range(spec.M1), freq_range(spec.M2), spec.n)
    rng = make_rng(spec.seed, *spec.stream)
    o1 = unif_without_replacement(freq_range(spec.M1), spec.m1, rng)
    o2 = unif_without_replacement(freq_range(spec.M2), spec.m2, rng)
    return cartesian_line_set(o1, o2, spec.n)


def oriented_line_sampling(n: int, M_random: int, m_random: int, M_low: int, seed, orientation: str = "a",
                           stream: tuple[int, ...] = ()) -> SampleSet:
    """Random lines in one direction plus the lowest lines in the other.

    Orientation ``"a"`` draws ``m_random`` horizontal lines from the nonzero
    frequencies of ``[M_random]`` and keeps the vertical lines ``[M_low]``;
    ``"b"`` is the transpose of the same draw.
    """
    rng = make_rng(seed, *stream)
    pool = [k for k in freq_range(M_random) if k != 0]
    random_lines = unif_without_replacement(pool, m_random, rng)
    low = freq_range(M_low)
    if orientation == "a":
        return cartesian_line_set(random_lines, low, n)
    if orientation == "b":
        return cartesian_line_set(low, random_lines, n)
    raise ValueError(f"orientation must be 'a' or 'b', got {orientation!r}")


def uniform_pointwise_mask(n: int, m: int, seed, stream: tuple[int, ...] = ()) -> SampleSet:
    """``m`` distinct frequencies uniformly at random; ``(0, 0)`` always included."""
    if not 1 <= m <= n * n:
        raise ValueError(f"m must lie in [1, {n * n}], got {m}")
    rng = make_rng(seed, *stream)
    flat = np.zeros(n * n, dtype=bool)
    flat[0] = True
    flat[1 + rng.choice(n * n - 1, size=m - 1, replace=False)] = True
    return SampleSet(n, IndexSet2D(n, flat.reshape(n, n)), kind="points")


def variable_density_mask(n: int, m: int, seed, power: float = 2.0, stream: tuple[int, ...] = ()) -> SampleSet:
    """Pointwise mask with density ``~ (1 + |k|)^-power``; ``(0, 0)`` always included.

    A simple low-frequency-dense baseline.
    """
    if not 1 <= m <= n * n:
        raise ValueError(f"m must lie in [1, {n * n}], got {m}")
    rng = make_rng(seed, *stream)
    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    radius = np.hypot(k[:, None], k[None, :]).ravel()
    weight = (1.0 + radius[1:]) ** (-power)
    flat = np.zeros(n * n, dtype=bool)
    flat[0] = True
    flat[1 + rng.choice(n * n - 1, size=m - 1, replace=False, p=weight / weight.sum())] = True
    return SampleSet(n, IndexSet2D(n, flat.reshape(n, n)), kind="points")
