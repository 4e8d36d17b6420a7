"""Numerical verification of the line-wise dual certificate conditions.

For every column of the vertical-difference support and every row of the
horizontal-difference support we check two things:

* the sampled Fourier matrix restricted to that line's support is
  injective, with constant ``sigma_min(m^-1/2 P_Omega A P_Delta)``;
* some ``rho = m^-1/2 A^* P_Omega w`` interpolates the sign pattern on the
  support while staying strictly inside the unit disc elsewhere.

Lines sharing the same (support, sign) data are solved once.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core_ops import dft1, diff1, diff2, freq_to_pos, idft1
from .structure import Support2D, gradient_supports, sign_pattern

__all__ = [
    "C1_REFERENCE",
    "Certificate",
    "CertificateError",
    "CertificateReport",
    "LineClass",
    "ProofConstants",
    "c_of_M",
    "construct_certificate",
    "injectivity_constant",
    "certificate_budget",
    "proof_constants",
    "verify_dual_conditions",
]

logger = logging.getLogger(__name__)

C1_REFERENCE = 3.0 / (2.0 * math.sqrt(5.0))
# off-support bound must stay below 1 - SUP_MARGIN to count as strict
SUP_MARGIN = 1e-6


class CertificateError(RuntimeError):
    """Interpolation system is singular (the injectivity condition fails)."""


def _positions(freqs: Iterable[int], n: int) -> np.ndarray:
    # storage positions listed in increasing signed frequency, the order used for w
    return np.array([freq_to_pos(k, n) for k in sorted({int(k) for k in freqs})], dtype=int)


def _support_index(delta: Iterable[int], n: int) -> np.ndarray:
    idx = np.array(sorted({int(j) for j in delta}), dtype=int)
    if idx.size and (idx.min() < 1 or idx.max() > n):
        raise ValueError(f"support indices must lie in 1..{n}")
    return idx - 1


def _fourier_block(rows: np.ndarray, cols: np.ndarray, n: int) -> np.ndarray:
    """Rows (storage positions of frequencies) and columns (0-based spatial) of ``A``."""
    return dft1(np.eye(n), axis=0)[np.ix_(rows, cols)]


def injectivity_constant(omega1, delta_col, n: int) -> float:
    """``sigma_min`` of ``m^-1/2 P_Omega A`` restricted to ``delta_col`` (1-based).

    Returns 0 when the support is larger than the number of samples.
    """
    m = len(set(omega1))
    s = len(set(delta_col))
    if s == 0:
        raise ValueError("delta_col must be nonempty")
    if s > m:
        return 0.0
    B = _fourier_block(_positions(omega1, n), _support_index(delta_col, n), n) / math.sqrt(m)
    return float(scipy.linalg.svdvals(B).min())


@dataclass
class Certificate:
    rho: np.ndarray
    w: np.ndarray
    off_sup_norm: float
    refined: bool = False


def _rho_from_w(w: np.ndarray, rows: np.ndarray, n: int, m: int) -> np.ndarray:
    full = np.zeros(n, dtype=np.complex128)
    full[rows] = w
    # A^* v = n * idft1(v)
    return n * idft1(full) / math.sqrt(m)


def _off_sup(rho: np.ndarray, cols: np.ndarray) -> float:
    off = np.ones(rho.size, dtype=bool)
    off[cols] = False
    return float(np.abs(rho[off]).max(initial=0.0))


def _refine(B: np.ndarray, sign: np.ndarray, rows, cols, n: int, m: int) -> np.ndarray | None:
    """Minimise the off-support sup-norm subject to exact interpolation."""
    import cvxpy as cp

    off = np.setdiff1d(np.arange(n), cols)
    if off.size == 0:
        return None
    R = _fourier_block(rows, off, n).conj().T / math.sqrt(m)
    w = cp.Variable(B.shape[0], complex=True)
    problem = cp.Problem(cp.Minimize(cp.max(cp.abs(R @ w))), [B.conj().T @ w == sign])
    try:
        problem.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        logger.warning("certificate refinement failed to solve")
        return None
    if w.value is None:
        return None
    return np.asarray(w.value)


def construct_certificate(omega1, delta_col, sign_vec, n: int, refine: bool = False) -> Certificate:
    """Minimum-norm ``w`` on ``omega1`` whose ``rho`` interpolates ``sign_vec`` on ``delta_col``.

    ``sign_vec`` is ordered like ``sorted(delta_col)``; the returned ``w``
    lists one coefficient per frequency of ``sorted(omega1)``.  With ``refine`` set
    and the off-support sup-norm not strictly below 1, a small convex
    program searches for a better interpolant; the smaller of the two
    sup-norms is kept.
    """
    rows = _positions(omega1, n)
    cols = _support_index(delta_col, n)
    m = rows.size
    if cols.size == 0:
        return Certificate(np.zeros(n, dtype=np.complex128), np.zeros(m, dtype=np.complex128), 0.0)
    sign = np.asarray(sign_vec, dtype=np.complex128).reshape(-1)
    if sign.size != cols.size:
        raise ValueError(f"sign vector has {sign.size} entries for a support of size {cols.size}")
    if cols.size > m:
        raise CertificateError(f"support of size {cols.size} exceeds {m} samples")
    B = _fourier_block(rows, cols, n) / math.sqrt(m)
    gram = B.conj().T @ B
    if np.linalg.cond(gram) > 1e12:
        raise CertificateError("interpolation Gram matrix is singular")
    coef = scipy.linalg.solve(gram, sign, assume_a="her")
    w = B @ coef
    rho = _rho_from_w(w, rows, n, m)
    cert = Certificate(rho, w, _off_sup(rho, cols))
    if refine and cert.off_sup_norm >= 1.0 - SUP_MARGIN:
        w_ref = _refine(B, sign, rows, cols, n, m)
        if w_ref is not None:
            # restore exact interpolation lost to the convex solver's tolerance
            w_ref = w_ref + B @ scipy.linalg.solve(gram, sign - B.conj().T @ w_ref, assume_a="her")
            rho_ref = _rho_from_w(w_ref, rows, n, m)
            interp_ok = np.abs(rho_ref[cols] - sign).max() <= 1e-6
            sup_ref = _off_sup(rho_ref, cols)
            if interp_ok and sup_ref < cert.off_sup_norm:
                cert = Certificate(rho_ref, w_ref, sup_ref, refined=True)
    return cert


@dataclass
class LineClass:
    """One distinct (support, sign) class of lines."""

    orientation: str  # "col": column of the vertical-difference support; "row": row of the horizontal one
    lines: tuple[int, ...]
    support: tuple[int, ...]
    sigma_min: float
    off_sup_norm: float
    w_norm: float
    feasible: bool
    refined: bool = False


@dataclass
class CertificateReport:
    c1_min: float
    c2_max: float
    L_sq: float
    w_sum: float
    u_sum: float
    per_line: list[LineClass] = field(default_factory=list)
    all_pass: bool = False

    def summary_text(self) -> str:
        keys = ("c1_min", "c2_max", "L_sq", "w_sum", "u_sum", "all_pass")
        lines = [f"{k} = {getattr(self, k)!r}" for k in keys]
        lines.append(f"classes = {len(self.per_line)}")
        return "\n".join(lines) + "\n"

    def csv_rows(self) -> list[dict]:
        return [
            {
                "orientation": c.orientation,
                "lines": " ".join(map(str, c.lines)),
                "support": " ".join(map(str, c.support)),
                "sigma_min": repr(c.sigma_min),
                "off_sup_norm": repr(c.off_sup_norm),
                "w_norm": repr(c.w_norm),
                "feasible": int(c.feasible),
                "refined": int(c.refined),
            }
            for c in self.per_line
        ]


def _verify_lines(orientation, signs: np.ndarray, support: np.ndarray, omega, n: int, refine: bool):
    """``signs``/``support`` hold one line per row (already transposed for columns)."""
    classes: dict[tuple, LineClass] = {}
    total_w = 0.0
    for line in range(n):
        idx = np.flatnonzero(support[line])
        if idx.size == 0:
            continue
        sign = signs[line, idx]
        key = (tuple(idx), np.round(sign, 12).tobytes())
        cls = classes.get(key)
        if cls is None:
            delta = idx + 1
            if len(omega) == 0:
                cls = LineClass(orientation, (), tuple(delta.tolist()), 0.0, math.inf, math.inf, False)
            else:
                sigma = injectivity_constant(omega, delta, n)
                try:
                    cert = construct_certificate(omega, delta, sign, n, refine=refine)
                    cls = LineClass(orientation, (), tuple(delta.tolist()), sigma, cert.off_sup_norm,
                                    float(np.linalg.norm(cert.w)), sigma > 0, cert.refined)
                except CertificateError:
                    cls = LineClass(orientation, (), tuple(delta.tolist()), sigma, math.inf, math.inf, False)
            classes[key] = cls
        cls.lines = cls.lines + (line + 1,)
        total_w += cls.w_norm
    return list(classes.values()), total_w


def verify_dual_conditions(x, delta1: Support2D | None = None, delta2: Support2D | None = None,
                           omega1=(), omega2=(), refine: bool = True) -> CertificateReport:
    """Check injectivity and certificate existence for every line of both supports.

    Columns of ``delta1`` are tested against the horizontal lines ``omega1``
    with signs of the vertical differences; rows of ``delta2`` against the
    vertical lines ``omega2`` with signs of the horizontal differences.
    """
    x = np.asarray(x)
    n = x.shape[0]
    if delta1 is None or delta2 is None:
        g1, g2 = gradient_supports(x)
        delta1 = delta1 if delta1 is not None else g1
        delta2 = delta2 if delta2 is not None else g2
    s1 = sign_pattern(diff1(x))
    s2 = sign_pattern(diff2(x))
    if np.any(delta1.mask & (s1 == 0)) or np.any(delta2.mask & (s2 == 0)):
        logger.warning("supports include positions where the gradient vanishes")
    col_classes, w_sum = _verify_lines("col", s1.T, delta1.mask.T, tuple(omega1), n, refine)
    row_classes, u_sum = _verify_lines("row", s2, delta2.mask, tuple(omega2), n, refine)
    classes = col_classes + row_classes
    c1 = min((c.sigma_min for c in classes), default=math.inf)
    c2 = max((c.off_sup_norm for c in classes), default=0.0)
    all_pass = c1 > 0 and c2 < 1.0 - SUP_MARGIN and all(c.feasible for c in classes)
    return CertificateReport(c1, c2, max(w_sum, u_sum), w_sum, u_sum, classes, all_pass)


def c_of_M(M: int, N: int) -> float:
    """Off-support bound ``max(0.99993, 1 - 0.92 (M^2 - 1) / N^2)``."""
    if not 1 <= M <= N:
        raise ValueError(f"need 1 <= M <= N, got M={M}, N={N}")
    return max(0.99993, 1.0 - 0.92 * (M * M - 1) / (N * N))


def certificate_budget(s: int, M: int, eps: float) -> float:
    """``max(log^2(M/eps), s log(s/eps) log(M/eps))``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return max(math.log(M / eps) ** 2, s * math.log(s / eps) * math.log(M / eps))


@dataclass(frozen=True)
class ProofConstants:
    c1: float = C1_REFERENCE
    c1_inverse: float = 2.0 * math.sqrt(5.0) / 3.0
    c2_floor: float = 0.99993

    @staticmethod
    def budget(s: int, M: int, eps: float) -> float:
        return certificate_budget(s, M, eps)


def proof_constants() -> ProofConstants:
    """Reference constants used when the line conditions hold with high probability."""
    return ProofConstants()
