"""File formats: TVLS binary images, PGM previews, CSV and key-value text.

TVLS layout::

    8 bytes   magic b"TVLS0001"
    8 bytes   N, little-endian uint64
    16*N*N    entries as interleaved little-endian float64 (re, im), row-major
"""

from __future__ import annotations

import csv
import io as _io
import struct
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np

from .core_ops import IndexSet2D
from .structure import Support2D

__all__ = [
    "MAGIC",
    "TVLSFormatError",
    "read_kv",
    "read_mask_csv",
    "read_support_csv",
    "read_tvls",
    "write_csv",
    "write_kv",
    "write_mask_csv",
    "write_mask_pgm",
    "write_pgm",
    "write_support_csv",
    "write_tvls",
]

MAGIC = b"TVLS0001"


class TVLSFormatError(ValueError):
    pass


def write_tvls(path, z) -> None:
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ValueError(f"expected a square image, got shape {z.shape}")
    n = z.shape[0]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", n))
        fh.write(np.ascontiguousarray(z).astype("<c16").tobytes())


def read_tvls(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise TVLSFormatError(f"{path}: bad magic {data[:8]!r}")
    (n,) = struct.unpack("<Q", data[8:16])
    expected = 16 + 16 * n * n
    if len(data) != expected:
        raise TVLSFormatError(f"{path}: expected {expected} bytes for N={n}, found {len(data)}")
    return np.frombuffer(data[16:], dtype="<c16").reshape(n, n).astype(np.complex128)


def write_pgm(path, z) -> None:
    """Binary PGM (P5) of ``|z|`` scaled linearly to 0..255."""
    mag = np.abs(np.asarray(z))
    lo, hi = float(mag.min()), float(mag.max())
    if hi > lo:
        img = np.round(255.0 * (mag - lo) / (hi - lo))
    else:
        img = np.zeros_like(mag)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.astype(np.uint8).tobytes())


def write_mask_pgm(path, omega) -> None:
    """0/1 sampling mask with the zero frequency at the centre."""
    mask = np.asarray(getattr(omega, "mask", omega), dtype=float)
    write_pgm(path, np.fft.fftshift(mask))


def write_support_csv(path, delta: Support2D) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("k,j\n")
        for k, j in delta:
            fh.write(f"{k},{j}\n")


def read_support_csv(path, n: int) -> Support2D:
    members = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            members.append((int(row["k"]), int(row["j"])))
    return Support2D.from_members(n, members)


def write_mask_csv(path, omega) -> None:
    """Signed frequencies ``k1,k2``; line-structured sets also record their lines in comments."""
    index_set = getattr(omega, "omega", omega)
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={index_set.n}\n")
        if getattr(omega, "omega1", None) or getattr(omega, "omega2", None):
            fh.write("# omega1=" + " ".join(map(str, omega.omega1)) + "\n")
            fh.write("# omega2=" + " ".join(map(str, omega.omega2)) + "\n")
        fh.write("k1,k2\n")
        for k1, k2 in index_set:
            fh.write(f"{k1},{k2}\n")


def read_mask_csv(path):
    """Read a mask written by :func:`write_mask_csv`; returns a ``SampleSet``."""
    from .sampling import SampleSet, cartesian_line_set

    n = None
    lines: dict[str, tuple[int, ...]] = {}
    pairs = []
    with open(path) as fh:
        body = []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "n":
                    n = int(value)
                else:
                    lines[key] = tuple(int(v) for v in value.split())
            else:
                body.append(line)
    for row in csv.DictReader(_io.StringIO("".join(body))):
        pairs.append((int(row["k1"]), int(row["k2"])))
    if n is None:
        raise ValueError(f"{path}: missing '# n=' header")
    index_set = IndexSet2D.from_pairs(n, pairs)
    if "omega1" in lines or "omega2" in lines:
        sample = cartesian_line_set(lines.get("omega1", ()), lines.get("omega2", ()), n)
        if sample.omega == index_set:
            return sample
    return SampleSet(n, index_set, kind="points")


def _format(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_format(v) for v in value)
    return str(value)


def write_kv(path, values: Mapping) -> None:
    with open(path, "w") as fh:
        for key, value in values.items():
            fh.write(f"{key} = {_format(value)}\n")


def read_kv(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}: expected 'key = value', got {raw!r}")
        out[key.strip()] = value.strip()
    return out


def write_csv(path, rows: Iterable[Mapping], fieldnames: list[str] | None = None) -> None:
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _format(row.get(k, "")) for k in fieldnames})
