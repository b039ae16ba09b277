"""Truncated power series for the analytic symbols fed into the matrix constructors.

Every series is a finite vector of Taylor coefficients ``c[0..N]`` stored in
complex double precision.  Truncation degrees are always explicit.
"""

from __future__ import annotations

import cmath
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CoefficientSequence",
    "log_symbol",
    "blaschke_symbol",
    "blaschke_factor",
    "singular_inner_exponent",
    "series_multiply",
    "series_exp",
    "backward_shift",
    "read_coefficients_csv",
    "write_coefficients_csv",
]


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Taylor coefficients ``coeffs[k]`` of ``z**k``, ``k = 0..N``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size < 1:
            raise ValueError("coefficient sequence must have length >= 1")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficient sequence contains NaN or Inf")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, values: Iterable[complex]) -> "CoefficientSequence":
        return cls(np.asarray(list(values), dtype=np.complex128))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __len__(self) -> int:
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def __neg__(self) -> "CoefficientSequence":
        return CoefficientSequence(-self.coeffs)

    def scaled(self, c: complex) -> "CoefficientSequence":
        return CoefficientSequence(c * self.coeffs)

    def padded(self, length: int) -> np.ndarray:
        """Coefficients ``0..length-1``, zero padded or truncated."""
        out = np.zeros(length, dtype=np.complex128)
        m = min(length, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return out

    def is_real(self) -> bool:
        return not np.any(self.coeffs.imag)

    def __repr__(self) -> str:
        return f"CoefficientSequence(degree={self.degree})"


def _check_degree(N) -> int:
    if int(N) != N or N < 1:
        raise ValueError(f"truncation degree must be a positive integer, got {N!r}")
    return int(N)


def log_symbol(N: int) -> CoefficientSequence:
    """Coefficients of ``log 1/(1-z)``: ``0, 1, 1/2, ..., 1/N``."""
    N = _check_degree(N)
    c = np.zeros(N + 1, dtype=np.complex128)
    c[1:] = 1.0 / np.arange(1, N + 1)
    return CoefficientSequence(c)


def blaschke_factor(a: float, N: int) -> CoefficientSequence:
    """Expansion of ``(a - z)/(1 - a z)`` for real ``0 <= a < 1``.

    Uses the closed form ``a, -(1-a^2), -(1-a^2) a, -(1-a^2) a^2, ...``.
    """
    N = _check_degree(N)
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise ValueError(f"Blaschke zero must lie in [0, 1), got {a}")
    c = np.empty(N + 1, dtype=np.complex128)
    c[0] = a
    c[1:] = -(1.0 - a * a) * a ** np.arange(N)
    return CoefficientSequence(c)


def blaschke_symbol(zeros: Sequence[float], N: int) -> CoefficientSequence:
    N = _check_degree(N)
    out = CoefficientSequence(np.ones(1))
    for a in zeros:
        out = series_multiply(out, blaschke_factor(a, N), N)
    if len(out) < N + 1:
        out = CoefficientSequence(out.padded(N + 1))
    return out


def singular_inner_exponent(N: int) -> CoefficientSequence:
    """Coefficients of ``-(1+z)/(1-z)`` = ``-1, -2, -2, ...``.

    ``series_exp`` of this is the atomic singular inner function.
    """
    N = _check_degree(N)
    c = np.full(N + 1, -2.0, dtype=np.complex128)
    c[0] = -1.0
    return CoefficientSequence(c)


def series_multiply(f: CoefficientSequence, g: CoefficientSequence, N: int) -> CoefficientSequence:
    """Cauchy product of ``f`` and ``g`` truncated at degree ``N``."""
    N = _check_degree(N)
    a = f.coeffs[: N + 1]
    b = g.coeffs[: N + 1]
    prod = np.convolve(a, b)[: N + 1]
    return CoefficientSequence(np.concatenate([prod, np.zeros(N + 1 - prod.size)]))


def series_exp(f: CoefficientSequence, N: int) -> CoefficientSequence:
    """``exp(f)`` truncated at degree ``N``.

    Recurrence ``n h[n] = sum_{k=1..n} k f[k] h[n-k]`` with ``h[0] = exp(f[0])``.
    """
    N = _check_degree(N)
    try:
        h0 = cmath.exp(complex(f.coeffs[0]))
    except OverflowError as exc:
        raise OverflowError(f"exp(f[0]) overflows for f[0] = {f.coeffs[0]}") from exc
    if not cmath.isfinite(h0):
        raise OverflowError(f"exp(f[0]) overflows for f[0] = {f.coeffs[0]}")
    kf = np.arange(N + 1) * f.padded(N + 1)
    h = np.zeros(N + 1, dtype=np.complex128)
    h[0] = h0
    for n in range(1, N + 1):
        # kf[1..n] against h[n-1..0]
        h[n] = np.dot(kf[1 : n + 1], h[n - 1 :: -1]) / n
    if not np.all(np.isfinite(h)):
        raise OverflowError("series_exp overflowed; coefficients are not finite")
    return CoefficientSequence(h)


def backward_shift(f: CoefficientSequence) -> CoefficientSequence:
    """``(f(z) - f(0))/z``."""
    if len(f) < 2:
        raise ValueError("backward shift needs a sequence of length >= 2")
    return CoefficientSequence(f.coeffs[1:])


def write_coefficients_csv(f: CoefficientSequence, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for k, c in enumerate(f.coeffs):
            w.writerow([k, repr(float(c.real)), repr(float(c.imag))])


def read_coefficients_csv(path) -> CoefficientSequence:
    rows = []
    with open(Path(path), newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((int(row["index"]), float(row["real"]), float(row.get("imag") or 0.0)))
    if not rows:
        raise ValueError(f"{path}: no coefficients")
    size = max(r[0] for r in rows) + 1
    c = np.zeros(size, dtype=np.complex128)
    for k, re, im in rows:
        c[k] = complex(re, im)
    return CoefficientSequence(c)
