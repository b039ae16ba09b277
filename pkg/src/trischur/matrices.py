"""Finite N x N sections of the infinite matrices built from symbols and kernels.

Convention: entry ``[n, k]`` is row ``n`` (output coefficient), column ``k``
(input coefficient), so a lower triangular matrix has ``k <= n``.
"""

from __future__ import annotations

import csv
import enum
import struct
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .kernels import KernelSpec
from .series import CoefficientSequence

__all__ = [
    "Structure",
    "FiniteSection",
    "WeightSequence",
    "KINDS",
    "build_structured",
    "hadamard",
    "triangular_truncation",
    "multiplication_matrix",
    "cesaro_operator_matrix",
    "volterra_operator_matrix",
    "weighted_conjugation",
    "e_lambda_parts",
    "dif_identity_residual",
    "IteratedLimits",
    "iterated_limit_diagnostic",
    "write_section_csv",
    "read_section_csv",
    "write_section_binary",
    "read_section_binary",
]


class Structure(enum.Enum):
    GENERAL = 0
    LOWER_TRIANGULAR = 1


@dataclass(frozen=True, eq=False)
class FiniteSection:
    """Dense immutable N x N section.

    Entries are stored as float64 when they are all real and complex128
    otherwise; the values are the same either way.
    """

    entries: np.ndarray
    structure: Structure = Structure.GENERAL

    def __post_init__(self):
        a = np.array(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"section must be a nonempty square matrix, got shape {a.shape}")
        if np.iscomplexobj(a):
            a = a.astype(np.complex128)
            if not np.any(a.imag):
                a = a.real.copy()
        else:
            a = a.astype(np.float64)
        if not np.all(np.isfinite(a)):
            raise ValueError("section has NaN or Inf entries")
        if self.structure is Structure.LOWER_TRIANGULAR and np.any(np.triu(a, 1)):
            raise ValueError("lower triangular section has nonzero entries above the diagonal")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    @property
    def is_lower(self) -> bool:
        return self.structure is Structure.LOWER_TRIANGULAR

    def is_nonnegative(self) -> bool:
        return not np.iscomplexobj(self.entries) and bool(np.all(self.entries >= 0))

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __sub__(self, other: "FiniteSection") -> "FiniteSection":
        _check_same_size(self, other)
        structure = Structure.LOWER_TRIANGULAR if self.is_lower and other.is_lower else Structure.GENERAL
        return FiniteSection(self.entries - other.entries, structure)

    def __add__(self, other: "FiniteSection") -> "FiniteSection":
        _check_same_size(self, other)
        structure = Structure.LOWER_TRIANGULAR if self.is_lower and other.is_lower else Structure.GENERAL
        return FiniteSection(self.entries + other.entries, structure)

    def scaled(self, c: complex) -> "FiniteSection":
        return FiniteSection(c * self.entries, self.structure)

    def transpose(self) -> "FiniteSection":
        return FiniteSection(self.entries.T.copy(), Structure.GENERAL)

    def leading(self, M: int) -> "FiniteSection":
        """Upper-left ``M x M`` corner."""
        return FiniteSection(self.entries[:M, :M].copy(), self.structure)

    def __repr__(self) -> str:
        return f"FiniteSection(N={self.N}, structure={self.structure.name}, dtype={self.entries.dtype})"


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Positive weights ``omega_n`` of a weighted coefficient space."""

    omega: np.ndarray

    def __post_init__(self):
        w = np.array(self.omega, dtype=np.float64).ravel()
        if w.size < 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        w.flags.writeable = False
        object.__setattr__(self, "omega", w)

    @classmethod
    def unit(cls, length: int) -> "WeightSequence":
        return cls(np.ones(length))

    @classmethod
    def dirichlet(cls, length: int) -> "WeightSequence":
        """``omega_n = n + 1``."""
        return cls(np.arange(1.0, length + 1.0))

    @classmethod
    def from_csv(cls, path) -> "WeightSequence":
        vals = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or not row[-1].strip():
                    continue
                try:
                    vals.append(float(row[-1]))
                except ValueError:
                    continue  # header
        return cls(np.asarray(vals))

    def __len__(self) -> int:
        return self.omega.size

    def ratio_deviation(self) -> float:
        """``max_n |omega_n / omega_{n+1} - 1|``; small values mean the ratio tends to 1."""
        if self.omega.size < 2:
            return 0.0
        return float(np.max(np.abs(self.omega[:-1] / self.omega[1:] - 1.0)))

    def is_unit(self) -> bool:
        return bool(np.all(self.omega == 1.0))


def _check_same_size(A: FiniteSection, B: FiniteSection) -> None:
    if A.N != B.N:
        raise ValueError(f"dimension mismatch: {A.N} vs {B.N}")


def _grid(N: int):
    n = np.arange(N)[:, None]
    k = np.arange(N)[None, :]
    return n, k


def _lower(values: np.ndarray, N: int) -> FiniteSection:
    n, k = _grid(N)
    return FiniteSection(np.where(k <= n, values, 0.0), Structure.LOWER_TRIANGULAR)


def _cesaro(N):
    n, k = _grid(N)
    return _lower(np.broadcast_to(1.0 / (n + 1.0), (N, N)), N)


def _fejer(N):
    n, k = _grid(N)
    # (n+1-k)/(n+1) rather than 1 - k/(n+1): no cancellation near the diagonal
    return _lower((n + 1.0 - k) / (n + 1.0), N)


def _fejer_power(N, gamma):
    n, k = _grid(N)
    return _lower(np.maximum((n + 1.0 - k) / (n + 1.0), 0.0) ** gamma, N)


def _lower_ones(N):
    return _lower(np.ones((N, N)), N)


def _hilbert_transform(N):
    n, k = _grid(N)
    d = (n - k).astype(np.float64)
    np.fill_diagonal(d, np.inf)
    return FiniteSection(1.0 / d, Structure.GENERAL)


def _hankel(N, alpha):
    alpha = np.asarray(getattr(alpha, "coeffs", alpha))
    if alpha.size < 2 * N - 1:
        raise ValueError(f"hankel section of size {N} needs {2 * N - 1} sequence terms, got {alpha.size}")
    n, k = _grid(N)
    return FiniteSection(alpha[n + k], Structure.GENERAL)


def _toeplitz_lower(N, a):
    a = np.asarray(getattr(a, "coeffs", a))
    padded = np.zeros(N, dtype=a.dtype)
    m = min(N, a.size)
    padded[:m] = a[:m]
    n, k = _grid(N)
    return _lower(padded[np.clip(n - k, 0, N - 1)], N)


def _ricard_E(N):
    n, k = _grid(N)
    return FiniteSection((k + 1.0) / (k + n + 1.0), Structure.GENERAL)


def _e_lambda(N, lam):
    lam = complex(lam)
    if not lam.real > 0:
        raise ValueError(f"e_lambda requires Re(lambda) > 0, got {lam}")
    if lam.imag == 0:
        lam = lam.real  # keeps real arithmetic, so lam = 1 reproduces ricard_E bit for bit
    n, k = _grid(N)
    return FiniteSection((k + 1.0) / (k + lam * n + 1.0), Structure.GENERAL)


def _kernel_multiplier(N, spec: KernelSpec):
    n, k = _grid(N)
    return _lower(spec.theta(k / (n + 1.0)), N)


KINDS: dict[str, Callable[..., FiniteSection]] = {
    "cesaro": _cesaro,
    "fejer": _fejer,
    "fejer_power": _fejer_power,
    "lower_ones": _lower_ones,
    "hilbert_transform": _hilbert_transform,
    "hankel": _hankel,
    "toeplitz_lower": _toeplitz_lower,
    "ricard_E": _ricard_E,
    "e_lambda": _e_lambda,
    "kernel_multiplier": _kernel_multiplier,
}


def build_structured(kind: str, N: int, *params) -> FiniteSection:
    """Build the ``N x N`` section of a named matrix family.

    ``params`` are positional: ``fejer_power(gamma)``, ``hankel(alpha)``,
    ``toeplitz_lower(a)``, ``e_lambda(lam)``, ``kernel_multiplier(spec)``.
    """
    try:
        ctor = KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown matrix kind {kind!r}; expected one of {sorted(KINDS)}") from None
    if int(N) != N or N < 1:
        raise ValueError(f"section size must be a positive integer, got {N!r}")
    return ctor(int(N), *params)


def hadamard(A: FiniteSection, B: FiniteSection) -> FiniteSection:
    _check_same_size(A, B)
    lower = A.is_lower or B.is_lower
    out = A.entries * B.entries
    if lower:
        out = np.tril(out)
    return FiniteSection(out, Structure.LOWER_TRIANGULAR if lower else Structure.GENERAL)


def triangular_truncation(A: FiniteSection) -> FiniteSection:
    return FiniteSection(np.tril(A.entries), Structure.LOWER_TRIANGULAR)


def multiplication_matrix(g: CoefficientSequence, N: int) -> FiniteSection:
    """Lower Toeplitz section with ``g[n-k]`` at ``[n, k]`` (multiplication by g)."""
    return build_structured("toeplitz_lower", N, g.padded(N))


def _weight_ratio(omega: Optional[WeightSequence], N: int, p: float) -> np.ndarray:
    if p <= 1:
        raise ValueError(f"exponent p must exceed 1, got {p}")
    if omega is None or omega.is_unit():
        return np.ones((N, N))
    if len(omega) < N:
        raise ValueError(f"weight sequence has {len(omega)} terms, section needs {N}")
    w = omega.omega[:N] ** (1.0 / p)
    return w[:, None] / w[None, :]


def _real_if_possible(c: np.ndarray) -> np.ndarray:
    return c.real.copy() if not np.any(c.imag) else c


def cesaro_operator_matrix(
    g: CoefficientSequence, N: int, omega: Optional[WeightSequence] = None, p: float = 2.0
) -> FiniteSection:
    """Section of the generalized Cesaro operator ``f -> (1/z) int_0^z f g'``.

    Entry ``[n, k] = (1 - k/(n+1)) g[n+1-k] (omega_n/omega_k)^(1/p)``.
    ``g[0]`` plays no role.
    """
    n, k = _grid(N)
    coeffs = _real_if_possible(g.padded(N + 1))
    ghat = coeffs[np.clip(n + 1 - k, 0, N)]
    fejer = (n + 1.0 - k) / (n + 1.0)
    ratio = _weight_ratio(omega, N, p)
    return _lower(fejer * ghat * ratio, N)


def volterra_operator_matrix(
    g: CoefficientSequence, N: int, omega: Optional[WeightSequence] = None, p: float = 2.0
) -> FiniteSection:
    """Section of ``T_g f = int_0^z f g'``: entry ``[n, k] = ((n-k)/n) g[n-k]`` for ``k < n``."""
    n, k = _grid(N)
    coeffs = _real_if_possible(g.padded(N))
    d = n - k
    ghat = coeffs[np.clip(d, 0, N - 1)]
    factor = np.where(d > 0, d / np.maximum(n, 1.0), 0.0)
    ratio = _weight_ratio(omega, N, p)
    vals = np.where(d > 0, factor * ghat * ratio, 0.0)
    return FiniteSection(vals, Structure.LOWER_TRIANGULAR)


def weighted_conjugation(A: FiniteSection, omega: WeightSequence, p: float) -> FiniteSection:
    """``D^(1/p) A D^(-1/p)`` with ``D = diag(omega)``: the unweighted form of a weighted operator."""
    w = omega.omega[: A.N] ** (1.0 / p)
    return FiniteSection((w[:, None] * A.entries) / w[None, :], A.structure)


def e_lambda_parts(N: int, lam: complex) -> tuple[FiniteSection, FiniteSection]:
    """Lower part ``X`` and strictly lower ``Y`` with ``E_lambda = X + Y^T``."""
    lam = complex(lam)
    if not lam.real > 0:
        raise ValueError(f"e_lambda requires Re(lambda) > 0, got {lam}")
    if lam.imag == 0:
        lam = lam.real
    n, k = _grid(N)
    X = _lower((k + 1.0) / (k + lam * n + 1.0), N)
    Y = FiniteSection(np.where(k < n, (n + 1.0) / (lam * k + n + 1.0), 0.0), Structure.LOWER_TRIANGULAR)
    return X, Y


def dif_identity_residual(lam: complex, N: int) -> float:
    """Max entrywise gap between the two sides of the splitting identity

    (k+1)/(k+lam n+1) - k/(k+lam n+lam)
        = (k+1)/(k+lam n+lam) * (lam-1)/(k+lam n+1) + (1/lam) / (k/lam + n + 1)

    over ``0 <= k <= n < N``.
    """
    lam = complex(lam)
    n, k = _grid(N)
    lhs = (k + 1.0) / (k + lam * n + 1.0) - k / (k + lam * n + lam)
    rhs = (k + 1.0) / (k + lam * n + lam) * (lam - 1.0) / (k + lam * n + 1.0) + (1.0 / lam) / (k / lam + n + 1.0)
    gap = np.abs(lhs - rhs)
    return float(np.max(np.where(k <= n, gap, 0.0)))


@dataclass(frozen=True)
class IteratedLimits:
    """Proxies for ``lim_k lim_n sigma[n, k]`` (``first``) and ``lim_n lim_k sigma[n, k]`` (``second``)."""

    first: complex
    second: complex
    stable: bool
    support: str

    def as_tuple(self) -> tuple[complex, complex]:
        return self.first, self.second


def iterated_limit_diagnostic(
    builder: Callable[[int], FiniteSection],
    N: int,
    k0: int = 4,
    window: int = 16,
    tol: float = 1e-3,
    support: str = "triangle",
) -> IteratedLimits:
    """Read off the two iterated limits of a matrix family from one large section.

    ``first`` is column ``k0`` taken at the last row.  For ``second`` the inner
    limit runs along a row.  With ``support="triangle"`` each row is followed to
    its last entry inside the lower triangle (the diagonal) and the outer limit
    is read at the last row.  With ``support="full"`` the roles of the first
    proxy are swapped literally: row ``k0`` followed out to the last column,
    which is zero for any lower triangular family.  ``stable`` is False if
    either proxy still drifts by more than ``tol`` over its last ``window``
    samples.
    """
    if support not in ("triangle", "full"):
        raise ValueError(f"support must be 'triangle' or 'full', got {support!r}")
    if N < k0 + window + 1:
        raise ValueError(f"section size {N} too small for k0={k0}, window={window}")
    S = builder(N).entries
    rows = np.arange(N - window, N)
    col_tail = S[rows, k0]
    if support == "triangle":
        row_tail = S[rows, rows]
    else:
        row_tail = S[k0, rows]
    drift = max(np.ptp(col_tail.real) + np.ptp(col_tail.imag), np.ptp(row_tail.real) + np.ptp(row_tail.imag))
    first = complex(col_tail[-1])
    second = complex(row_tail[-1])
    return IteratedLimits(first, second, bool(drift <= tol), support)


_MAGIC = b"TRSC"
_HEADER = struct.Struct("<4sQB")


def write_section_binary(A: FiniteSection, path) -> None:
    """Dump: ``b"TRSC"``, uint64 N, uint8 structure tag, then row-major complex128 (re, im pairs), little-endian."""
    data = np.ascontiguousarray(A.entries, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, A.N, A.structure.value))
        fh.write(data.tobytes())


def read_section_binary(path) -> FiniteSection:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, N, tag = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size :]
    if len(body) != 16 * N * N:
        raise ValueError(f"{path}: expected {16 * N * N} payload bytes, got {len(body)}")
    entries = np.frombuffer(body, dtype="<c16").reshape(N, N).copy()
    return FiniteSection(entries, Structure(tag))


def write_section_csv(A: FiniteSection, path) -> None:
    """Dense CSV, one matrix row per line; complex sections use Python ``a+bj`` literals."""
    real = not np.iscomplexobj(A.entries)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in A.entries:
            w.writerow([repr(float(v)) if real else repr(complex(v)) for v in row])


def read_section_csv(path, structure: Structure = Structure.GENERAL) -> FiniteSection:
    with open(path, newline="") as fh:
        rows = [[complex(v.strip("()")) for v in row] for row in csv.reader(fh) if row]
    return FiniteSection(np.asarray(rows), structure)
