"""Operator norms of finite sections on l^p and empirical Schur-multiplier norms.

At p = 2 the largest singular value is computed by power iteration.  For
other p the norm of a signed matrix is not computable in general, so
:func:`lp_norm` returns a bracket: a lower bound from Boyd's nonlinear power
method and a certified upper bound from a Schur test on ``|A|``.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .matrices import FiniteSection, Structure, build_structured, hadamard, triangular_truncation
from .series import blaschke_symbol

__all__ = [
    "NormKind",
    "NormEstimate",
    "NormBracket",
    "spectral_norm",
    "lp_norm",
    "boyd_iteration",
    "schur_test_bound",
    "riesz_thorin_bound",
    "CATALOG_VERSION",
    "schur_catalog",
    "schur_ratios",
    "schur_norm_lower",
    "GrowthPoint",
    "GrowthCurve",
    "norm_growth_curve",
    "Fit",
    "loglinear_fit",
    "power_fit",
    "default_workers",
]

CATALOG_VERSION = 1


class NormKind(enum.Enum):
    EXACT2 = "Exact2"
    LOWER = "LowerBound"
    UPPER = "UpperBound"


@dataclass(frozen=True)
class NormEstimate:
    value: float
    kind: NormKind
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"norm estimate must be nonnegative, got {self.value}")


@dataclass(frozen=True)
class NormBracket:
    lower: NormEstimate
    upper: NormEstimate

    @property
    def value(self) -> float:
        return self.lower.value

    def contains(self, x: float, rtol: float = 0.0) -> bool:
        return self.lower.value * (1 - rtol) <= x <= self.upper.value * (1 + rtol)


def _entries(A) -> np.ndarray:
    return A.entries if isinstance(A, FiniteSection) else np.asarray(A)


def default_workers() -> int:
    """Worker cap from ``TRSC_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("TRSC_THREADS", "1")))
    except ValueError:
        return 1


def _start_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.ones(n) + 1e-3 * rng.standard_normal(n)


def spectral_norm(A, tol: float = 1e-9, max_iter: int = 10000, seed: int = 0) -> NormEstimate:
    """Largest singular value by power iteration on ``A^H A``.

    Returns kind ``Exact2`` once the relative change of the estimate drops
    below ``tol``; otherwise the last value as a ``LowerBound``.  The residual
    is ``||A^H A x - r x|| / r`` at the final unit vector ``x`` with Rayleigh
    quotient ``r``.
    """
    a = _entries(A)
    if not np.any(a):
        return NormEstimate(0.0, NormKind.EXACT2, 0, 0.0)
    ah = a.conj().T
    x = _start_vector(a.shape[1], np.random.default_rng(seed)).astype(a.dtype)
    x /= np.linalg.norm(x)
    prev, sigma = 0.0, 0.0
    kind = NormKind.LOWER
    for it in range(1, max_iter + 1):
        y = a @ x
        sigma = float(np.linalg.norm(y))
        if sigma == 0.0:
            # start vector in the kernel: restart on the heaviest column
            x = np.zeros_like(x)
            x[int(np.argmax(np.linalg.norm(a, axis=0)))] = 1.0
            prev = 0.0
            continue
        z = ah @ y
        x = z / np.linalg.norm(z)
        if abs(sigma - prev) <= tol * sigma:
            kind = NormKind.EXACT2
            break
        prev = sigma
    w = ah @ (a @ x)
    rayleigh = float(np.vdot(x, w).real)
    residual = float(np.linalg.norm(w - rayleigh * x) / max(rayleigh, 1e-300))
    return NormEstimate(sigma, kind, it, residual)


def _phase(v: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(v):
        mag = np.abs(v)
        out = np.zeros_like(v)
        nz = mag > 0
        out[nz] = v[nz] / mag[nz]
        return out
    return np.sign(v)


def _dual(v: np.ndarray, r: float) -> np.ndarray:
    """``phase(v) |v|^(r-1)``: the l^r duality map up to scaling."""
    return _phase(v) * np.abs(v) ** (r - 1.0)


def boyd_iteration(A, p: float, x0: np.ndarray, tol: float = 1e-9, max_iter: int = 10000):
    """Boyd's power method for ``max ||Ax||_p / ||x||_p``.

    Returns ``(value, x, iterations, converged)`` where ``value`` is the best
    ratio seen, a lower bound for the norm, and ``x`` its vector with
    ``||x||_p = 1``.
    """
    a = _entries(A)
    ah = a.conj().T
    q = p / (p - 1.0)
    x = np.asarray(x0, dtype=np.result_type(a.dtype, x0.dtype))
    nx = np.linalg.norm(x, p)
    if nx == 0:
        raise ValueError("Boyd iteration needs a nonzero start vector")
    x = x / nx
    best, best_x, prev = 0.0, x, 0.0
    for it in range(1, max_iter + 1):
        y = a @ x
        val = float(np.linalg.norm(y, p))
        if val > best:
            best, best_x = val, x
        if val == 0.0:
            return best, best_x, it, True
        z = ah @ _dual(y, p)
        w = _dual(z, q)
        nw = np.linalg.norm(w, p)
        if nw == 0.0:
            return best, best_x, it, True
        if abs(val - prev) <= tol * val:
            return best, best_x, it, True
        x = w / nw
        prev = val
    return best, best_x, max_iter, False


def schur_test_bound(A, p: float, x: np.ndarray) -> float:
    """Certified upper bound for ``||A||_p`` from the Schur test on ``|A|``.

    With any positive ``x`` and ``y = |A| x``, the weights ``x^(1/q)`` and
    ``y^(1/q)`` give ``||A||_p <= max_k ((|A|^T y^(p-1))_k / x_k^(p-1))^(1/p)``.
    The bound is tight when ``x`` is the maximizer for ``|A|``.
    """
    m = np.abs(_entries(A))
    x = np.abs(np.asarray(x, dtype=float))
    top = float(x.max()) if x.size else 0.0
    if top == 0.0:
        return math.inf
    x = np.maximum(x, top * 1e-14)
    y = m @ x
    num = m.T @ y ** (p - 1.0)
    den = x ** (p - 1.0)
    return float(np.max(num / den)) ** (1.0 / p)


def riesz_thorin_bound(A, p: float) -> float:
    """``||A||_1^(1/p) ||A||_inf^(1-1/p)``, an upper bound for ``||A||_p``."""
    m = np.abs(_entries(A))
    col = float(m.sum(axis=0).max())
    row = float(m.sum(axis=1).max())
    return col ** (1.0 / p) * row ** (1.0 - 1.0 / p)


def lp_norm(
    A,
    p: float,
    tol: float = 1e-9,
    max_iter: int = 10000,
    n_starts: int = 64,
    start_iter: int = 200,
    seed: int = 0,
) -> NormBracket:
    """Bracket ``[LowerBound, UpperBound]`` for the operator norm of ``A`` on ``l^p``.

    Nonnegative matrices: a single Boyd run from a near-constant start, whose
    value converges to the norm, and the Schur test at the Boyd vector as the
    upper side.  Signed or complex matrices: the best Boyd value over
    structured starts plus ``n_starts`` random starts, and the upper bound
    of ``|A|``.
    """
    if not p > 1:
        raise ValueError(f"l^p norm needs p > 1, got {p}")
    a = _entries(A)
    n = a.shape[1]
    rng = np.random.default_rng(seed)
    absA = np.abs(a)
    x_abs0 = _start_vector(n, rng)
    abs_val, x_abs, abs_it, _ = boyd_iteration(absA, p, x_abs0, tol, max_iter)
    upper_val = min(schur_test_bound(absA, p, x_abs), riesz_thorin_bound(absA, p))
    nonneg = not np.iscomplexobj(a) and bool(np.all(a >= 0))
    if nonneg:
        lower = NormEstimate(abs_val, NormKind.LOWER, abs_it, (upper_val - abs_val) / max(abs_val, 1e-300))
        upper = NormEstimate(max(upper_val, abs_val), NormKind.UPPER, abs_it, 0.0)
        return NormBracket(lower, upper)

    cplx = np.iscomplexobj(a)
    starts = [x_abs0, x_abs, (-1.0) ** np.arange(n) * 1.0]
    col = int(np.argmax(np.linalg.norm(a, p, axis=0)))
    e = np.zeros(n)
    e[col] = 1.0
    starts.append(e)
    best, best_it = 0.0, 0
    for x0 in starts:
        val, _, it, _ = boyd_iteration(a, p, x0, tol, max_iter)
        if val > best:
            best, best_it = val, it
    for _ in range(n_starts):
        x0 = rng.standard_normal(n)
        if cplx:
            x0 = x0 + 1j * rng.standard_normal(n)
        val, _, it, _ = boyd_iteration(a, p, x0, tol, start_iter)
        if val > best:
            best, best_it = val, it
    gap = (upper_val - best) / max(best, 1e-300)
    lower = NormEstimate(best, NormKind.LOWER, best_it, gap)
    upper = NormEstimate(max(upper_val, best), NormKind.UPPER, abs_it, 0.0)
    return NormBracket(lower, upper)


def _estimate(A, p: float, seed: int) -> float:
    if p == 2:
        return spectral_norm(A, seed=seed).value
    return lp_norm(A, p, seed=seed, n_starts=8, start_iter=100).lower.value


def schur_catalog(N: int, catalog_size: int = 16, seed: int = 0) -> list[tuple[str, FiniteSection]]:
    """Reproducible list of lower triangular test operators of size ``N``.

    Always contains the Cesaro section and the lower truncation of the
    discrete Hilbert transform; the remaining slots cycle through random
    +-1 triangles, lower Toeplitz sections of random real-zero Blaschke
    products, and truncated random rank-one matrices.
    """
    rng = np.random.default_rng([CATALOG_VERSION, seed, N])
    out = [
        ("cesaro", build_structured("cesaro", N)),
        ("hilbert_lower", triangular_truncation(build_structured("hilbert_transform", N))),
    ]
    i = 0
    while len(out) < catalog_size:
        family = i % 3
        if family == 0:
            signs = rng.choice([-1.0, 1.0], size=(N, N))
            out.append((f"signs_{i}", FiniteSection(np.tril(signs), Structure.LOWER_TRIANGULAR)))
        elif family == 1:
            zeros = rng.uniform(0.0, 0.95, size=int(rng.integers(1, 5)))
            b = blaschke_symbol(list(zeros), N)
            out.append((f"blaschke_{i}", build_structured("toeplitz_lower", N, b.padded(N))))
        else:
            u = rng.standard_normal(N)
            v = rng.standard_normal(N)
            out.append((f"rank_one_{i}", FiniteSection(np.tril(np.outer(u, v)), Structure.LOWER_TRIANGULAR)))
        i += 1
    return out[:catalog_size] if catalog_size >= 1 else []


def _check_lower(S: FiniteSection) -> None:
    if not S.is_lower and np.any(np.triu(S.entries, 1)):
        raise ValueError("Schur multiplier for lower triangular matrices must itself be lower triangular")


def schur_ratios(S: FiniteSection, p: float = 2.0, catalog_size: int = 16, seed: int = 0) -> list[tuple[str, float, float]]:
    """``(name, ||S.A||_p, ||A||_p)`` for every catalog member ``A``."""
    _check_lower(S)
    rows = []
    for name, A in schur_catalog(S.N, catalog_size, seed):
        num = _estimate(hadamard(S, A), p, seed)
        den = _estimate(A, p, seed)
        rows.append((name, num, den))
    return rows


def schur_norm_lower(S: FiniteSection, p: float = 2.0, catalog_size: int = 16, seed: int = 0) -> NormEstimate:
    """Empirical lower estimate of the Schur-multiplier norm of ``S`` over lower triangular tests.

    ``max_A ||S.A||_p / ||A||_p`` over :func:`schur_catalog`.  At p = 2 both
    norms are power-iteration values; otherwise Boyd lower estimates.
    """
    rows = schur_ratios(S, p, catalog_size, seed)
    ratios = [num / den for _, num, den in rows if den > 0]
    return NormEstimate(max(ratios) if ratios else 0.0, NormKind.LOWER, len(rows), 0.0)


@dataclass(frozen=True)
class GrowthPoint:
    N: int
    estimates: tuple[NormEstimate, ...]

    @property
    def value(self) -> float:
        return self.estimates[0].value

    @property
    def upper(self) -> float:
        return self.estimates[-1].value


@dataclass
class GrowthCurve:
    p: float
    seed: int
    points: list[GrowthPoint] = field(default_factory=list)

    @property
    def N(self) -> np.ndarray:
        return np.array([pt.N for pt in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([pt.value for pt in self.points])

    @property
    def uppers(self) -> np.ndarray:
        return np.array([pt.upper for pt in self.points])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "p", "kind", "value", "iterations", "residual", "seed"])
            for pt in self.points:
                for est in pt.estimates:
                    w.writerow([pt.N, repr(float(self.p)), est.kind.value, repr(est.value), est.iterations, repr(est.residual), self.seed])


def norm_growth_curve(
    builder: Callable[[int], FiniteSection],
    N_list: Sequence[int],
    p: float = 2.0,
    seed: int = 0,
    workers: Optional[int] = None,
) -> GrowthCurve:
    """Norm of ``builder(N)`` for each ``N``; spectral norm at p = 2, bracket otherwise."""
    N_list = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError(f"N_list must be strictly increasing, got {N_list}")

    def one(N: int) -> GrowthPoint:
        A = builder(N)
        if p == 2:
            return GrowthPoint(N, (spectral_norm(A, seed=seed),))
        br = lp_norm(A, p, seed=seed)
        return GrowthPoint(N, (br.lower, br.upper))

    workers = default_workers() if workers is None else workers
    if workers > 1 and len(N_list) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(one, N_list))
    else:
        points = [one(N) for N in N_list]
    return GrowthCurve(p, seed, points)


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


def loglinear_fit(N: Sequence[float], values: Sequence[float]) -> Fit:
    """Least squares ``value ~ slope * log N + intercept``."""
    res = stats.linregress(np.log(np.asarray(N, dtype=float)), np.asarray(values, dtype=float))
    return Fit(float(res.slope), float(res.intercept), float(res.rvalue**2))


def power_fit(x: Sequence[float], y: Sequence[float]) -> Fit:
    """Least squares ``log y ~ slope * log x + intercept``; ``slope`` is the growth exponent."""
    res = stats.linregress(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)))
    return Fit(float(res.slope), float(res.intercept), float(res.rvalue**2))
