"""Finite-section probes of quasi-nilpotency for ``T_g``.

A strictly lower triangular section is always nilpotent, so nothing here
proves anything about the infinite operator.  The probes record what a
bounded quasi-nilpotent operator looks like at desk scale: roots
``||T^n||^(1/n)`` that keep falling with ``n``, and resolvent norms that stop
growing as the section size doubles.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .matrices import FiniteSection, Structure, WeightSequence, hadamard, volterra_operator_matrix
from .norms import NormKind, default_workers, lp_norm, power_fit, schur_norm_lower, spectral_norm
from .series import CoefficientSequence

__all__ = [
    "ConditioningWarning",
    "PowerRoot",
    "power_norm_sequence",
    "schur_power_roots",
    "resolvent_section",
    "ResolventPoint",
    "resolvent_probe",
    "QuasiNilpotencyReport",
    "quasinilpotency_report",
]

CONDITIONING_LIMIT = 1e12


class ConditioningWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class PowerRoot:
    n: int
    root: float
    upper_root: float
    kind: str


def _norm_pair(B: np.ndarray, p: float, seed: int) -> tuple[float, float, str]:
    if p == 2:
        est = spectral_norm(B, seed=seed)
        return est.value, est.value, est.kind.value
    br = lp_norm(B, p, seed=seed, n_starts=8, start_iter=100)
    return br.lower.value, br.upper.value, "bracket"


def power_norm_sequence(A, p: float = 2.0, n_max: int = 32, seed: int = 0) -> list[PowerRoot]:
    """``||A^n||_p^(1/n)`` for ``n = 1..n_max``.

    Powers are rescaled to unit max-entry after every product and the
    scale is kept as a logarithm, so deep powers neither underflow nor
    overflow.  A power that is exactly zero gives root 0.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    a = A.entries if isinstance(A, FiniteSection) else np.asarray(A)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("power_norm_sequence needs a square matrix")
    out = []
    B = a.copy()
    log_scale = 0.0
    zero = False
    for n in range(1, n_max + 1):
        if n > 1 and not zero:
            B = B @ a
        if not zero:
            top = float(np.abs(B).max())
            if top == 0.0:
                zero = True
            elif not math.isfinite(top):
                raise FloatingPointError(f"power {n} overflowed despite rescaling")
            else:
                B /= top
                log_scale += math.log(top)
        if zero:
            out.append(PowerRoot(n, 0.0, 0.0, "Exact2" if p == 2 else "bracket"))
            continue
        lo, hi, kind = _norm_pair(B, p, seed)
        root = math.exp((math.log(lo) + log_scale) / n) if lo > 0 else 0.0
        upper = math.exp((math.log(hi) + log_scale) / n) if hi > 0 else 0.0
        out.append(PowerRoot(n, root, upper, kind))
    return out


def schur_power_roots(S: FiniteSection, n_max: int = 16, p: float = 2.0, catalog_size: int = 16, seed: int = 0) -> list[PowerRoot]:
    """``schur_norm_lower(S^(.n))^(1/n)``: roots of the Hadamard powers of ``S``."""
    out = []
    P = S
    for n in range(1, n_max + 1):
        if n > 1:
            P = hadamard(P, S)
        v = schur_norm_lower(P, p, catalog_size, seed).value
        r = v ** (1.0 / n)
        out.append(PowerRoot(n, r, r, NormKind.LOWER.value))
    return out


def _check_lambda(lam) -> complex:
    lam = complex(lam)
    if lam == 0:
        raise ValueError("resolvent parameter lambda must be nonzero")
    return lam


def resolvent_section(
    g: CoefficientSequence, lam: complex, N: int, omega: Optional[WeightSequence] = None, p: float = 2.0
) -> FiniteSection:
    """``(I - T_g/lam)^(-1)`` on the ``N``-section by forward substitution.

    ``I - T_g/lam`` is unit lower triangular, so the section of the inverse is
    the inverse of the section.
    """
    lam = _check_lambda(lam)
    T = volterra_operator_matrix(g, N, omega, p).entries
    M = np.eye(N) - T / lam
    R = linalg.solve_triangular(M, np.eye(N, dtype=M.dtype), lower=True, unit_diagonal=True, check_finite=False)
    top = float(np.abs(R).max())
    if not math.isfinite(top):
        raise FloatingPointError(f"resolvent at lambda={lam} overflowed for N={N}")
    if top > CONDITIONING_LIMIT:
        warnings.warn(
            f"resolvent entries reach {top:.3g} at lambda={lam}, N={N}; results may be ill-conditioned",
            ConditioningWarning,
            stacklevel=2,
        )
    return FiniteSection(np.tril(R), Structure.LOWER_TRIANGULAR)


@dataclass(frozen=True)
class ResolventPoint:
    N: int
    lam: complex
    lower: float
    upper: float
    kind: str


def resolvent_probe(
    g: CoefficientSequence,
    lam: complex,
    p: float,
    N_list: Sequence[int],
    omega: Optional[WeightSequence] = None,
    seed: int = 0,
    workers: Optional[int] = None,
) -> list[ResolventPoint]:
    """Norm bracket of the resolvent section for each ``N``.

    At p = 2 the power-iteration value is used for both sides.
    """
    lam = _check_lambda(lam)

    def one(N: int) -> ResolventPoint:
        R = resolvent_section(g, lam, N, omega, p)
        lo, hi, kind = _norm_pair(R.entries, p, seed)
        return ResolventPoint(int(N), lam, lo, hi, kind)

    workers = default_workers() if workers is None else workers
    if workers > 1 and len(N_list) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, N_list))
    return [one(N) for N in N_list]


def _growth_per_doubling(points: Sequence[ResolventPoint]) -> float:
    """Largest relative increase of the upper bound, normalized to one doubling of N."""
    worst = 0.0
    for a, b in zip(points, points[1:]):
        doublings = math.log2(b.N / a.N)
        if doublings <= 0 or a.upper <= 0:
            continue
        rate = (b.upper / a.upper) ** (1.0 / doublings) - 1.0
        worst = max(worst, rate)
    return worst


@dataclass
class QuasiNilpotencyReport:
    p: float
    N_power: int
    N_list: list[int]
    roots: list[PowerRoot]
    resolvents: dict[str, list[ResolventPoint]]
    roots_decreasing_from: int
    roots_strictly_decreasing: bool
    root_decay_exponent: float
    max_resolvent_growth: float
    growth_threshold: float
    weight_ratio_deviation: float

    @property
    def consistent(self) -> bool:
        return self.roots_strictly_decreasing and self.max_resolvent_growth <= self.growth_threshold

    @property
    def verdict(self) -> str:
        if self.consistent:
            return "consistent with quasi-nilpotent"
        return "inconclusive"

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "N_power": self.N_power,
            "N_list": self.N_list,
            "verdict": self.verdict,
            "roots_decreasing_from": self.roots_decreasing_from,
            "roots_strictly_decreasing": self.roots_strictly_decreasing,
            "root_decay_exponent": self.root_decay_exponent,
            "max_resolvent_growth_per_doubling": self.max_resolvent_growth,
            "growth_threshold": self.growth_threshold,
            "weight_ratio_deviation": self.weight_ratio_deviation,
            "power_roots": [asdict(r) for r in self.roots],
            "resolvents": {
                key: [
                    {"N": pt.N, "lambda": [pt.lam.real, pt.lam.imag], "lower": pt.lower, "upper": pt.upper, "kind": pt.kind}
                    for pt in pts
                ]
                for key, pts in self.resolvents.items()
            },
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, roots_path, resolvent_path) -> None:
        with open(roots_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "root", "upper_root", "kind"])
            for r in self.roots:
                w.writerow([r.n, repr(r.root), repr(r.upper_root), r.kind])
        with open(resolvent_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda_re", "lambda_im", "N", "lower", "upper", "kind"])
            for pts in self.resolvents.values():
                for pt in pts:
                    w.writerow([repr(pt.lam.real), repr(pt.lam.imag), pt.N, repr(pt.lower), repr(pt.upper), pt.kind])


def _lambda_key(lam: complex) -> str:
    return f"{lam.real:g}{lam.imag:+g}j"


def quasinilpotency_report(
    g: CoefficientSequence,
    omega: Optional[WeightSequence],
    p: float,
    N_list: Sequence[int],
    n_max: int = 32,
    lambda_grid: Sequence[complex] = (0.1, 0.1j, -0.2),
    n_from: int = 4,
    growth_threshold: float = 0.05,
    seed: int = 0,
) -> QuasiNilpotencyReport:
    """Power roots at the largest ``N`` and resolvent brackets over ``N_list`` x ``lambda_grid``."""
    N_list = sorted(int(N) for N in N_list)
    N_power = N_list[-1]
    T = volterra_operator_matrix(g, N_power, omega, p)
    roots = power_norm_sequence(T, p, n_max, seed)
    tail = [r.root for r in roots if r.n >= n_from]
    # a root that reaches exactly zero (nilpotent power) stays there
    decreasing = all(b < a or b == 0.0 for a, b in zip(tail, tail[1:]))
    positive = [(r.n, r.root) for r in roots if r.n >= n_from and r.root > 0]
    if len(positive) >= 2:
        decay = power_fit([n for n, _ in positive], [v for _, v in positive]).slope
    else:
        decay = float("-inf")
    resolvents = {}
    for lam in lambda_grid:
        lam = complex(lam)
        resolvents[_lambda_key(lam)] = resolvent_probe(g, lam, p, N_list, omega, seed)
    growth = max((_growth_per_doubling(pts) for pts in resolvents.values()), default=0.0)
    dev = omega.ratio_deviation() if omega is not None else 0.0
    return QuasiNilpotencyReport(
        p=p,
        N_power=N_power,
        N_list=N_list,
        roots=roots,
        resolvents=resolvents,
        roots_decreasing_from=n_from,
        roots_strictly_decreasing=decreasing,
        root_decay_exponent=decay,
        max_resolvent_growth=growth,
        growth_threshold=growth_threshold,
        weight_ratio_deviation=dev,
    )
