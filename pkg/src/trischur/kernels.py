"""Summability kernels generated by a compactly supported profile ``theta``.

The kernel of order ``n`` is the trigonometric polynomial

    k_n(t) = sum_{|k| <= n} theta(k / (n + 1)) e^{ikt},

so ``theta = max(0, 1 - |x|)`` gives the Fejer kernel and
``theta = max(0, 1 - |x|)**gamma`` the Riesz kernels.
"""

from __future__ import annotations

import csv
import enum
import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .series import CoefficientSequence

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "kernel_coefficients",
    "kernel_eval",
    "kernel_l1_norm",
    "phi_gamma_fourier",
    "phi_gamma_l1_norm",
    "BoundReport",
    "pointwise_bound_report",
    "riesz_decay_exponent",
]


class KernelFamily(enum.Enum):
    FEJER = "fejer"
    RIESZ = "riesz"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class KernelSpec:
    family: KernelFamily
    gamma: float = 1.0
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.family is KernelFamily.RIESZ:
            if not self.gamma > 0:
                raise ValueError(f"Riesz exponent must be positive, got {self.gamma}")
        if self.family is KernelFamily.TABULATED:
            if self.samples is None:
                raise ValueError("tabulated kernel needs samples of theta on [-1, 1]")
            s = np.array(self.samples, dtype=float).ravel()
            if s.size < 2 or not np.all(np.isfinite(s)):
                raise ValueError("tabulated samples must be finite, at least two points")
            if s[0] != 0.0 or s[-1] != 0.0:
                raise ValueError("tabulated theta must vanish at -1 and 1")
            s.flags.writeable = False
            object.__setattr__(self, "samples", s)

    @classmethod
    def fejer(cls) -> "KernelSpec":
        return cls(KernelFamily.FEJER)

    @classmethod
    def riesz(cls, gamma: float) -> "KernelSpec":
        return cls(KernelFamily.RIESZ, gamma=float(gamma))

    @classmethod
    def tabulated(cls, samples: Sequence[float]) -> "KernelSpec":
        """``samples`` are values of theta on an equispaced grid of [-1, 1]."""
        return cls(KernelFamily.TABULATED, samples=np.asarray(samples, dtype=float))

    def theta(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family is KernelFamily.FEJER:
            return np.maximum(0.0, 1.0 - np.abs(x))
        if self.family is KernelFamily.RIESZ:
            return np.maximum(0.0, 1.0 - np.abs(x)) ** self.gamma
        grid = np.linspace(-1.0, 1.0, self.samples.size)
        return np.interp(x, grid, self.samples, left=0.0, right=0.0)

    @property
    def label(self) -> str:
        if self.family is KernelFamily.RIESZ:
            return f"riesz({self.gamma:g})"
        return self.family.value


def riesz_decay_exponent(gamma: float) -> float:
    """Decay rate ``min(1, gamma) + 1`` of the Fourier transform of the Riesz profile."""
    return min(1.0, gamma) + 1.0


def _check_order(n) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"kernel order must be a nonnegative integer, got {n!r}")
    return int(n)


def kernel_coefficients(spec: KernelSpec, n: int) -> CoefficientSequence:
    """One-sided coefficients ``theta(k/(n+1))`` for ``0 <= k <= n``."""
    n = _check_order(n)
    return CoefficientSequence(spec.theta(np.arange(n + 1) / (n + 1)))


def _two_sided(spec: KernelSpec, n: int) -> np.ndarray:
    k = np.arange(-n, n + 1)
    return spec.theta(k / (n + 1))


def kernel_eval(spec: KernelSpec, n: int, t):
    """Evaluate ``k_n(t)``; ``t`` may be a scalar or an array.

    Raises ``ValueError`` if the imaginary part does not vanish, which only
    happens for a tabulated profile that is not even.
    """
    n = _check_order(n)
    c = _two_sided(spec, n)
    k = np.arange(-n, n + 1)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    vals = np.exp(1j * np.outer(t_arr, k)) @ c
    scale = max(1.0, float(np.sum(np.abs(c))))
    if np.max(np.abs(vals.imag)) >= 1e-10 * scale:
        raise ValueError(f"kernel {spec.label} of order {n} is not real-valued; theta is not even")
    out = vals.real
    return float(out[0]) if np.ndim(t) == 0 else out


def _kernel_on_grid(spec: KernelSpec, n: int, nodes: int) -> np.ndarray:
    """Values of ``k_n`` at ``t_j = 2 pi j / nodes`` via one FFT."""
    c = _two_sided(spec, n)
    buf = np.zeros(nodes, dtype=np.complex128)
    k = np.arange(-n, n + 1)
    np.add.at(buf, k % nodes, c)
    vals = np.fft.ifft(buf) * nodes
    return vals.real


def kernel_l1_norm(spec: KernelSpec, n: int, oversample: int = 64) -> float:
    """``(1/2pi) int_{-pi}^{pi} |k_n(t)| dt`` by the periodic trapezoid rule."""
    n = _check_order(n)
    nodes = max(oversample, 64) * (n + 1)
    vals = _kernel_on_grid(spec, n, nodes)
    return float(np.mean(np.abs(vals)))


def phi_gamma_fourier(gamma: float, x: float) -> float:
    """Fourier transform of ``max(0, 1-|u|)**gamma`` with the ``1/(2 pi)`` normalization.

    The profile is even, so this is ``(1/pi) int_0^1 (1-u)^gamma cos(x u) du``.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = abs(float(x))
    f = lambda u: (1.0 - u) ** gamma
    if x < 1.0:
        val, _ = integrate.quad(lambda u: f(u) * math.cos(x * u), 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    else:
        val, _ = integrate.quad(f, 0.0, 1.0, weight="cos", wvar=x, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val / math.pi


def _phi_gamma_tail(gamma: float, x_max: float) -> float:
    # envelope gamma/(pi x^2) from the kink at 0 plus Gamma(gamma+1)/(pi x^(gamma+1)) from u = +-1
    kink = gamma / (math.pi * x_max)
    edge = special.gamma(gamma + 1.0) / (math.pi * gamma * x_max**gamma)
    return 2.0 * (kink + edge)


@functools.lru_cache(maxsize=32)
def phi_gamma_l1_norm(gamma: float, x_max: float = 2000.0) -> float:
    """``int_R |phi_gamma^(x)| dx``: quadrature on ``[-x_max, x_max]`` plus tail envelope.

    The tail term is an upper estimate, so the result errs on the large side.
    """
    g = lambda x: abs(phi_gamma_fourier(gamma, x))
    edges = np.concatenate([np.arange(0.0, 64.0, 2.0), np.geomspace(64.0, x_max, 40)])
    total = 0.0
    with warnings.catch_warnings():
        # |phi^| has kinks at sign changes when gamma < 1; accuracy stays ~1e-9 regardless
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            part, _ = integrate.quad(g, a, b, epsabs=1e-11, epsrel=1e-9, limit=200)
            total += part
    return 2.0 * total + _phi_gamma_tail(gamma, x_max)


@dataclass
class BoundReport:
    """Grid of ``|k_n(t)| / min(n+1, (n+1)^-(a-1) |t|^-a)``."""

    spec_label: str
    a: float
    n: np.ndarray
    t: np.ndarray
    kernel_value: np.ndarray
    bound: np.ndarray
    ratio: np.ndarray

    @property
    def constant(self) -> float:
        return float(np.max(self.ratio))

    def constant_up_to(self, n_max: int) -> float:
        mask = self.n <= n_max
        return float(np.max(self.ratio[mask]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "t", "kernel_value", "bound", "ratio"])
            for row in zip(self.n, self.t, self.kernel_value, self.bound, self.ratio):
                w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])


def pointwise_bound_report(spec: KernelSpec, a: float, n_list: Iterable[int], t_grid) -> BoundReport:
    if not a > 0:
        raise ValueError(f"decay exponent must be positive, got {a}")
    t_grid = np.asarray(t_grid, dtype=float)
    ns, ts, ks, bs = [], [], [], []
    for n in n_list:
        n = _check_order(n)
        kv = np.abs(kernel_eval(spec, n, t_grid))
        with np.errstate(divide="ignore", over="ignore"):
            tail = (n + 1.0) ** (-(a - 1.0)) * np.abs(t_grid) ** (-a)
        bound = np.minimum(n + 1.0, tail)
        ns.append(np.full(t_grid.size, n))
        ts.append(t_grid)
        ks.append(kv)
        bs.append(bound)
    n_arr = np.concatenate(ns)
    k_arr = np.concatenate(ks)
    b_arr = np.concatenate(bs)
    return BoundReport(spec.label, float(a), n_arr, np.concatenate(ts), k_arr, b_arr, k_arr / b_arr)
