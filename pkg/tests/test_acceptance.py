"""Acceptance criteria, each at its stated size and tolerance.

Every test records a PASS/FAIL line (printed in the terminal summary) before
asserting, so a failing criterion still reports the measured numbers.
"""

import numpy as np

from trischur.kernels import KernelSpec, kernel_l1_norm, phi_gamma_l1_norm, pointwise_bound_report, riesz_decay_exponent
from trischur.matrices import (
    WeightSequence,
    build_structured,
    cesaro_operator_matrix,
    dif_identity_residual,
    hadamard,
    iterated_limit_diagnostic,
    multiplication_matrix,
    triangular_truncation,
    volterra_operator_matrix,
)
from trischur.norms import loglinear_fit, lp_norm, norm_growth_curve, power_fit, schur_norm_lower, spectral_norm
from trischur.series import CoefficientSequence, backward_shift, blaschke_symbol, log_symbol
from trischur.spectral import power_norm_sequence, resolvent_probe

EPS = np.finfo(float).eps


def test_criterion_1_hardy_p2(record_criterion):
    est = spectral_norm(build_structured("cesaro", 4096))
    ok = 1.90 <= est.value <= 2.0
    record_criterion("1 (p=2)", ok, f"||C_4096||_2 = {est.value:.6f} ({est.kind.value}, {est.iterations} it), required [1.90, 2.0]")
    assert ok, f"spectral norm {est.value} outside [1.90, 2.0]"


def test_criterion_1_hardy_p3(record_criterion):
    br = lp_norm(build_structured("cesaro", 4096), 3.0)
    lo, hi = br.lower.value, br.upper.value
    ok = 1.40 <= lo <= 1.5 and hi <= 1.5 + 1e-6
    record_criterion("1 (p=3)", ok, f"bracket [{lo:.6f}, {hi:.6f}], required lower in [1.40, 1.5], upper <= 1.5 + 1e-6")
    assert ok


def test_criterion_2_factorization(record_criterion):
    N = 64
    rng = np.random.default_rng(7)
    F = build_structured("fejer", N)
    worst = 0.0
    for _ in range(50):
        g = CoefficientSequence(rng.uniform(-1.0, 1.0, N + 1))
        lhs = cesaro_operator_matrix(g, N).entries
        rhs = hadamard(F, multiplication_matrix(backward_shift(g), N)).entries
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    C = build_structured("cesaro", N).entries
    G = cesaro_operator_matrix(log_symbol(N), N).entries
    mask = C > 0
    rel = float(np.max(np.abs(G[mask] - C[mask]) / C[mask]))
    # "exactly" read as agreement to rounding: at most 4 ulps per entry
    ok = worst < 1e-12 and rel <= 4 * EPS
    record_criterion("2", ok, f"max deviation {worst:.3g} (< 1e-12); log symbol vs Cesaro max relative gap {rel / EPS:.2f} ulp (<= 4)")
    assert ok


def test_criterion_3_kernel_bounds(record_criterion):
    fejer = KernelSpec.fejer()
    riesz = KernelSpec.riesz(2.0)
    fejer_dev = max(abs(kernel_l1_norm(fejer, n) - 1.0) for n in range(257))
    oracle = phi_gamma_l1_norm(2.0)
    riesz_max = max(kernel_l1_norm(riesz, n) for n in range(1, 513))
    t = np.geomspace(1e-2, np.pi, 400)
    rep = pointwise_bound_report(riesz, riesz_decay_exponent(2.0), [8, 16, 32, 64, 128, 256, 512], t)
    c256, c512 = rep.constant_up_to(256), rep.constant
    drift = abs(c512 / c256 - 1.0)
    ok = fejer_dev <= 1e-6 and riesz_max <= oracle + 1e-3 and drift <= 0.10
    record_criterion(
        "3",
        ok,
        f"Fejer |L1-1| <= {fejer_dev:.2g}; Riesz(2) L1 max {riesz_max:.8f} vs oracle {oracle:.8f}; C(n<=256)={c256:.5f}, C(n<=512)={c512:.5f}, drift {100 * drift:.2f}%",
    )
    assert ok


def test_criterion_4_counterexample(record_criterion, hilbert_transform_curve):
    def build(N):
        return hadamard(build_structured("fejer", N) - build_structured("lower_ones", N), build_structured("hilbert_transform", N))

    Ns = [128, 256, 512, 1024, 2048, 4096]
    curve = norm_growth_curve(build, Ns, 2.0)
    increasing = bool(np.all(np.diff(curve.values) > 0))
    fit = loglinear_fit(curve.N, curve.values)
    h = dict(zip(hilbert_transform_curve.N.tolist(), hilbert_transform_curve.values))
    change = abs(h[4096] / h[1024] - 1.0)
    ok = increasing and fit.r2 >= 0.98 and change <= 0.02
    record_criterion(
        "4",
        ok,
        f"norms {', '.join(f'{v:.4f}' for v in curve.values)}; increasing={increasing}; R^2={fit.r2:.5f}; ||H|| {h[1024]:.5f} -> {h[4096]:.5f} ({100 * change:.3f}%)",
    )
    assert ok


def test_criterion_5_schur_scaling(record_criterion):
    ms = [1, 2, 4, 8]
    vals = [schur_norm_lower(build_structured("fejer_power", 512, m), 2.0).value for m in ms]
    fit = power_fit(ms, vals)
    ok = fit.slope <= 2.3
    record_criterion("5", ok, f"Schur lower estimates {', '.join(f'{v:.5f}' for v in vals)}; fitted exponent {fit.slope:.4f} (<= 2.3)")
    assert ok


def _hilbert_hankel(N):
    return build_structured("hankel", N, 1.0 / np.arange(1.0, 2.0 * N))


def test_criterion_6_hankel_truncation(record_criterion):
    lam = 1 + 1j
    builders = {
        "Pi(H)": lambda N: triangular_truncation(_hilbert_hankel(N)),
        "E.H": lambda N: hadamard(build_structured("ricard_E", N), _hilbert_hankel(N)),
        "E_lam.H": lambda N: hadamard(build_structured("e_lambda", N, lam), _hilbert_hankel(N)),
    }
    growth = {}
    parts = []
    for name, b in builders.items():
        curve = norm_growth_curve(b, [512, 4096], 2.0)
        growth[name] = curve.values[1] / curve.values[0] - 1.0
        parts.append(f"{name} {curve.values[0]:.5f} -> {curve.values[1]:.5f} ({100 * growth[name]:.2f}%)")
    dif = max(dif_identity_residual(v, 256) for v in (1 + 1j, 2.0, 0.5 + 2j))
    ok = all(g <= 0.05 for g in growth.values()) and dif <= 1e-12
    record_criterion("6", ok, "; ".join(parts) + f"; identity residual {dif:.2g}")
    assert ok


def test_criterion_7_quasinilpotency(record_criterion):
    g = blaschke_symbol([0.3, 0.7], 2048)
    T = volterra_operator_matrix(g, 2048, WeightSequence.unit(2048))
    roots = [r.root for r in power_norm_sequence(T, 2.0, 32) if r.n >= 4]
    decreasing = all(b < a for a, b in zip(roots, roots[1:]))
    worst = 0.0
    for lam in (0.1, 0.1j, -0.2):
        pts = resolvent_probe(g, lam, 2.0, [512, 1024, 2048])
        for a, b in zip(pts, pts[1:]):
            worst = max(worst, b.upper / a.upper - 1.0)
    ok = decreasing and worst <= 0.05
    record_criterion("7", ok, f"roots n=4..32 from {roots[0]:.4f} to {roots[-1]:.4f}, strictly decreasing={decreasing}; max resolvent growth per doubling {100 * worst:.4f}%")
    assert ok


def test_criterion_8_iterated_limits(record_criterion):
    f = iterated_limit_diagnostic(lambda N: build_structured("fejer", N), 4096)
    o = iterated_limit_diagnostic(lambda N: build_structured("lower_ones", N), 4096)
    ok = abs(f.first - 1) <= 1e-2 and abs(f.second) <= 1e-2 and o.first == 1 and o.second == 1
    record_criterion("8", ok, f"fejer ({f.first.real:.6f}, {f.second.real:.6f}); lower_ones ({o.first.real:g}, {o.second.real:g})")
    assert ok


def test_criterion_9_bracket_contains_spectral(record_criterion):
    rng = np.random.default_rng(9)
    failures = 0
    # both sides are iterative estimates stopped at 1e-9 relative change
    rtol = 1e-8
    for _ in range(100):
        A = np.tril(rng.uniform(0.0, 1.0, (128, 128)))
        s = spectral_norm(A).value
        if not lp_norm(A, 2.0).contains(s, rtol=rtol):
            failures += 1
    ok = failures == 0
    record_criterion("9", ok, f"{failures} containment failures over 100 random nonnegative triangular sections (N=128, rtol {rtol:g})")
    assert ok
