"""Command line runner: one reproducible experiment per invocation.

    trischur hardy --p 2 --N 4096 --out runs/hardy

Every run writes its data files plus ``manifest.json`` under ``--out`` and
prints a single PASS/FAIL line.  Exit status: 0 pass, 1 fail, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import scipy

from . import __version__
from .kernels import KernelSpec, kernel_l1_norm, phi_gamma_l1_norm, pointwise_bound_report, riesz_decay_exponent
from .matrices import (
    WeightSequence,
    build_structured,
    cesaro_operator_matrix,
    dif_identity_residual,
    hadamard,
    iterated_limit_diagnostic,
    multiplication_matrix,
    triangular_truncation,
)
from .norms import loglinear_fit, lp_norm, norm_growth_curve, power_fit, schur_norm_lower, spectral_norm
from .series import CoefficientSequence, backward_shift, blaschke_symbol, log_symbol, read_coefficients_csv

EXPERIMENTS = (
    "hardy",
    "factorization",
    "kernel-bounds",
    "counterexample",
    "schur-scaling",
    "hankel-truncation",
    "ricard",
    "e-lambda",
    "quasinilpotency",
    "iterated-limits",
)

DEFAULTS: dict[str, dict[str, Any]] = {
    "hardy": {"p": 2.0, "N": 4096},
    "factorization": {"N": 64, "seed": 7, "count": 50},
    "kernel-bounds": {"N": 256, "gamma": 2.0, "Ns": [8, 16, 32, 64, 128, 256, 512]},
    "counterexample": {"Ns": [128, 256, 512, 1024, 2048, 4096]},
    "schur-scaling": {"N": 512, "p": 2.0, "seed": 0},
    "hankel-truncation": {"Ns": [512, 4096]},
    "ricard": {"Ns": [512, 4096]},
    "e-lambda": {"Ns": [512, 4096], "lambda": [1.0, 1.0], "N": 256},
    "quasinilpotency": {
        "p": 2.0,
        "Ns": [512, 1024, 2048],
        "weight": "unit",
        "symbol": "blaschke:0.3,0.7",
        "n_max": 32,
        "lambda_grid": [[0.1, 0.0], [0.0, 0.1], [-0.2, 0.0]],
    },
    "iterated-limits": {"N": 4096},
}

COMMON = {"seed": 0, "out": None}


class ConfigError(ValueError):
    pass


@dataclass
class Outcome:
    passed: bool
    summary: str
    metrics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)


def parse_sizes(text) -> list[int]:
    """``"128,256,...,4096"`` -> doubling sequence; plain lists pass through."""
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    parts = [s.strip() for s in str(text).split(",") if s.strip()]
    if "..." in parts:
        i = parts.index("...")
        if i < 2 or i != len(parts) - 2:
            raise ConfigError(f"cannot expand size list {text!r}; write 'a,b,...,c'")
        a, b, last = int(parts[i - 2]), int(parts[i - 1]), int(parts[-1])
        if a <= 0 or b <= a or b % a:
            raise ConfigError(f"size list {text!r} must grow by an integer ratio")
        head = [int(s) for s in parts[: i - 2]]
        ratio = b // a
        seq = [a]
        while seq[-1] * ratio <= last:
            seq.append(seq[-1] * ratio)
        if seq[-1] != last:
            raise ConfigError(f"{last} is not reached from {a} by factors of {ratio}")
        return head + seq
    try:
        return [int(s) for s in parts]
    except ValueError as exc:
        raise ConfigError(f"bad size list {text!r}") from exc


def parse_lambda(text) -> complex:
    if isinstance(text, (list, tuple)):
        if len(text) == 1:
            return complex(float(text[0]), 0.0)
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float, complex)):
        return complex(text)
    parts = str(text).split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"lambda must be 're,im', got {text!r}")


def parse_symbol(text: str, N: int) -> CoefficientSequence:
    if text == "log":
        return log_symbol(N)
    if text == "zero":
        return CoefficientSequence(np.zeros(N + 1))
    if text.startswith("blaschke:"):
        zeros = [float(v) for v in text.split(":", 1)[1].split(",") if v.strip()]
        return blaschke_symbol(zeros, N)
    if os.path.exists(text):
        return CoefficientSequence(read_coefficients_csv(text).padded(N + 1))
    raise ConfigError(f"unknown symbol {text!r}; use log, zero, blaschke:a,b,... or a CSV path")


def parse_weight(text: str, length: int) -> WeightSequence:
    if text == "unit":
        return WeightSequence.unit(length)
    if text == "dirichlet":
        return WeightSequence.dirichlet(length)
    if os.path.exists(text):
        w = WeightSequence.from_csv(text)
        if len(w) < length:
            raise ConfigError(f"weight file {text} has {len(w)} entries, need {length}")
        return w
    raise ConfigError(f"unknown weight {text!r}; use unit, dirichlet or a CSV path")


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _check_p(cfg):
    if not cfg["p"] > 1:
        raise ConfigError(f"p must exceed 1, got {cfg['p']}")


def _check_N(*sizes):
    for N in sizes:
        if int(N) != N or N < 1:
            raise ConfigError(f"section sizes must be positive integers, got {N}")


def run_hardy(cfg, out: Path) -> Outcome:
    _check_p(cfg)
    _check_N(cfg["N"])
    p, N = float(cfg["p"]), int(cfg["N"])
    C = build_structured("cesaro", N)
    target = p / (p - 1.0)
    if p == 2:
        est = spectral_norm(C, seed=cfg["seed"])
        lower, upper = est.value, est.value
        rows = [[N, p, est.kind.value, est.value, est.iterations, est.residual, cfg["seed"]]]
    else:
        br = lp_norm(C, p, seed=cfg["seed"])
        lower, upper = br.lower.value, br.upper.value
        rows = [[N, p, e.kind.value, e.value, e.iterations, e.residual, cfg["seed"]] for e in (br.lower, br.upper)]
    _write_rows(out / "hardy.csv", ["N", "p", "kind", "value", "iterations", "residual", "seed"], rows)
    ok = target - 0.1 <= lower <= target and upper <= target + 1e-6
    return Outcome(ok, f"N={N} p={p:g}: norm in [{lower:.6f}, {upper:.6f}], Hardy constant {target:.6f}, window [{target - 0.1:.2f}, {target:.2f}]",
                   {"lower": lower, "upper": upper, "constant": target}, ["hardy.csv"])


def run_factorization(cfg, out: Path) -> Outcome:
    _check_N(cfg["N"])
    N, count = int(cfg["N"]), int(cfg["count"])
    rng = np.random.default_rng(cfg["seed"])
    F = build_structured("fejer", N)
    rows, worst = [], 0.0
    for i in range(count):
        g = CoefficientSequence(rng.uniform(-1.0, 1.0, N + 1))
        lhs = cesaro_operator_matrix(g, N).entries
        rhs = hadamard(F, multiplication_matrix(backward_shift(g), N)).entries
        dev = float(np.max(np.abs(lhs - rhs)))
        worst = max(worst, dev)
        rows.append([i, dev])
    C = build_structured("cesaro", N).entries
    G = cesaro_operator_matrix(log_symbol(N), N).entries
    log_dev = float(np.max(np.abs(G - C)))
    log_ok = bool(np.allclose(G, C, rtol=4 * np.finfo(float).eps, atol=0.0))
    rows.append(["log_symbol_vs_cesaro", log_dev])
    _write_rows(out / "factorization.csv", ["symbol", "max_deviation"], rows)
    ok = worst < 1e-12 and log_ok
    return Outcome(ok, f"N={N}: max factorization deviation {worst:.3g} over {count} symbols; log symbol vs Cesaro {log_dev:.3g}",
                   {"max_deviation": worst, "log_deviation": log_dev}, ["factorization.csv"])


def run_kernel_bounds(cfg, out: Path) -> Outcome:
    _check_N(cfg["N"], *cfg["Ns"])
    n_top, gamma = int(cfg["N"]), float(cfg["gamma"])
    if not gamma > 0:
        raise ConfigError(f"gamma must be positive, got {gamma}")
    fejer, riesz = KernelSpec.fejer(), KernelSpec.riesz(gamma)
    fejer_l1 = [kernel_l1_norm(fejer, n) for n in range(n_top + 1)]
    riesz_l1 = [kernel_l1_norm(riesz, n) for n in range(1, n_top + 1)]
    oracle = phi_gamma_l1_norm(gamma)
    _write_rows(out / "kernel_l1.csv", ["n", "fejer_l1", "riesz_l1"],
                [[n, fejer_l1[n], riesz_l1[n - 1] if n >= 1 else float("nan")] for n in range(n_top + 1)])
    a = riesz_decay_exponent(gamma)
    ns = sorted(int(n) for n in cfg["Ns"])
    t = np.geomspace(1e-2, np.pi, 400)
    report = pointwise_bound_report(riesz, a, ns, t)
    report.write_csv(out / "kernel_bounds.csv")
    half = ns[-2] if len(ns) > 1 else ns[-1]
    c_half, c_full = report.constant_up_to(half), report.constant
    fejer_dev = max(abs(v - 1.0) for v in fejer_l1)
    stable = abs(c_full / c_half - 1.0) <= 0.10
    ok = fejer_dev <= 1e-6 and max(riesz_l1) <= oracle + 1e-3 and stable
    return Outcome(ok, f"Fejer L1 max |dev| {fejer_dev:.2g}; Riesz({gamma:g}) L1 max {max(riesz_l1):.6f} vs oracle {oracle:.6f}; C(n<={half})={c_half:.4f}, C(n<={ns[-1]})={c_full:.4f}",
                   {"fejer_dev": fejer_dev, "riesz_max": max(riesz_l1), "oracle": oracle, "C_half": c_half, "C_full": c_full},
                   ["kernel_l1.csv", "kernel_bounds.csv"])


def _counterexample_builder(N):
    D = build_structured("fejer", N) - build_structured("lower_ones", N)
    return hadamard(D, build_structured("hilbert_transform", N))


def run_counterexample(cfg, out: Path) -> Outcome:
    Ns = cfg["Ns"]
    _check_N(*Ns)
    curve = norm_growth_curve(_counterexample_builder, Ns, 2.0, seed=cfg["seed"])
    curve.write_csv(out / "counterexample.csv")
    vals = curve.values
    fit = loglinear_fit(curve.N, vals)
    increasing = bool(np.all(np.diff(vals) > 0))
    N_hi = max(Ns)
    N_lo = max(N_hi // 4, 1)
    h = norm_growth_curve(lambda N: build_structured("hilbert_transform", N), [N_lo, N_hi], 2.0, seed=cfg["seed"])
    h.write_csv(out / "hilbert_transform.csv")
    h_change = abs(h.values[1] / h.values[0] - 1.0)
    ok = increasing and fit.r2 >= 0.98 and h_change <= 0.02
    return Outcome(ok, f"increasing={increasing}, slope {fit.slope:.4f} per log N, R^2={fit.r2:.5f}; ||H|| change {N_lo}->{N_hi}: {100 * h_change:.3f}%",
                   {"r2": fit.r2, "slope": fit.slope, "hilbert_change": h_change}, ["counterexample.csv", "hilbert_transform.csv"])


def run_schur_scaling(cfg, out: Path) -> Outcome:
    _check_p(cfg)
    _check_N(cfg["N"])
    N, p = int(cfg["N"]), float(cfg["p"])
    ms = [1, 2, 4, 8]
    vals = [schur_norm_lower(build_structured("fejer_power", N, m), p, seed=cfg["seed"]).value for m in ms]
    fit = power_fit(ms, vals)
    _write_rows(out / "schur_scaling.csv", ["m", "N", "p", "schur_lower", "seed"], [[m, N, p, v, cfg["seed"]] for m, v in zip(ms, vals)])
    ok = fit.slope <= 2.3
    return Outcome(ok, f"N={N} p={p:g}: Schur lower estimates {', '.join(f'{v:.4f}' for v in vals)}; fitted exponent {fit.slope:.4f} (limit 2.3)",
                   {"exponent": fit.slope, "values": vals}, ["schur_scaling.csv"])


def _hilbert_hankel(N):
    return build_structured("hankel", N, 1.0 / np.arange(1.0, 2.0 * N))


def _growth_outcome(name, builder, cfg, out: Path, extra: str = "") -> Outcome:
    Ns = cfg["Ns"]
    _check_N(*Ns)
    curve = norm_growth_curve(builder, Ns, 2.0, seed=cfg["seed"])
    curve.write_csv(out / f"{name}.csv")
    growth = curve.values[-1] / curve.values[0] - 1.0
    ok = growth <= 0.05
    return Outcome(ok, f"{name}: norms {', '.join(f'{v:.6f}' for v in curve.values)} at N={[int(v) for v in curve.N]}; growth {100 * growth:.3f}% (limit 5%){extra}",
                   {"growth": growth, "values": curve.values.tolist()}, [f"{name}.csv"])


def run_hankel_truncation(cfg, out: Path) -> Outcome:
    return _growth_outcome("hankel_truncation", lambda N: triangular_truncation(_hilbert_hankel(N)), cfg, out)


def run_ricard(cfg, out: Path) -> Outcome:
    return _growth_outcome("ricard", lambda N: hadamard(build_structured("ricard_E", N), _hilbert_hankel(N)), cfg, out)


def run_e_lambda(cfg, out: Path) -> Outcome:
    lam = parse_lambda(cfg["lambda"])
    if not lam.real > 0:
        raise ConfigError(f"e-lambda needs Re(lambda) > 0, got {lam}")
    _check_N(cfg["N"])
    lams = [lam, 1 + 1j, 2.0, 0.5 + 2j]
    residuals = [dif_identity_residual(v, int(cfg["N"])) for v in lams]
    res = _growth_outcome("e_lambda", lambda N: hadamard(build_structured("e_lambda", N, lam), _hilbert_hankel(N)), cfg, out,
                          f"; splitting identity residual {max(residuals):.3g}")
    res.metrics["dif_residual"] = max(residuals)
    res.passed = res.passed and max(residuals) <= 1e-12
    return res


def run_quasinilpotency(cfg, out: Path) -> Outcome:
    from .spectral import quasinilpotency_report

    _check_p(cfg)
    Ns = sorted(cfg["Ns"])
    _check_N(*Ns)
    N = max(Ns)
    g = parse_symbol(cfg["symbol"], N)
    omega = parse_weight(cfg["weight"], N)
    grid = [parse_lambda(cfg["lambda"])] if cfg.get("lambda") is not None else [parse_lambda(v) for v in cfg["lambda_grid"]]
    if any(v == 0 for v in grid):
        raise ConfigError("resolvent lambda must be nonzero")
    report = quasinilpotency_report(g, omega, float(cfg["p"]), Ns, int(cfg["n_max"]), grid, seed=cfg["seed"])
    report.write_json(out / "quasinilpotency.json")
    report.write_csv(out / "power_roots.csv", out / "resolvents.csv")
    return Outcome(report.consistent, f"{cfg['symbol']} weight={cfg['weight']} p={cfg['p']:g}: {report.verdict}; roots strictly decreasing from n={report.roots_decreasing_from}: {report.roots_strictly_decreasing}; max resolvent growth per doubling {100 * report.max_resolvent_growth:.3f}%",
                   {"verdict": report.verdict, "growth": report.max_resolvent_growth}, ["quasinilpotency.json", "power_roots.csv", "resolvents.csv"])


def run_iterated_limits(cfg, out: Path) -> Outcome:
    _check_N(cfg["N"])
    N = int(cfg["N"])
    fejer = iterated_limit_diagnostic(lambda n: build_structured("fejer", n), N)
    ones = iterated_limit_diagnostic(lambda n: build_structured("lower_ones", n), N)
    cesaro = iterated_limit_diagnostic(lambda n: build_structured("cesaro", n), N)
    data = {
        name: {"first": [r.first.real, r.first.imag], "second": [r.second.real, r.second.imag], "stable": r.stable, "support": r.support}
        for name, r in (("fejer", fejer), ("lower_ones", ones), ("cesaro", cesaro))
    }
    with open(out / "iterated_limits.json", "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    ok = abs(fejer.first - 1) <= 1e-2 and abs(fejer.second) <= 1e-2 and ones.first == 1 and ones.second == 1
    return Outcome(ok, f"N={N}: fejer ({fejer.first.real:.6f}, {fejer.second.real:.6f}); lower_ones ({ones.first.real:g}, {ones.second.real:g}); cesaro ({cesaro.first.real:.2e}, {cesaro.second.real:.2e})",
                   data, ["iterated_limits.json"])


RUNNERS: dict[str, Callable[[dict, Path], Outcome]] = {
    "hardy": run_hardy,
    "factorization": run_factorization,
    "kernel-bounds": run_kernel_bounds,
    "counterexample": run_counterexample,
    "schur-scaling": run_schur_scaling,
    "hankel-truncation": run_hankel_truncation,
    "ricard": run_ricard,
    "e-lambda": run_e_lambda,
    "quasinilpotency": run_quasinilpotency,
    "iterated-limits": run_iterated_limits,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trischur", description="Finite-section experiments on triangular Schur multipliers.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--p", type=float)
    ap.add_argument("--N", type=int)
    ap.add_argument("--Ns", help="comma separated sizes; 'a,b,...,c' expands geometrically")
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--lambda", dest="lambda_", metavar="RE,IM")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--weight", help="unit, dirichlet, or a CSV file of weights")
    ap.add_argument("--symbol", help="log, zero, blaschke:a,b,... or a coefficient CSV")
    ap.add_argument("--out", help="output directory (default: runs/<experiment>)")
    ap.add_argument("--config", help="JSON file with the same keys; flags take precedence")
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[args.experiment])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(loaded)
    flags = {
        "p": args.p,
        "N": args.N,
        "Ns": args.Ns,
        "gamma": args.gamma,
        "lambda": args.lambda_,
        "seed": args.seed,
        "weight": args.weight,
        "symbol": args.symbol,
        "out": args.out,
    }
    cfg.update({k: v for k, v in flags.items() if v is not None})
    if "Ns" in cfg:
        cfg["Ns"] = parse_sizes(cfg["Ns"])
        if any(b <= a for a, b in zip(cfg["Ns"], cfg["Ns"][1:])):
            raise ConfigError(f"sizes must be strictly increasing, got {cfg['Ns']}")
    if "lambda" in cfg and cfg["lambda"] is not None:
        parse_lambda(cfg["lambda"])
    for key in ("p", "gamma"):
        if key in cfg and cfg[key] is not None:
            cfg[key] = float(cfg[key])
    if cfg.get("out") is None:
        cfg["out"] = os.path.join("runs", args.experiment)
    return cfg


def _versions() -> dict:
    return {"trischur": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        threads = os.environ.get("TRSC_THREADS")
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=max(1, int(threads))):
                outcome = RUNNERS[args.experiment](cfg, out)
        else:
            outcome = RUNNERS[args.experiment](cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"trischur {args.experiment}: error: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "experiment": args.experiment,
        "config": {k: v for k, v in cfg.items()},
        "versions": _versions(),
        "outputs": outcome.files,
        "passed": bool(outcome.passed),
        "summary": outcome.summary,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    print(f"{'PASS' if outcome.passed else 'FAIL'} {args.experiment}: {outcome.summary}")
    return 0 if outcome.passed else 1


if __name__ == "__main__":
    sys.exit(main())
