import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from trischur.matrices import FiniteSection, Structure, WeightSequence, build_structured, volterra_operator_matrix
from trischur.series import CoefficientSequence, blaschke_symbol, log_symbol
from trischur.spectral import (
    ConditioningWarning,
    power_norm_sequence,
    quasinilpotency_report,
    resolvent_probe,
    resolvent_section,
    schur_power_roots,
)

BLASCHKE = lambda N: blaschke_symbol([0.3, 0.7], N)


def test_shift_power_roots():
    N = 8
    shift = FiniteSection(np.eye(N, k=-1), Structure.LOWER_TRIANGULAR)
    roots = power_norm_sequence(shift, 2.0, 12)
    for r in roots:
        assert r.root == pytest.approx(1.0 if r.n < N else 0.0, abs=1e-12)


def test_power_sequence_p3_shift():
    shift = np.eye(6, k=-1)
    roots = power_norm_sequence(shift, 3.0, 8)
    assert [round(r.root, 9) for r in roots] == [1.0] * 5 + [0.0] * 3
    assert all(r.upper_root >= r.root for r in roots)


@settings(max_examples=20, deadline=None)
@given(a=arrays(np.float64, (7, 7), elements=st.floats(-5, 5)))
def test_strictly_lower_sections_are_nilpotent(a):
    T = np.tril(a, -1)
    roots = power_norm_sequence(T, 2.0, 10)
    assert all(r.root == 0.0 for r in roots if r.n >= 7)


def test_power_sequence_rescaling_survives_deep_powers():
    A = 1e3 * np.eye(5)
    roots = power_norm_sequence(A, 2.0, 64)
    assert roots[-1].root == pytest.approx(1e3, rel=1e-9)
    tiny = 1e-3 * np.eye(5)
    assert power_norm_sequence(tiny, 2.0, 64)[-1].root == pytest.approx(1e-3, rel=1e-9)


def test_power_sequence_rejects_bad_input():
    with pytest.raises(ValueError):
        power_norm_sequence(np.eye(3), 2.0, 0)
    with pytest.raises(ValueError):
        power_norm_sequence(np.ones((2, 3)), 2.0, 2)


def test_blaschke_volterra_roots_decrease():
    T = volterra_operator_matrix(BLASCHKE(1024), 1024)
    roots = [r.root for r in power_norm_sequence(T, 2.0, 32) if r.n >= 4]
    assert all(b < a for a, b in zip(roots, roots[1:]))


def test_fejer_hadamard_power_roots():
    roots = schur_power_roots(build_structured("fejer", 128), n_max=16)
    assert roots[-1].n == 16
    assert roots[-1].root <= 1.1


def test_resolvent_of_zero_symbol_is_identity():
    g = CoefficientSequence(np.zeros(65))
    R = resolvent_section(g, 0.5, 64)
    np.testing.assert_array_equal(R.entries, np.eye(64))
    pts = resolvent_probe(g, 0.5, 2.0, [16, 32, 64])
    assert all(pt.upper == pytest.approx(1.0) for pt in pts)


def test_resolvent_rejects_zero_lambda():
    with pytest.raises(ValueError):
        resolvent_section(log_symbol(8), 0, 8)
    with pytest.raises(ValueError):
        resolvent_probe(log_symbol(8), 0j, 2.0, [8])


@pytest.mark.parametrize(
    "g,lam,N",
    [
        (BLASCHKE(1024), 0.1, 1024),
        (BLASCHKE(256), 0.1j, 256),
        (log_symbol(512), -0.2, 512),
        (blaschke_symbol([0.5], 300), 0.3 - 0.4j, 300),
    ],
)
def test_resolvent_triangular_exactness(g, lam, N):
    T = volterra_operator_matrix(g, N).entries
    R = resolvent_section(g, lam, N).entries
    residual = (np.eye(N) - T / lam) @ R - np.eye(N)
    assert np.max(np.abs(residual)) <= 1e-10


def test_resolvent_weighted_exactness():
    N = 200
    g = log_symbol(N)
    w = WeightSequence.dirichlet(N)
    T = volterra_operator_matrix(g, N, w, 3.0).entries
    R = resolvent_section(g, 0.7, N, w, 3.0).entries
    assert np.max(np.abs((np.eye(N) - T / 0.7) @ R - np.eye(N))) <= 1e-10


@pytest.mark.parametrize("c", [2.0, -0.5, 1j, 3 - 1j])
def test_resolvent_scale_covariance(c):
    N = 128
    g = BLASCHKE(N)
    lam = 0.4 + 0.1j
    cg = CoefficientSequence(c * g.coeffs)
    np.testing.assert_allclose(resolvent_section(cg, lam, N).entries, resolvent_section(g, lam / c, N).entries, atol=1e-10)


def test_resolvent_conditioning_warning():
    with pytest.warns(ConditioningWarning):
        resolvent_section(CoefficientSequence(np.full(201, 5.0)), 0.01, 200)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        resolvent_section(BLASCHKE(64), 1.0, 64)


def test_resolvent_plateau_single_zero():
    pts = resolvent_probe(blaschke_symbol([0.5], 2048), 0.1, 2.0, [256, 512, 1024, 2048])
    ups = [pt.upper for pt in pts]
    for a, b in zip(ups[1:], ups[2:]):
        assert b <= 1.05 * a


def test_resolvent_log_symbol_outside_spectrum():
    pts = resolvent_probe(log_symbol(1024), 3.0, 2.0, [128, 256, 512, 1024])
    ups = [pt.upper for pt in pts]
    for a, b in zip(ups, ups[1:]):
        assert b <= 1.05 * a


def test_resolvent_probe_parallel_matches_serial():
    g = BLASCHKE(128)
    a = resolvent_probe(g, 0.2, 2.0, [32, 64, 128], workers=1)
    b = resolvent_probe(g, 0.2, 2.0, [32, 64, 128], workers=3)
    assert a == b


def test_report_blaschke_consistent(tmp_path):
    N_list = [128, 256, 512]
    rep = quasinilpotency_report(BLASCHKE(512), WeightSequence.unit(512), 2.0, N_list)
    assert rep.roots_strictly_decreasing
    assert rep.max_resolvent_growth <= 0.05
    assert rep.verdict == "consistent with quasi-nilpotent"
    rep.write_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["verdict"] == rep.verdict
    assert len(data["power_roots"]) == 32
    assert set(data["resolvents"]) == {"0.1+0j", "0+0.1j", "-0.2+0j"}
    rep.write_csv(tmp_path / "roots.csv", tmp_path / "res.csv")
    assert (tmp_path / "roots.csv").read_text().startswith("n,root,upper_root,kind")
    assert len((tmp_path / "res.csv").read_text().splitlines()) == 1 + 3 * 3


def test_report_zero_symbol():
    rep = quasinilpotency_report(CoefficientSequence(np.zeros(65)), None, 2.0, [32, 64], n_max=8)
    assert all(r.root == 0.0 for r in rep.roots)
    assert rep.consistent


def test_report_dirichlet_weight_log_symbol():
    N = 256
    # lambda = 0.1 lies inside the spectrum of this weighted Cesaro-type operator, so the
    # resolvent sections blow up and the conditioning warning must fire
    with pytest.warns(ConditioningWarning):
        rep = quasinilpotency_report(log_symbol(N), WeightSequence.dirichlet(N), 2.0, [64, 128, 256], n_max=8)
    assert rep.verdict in ("consistent with quasi-nilpotent", "inconclusive")
    assert rep.weight_ratio_deviation == pytest.approx(0.5)
    assert len(rep.roots) == 8
