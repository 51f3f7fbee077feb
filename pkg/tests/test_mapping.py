import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hand_table import ROWS
from spectral_potentials import ParameterError, Setting
from spectral_potentials import mapping as M
from spectral_potentials.potentials import PotentialSpec


def spec(key, sigma, variant="riesz", **kw):
    return PotentialSpec(Setting.make(key, **kw), sigma, variant)


@pytest.mark.parametrize("key,kw,sigma,a,b,label", ROWS)
def test_hand_table(key, kw, sigma, a, b, label):
    sp = spec(key, sigma, **kw)
    pq = M.ExponentPair(a, b)
    assert M.classify(sp, pq).label == label
    strict = M.classify(sp, pq, strict=True)
    assert strict is None or strict.label == label


def test_exponent_pair():
    pq = M.ExponentPair.from_pq(4.0, math.inf)
    assert (pq.inv_p, pq.inv_q) == (0.25, 0.0)
    assert pq.p == 4.0 and math.isinf(pq.q)
    assert pq.dual() == M.ExponentPair(1.0, 0.75)
    with pytest.raises(ParameterError):
        M.ExponentPair(1.2, 0.0)
    with pytest.raises(ParameterError):
        M.ExponentPair.from_pq(0.5, 2)


def test_mapping_type_order_and_labels():
    assert M.MappingType.STRONG > M.MappingType.WEAK > M.MappingType.RESTRICTED_WEAK > M.MappingType.NONE
    for m in M.MappingType:
        assert M.MappingType.from_label(m.label) is m
    with pytest.raises(ParameterError):
        M.MappingType.from_label("bounded")


def test_thresholds():
    t = M.thresholds(Setting.make("jacobi-pol", alpha=0.3, beta=1.2))
    assert t.delta == pytest.approx(2.2) and t.kappa == pytest.approx(0.8)
    t = M.thresholds(Setting.make("fb-natural", nu=-0.8))
    assert t.eta == 0.5


coord = st.sampled_from(np.round(np.linspace(0, 1, 21), 12).tolist())
jac = st.floats(-0.95, 2.5).map(lambda v: round(v, 2))
order = st.floats(0.05, 3.0).map(lambda v: round(v, 2))


def _valid(a, b):
    return abs(a + b + 1) > 1e-9


@given(jac, jac, order, coord, coord)
def test_symmetric_in_alpha_beta(a, b, s, x, y):
    if not _valid(a, b):
        return
    for key in ("jacobi-pol", "jacobi-fun"):
        pq = M.ExponentPair(x, y)
        assert M.classify(spec(key, s, alpha=a, beta=b), pq) == M.classify(spec(key, s, alpha=b, beta=a), pq)


@given(jac, jac, order, coord, coord, coord, coord)
def test_strong_type_is_inherited_inward(a, b, s, x, y, dx, dy):
    # finite measure: strong (p, q) gives strong (p~, q~) for p~ >= p, q~ <= q
    if not _valid(a, b):
        return
    for key in ("jacobi-pol", "jacobi-fun"):
        sp = spec(key, s, alpha=a, beta=b)
        if M.classify(sp, M.ExponentPair(x, y)) == M.MappingType.STRONG:
            inner = M.ExponentPair(x * (1 - dx), y + (1 - y) * dy)
            assert M.classify(sp, inner) == M.MappingType.STRONG


@given(jac, jac, order, coord, coord)
def test_duality_of_strong_type(a, b, s, x, y):
    if not _valid(a, b):
        return
    for key in ("jacobi-pol", "jacobi-fun"):
        sp = spec(key, s, alpha=a, beta=b)
        pq = M.ExponentPair(x, y)
        if M.classify(sp, pq) == M.MappingType.STRONG:
            assert M.classify(sp, pq.dual()) == M.MappingType.STRONG


@given(st.floats(-0.95, 2.5).map(lambda v: round(v, 2)), order, coord, coord)
def test_fourier_bessel_matches_jacobi(nu, s, x, y):
    pq = M.ExponentPair(x, y)
    assert M.classify(spec("fb-natural", s, nu=nu), pq) == M.classify(spec("jacobi-pol", s, alpha=nu, beta=-0.5), pq)
    assert M.classify(spec("fb-lebesgue", s, nu=nu), pq) == M.classify(spec("jacobi-fun", s, alpha=nu, beta=0.5), pq)


@given(jac, jac, order, coord, coord)
def test_variants_and_scaling_share_types(a, b, s, x, y):
    if not _valid(a, b):
        return
    pq = M.ExponentPair(x, y)
    base = M.classify(spec("jacobi-fun", s, alpha=a, beta=b), pq)
    assert M.classify(spec("jacobi-scaled", s, alpha=a, beta=b), pq) == base
    assert M.classify(spec("jacobi-fun", s, "bessel", alpha=a, beta=b), pq) == base


def test_bessel_variant_at_zero_eigenvalue_is_classified():
    sp = spec("jacobi-pol", 0.3, "bessel", alpha=-0.5, beta=-0.5)
    assert M.classify(sp, M.ExponentPair(1.0, 0.4)) == M.MappingType.WEAK


def test_audit_clean_and_mutation_detected():
    sp = spec("jacobi-fun", 0.3, alpha=-0.7, beta=0.5)
    assert M.consistency_audit(sp, resolution=16) == []
    bad = M.consistency_audit(sp, resolution=16, classifier=M.classify_without_corner_exception)
    assert bad and {v.rule for v in bad} == {"claims"}
    assert any(np.allclose(v.pair, (0.8, 0.2)) for v in bad)


def test_audit_detects_broken_monotonicity():
    sp = spec("jacobi-pol", 0.5, alpha=0.0, beta=0.0)

    def broken(s, pq):
        t = M.classify(s, pq)
        return M.MappingType.NONE if (abs(pq.inv_p - 0.2) < 1e-9 and abs(pq.inv_q - 0.6) < 1e-9) else t
    rules = {v.rule for v in M.consistency_audit(sp, resolution=11, classifier=broken)}
    assert "monotone" in rules and "claims" in rules


def test_boundary_flags():
    sp = spec("jacobi-pol", 0.5, alpha=0.0, beta=0.0)
    assert M.boundary_flags(sp, M.ExponentPair(0.8, 0.3 + 1e-8)) == ["critical line"]
    assert M.boundary_flags(sp, M.ExponentPair(0.8, 0.3)) == []


def test_region_grid_and_exports(tmp_path):
    sp = spec("jacobi-fun", 0.2, alpha=-0.7, beta=0.5)
    rows = M.region_grid(sp, 10)
    assert len(rows) == 121
    fine = {(a, b): t for a, b, t in M.region_grid(sp, 20)}
    assert all(fine[(a, b)] == t for a, b, t in rows)
    path = tmp_path / "r.csv"
    M.write_region_csv(path, rows)
    assert open(path).readline().strip() == "inv_p,inv_q,type"
    script = M.gnuplot_script(str(path))
    assert str(path) in script and "palette" in script
    with pytest.raises(ParameterError):
        M.region_grid(sp, 4)


def test_extremal_functions():
    sp = spec("jacobi-pol", 0.75, alpha=1.0, beta=0.0)
    f = M.extremal_function("E1", sp, 0.1)
    assert np.array_equal(f(np.array([0.05, 0.2])), [1.0, 0.0])
    pq = M.ExponentPair(0.9, 0.2)
    g = M.extremal_function("E3", sp, 0.1, pq)
    A = M.extremal_exponent("E3", sp, 0.1, pq)
    assert g(np.array([0.5]))[0] == pytest.approx(0.5 ** A)
    with pytest.raises(ParameterError):
        M.extremal_function("E3", sp, 0.5, pq)
    with pytest.raises(ParameterError):
        M.extremal_function("E9", sp)
    with pytest.raises(ParameterError):
        M.extremal_function("E8", sp)
    assert set(M.CATALOG) == {f"E{i}" for i in range(1, 9)}


def test_probe_argument_checks():
    sp = spec("jacobi-pol", 1.0, alpha=0.0, beta=0.0)
    with pytest.raises(ParameterError):
        M.blowup_probe(sp, [2], "E1", M.ExponentPair(1, 0), [0.1, 0.2, 0.1])
    with pytest.raises(ParameterError):
        M.blowup_probe(spec("fb-natural", 1.0, nu=0.0), [2], "E1", M.ExponentPair(1, 0), [0.1, 0.05])
    with pytest.raises(ParameterError):
        M.probe_kernel(sp, "most")


def test_short_ladder_is_not_confirmed():
    sp = spec("jacobi-pol", 1.0, alpha=0.0, beta=0.0)
    r = M.blowup_probe(sp, [2], "E1", M.ExponentPair(1, 0), 2.0 ** -np.arange(4, 8))
    assert not r.confirmed
    assert '"case_id": "E1"' in r.to_json()


def test_log_law_probe_fails_where_strong_type_holds():
    # component 1 is bounded, so the L1 -> L-infinity ratio of indicators does not grow
    sp = spec("jacobi-pol", 1.0, alpha=0.0, beta=0.0)
    r = M.blowup_probe(sp, [1], "E1", M.ExponentPair(1, 0), 2.0 ** -np.arange(4, 13))
    assert not r.confirmed


def test_full_kernel_agrees_with_component_model():
    # the full kernel and the model (components 1 + 2) differ by a bounded factor at one ladder point
    sp = spec("jacobi-pol", 1.0, alpha=0.0, beta=0.0)
    full, _ = M.probe_kernel(sp, "full")
    model, label = M.probe_kernel(sp, [1, 2, 4])
    assert label == "pol:1+2+4"
    phi = np.array([0.01, 0.3, 1.0, 2.5])
    r = full(0.02, phi) / model(0.02, phi)
    assert r.max() / r.min() < 8
