import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_potentials import DomainError, JacobiParams, ParameterError, Setting
from spectral_potentials import envelopes as E
from spectral_potentials import potentials as P
from spectral_potentials.measures import make_grid


def test_j_gamma_examples():
    assert E.j_gamma_closed(E.JGammaArgs(0.7, 0.3, 0.3, 0.1)) == 0.0
    assert E.j_gamma_quad(E.JGammaArgs(0.7, 0.3, 0.3, 0.1)) == 0.0
    a = E.JGammaArgs(0.0, 0.0, 1.0, 0.1)
    assert E.j_gamma_closed(a) == pytest.approx(1.0 / 1.0 ** 2 * (0.1 / 1.0) ** -1)
    with pytest.raises(DomainError):
        E.JGammaArgs(-1.0, 0.0, 1.0, 0.1)
    with pytest.raises(DomainError):
        E.JGammaArgs(0.5, 1.0, 0.5, 0.1)


@given(st.floats(0.0, 5.0), st.floats(1e-3, 5.0), st.floats(1e-3, 2 * math.pi))
def test_j_gamma_quad_matches_antiderivatives(T, span, w):
    S = T + span
    a0 = E.j_gamma_quad(E.JGammaArgs(0.0, T, S, w))
    assert a0 == pytest.approx((math.atan(S / w) - math.atan(T / w)) / w, rel=1e-9)
    a1 = E.j_gamma_quad(E.JGammaArgs(1.0, T, S, w))
    assert a1 == pytest.approx(0.5 * math.log((S * S + w * w) / (T * T + w * w)), rel=1e-9)


@pytest.mark.parametrize("gamma", [-2.5, -1.0, -0.3, 0.7, 1.0, 2.0])
def test_j_gamma_branches_bounded_ratio(gamma, rng):
    ratios = []
    for _ in range(60):
        T = float(np.exp(rng.uniform(-6, 1)))
        S = T * float(np.exp(rng.uniform(0.01, 6)))
        w = float(np.exp(rng.uniform(-6, math.log(2 * math.pi))))
        a = E.JGammaArgs(gamma, T, S, w)
        ratios.append(E.j_gamma_closed(a) / E.j_gamma_quad(a))
    assert max(ratios) / min(ratios) < 50 ** 2


def test_power_diff_examples():
    assert E.power_diff_envelope(0.5, 2.0, 2.0) == 0.0
    assert E.power_diff_envelope(1.0, 3.0, 0.5) == pytest.approx(2.5)
    A, B = np.meshgrid(np.geomspace(0.1, 10, 25), np.geomspace(0.1, 10, 25))
    m = A != B
    r = np.abs(A[m] ** 2 - B[m] ** 2) / np.array([E.power_diff_envelope(2.0, a, b) for a, b in zip(A[m], B[m])])
    assert r.min() >= 1 - 1e-12 and r.max() <= 2 + 1e-12
    with pytest.raises(DomainError):
        E.power_diff_envelope(0.0, 1.0, 2.0)


@given(st.sampled_from([-2.0, -0.5, 0.5, 1.0, 3.0]), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_power_diff_band(xi, A, B):
    if abs(A - B) < 1e-9 * max(A, B):
        return
    r = abs(A ** xi - B ** xi) / E.power_diff_envelope(xi, A, B)
    assert 0.25 <= r <= 4


def test_poisson_envelope_examples():
    cheb = Setting.make("jacobi-pol", alpha=-0.5, beta=-0.5)
    assert E.poisson_envelope(cheb, 5.0, 1.0, 2.0, T=1.0) == pytest.approx(1.0)
    fb = Setting.make("fb-natural", nu=0.5)
    t, x = 0.1, 0.5
    ref = (1 - x) ** 2 * (t + 1) ** -2 * (t + 1) ** -2 / t
    assert E.poisson_envelope(fb, t, x, x, T=1.0) == pytest.approx(ref)


def test_potential_envelope_examples():
    s = Setting.make("jacobi-pol", alpha=0.0, beta=0.0)
    # sigma = alpha + 1 = beta + 1 here, so both logarithmic terms are active
    both = 2 + math.log(math.pi) + math.log(math.pi / (math.pi - 1))
    assert E.potential_envelope(s, 1.0, 1.0, 1.0) == pytest.approx(both)
    assert E.potential_envelope(s, 1.0 + 1e-9, 1.0, 1.0) == pytest.approx(2.0, rel=1e-6)
    s = Setting.make("jacobi-pol", alpha=0.5, beta=0.0)
    on = E.potential_envelope(s, 1.5, 0.1, 0.2)
    off = E.potential_envelope(s, 1.5 + 1e-6, 0.1, 0.2)
    assert on - off == pytest.approx(math.log(2 * math.pi / 0.3), rel=1e-4)
    assert math.isinf(E.potential_envelope(s, 0.4, 1.0, 1.0))


def test_activation_tolerance():
    assert E.activated(1.5, 1.5 + 1e-13)
    assert not E.activated(1.5, 1.5 + 1e-9)


def test_components():
    p = JacobiParams(0.3, -0.2)
    th, ph = np.array([0.1, 1.0]), np.array([2.0, 1.3])
    assert np.all(E.kernel_component("pol", 1, p, 0.4, th, ph) == 1.0)
    cheb = JacobiParams(-0.5, -0.5)
    k6 = E.kernel_component("fun", 6, cheb, 0.3, th, ph)
    assert np.allclose(k6, np.abs(th - ph) ** (2 * 0.3 - 1))
    with pytest.raises(ParameterError):
        E.kernel_component("pol", 7, p, 0.4, th, ph)
    with pytest.raises(ParameterError):
        E.kernel_component("other", 1, p, 0.4, th, ph)


@pytest.mark.parametrize("a,b,sigma", [(0.3, -0.2, 0.4), (1.0, 0.0, 0.75), (0.5, 0.5, 0.5), (-0.5, 0.5, 1.5),
                                       (0.0, 2.0, 1.0), (-0.7, 0.1, 0.3)])
def test_component_sum_matches_envelope(a, b, sigma):
    p = JacobiParams(a, b)
    pts = np.linspace(0.01, math.pi - 0.01, 30)
    th, ph = np.meshgrid(pts, pts)
    off = th != ph
    for family, key in (("pol", "jacobi-pol"), ("fun", "jacobi-fun")):
        s = Setting.make(key, alpha=a, beta=b)
        r = E.component_sum(family, p, sigma, th[off], ph[off]) / E.potential_envelope(s, sigma, th[off], ph[off])
        assert r.min() >= 1 / 8 and r.max() <= 8


def test_u_xi_kernel():
    cheb = JacobiParams(-0.5, -0.5)
    assert E.u_xi_kernel(cheb, 0.5, 1.5, 1.7) == pytest.approx(0.2 ** -0.5 / 2)
    with pytest.raises(P.SingularityError):
        E.u_xi_kernel(cheb, 0.5, 1.0, 1.0)
    p = JacobiParams(0.7, 0.2)
    pts = np.linspace(0.05, math.pi - 0.05, 25)
    sig = 0.3
    ratios, sym = [], []
    for t in pts:
        for f in pts:
            if t != f:
                u = E.u_xi_kernel(p, 2 * sig, t, f)
                ratios.append(u / E.kernel_component("pol", 6, p, sig, t, f))
                sym.append(u / E.u_xi_kernel(p, 2 * sig, f, t))
    assert max(ratios) / min(ratios) < 1e3
    assert max(sym) / min(sym) < 1e3


def test_band_from_ratios():
    band = E.EnvelopeBand.from_ratios(np.array([1.0, 4.0, 2.0]), np.array([[0], [1], [2]]),
                                      np.array([True, True, False]))
    assert band.width == 4.0 and band.unresolved == 1 and band.argmax == [1.0]
    with pytest.raises(Exception):
        E.EnvelopeBand.from_ratios(np.array([1.0, -1.0]), np.array([[0], [1]]))


def test_default_switch_time_is_dilation_consistent():
    times = np.geomspace(0.01, 8, 20)
    assert E.default_switch_time(Setting.make("jacobi-pol", alpha=0, beta=0), times) == pytest.approx(8.0)
    assert E.default_switch_time(Setting.make("fb-natural", nu=0), times) == pytest.approx(8 / math.pi)


def test_small_poisson_band_and_report():
    s = Setting.make("jacobi-pol", alpha=0.5, beta=-0.5)
    band = E.poisson_band(s, np.geomspace(0.01, 8, 6), make_grid(s, 16))
    assert 0 < band.lower_ratio <= band.upper_ratio < np.inf
    assert band.width < 1e3
    rows = json.loads(E.band_report([{"parameters": {"alpha": 0.5}, "grid": 16, "band": band}]))
    assert rows[0]["upper_ratio"] == band.upper_ratio and rows[0]["grid"] == 16
