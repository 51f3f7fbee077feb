import math

import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, strategies as st

from spectral_potentials import BesselOrder, DomainError, JacobiParams, Setting, specfun

exponent = st.floats(min_value=-0.95, max_value=3.0)


def gram_schmidt_jacobi(n, alpha, beta, u):
    """Orthogonalize monomials under (1-u)^a (1+u)^b, scaled so P_n(1) = binom(n+a, n)."""
    nodes, weights = sps.roots_jacobi(40, alpha, beta)
    basis = []
    for k in range(n + 1):
        v = nodes ** k
        for b in basis:
            v = v - np.sum(weights * v * b) / np.sum(weights * b * b) * b
        basis.append(v)
    # recover the monic-like polynomial coefficients by fitting on the nodes
    coeffs = np.polynomial.polynomial.polyfit(nodes, basis[n], n)
    at_one = np.polynomial.polynomial.polyval(1.0, coeffs)
    scale = math.exp(sps.gammaln(n + alpha + 1) - sps.gammaln(n + 1) - sps.gammaln(alpha + 1)) / at_one
    return scale * np.polynomial.polynomial.polyval(u, coeffs)


def test_degree_zero_is_one():
    assert specfun.jacobi_poly(0, JacobiParams(0.3, -0.7), 0.2) == 1.0


def test_degree_one_legendre():
    assert specfun.jacobi_poly(1, JacobiParams(0, 0), 0.3) == pytest.approx(0.3, abs=1e-15)
    assert gram_schmidt_jacobi(1, 0.0, 0.0, 0.3) == pytest.approx(0.3, abs=1e-12)


def test_value_at_one_is_binomial():
    v = specfun.jacobi_poly(5, JacobiParams(0.5, -0.5), 1.0)
    assert v == pytest.approx(sps.binom(5.5, 5), rel=1e-13)


@pytest.mark.parametrize("n,alpha,beta", [(3, 0.5, -0.5), (6, -0.9, 2.0), (4, 1.5, 0.2)])
def test_recurrence_matches_gram_schmidt(n, alpha, beta):
    u = np.linspace(-1, 1, 9)
    got = specfun.jacobi_poly(n, JacobiParams(alpha, beta), u)
    assert np.allclose(got, gram_schmidt_jacobi(n, alpha, beta, u), rtol=1e-8, atol=1e-9)


@given(st.integers(0, 40), exponent, exponent, st.floats(-1, 1))
def test_recurrence_matches_library_jacobi(n, a, b, u):
    ref = sps.eval_jacobi(n, a, b, u)
    assert specfun.jacobi_poly(n, JacobiParams(a, b), u) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_jacobi_domain():
    with pytest.raises(DomainError):
        specfun.jacobi_poly(2, JacobiParams(0, 0), 1.5)


def test_norm_const_chebyshev():
    s = Setting.make("jacobi-pol", alpha=-0.5, beta=-0.5)
    assert specfun.norm_const(s, 0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-13)
    # the normalized cosine has constant sqrt(2/pi); P_n(1) != 1 is absorbed by the constant
    x = np.array([0.3, 1.1, 2.5])
    for n in range(1, 6):
        assert np.allclose(specfun.eigfun(s, n, x), math.sqrt(2 / math.pi) * np.cos(n * x), rtol=1e-12)


def test_norm_const_fb_quadrature():
    s = Setting.make("fb-natural", nu=0.5)
    nodes, weights = np.polynomial.legendre.leggauss(80)
    x = 0.5 * (nodes + 1)
    f = specfun.eigfun(s, 1, x)
    assert np.sum(0.5 * weights * f * f * x ** 2) == pytest.approx(1.0, abs=1e-10)


def test_index_origin():
    with pytest.raises(IndexError):
        specfun.norm_const(Setting.make("fb-natural", nu=0.0), 0)


def test_eigfun_chebyshev_example():
    s = Setting.make("jacobi-pol", alpha=-0.5, beta=-0.5)
    v = specfun.eigfun(s, 2, math.pi / 3)
    assert v == pytest.approx(math.sqrt(2 / math.pi) * math.cos(2 * math.pi / 3), rel=1e-12)


@given(st.integers(0, 12), exponent, exponent, st.floats(0.01, math.pi - 0.01))
def test_function_system_is_weighted_polynomial_system(n, a, b, th):
    pol = Setting.make("jacobi-pol", alpha=a, beta=b)
    fun = pol.with_kind(specfun.SettingKind.JACOBI_FUN)
    w = math.sin(th / 2) ** (a + 0.5) * math.cos(th / 2) ** (b + 0.5)
    assert specfun.eigfun(fun, n, th) == pytest.approx(w * specfun.eigfun(pol, n, th), rel=1e-12, abs=1e-300)


@given(st.integers(1, 12), st.floats(-0.9, 3.0), st.floats(0.01, 0.99))
def test_fb_lebesgue_is_weighted_natural(n, nu, x):
    nat = Setting.make("fb-natural", nu=nu)
    leb = nat.with_kind(specfun.SettingKind.FB_LEBESGUE)
    assert specfun.eigfun(leb, n, x) == pytest.approx(x ** (nu + 0.5) * specfun.eigfun(nat, n, x), rel=1e-12)


@given(st.integers(0, 10), exponent, exponent, st.floats(0.01, 0.99))
def test_scaled_system_is_dilation(n, a, b, x):
    fun = Setting.make("jacobi-fun", alpha=a, beta=b)
    sc = fun.with_kind(specfun.SettingKind.JACOBI_SCALED)
    ref = math.sqrt(math.pi) * specfun.eigfun(fun, n, math.pi * x)
    assert specfun.eigfun(sc, n, x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("kind", [k.value for k in specfun.SettingKind])
def test_eigfun_rejects_endpoints(kind):
    s = Setting.make(kind, alpha=0.0, beta=0.0, nu=0.0)
    hi = s.interval[1]
    with pytest.raises(DomainError):
        specfun.eigfun(s, s.origin, hi)
    with pytest.raises(DomainError):
        specfun.eigfun(s, s.origin, 0.0)


def test_bessel_examples():
    assert specfun.bessel_j(0.5, math.pi) == pytest.approx(0.0, abs=1e-15)
    assert specfun.bessel_j(0.0, 0.0) == 1.0
    assert specfun.bessel_j(1.3, 0.0) == 0.0
    assert abs(specfun.bessel_j(0.0, 2.404825557695773)) <= 1e-10


@given(st.floats(-0.95, 8.0), st.floats(0.0, 200.0))
def test_bessel_matches_library(nu, x):
    ref = sps.jv(nu, x)
    scale = max(1.0, abs(ref)) if x < 1 else 1.0
    assert specfun.bessel_j(nu, x) == pytest.approx(ref, abs=1e-11 * scale, rel=1e-10)


@pytest.mark.parametrize("x", [0.3, 2.0, 11.9, 12.1, 25.0, 39.0, 41.0, 150.0])
def test_half_integer_closed_forms(x):
    c = math.sqrt(2 / (math.pi * x))
    assert specfun.bessel_j(0.5, x) == pytest.approx(c * math.sin(x), rel=1e-12, abs=1e-14)
    assert specfun.bessel_j(-0.5, x) == pytest.approx(c * math.cos(x), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("nu", [0.0, 2.7, 10.0])
def test_bessel_regimes_agree_at_crossovers(nu):
    # the three evaluation regimes are separate code paths; values must join smoothly
    for edge in (12.0, max(40.0, specfun._hankel_limit(nu))):
        x = np.array([edge - 1e-9, edge + 1e-9])
        v = specfun.bessel_j(nu, x)
        assert abs(v[0] - v[1]) <= 1e-12 + 1e-8 * abs(specfun.bessel_j(nu + 1, edge))


def test_zero_examples():
    assert specfun.bessel_zero(0.0, 1) == pytest.approx(2.404825557695773, abs=1e-13)
    z = specfun.bessel_zeros(BesselOrder(0.5), 6)
    assert np.allclose(z, np.pi * np.arange(1, 7), rtol=0, atol=1e-12)
    z = specfun.bessel_zeros(-0.9, 3)
    assert z[0] < z[1] < z[2]
    with pytest.raises(DomainError):
        specfun.bessel_zero(0.0, 0)


@given(st.floats(-0.95, 12.0))
def test_zeros_interlace_and_vanish(nu):
    z = specfun.bessel_zeros(nu, 20)
    assert np.all(np.diff(z) > 0)
    assert np.max(np.abs(specfun.bessel_j(nu, z))) <= 1e-10
    # zeros of J_{nu+1} interlace with those of J_nu
    w = specfun.bessel_zeros(nu + 1, 19)
    assert np.all((z[:-1] < w) & (w < z[1:]))


def test_zeros_match_library_integer_order():
    assert np.allclose(specfun.bessel_zeros(3.0, 30), sps.jn_zeros(3, 30), rtol=1e-13)


def test_eigenvalue_examples():
    assert specfun.eigenvalue(Setting.make("jacobi-pol", alpha=0, beta=0), 0) == pytest.approx(0.25)
    assert specfun.eigenvalue(Setting.make("jacobi-pol", alpha=-0.5, beta=-0.5), 0) == 0.0
    assert specfun.eigenvalue(Setting.make("fb-natural", nu=0.5), 2) == pytest.approx((2 * math.pi) ** 2, rel=1e-13)
    sc = Setting.make("jacobi-scaled", alpha=1, beta=0)
    assert specfun.sqrt_eigenvalue(sc, 3) == pytest.approx(math.pi * 4)


@pytest.mark.parametrize("kind,kw", [
    ("jacobi-pol", dict(alpha=0.5, beta=-0.3)), ("jacobi-fun", dict(alpha=2.0, beta=-0.9)),
    ("jacobi-scaled", dict(alpha=-0.5, beta=1.0)), ("fb-natural", dict(nu=-0.5)), ("fb-lebesgue", dict(nu=2.7))])
def test_eigen_equation_residual(kind, kw):
    s = Setting.make(kind, **kw)
    lo, hi = s.interval
    x = lo + (hi - lo) * np.linspace(0.07, 0.93, 9)
    for n in range(s.origin, s.origin + 9):
        derivs = specfun.eigfun_derivatives(s, n, x)
        assert np.allclose(derivs[0], specfun.eigfun(s, n, x), rtol=1e-12, atol=1e-13)
        lhs = specfun.apply_laplacian(s, derivs, x)
        rhs = specfun.eigenvalue(s, n) * derivs[0]
        assert np.max(np.abs(lhs - rhs)) <= 1e-6 * max(1.0, np.max(np.abs(rhs)))


def test_parameter_validation():
    with pytest.raises(specfun.ParameterError):
        JacobiParams(-1.0, 0.0)
    with pytest.raises(specfun.ParameterError):
        BesselOrder(-1.2)
    with pytest.raises(specfun.ParameterError):
        Setting.make("jacobi-pol", nu=0.0)
