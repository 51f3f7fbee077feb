import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_potentials import Setting, specfun
from spectral_potentials import kernels as K
from spectral_potentials.measures import make_grid

CHEB = Setting.make("jacobi-pol", alpha=-0.5, beta=-0.5)
ALL = [Setting.make("jacobi-pol", alpha=0.3, beta=-0.6), Setting.make("jacobi-fun", alpha=1.0, beta=0.5),
       Setting.make("jacobi-scaled", alpha=-0.5, beta=2.0), Setting.make("fb-natural", nu=0.0),
       Setting.make("fb-lebesgue", nu=-0.5)]


def chebyshev_poisson(t, a, b):
    r = math.exp(-t)
    pr = lambda z: (1 - r * r) / (1 - 2 * r * math.cos(z) + r * r)
    return (pr(a - b) + pr(a + b)) / (2 * math.pi)


def neumann_heat(t, x, y, images=6):
    g = lambda z: math.exp(-z * z / (4 * t)) / math.sqrt(4 * math.pi * t)
    return sum(g(x - y + 2 * k) + g(x + y + 2 * k) for k in range(-images, images + 1))


def points(s, fr):
    lo, hi = s.interval
    return lo + (hi - lo) * np.asarray(fr)


def test_chebyshev_closed_form_example():
    v = K.poisson_kernel(CHEB, 0.5, 1.0, 2.0)
    assert v.value == pytest.approx(chebyshev_poisson(0.5, 1.0, 2.0), rel=1e-8)
    assert v.tail_bound <= 1e-10 * max(1, abs(v.value))


@given(st.floats(0.01, 5.0), st.floats(0.01, 3.13), st.floats(0.01, 3.13))
def test_chebyshev_closed_form(t, a, b):
    v = K.poisson_kernel(CHEB, t, a, b).value
    assert v == pytest.approx(chebyshev_poisson(t, a, b), rel=1e-8)


@pytest.mark.parametrize("s", ALL, ids=lambda s: s.kind.value)
def test_positivity_and_symmetry(s):
    x = points(s, np.linspace(0.02, 0.98, 12))
    ix, iy = np.meshgrid(np.arange(12), np.arange(12), indexing="ij")
    times = np.geomspace(0.005, 6, 9)
    v, b = K.poisson_kernel_batch(s, times, x[ix.ravel()], x[iy.ravel()])
    assert np.all(v - b > 0)
    v = v.reshape(len(times), 12, 12)
    assert np.array_equal(v, v.transpose(0, 2, 1))
    h, hb = K.heat_kernel_batch(s, times, x[ix.ravel()], x[iy.ravel()])
    # values far below roundoff (exp(-d^2/4t) at t=0.005) are only bracketed by their bound
    resolved = h > 10 * hb
    assert np.all(h[resolved] - hb[resolved] > 0)
    assert np.all(h + hb > 0)
    assert resolved[-1].all()


def test_heat_theta_function_oracle():
    s = Setting.make("jacobi-scaled", alpha=-0.5, beta=-0.5)
    for x, y in [(0.1, 0.2), (0.5, 0.55), (0.93, 0.4)]:
        v = K.heat_kernel(s, 0.05, x, y).value
        assert v == pytest.approx(neumann_heat(0.05, x, y), rel=1e-9)


def first_term(s, t, x, y):
    return math.exp(-t * specfun.eigenvalue(s, s.origin)) * float(
        specfun.eigfun(s, s.origin, x) * specfun.eigfun(s, s.origin, y))


def test_heat_first_term_dominates_at_large_time():
    s = Setting.make("jacobi-pol", alpha=0.5, beta=1.0)
    errs = [abs(K.heat_kernel(s, t, 0.4, 2.5).value / first_term(s, t, 0.4, 2.5) - 1) for t in (6, 8, 10)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-10


@pytest.mark.parametrize("s", ALL, ids=lambda s: s.kind.value)
def test_heat_first_term_within_one_percent(s):
    # the time where the bottom mode alone is within 1% of the kernel, uniformly on a sweep
    x = points(s, np.linspace(0.05, 0.95, 7))
    ix, iy = np.triu_indices(7)
    times = np.linspace(0.1, 10, 100)
    h, _ = K.heat_kernel_batch(s, times, x[ix], x[iy])
    phi = specfun.eigfun(s, s.origin, x)
    lead = np.exp(-times[:, None] * specfun.eigenvalue(s, s.origin)) * (phi[ix] * phi[iy])[None]
    worst = np.max(np.abs(h / lead - 1), axis=1)
    assert worst[-1] < 0.01
    tail = worst[worst > 1e-12]
    assert np.all(np.diff(tail) < 0)
    print(s.kind.value, "1% time", times[np.argmax(worst < 0.01)])


def test_subordination_examples():
    fb = Setting.make("fb-natural", nu=0.0)
    a = K.subordinated_poisson(fb, 0.5, 0.3, 0.7).value
    assert a == pytest.approx(K.poisson_kernel(fb, 0.5, 0.3, 0.7).value, rel=1e-5)
    s = Setting.make("jacobi-pol", alpha=0.3, beta=-0.6)
    for x, y in [(0.4, 0.45), (1.0, 2.0), (3.0, 3.02)]:
        a = K.subordinated_poisson(s, 0.05, x, y).value
        assert a / K.poisson_kernel(s, 0.05, x, y).value == pytest.approx(1.0, abs=1e-4)
    a = K.subordinated_poisson(s, 1.0, 1.3, 1.3).value
    assert a == pytest.approx(K.poisson_kernel(s, 1.0, 1.3, 1.3).value, rel=1e-6)


@pytest.mark.parametrize("s", ALL, ids=lambda s: s.kind.value)
def test_spectral_reproducing(s):
    g = make_grid(s, 96)
    x = points(s, [0.15, 0.5, 0.8])
    t = 0.4
    ix, iy = np.meshgrid(np.arange(3), np.arange(len(g.points)), indexing="ij")
    h, _ = K.poisson_kernel_batch(s, [t], x[ix.ravel()], g.points[iy.ravel()])
    h = h.reshape(3, -1)
    table = specfun.eigfun_table(s, 7, g.points)
    for k in range(7):
        n = s.origin + k
        got = h @ (g.weights * table[k])
        ref = math.exp(-t * specfun.sqrt_eigenvalue(s, n)) * specfun.eigfun(s, n, x)
        assert np.max(np.abs(got - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_errors():
    s = Setting.make("jacobi-pol", alpha=0, beta=0)
    with pytest.raises(K.ResolutionError):
        K.poisson_kernel(s, 1e-4, 1.0, 2.0)
    with pytest.raises(K.TruncationError):
        K.poisson_kernel(s, 0.002, 1.0, 2.0, config=K.KernelConfig(n_max=50))
    with pytest.raises(K.ResolutionError):
        K.subordinated_poisson(s, 5.0, 1.0, 2.0)
    with pytest.raises(specfun.DomainError):
        K.poisson_kernel(s, 1.0, 0.0, 2.0)


def test_shift_matches_bessel_semigroup():
    # shifted kernel is the kernel of exp(-t (L + 1)^{1/2}) : check against its own eigenseries
    s = Setting.make("jacobi-pol", alpha=-0.5, beta=-0.5)
    x, y, t = 0.7, 2.1, 0.3
    n = np.arange(0, 400)
    terms = np.exp(-t * np.sqrt(n ** 2 + 1.0)) * specfun.eigfun_table(s, 400, np.array([x, y])).prod(axis=1)
    assert K.poisson_kernel(s, t, x, y, shift=1.0).value == pytest.approx(terms.sum(), rel=1e-10)
