"""Poisson and heat kernels by truncated eigenfunction series, and subordination.

Every setting is reduced to its polynomial frame (``jacobi-pol`` or
``fb-natural``): the Lebesgue-measure systems differ only by the factor
``w(x) w(y)`` from :func:`specfun.weight_factor`, and the scaled Jacobi system
additionally by the dilation ``x -> pi x`` in space and ``t -> pi t`` in time.

A spectral ``shift`` replaces every eigenvalue ``lam_n`` by ``lam_n + shift``;
``shift = 1`` gives the kernels of ``id + L`` used for Bessel-type potentials.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ive

from . import specfun
from .specfun import NumericalError, Setting, SettingKind, _legendre_rule


class ResolutionError(NumericalError):
    """Requested time is below the reliable range of the series."""


class TruncationError(NumericalError):
    """Series tail could not be pushed below the tolerance within ``n_max`` terms."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class KernelValue:
    """A kernel value with an absolute error bound (truncation plus roundoff, or quadrature)."""

    value: float
    tail_bound: float


@dataclass(frozen=True)
class KernelConfig:
    """Numerical knobs shared by the kernel and potential evaluators.

    Attributes:
        poisson_t_min: Smallest time for the Poisson series.
        heat_t_min: Smallest time for the heat series (public evaluator).
        n_max: Largest number of series terms.
        t_sub: Largest time accepted by the subordinated evaluator.
        small_time: Below this time the heat kernel is taken from the local
            model (Hankel kernels at the endpoints) instead of the series.
        tol: Default tail tolerance; absolute below 1, relative to the value above.
        potential_split: Potential kernels integrate the Poisson kernel term by
            term beyond this time and through the heat kernel below it.
    """

    poisson_t_min: float = 1e-3
    heat_t_min: float = 1e-4
    n_max: int = 20000
    t_sub: float = 4.0
    small_time: float = 1e-5
    tol: float = 1e-10
    potential_split: float = 0.05


DEFAULT_CONFIG = KernelConfig()


# ---------------------------------------------------------------------------
# Frames

def polynomial_frame(setting: Setting) -> tuple[Setting, float]:
    """Natural-measure setting sharing the parameters, and the space/time dilation."""
    kind = SettingKind.JACOBI_POL if setting.kind.is_jacobi else SettingKind.FB_NATURAL
    scale = math.pi if setting.kind is SettingKind.JACOBI_SCALED else 1.0
    return setting.with_kind(kind), scale


def function_weight(pol: Setting, x) -> np.ndarray:
    """Square root of the natural density: turns polynomial-frame into Lebesgue-frame kernels."""
    x = np.asarray(x, dtype=float)
    if pol.kind is SettingKind.JACOBI_POL:
        return np.sin(x / 2) ** (pol.alpha + 0.5) * np.cos(x / 2) ** (pol.beta + 0.5)
    return x ** (pol.nu + 0.5)


def frame_shift(setting: Setting, shift: float) -> float:
    _, scale = polynomial_frame(setting)
    return shift / scale ** 2


def shifted_roots(pol: Setting, count: int, shift: float) -> np.ndarray:
    """sqrt(lam_n + shift) for the first ``count`` indices of the polynomial frame."""
    idx = np.arange(pol.origin, pol.origin + count)
    return np.sqrt(np.asarray(specfun.eigenvalue(pol, idx)) + shift)


# ---------------------------------------------------------------------------
# Eigenfunction growth bound

def _growth_exponents(pol: Setting) -> tuple[float, float]:
    if pol.kind is SettingKind.JACOBI_POL:
        return pol.alpha + 0.5, pol.beta + 0.5
    return pol.nu + 0.5, 0.0


def _bound_shape(pol: Setting, n: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Shape min(n+1, L/x)^{e0} min(n+1, L/(L-x))^{e1} of the eigenfunction bound."""
    e0, e1 = _growth_exponents(pol)
    length = pol.interval[1]
    m = np.asarray(n, dtype=float)[..., None] + 1.0
    near = np.minimum(m, length / x) ** e0
    if e1 == 0.0:
        return near
    return near * np.minimum(m, length / (length - x)) ** e1


@functools.lru_cache(maxsize=128)
def bound_constant(pol: Setting) -> float:
    """Calibrated constant C in |P_n(x)| <= C * shape(n, x), sampled over n < 64."""
    lo, hi = pol.interval
    s = np.linspace(0.0, 1.0, 401)[1:-1]
    x = lo + (hi - lo) * np.where(s <= 0.5, 0.5 * (2 * s) ** 4, 1 - 0.5 * (2 * (1 - s)) ** 4)
    table = specfun.eigfun_table(pol, 64, x)
    ratio = np.abs(table) / _bound_shape(pol, np.arange(64), x)
    return 1.5 * float(ratio.max())


def eigen_bound(pol: Setting, n, x) -> np.ndarray:
    """Upper bound for |eigenfunction_n(x)| in the polynomial frame (shape (len(n), len(x)))."""
    n = np.atleast_1d(np.asarray(n))
    return bound_constant(pol) * _bound_shape(pol, n - pol.origin, np.atleast_1d(np.asarray(x, dtype=float)))


def _tail_sum(roots_n: float, spacing: float, growth: float, n: int, rate: float, heat: bool) -> float:
    """Bound for sum_{k>=0} exp(-rate * r_{n+k}^p) ((n+1+k)/(n+1))^growth, p = 1 or 2."""
    r0 = roots_n
    if heat:
        first = rate * r0 * r0
        span = max(1.0, math.sqrt(80.0 / rate) / spacing)
    else:
        first = rate * r0
        span = 80.0 / (rate * spacing)
    k = np.arange(0.0, math.ceil(span) + 2)
    r = r0 + spacing * k
    expo = rate * (r * r if heat else r) - first
    terms = np.exp(-expo + growth * np.log1p(k / (n + 1)))
    return math.exp(-first) * float(terms.sum())


class SeriesPlan:
    """Truncation planning for one polynomial-frame setting and spectral shift."""

    def __init__(self, pol: Setting, shift: float, n_max: int):
        self.pol = pol
        self.shift = shift
        self.n_max = n_max
        self.roots = shifted_roots(pol, n_max, shift)
        e0, e1 = _growth_exponents(pol)
        self.growth = 2 * (max(e0, 0.0) + max(e1, 0.0))
        diffs = np.diff(self.roots)
        # spacing bound valid from each index onward (differences increase along the tail)
        self.spacing = np.minimum.accumulate(np.concatenate([diffs, diffs[-1:]])[::-1])[::-1]

    def tail(self, count: int, rate: float, heat: bool, bx: np.ndarray, by: np.ndarray) -> np.ndarray:
        """Bound for the omitted terms n >= count, per pair (bx, by are bounds at index count)."""
        if count >= self.n_max:
            r_n = self.roots[-1] + self.spacing[-1]
            spacing = self.spacing[-1]
        else:
            r_n = self.roots[count]
            spacing = self.spacing[count]
        return bx * by * _tail_sum(r_n, max(spacing, 1e-3), self.growth, count, rate, heat)

    def candidate_bounds(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Geometric ladder of term counts and the worst eigenfunction bound at each."""
        counts = np.array(sorted({min(self.n_max, int(c)) for c in np.geomspace(16, self.n_max, 40)}))
        idx = self.pol.origin + np.minimum(counts, self.n_max - 1)
        return counts, eigen_bound(self.pol, idx, xs).max(axis=1)

    def choose(self, rate: float, heat: bool, xs: np.ndarray, tol: float, scale: float = 1.0,
               ladder: tuple[np.ndarray, np.ndarray] | None = None) -> int:
        """Smallest count on the ladder whose worst-case tail is below tol * scale."""
        counts, bounds = self.candidate_bounds(xs) if ladder is None else ladder
        ok = lambda i: self.tail(int(counts[i]), rate, heat, bounds[i], bounds[i]) <= tol * scale
        if not ok(len(counts) - 1):
            return self.n_max
        lo, hi = -1, len(counts) - 1  # tails decrease along the ladder once past the hump
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return int(counts[hi])

    def rows(self, times: np.ndarray, heat: bool, xs: np.ndarray, tol: float):
        """Series weights exp(-t r_n) or exp(-t r_n^2), per-row counts and per-row bound factors."""
        ladder = self.candidate_bounds(xs)
        counts = np.array([self.choose(float(t), heat, xs, tol, ladder=ladder) for t in times])
        r = self.roots[: counts.max()]
        weights = np.exp(-np.outer(times, r * r if heat else r))
        return weights, counts


@functools.lru_cache(maxsize=32)
def series_plan(pol: Setting, shift: float, n_max: int) -> SeriesPlan:
    return SeriesPlan(pol, shift, n_max)


# ---------------------------------------------------------------------------
# Series evaluation in the polynomial frame

def spectral_sum(pol: Setting, coeffs: np.ndarray, counts: np.ndarray, x: np.ndarray, y: np.ndarray,
                 chunk_pairs: int = 256, magnitude: bool = False):
    """Evaluate ``sum_n coeffs[r, n] P_n(x_k) P_n(y_k)`` for every row r and pair k.

    Row r uses only its first ``counts[r]`` coefficients; rows are grouped by
    count so short rows do not pay for long ones.  With ``magnitude`` the sum
    of absolute terms is returned as well (for roundoff estimates).
    """
    coeffs = np.atleast_2d(coeffs)
    counts = np.asarray(counts, dtype=int)
    out = np.empty((coeffs.shape[0], len(x)))
    mag = np.empty_like(out) if magnitude else None
    order = np.argsort(counts, kind="stable")
    groups = []
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and counts[order[stop]] <= 1.5 * counts[order[start]]:
            stop += 1
        groups.append((order[start:stop], int(counts[order[stop - 1]])))
        start = stop
    top = int(counts.max())
    for lo in range(0, len(x), chunk_pairs):
        bx, by = x[lo: lo + chunk_pairs], y[lo: lo + chunk_pairs]
        uniq, inverse = np.unique(np.concatenate([bx, by]), return_inverse=True)
        table = specfun.eigfun_table(pol, top, uniq)
        prod = table[:, inverse[: len(bx)]] * table[:, inverse[len(bx):]]
        for rows, c in groups:
            out[rows, lo: lo + chunk_pairs] = coeffs[rows, :c] @ prod[:c]
            if magnitude:
                mag[rows, lo: lo + chunk_pairs] = np.abs(coeffs[rows, :c]) @ np.abs(prod[:c])
    return (out, mag) if magnitude else out


def roundoff_bound(magnitude: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Floating-point error allowance for sums whose absolute terms total ``magnitude``."""
    eps = np.finfo(float).eps
    return 4 * eps * np.sqrt(np.asarray(counts, dtype=float))[:, None] * magnitude


def series_batch(pol: Setting, times: np.ndarray, x: np.ndarray, y: np.ndarray, heat: bool, shift: float,
                 config: KernelConfig = DEFAULT_CONFIG, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Poisson (heat=False) or heat (heat=True) series at all times for all pairs (x_k, y_k).

    Returns:
        ``(values, bounds)`` of shape ``(len(times), len(x))``, in the polynomial frame.
    """
    tol = config.tol if tol is None else tol
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    plan = series_plan(pol, shift, config.n_max)
    pts = np.concatenate([x, y])
    weights, counts = plan.rows(times, heat, pts, tol)
    values, mag = spectral_sum(pol, weights, counts, x, y, magnitude=True)
    bounds = roundoff_bound(mag, counts)
    for k, (t, c) in enumerate(zip(times, counts)):
        bn = eigen_bound(pol, [pol.origin + min(c, config.n_max - 1)], pts)[0]
        bounds[k] += plan.tail(int(c), float(t), heat, bn[: len(x)], bn[len(x):])
    return values, bounds


# ---------------------------------------------------------------------------
# Small-time model of the heat kernel

def scaled_bessel_i(order: float, z) -> np.ndarray:
    """exp(-z) I_order(z); large arguments use the asymptotic series (scipy returns NaN there)."""
    z = np.asarray(z, dtype=float)
    big = z > 1e6
    safe = np.where(big, 1.0, z)
    out = ive(order, safe)
    if big.any():
        mu = 4 * order * order
        zb = np.where(big, z, 1.0)
        r = 1 / (8 * zb)
        series = 1 - (mu - 1) * r + (mu - 1) * (mu - 9) / 2 * r * r - (mu - 1) * (mu - 9) * (mu - 25) / 6 * r ** 3
        out = np.where(big, series / np.sqrt(2 * math.pi * zb), out)
    return out


def hankel_heat(order: float, x, y, u) -> np.ndarray:
    """Heat kernel of -d^2 + (order^2 - 1/4)/x^2 on the half line (solutions ~ x^{order+1/2})."""
    z = x * y / (2 * u)
    return np.sqrt(x * y) / (2 * u) * np.exp(-((x - y) ** 2) / (4 * u)) * scaled_bessel_i(order, z)


def gauss_heat(d, u) -> np.ndarray:
    return np.exp(-(d * d) / (4 * u)) / np.sqrt(4 * math.pi * u)


def _jacobi_remainder(alpha: float, beta: float, theta, left: bool) -> np.ndarray:
    """Function-frame potential minus the inverse-square term of the chosen endpoint."""
    theta = np.asarray(theta, dtype=float)
    full = (alpha * alpha - 0.25) / (4 * np.sin(theta / 2) ** 2) + (beta * beta - 0.25) / (4 * np.cos(theta / 2) ** 2)
    return np.where(left, full - (alpha * alpha - 0.25) / theta ** 2,
                    full - (beta * beta - 0.25) / (math.pi - theta) ** 2)


def small_time_heat(pol: Setting, u, x, y, shift: float = 0.0) -> np.ndarray:
    """Local model of the polynomial-frame heat kernel for small u.

    The Lebesgue-frame operator is a Schrodinger operator whose potential has
    inverse-square singularities at the endpoints.  The pair is modelled by the
    exact half-line Hankel heat kernel of the nearer endpoint, times
    ``exp(-u * mean(V))`` for the bounded remainder ``V`` of the potential
    averaged (Simpson) over the segment between the points.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if pol.kind is SettingKind.JACOBI_POL:
        a, b = pol.alpha, pol.beta
        left = (x + y) <= math.pi
        mid = 0.5 * (x + y)
        rest = lambda z: _jacobi_remainder(a, b, z, left)
        mean = (rest(x) + 4 * rest(mid) + rest(y)) / 6
        near = np.where(left, hankel_heat(a, x, y, u), hankel_heat(b, math.pi - x, math.pi - y, u))
        model = near * np.exp(-u * (mean + shift))
    else:
        # Bessel end: exact Hankel kernel; Dirichlet end: image pair with the smooth potential
        c = pol.nu * pol.nu - 0.25
        left = (x + y) <= 1.0
        # path averages of c / z^2: straight path x -> y, reflected path x -> 1 -> y
        direct = c / (x * y)
        reflected = c * ((1 - x) / x + (1 - y) / y) / (2 - x - y)
        far = gauss_heat(x - y, u) * np.exp(-u * direct) - gauss_heat(2 - x - y, u) * np.exp(-u * reflected)
        model = np.where(left, hankel_heat(pol.nu, x, y, u), far) * np.exp(-u * shift)
    return model / (function_weight(pol, x) * function_weight(pol, y))


# ---------------------------------------------------------------------------
# Public evaluators

def _prepare(setting: Setting, x, y):
    x = specfun._check_interior(setting, np.atleast_1d(np.asarray(x, dtype=float)))
    y = specfun._check_interior(setting, np.atleast_1d(np.asarray(y, dtype=float)))
    x, y = np.broadcast_arrays(x, y)
    pol, scale = polynomial_frame(setting)
    return pol, scale, x.ravel(), y.ravel()


def poisson_kernel_batch(setting: Setting, times, x, y, tol: float | None = None, shift: float = 0.0,
                         config: KernelConfig = DEFAULT_CONFIG, strict: bool = False):
    """Poisson kernel exp(-t (L + shift)^{1/2}) at every time for every pair (x_k, y_k).

    Returns:
        ``(values, tail_bounds)`` arrays of shape ``(len(times), len(pairs))``.

    Raises:
        ResolutionError: if a time lies below ``config.poisson_t_min``.
        TruncationError: in strict mode, if a tail bound exceeds the tolerance.
    """
    tol = config.tol if tol is None else tol
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < config.poisson_t_min):
        raise ResolutionError(f"Poisson series needs t >= {config.poisson_t_min}; use subordinated_poisson")
    pol, scale, xs, ys = _prepare(setting, x, y)
    vals, bounds = series_batch(pol, scale * times, scale * xs, scale * ys, False,
                                frame_shift(setting, shift), config, tol)
    w = specfun.weight_factor(setting, xs) * specfun.weight_factor(setting, ys)
    vals, bounds = vals * w, bounds * np.abs(w)
    if strict:
        _check_tol(vals, bounds, tol)
    return vals, bounds


def heat_kernel_batch(setting: Setting, times, x, y, tol: float | None = None, shift: float = 0.0,
                      config: KernelConfig = DEFAULT_CONFIG, strict: bool = False):
    """Heat kernel exp(-t (L + shift)) at every time for every pair, from the eigenseries."""
    tol = config.tol if tol is None else tol
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < config.heat_t_min):
        raise ResolutionError(f"heat series needs t >= {config.heat_t_min}")
    pol, scale, xs, ys = _prepare(setting, x, y)
    vals, bounds = series_batch(pol, scale ** 2 * times, scale * xs, scale * ys, True,
                                frame_shift(setting, shift), config, tol)
    w = specfun.weight_factor(setting, xs) * specfun.weight_factor(setting, ys)
    vals, bounds = vals * w, bounds * np.abs(w)
    if strict:
        _check_tol(vals, bounds, tol)
    return vals, bounds


def _check_tol(vals, bounds, tol):
    excess = bounds > tol * np.maximum(1.0, np.abs(vals))
    if excess.any():
        worst = float(np.max(bounds / np.maximum(1.0, np.abs(vals))))
        raise TruncationError(f"tail bound {worst:.3g} exceeds tolerance {tol:.3g}", worst)


def poisson_kernel(setting: Setting, t: float, x: float, y: float, tol: float | None = None,
                   config: KernelConfig = DEFAULT_CONFIG, shift: float = 0.0) -> KernelValue:
    """Poisson kernel H_t(x, y) with a certified tail bound."""
    vals, bounds = poisson_kernel_batch(setting, [t], [x], [y], tol, shift, config, strict=True)
    return KernelValue(float(vals[0, 0]), float(bounds[0, 0]))


def heat_kernel(setting: Setting, t: float, x: float, y: float, tol: float | None = None,
                config: KernelConfig = DEFAULT_CONFIG, shift: float = 0.0) -> KernelValue:
    """Heat kernel G_t(x, y) with a certified tail bound."""
    vals, bounds = heat_kernel_batch(setting, [t], [x], [y], tol, shift, config, strict=True)
    return KernelValue(float(vals[0, 0]), float(bounds[0, 0]))


# ---------------------------------------------------------------------------
# Heat kernel over a range of times, with the small-time model below the series range

def _composite_nodes(lo: float, hi: float, width: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    panels = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, panels + 1)
    nodes, weights = _legendre_rule(order)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    return (mids[:, None] + half[:, None] * nodes).ravel(), (half[:, None] * weights).ravel()


def log_time_rule(lo: float, hi: float, breaks=(), width: float = 1.0, order: int = 12):
    """Composite Gauss-Legendre rule in v = log(time) on [lo, hi], split at ``breaks``."""
    cuts = sorted({math.log(lo), math.log(hi)} | {math.log(b) for b in breaks if lo < b < hi})
    vs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        v, w = _composite_nodes(a, b, width, order)
        vs.append(v)
        ws.append(w)
    v = np.concatenate(vs)
    return np.exp(v), np.concatenate(ws)


def first_mode(pol: Setting, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    table = specfun.eigfun_table(pol, 1, np.concatenate([x, y]))[0]
    return table[: len(x)] * table[len(x):]


def heat_profile(pol: Setting, u: np.ndarray, x: np.ndarray, y: np.ndarray, shift: float,
                 config: KernelConfig) -> np.ndarray:
    """Polynomial-frame heat kernel at every time in ``u`` (>= config.small_time) for all pairs."""
    vals, _ = series_batch(pol, u, x, y, True, shift, config, tol=1e-13)
    return vals


def heat_tail_start(pol: Setting, shift: float) -> float:
    """Time beyond which all but the bottom mode of the heat kernel are negligible."""
    roots = shifted_roots(pol, 2, shift)
    gap = roots[1] ** 2 - roots[0] ** 2
    return max(1.0, 45.0 / gap)


def subordinated_poisson_batch(setting: Setting, times, x, y, shift: float = 0.0,
                               config: KernelConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, np.ndarray]:
    """Poisson kernel from the heat kernel by subordination.

    H_t = t / sqrt(4 pi) * int_0^inf G_u exp(-t^2 / (4u)) u^{-3/2} du, integrated in
    log u with the rule split at the peak u = t^2/4 and at the series/model
    switch; beyond the point where only the bottom mode survives the integral is
    done after the substitution u = U / s^2.

    Returns:
        ``(values, error_estimates)`` of shape ``(len(times), len(pairs))``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times > config.t_sub):
        raise ResolutionError(f"subordination is used for t <= {config.t_sub}")
    pol, scale, xs, ys = _prepare(setting, x, y)
    ps = frame_shift(setting, shift)
    xs_f, ys_f = scale * xs, scale * ys
    big_u = heat_tail_start(pol, ps)
    out = np.empty((len(times), len(xs)))
    err = np.empty_like(out)
    a0 = first_mode(pol, xs_f, ys_f)
    lam0 = shifted_roots(pol, 1, ps)[0] ** 2
    s_nodes, s_weights = _legendre_rule(40)
    for k, t in enumerate(scale * times):
        c = t * t / 4
        lo = min(c / 60.0, config.small_time / 10)
        total = 0.0
        parts = []
        for rule_order in (12, 18):
            u, w = log_time_rule(lo, big_u, breaks=(c, config.small_time), order=rule_order)
            series_u = u >= config.small_time
            g = np.empty((len(u), len(xs)))
            if series_u.any():
                g[series_u] = heat_profile(pol, u[series_u], xs_f, ys_f, ps, config)
            if (~series_u).any():
                g[~series_u] = small_time_heat(pol, u[~series_u][:, None], xs_f, ys_f, ps)
            integrand = g * (np.exp(-c / u) * u ** -0.5)[:, None]
            body = w @ integrand
            s = 0.5 * (s_nodes + 1)
            uu = big_u / s ** 2
            tail = (2 / math.sqrt(big_u)) * 0.5 * (s_weights @ np.exp(-lam0 * uu - c / uu)) * a0
            parts.append(t / math.sqrt(4 * math.pi) * (body + tail))
        out[k] = parts[1]
        err[k] = np.abs(parts[1] - parts[0])
    w = specfun.weight_factor(setting, xs) * specfun.weight_factor(setting, ys)
    return out * w, err * np.abs(w)


def subordinated_poisson(setting: Setting, t: float, x: float, y: float, tol: float | None = None,
                         config: KernelConfig = DEFAULT_CONFIG, shift: float = 0.0) -> KernelValue:
    """Poisson kernel at (t, x, y) by subordination of the heat kernel."""
    vals, errs = subordinated_poisson_batch(setting, [t], [x], [y], shift, config)
    value, error = float(vals[0, 0]), float(errs[0, 0])
    tol = config.tol if tol is None else tol
    if error > max(tol, 1e-8) * max(1.0, abs(value)):
        raise NumericalError(f"subordination quadrature did not settle (estimate {value}, error {error})")
    return KernelValue(value, error)
