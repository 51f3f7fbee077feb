"""Riesz- and Bessel-type potential kernels and operators.

The kernel of ``L^{-sigma}`` (Riesz) or ``(id + L)^{-sigma}`` (Bessel) is

    K(x, y) = 1/Gamma(2 sigma) * int_0^inf t^{2 sigma - 1} H_t(x, y) dt

with ``H_t`` the Poisson kernel of ``L`` or ``id + L``.  The time integral is
split at ``config.potential_split``.  Beyond the split every eigenseries term is
integrated exactly (an incomplete Gamma function per mode).  Below it the
Poisson kernel is written through the heat kernel, which turns the head into a
single integral over heat time ``u``:

    (4^sigma / sqrt(4 pi)) int_0^inf G_u(x, y) u^{sigma - 1} gamma(sigma + 1/2, split^2 / 4u) du,

evaluated with the small-time heat model for tiny ``u``, the heat series in the
middle and the bottom mode at large ``u``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln, roots_jacobi

from . import kernels, specfun
from .kernels import DEFAULT_CONFIG, KernelConfig, KernelValue
from .measures import GradedGrid, density
from .specfun import DomainError, NumericalError, ParameterError, Setting, SettingKind, _legendre_rule


class SingularityError(DomainError):
    """Kernel requested on the diagonal where it is infinite (sigma <= 1/2)."""


class DivergenceError(NumericalError):
    """Potential of a function that is not integrable against the kernel."""

    def __init__(self, message: str, points: np.ndarray):
        super().__init__(message)
        self.points = points


VARIANTS = ("riesz", "bessel")


@dataclass(frozen=True)
class PotentialSpec:
    """Which potential: setting, order ``sigma`` and variant (``riesz`` or ``bessel``)."""

    setting: Setting
    sigma: float
    variant: str = "riesz"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.variant not in VARIANTS:
            raise ParameterError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant == "riesz" and self.setting.kind.is_jacobi and abs(self.setting.alpha + self.setting.beta + 1) < 1e-14:
            raise ParameterError(
                "Riesz potential undefined for alpha + beta = -1: the bottom eigenvalue is 0, "
                "so the spectrum is not separated from 0 (use the bessel variant)")

    @property
    def shift(self) -> float:
        return 1.0 if self.variant == "bessel" else 0.0


def spectral_multiplier(spec: PotentialSpec, n) -> np.ndarray:
    """lam_n^{-sigma} (Riesz) or (1 + lam_n)^{-sigma} (Bessel)."""
    lam = np.asarray(specfun.eigenvalue(spec.setting, n), dtype=float)
    return (lam + spec.shift) ** -spec.sigma


def spectral_potential_oracle(spec: PotentialSpec, coefficients, x) -> np.ndarray:
    """Potential of ``sum_k a_k eigfun_{N+k}`` evaluated from its eigen-expansion."""
    a = np.atleast_1d(np.asarray(coefficients, dtype=float))
    origin = spec.setting.origin
    mult = spectral_multiplier(spec, np.arange(origin, origin + len(a)))
    table = specfun.eigfun_table(spec.setting, len(a), x)
    return np.tensordot(a * mult, table, axes=1)


# ---------------------------------------------------------------------------
# Kernel in the polynomial frame

def _head_weight(sigma: float, split: float, u: np.ndarray) -> np.ndarray:
    """u^{sigma-1} gamma(sigma+1/2, split^2/4u) * 4^sigma / sqrt(4 pi), lower gamma unregularized."""
    a = sigma + 0.5
    return (4.0 ** sigma / math.sqrt(4 * math.pi)) * np.exp(gammaln(a)) * gammainc(a, split * split / (4 * u)) * u ** (sigma - 1)


def _log_panels(lo, hi, panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights in log u, vectorized over rows of (lo, hi)."""
    lo = np.log(np.asarray(lo, dtype=float))[..., None]
    hi = np.log(np.asarray(hi, dtype=float))[..., None]
    nodes, weights = _legendre_rule(order)
    k = np.arange(panels)
    width = (hi - lo) / panels
    centers = lo + (k + 0.5) * width
    v = (centers[..., None] + 0.5 * width[..., None] * nodes).reshape(*lo.shape[:-1], -1)
    w = np.broadcast_to(0.5 * width[..., None] * weights, (*lo.shape[:-1], panels, order)).reshape(*lo.shape[:-1], -1)
    u = np.exp(v)
    return u, w * u  # du = u dv


def _series_coefficients(sigma: float, split: float, roots: np.ndarray) -> np.ndarray:
    """int_split^inf t^{2 sigma - 1} exp(-t m) dt for each m in ``roots``."""
    a = 2 * sigma
    return np.exp(gammaln(a) - a * np.log(roots)) * gammaincc(a, split * roots)


def polynomial_potential(pol: Setting, sigma: float, shift: float, x: np.ndarray, y: np.ndarray,
                         config: KernelConfig = DEFAULT_CONFIG, tol: float | None = None,
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Potential kernel of (L + shift)^{-sigma} in the polynomial frame for pairs (x_k, y_k).

    Returns:
        ``(values, error_estimates)``.
    """
    tol = config.tol if tol is None else tol
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    split = config.potential_split
    small = config.small_time
    d = np.abs(x - y)
    diagonal = d == 0
    if diagonal.any() and sigma <= 0.5:
        raise SingularityError(f"potential kernel is infinite on the diagonal for sigma = {sigma} <= 1/2")

    # head, region of the small-time model: u in [u_lo, small] per pair
    edge = np.minimum(np.minimum(x, y) - pol.interval[0], pol.interval[1] - np.maximum(x, y))
    u_lo = np.where(diagonal, np.minimum(small * 1e-10, 1e-4 * edge ** 2), np.minimum(d * d / 200, small))
    head = np.zeros(len(x))
    head_alt = np.zeros(len(x))
    live = u_lo < small
    if live.any():
        for order, target in ((8, head), (6, head_alt)):
            u, w = _log_panels(u_lo[live], np.full(live.sum(), small), 32, order)
            g = kernels.small_time_heat(pol, u, x[live, None], y[live, None], shift)
            target[live] = np.sum(w * g * _head_weight(sigma, split, u), axis=1)
    if diagonal.any():
        wf = kernels.function_weight(pol, x[diagonal])
        a = sigma + 0.5
        ul = u_lo[diagonal]
        tail0 = 4.0 ** sigma * math.gamma(a) / (4 * math.pi * wf ** 2) * ul ** (sigma - 0.5) / (sigma - 0.5)
        head[diagonal] += tail0
        head_alt[diagonal] += tail0

    # one pass over the eigenfunction tables: series beyond the split (row 0) and the
    # heat kernel at the nodes of both head rules for u in [small, U]
    plan = kernels.series_plan(pol, shift, config.n_max)
    pts = np.concatenate([x, y])
    factor = split ** (2 * sigma - 1) + 4.0 ** sigma * math.gamma(2 * sigma)
    ladder = plan.candidate_bounds(pts)
    count = plan.choose(split, False, pts, tol / factor, ladder=ladder)
    big_u = kernels.heat_tail_start(pol, shift)
    panels = int(math.ceil(math.log(big_u / small) / 0.5))
    u8, w8 = _log_panels(small, big_u, panels, 8)
    u6, w6 = _log_panels(small, big_u, panels, 6)
    u_all = np.concatenate([u8, u6])
    heat_weights, heat_counts = plan.rows(u_all, True, pts, 1e-14)
    width = max(count, int(heat_counts.max()))
    rows = np.zeros((1 + len(u_all), width))
    rows[0, :count] = _series_coefficients(sigma, split, plan.roots[:count])
    rows[1:, : heat_weights.shape[1]] = heat_weights
    sums = kernels.spectral_sum(pol, rows, np.concatenate([[count], heat_counts]), x, y)
    series = sums[0]
    bn = kernels.eigen_bound(pol, [pol.origin + min(count, config.n_max - 1)], pts)[0]
    series_err = factor * plan.tail(count, split, False, bn[: len(x)], bn[len(x):])
    head += (w8 * _head_weight(sigma, split, u8)) @ sums[1: 1 + len(u8)]
    head_alt += (w6 * _head_weight(sigma, split, u6)) @ sums[1 + len(u8):]

    # head, u > U: bottom mode only, substitution u = U / s^2
    a0 = kernels.first_mode(pol, x, y)
    lam0 = kernels.shifted_roots(pol, 1, shift)[0] ** 2
    for order, target in ((40, head), (30, head_alt)):
        nodes, weights = _legendre_rule(order)
        s = 0.5 * (nodes + 1)
        uu = big_u / s ** 2
        integrand = np.exp(-lam0 * uu) * _head_weight(sigma, split, uu) * 2 * big_u / s ** 3
        target += 0.5 * float(weights @ integrand) * a0

    scale = math.exp(-gammaln(2 * sigma))
    values = scale * (head + series)
    errors = scale * (np.abs(head - head_alt) + series_err)
    return values, errors


# ---------------------------------------------------------------------------
# Public kernel evaluators

def potential_kernel_batch(spec: PotentialSpec, x, y, tol: float | None = None,
                           config: KernelConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, np.ndarray]:
    """Potential kernel at every pair (x_k, y_k) in the setting of ``spec``.

    Returns:
        ``(values, error_estimates)`` as flat arrays over the broadcast pairs.
    """
    setting = spec.setting
    xs = specfun._check_interior(setting, np.atleast_1d(np.asarray(x, dtype=float)))
    ys = specfun._check_interior(setting, np.atleast_1d(np.asarray(y, dtype=float)))
    xs, ys = (a.ravel() for a in np.broadcast_arrays(xs, ys))
    pol, scale = kernels.polynomial_frame(setting)
    # symmetric kernel: evaluate each unordered pair once
    lo, hi = np.minimum(xs, ys), np.maximum(xs, ys)
    pairs, inverse = np.unique(np.stack([lo, hi], axis=1), axis=0, return_inverse=True)
    inverse = np.ravel(inverse)
    vals, errs = polynomial_potential(pol, spec.sigma, kernels.frame_shift(setting, spec.shift),
                                      scale * pairs[:, 0], scale * pairs[:, 1], config, tol)
    factor = scale ** (-2 * spec.sigma) * specfun.weight_factor(setting, pairs[:, 0]) * specfun.weight_factor(setting, pairs[:, 1])
    return (vals * factor)[inverse], (errs * np.abs(factor))[inverse]


def potential_kernel(spec: PotentialSpec, x: float, y: float, tol: float | None = None,
                     config: KernelConfig = DEFAULT_CONFIG) -> KernelValue:
    """Potential kernel K(x, y) with an error estimate.

    Raises:
        SingularityError: on the diagonal when ``sigma <= 1/2``.
    """
    vals, errs = potential_kernel_batch(spec, [x], [y], tol, config)
    return KernelValue(float(vals[0]), float(errs[0]))


def potential_matrix(spec: PotentialSpec, points, tol: float | None = None,
                     config: KernelConfig = DEFAULT_CONFIG, diagonal: bool = True):
    """Kernel matrix over ``points x points``; the diagonal is NaN when skipped or infinite."""
    p = np.asarray(points, dtype=float)
    ix, iy = np.triu_indices(len(p), k=0 if diagonal and spec.sigma > 0.5 else 1)
    vals, errs = potential_kernel_batch(spec, p[ix], p[iy], tol, config)
    mat = np.full((len(p), len(p)), np.nan)
    err = np.full_like(mat, np.nan)
    mat[ix, iy] = mat[iy, ix] = vals
    err[ix, iy] = err[iy, ix] = errs
    return mat, err


def write_matrix_csv(path, points, matrix, errors) -> None:
    """CSV with columns x, y, value, error."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["x", "y", "value", "error"])
        for i, xv in enumerate(points):
            for j, yv in enumerate(points):
                out.writerow([repr(float(xv)), repr(float(yv)), repr(float(matrix[i, j])), repr(float(errors[i, j]))])


# ---------------------------------------------------------------------------
# Potential operator

def _endpoint_exponents(setting: Setting) -> tuple[float, float]:
    """Power behaviour of kernel * eigenfunction * density at the two interval ends."""
    if setting.kind.is_jacobi:
        return 2 * setting.alpha + 1, 2 * setting.beta + 1
    return 2 * setting.nu + 1, 0.0


def _graded_side(a: float, b: float, exp_a: float, exp_b: float, levels: int, ratio: float, order: int):
    """Quadrature on [a, b] refined geometrically toward both ends.

    The two innermost panels use Gauss-Jacobi rules for the given power
    exponents; returned weights already include those powers.
    """
    nodes, weights = _legendre_rule(order)
    mid = 0.5 * (a + b)
    half = mid - a
    pts, wts = [], []
    for end, sign, e in ((a, 1.0, exp_a), (b, -1.0, exp_b)):
        dist = half * ratio ** np.arange(levels + 1)
        for k in range(levels):
            lo_d, hi_d = dist[k + 1], dist[k]
            c, h = 0.5 * (lo_d + hi_d), 0.5 * (hi_d - lo_d)
            pts.append(end + sign * (c + h * nodes))
            wts.append(h * weights)
        inner = dist[-1]
        if e > -1 and abs(e) > 1e-12:
            jn, jw = roots_jacobi(order, 0.0, e)
            s = 0.5 * (jn + 1)  # weight s^e on [0, 1]
            pts.append(end + sign * inner * s)
            wts.append(inner ** (e + 1) * 0.5 ** (e + 1) * jw / np.maximum(s * inner, 1e-300) ** e)
        else:
            pts.append(end + sign * inner * 0.5 * (nodes + 1))
            wts.append(0.5 * inner * weights)
    return np.concatenate(pts), np.concatenate(wts)


def potential_quadrature(spec: PotentialSpec, x: float, levels: int = 12, ratio: float = 0.2, order: int = 10):
    """Nodes and weights (for the setting's measure) adapted to the kernel singularity at ``x``."""
    setting = spec.setting
    lo, hi = setting.interval
    e_lo, e_hi = _endpoint_exponents(setting)
    diag = 2 * spec.sigma - 1 if spec.sigma < 0.5 else 0.0
    left = _graded_side(lo, x, e_lo, diag, levels, ratio, order)
    right = _graded_side(x, hi, diag, e_hi, levels, ratio, order)
    pts = np.concatenate([left[0], right[0]])
    wts = np.concatenate([left[1], right[1]])
    keep = (pts > lo) & (pts < hi) & (pts != x)
    pts, wts = pts[keep], wts[keep]
    return pts, wts * density(setting, pts)


def apply_potential(spec: PotentialSpec, f: Callable[[np.ndarray], np.ndarray], grid: GradedGrid | np.ndarray,
                    tol: float | None = None, config: KernelConfig = DEFAULT_CONFIG, levels: int = 12):
    """Potential operator applied to ``f`` at the grid points.

    The integral over ``y`` is split at the output point and refined
    geometrically toward it and toward the interval ends; the two error
    sources (kernel error and a coarser-rule comparison) are summed.

    Returns:
        ``(values, error_estimates)`` on the grid points.

    Raises:
        DivergenceError: if ``f`` times the kernel is not integrable.
    """
    points = grid.points if isinstance(grid, GradedGrid) else np.asarray(grid, dtype=float)
    rules = []
    for xv in points:
        fine = potential_quadrature(spec, float(xv), levels=levels)
        coarse = potential_quadrature(spec, float(xv), levels=levels - 2, order=8)
        rules.append((fine, coarse))
    ys = np.concatenate([np.concatenate([r[0][0], r[1][0]]) for r in rules])
    xs = np.concatenate([np.full(len(r[0][0]) + len(r[1][0]), xv) for r, xv in zip(rules, points)])
    kv, ke = potential_kernel_batch(spec, xs, ys, tol, config)
    with np.errstate(all="ignore"):
        fy = np.asarray(f(ys), dtype=float)
    out = np.empty(len(points))
    err = np.empty(len(points))
    pos = 0
    bad = []
    for i, (fine, coarse) in enumerate(rules):
        nf, nc = len(fine[0]), len(coarse[0])
        sf = slice(pos, pos + nf)
        sc = slice(pos + nf, pos + nf + nc)
        pos += nf + nc
        with np.errstate(all="ignore"):
            vf = np.sum(fine[1] * kv[sf] * fy[sf])
            vc = np.sum(coarse[1] * kv[sc] * fy[sc])
            err[i] = abs(vf - vc) + np.sum(fine[1] * ke[sf] * np.abs(fy[sf]))
        if not np.isfinite(vf):
            bad.append(points[i])
        out[i] = vf
    if bad:
        raise DivergenceError(f"potential diverges at {len(bad)} output points", np.array(bad))
    return out, err
