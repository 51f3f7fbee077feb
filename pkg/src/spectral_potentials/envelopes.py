"""Closed-form two-sided envelopes for Poisson and potential kernels, and band sweeps.

Each envelope is the right-hand side of a comparability estimate: the true
kernel divided by the envelope stays between two unspecified positive
constants.  Sweeps measure those constants as an :class:`EnvelopeBand`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad

from . import kernels, potentials, specfun
from .measures import GradedGrid, ball_measure
from .specfun import DomainError, JacobiParams, ParameterError, Setting, SettingKind


ACTIVATION_TOL = 1e-12


def activated(sigma: float, threshold: float) -> bool:
    """Exact-parameter test for a singular activation such as sigma = alpha + 1."""
    return abs(sigma - threshold) <= ACTIVATION_TOL


# ---------------------------------------------------------------------------
# Integral J_gamma(T, S, w) = int_T^S t^gamma / (t^2 + w^2) dt

@dataclass(frozen=True)
class JGammaArgs:
    gamma: float
    T: float
    S: float
    w: float
    M: float = 2 * math.pi

    def __post_init__(self):
        if not (0 <= self.T <= self.S):
            raise DomainError(f"need 0 <= T <= S, got T={self.T}, S={self.S}")
        if not (0 < self.w <= self.M):
            raise DomainError(f"need 0 < w <= M, got w={self.w}, M={self.M}")
        if self.gamma <= -1 and self.T <= 0:
            raise DomainError("for gamma <= -1 the lower limit T must be positive")


def j_gamma_closed(a: JGammaArgs) -> float:
    """Two-sided model of J_gamma(T, S, w), selected by the range of gamma."""
    g, T, S, w = a.gamma, a.T, a.S, a.w
    if T == S:
        return 0.0
    lead = (S - T) / S
    if g > -1:
        base = lead * S ** (g + 1) / max(S, w) ** 2
        if g > 1:
            return base
        if g == 1:
            return base * (1 + max(math.log(S / max(T, w)), 0.0))
        return base * (max(T, w) / max(S, w)) ** (g - 1)
    base = lead * T ** (g + 1) / max(T, w) ** 2
    if g == -1:
        return base * (1 + max(math.log(min(S, w) / T), 0.0))
    return base


def j_gamma_quad(a: JGammaArgs) -> float:
    """J_gamma(T, S, w) by adaptive quadrature (relative tolerance 1e-10)."""
    g, T, S, w = a.gamma, a.T, a.S, a.w
    if T == S:
        return 0.0
    f = lambda t: t ** g / (t * t + w * w)
    # split at w, where the integrand changes its power law
    cuts = [T] + [c for c in (w,) if T < c < S] + [S]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if lo > 0 and hi / lo > 10:
            # integrate in log t for wide ranges
            val, _ = quad(lambda v: f(math.exp(v)) * math.exp(v), math.log(lo), math.log(hi),
                          epsabs=0, epsrel=1e-12, limit=400)
        else:
            val, _ = quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=400)
        total += val
    return total


def power_diff_envelope(xi: float, A: float, B: float) -> float:
    """Two-sided model of |A^xi - B^xi| for A, B > 0."""
    if xi == 0:
        raise DomainError("xi must be nonzero")
    if A <= 0 or B <= 0:
        raise DomainError("A and B must be positive")
    if xi > 0:
        return abs(A - B) * max(A, B) ** (xi - 1)
    return abs(A - B) * min(A, B) ** (xi + 1) / (A * B)


# ---------------------------------------------------------------------------
# Poisson kernel envelopes

def _jacobi_short(alpha, beta, t, x, y):
    return ((t + x + y) ** (-2 * alpha - 1) * (t + 2 * math.pi - x - y) ** (-2 * beta - 1)
            * t / (t * t + (x - y) ** 2))


def _lebesgue_factor_jacobi(alpha, beta, x, y):
    return (x * y) ** (alpha + 0.5) * ((math.pi - x) * (math.pi - y)) ** (beta + 0.5)


def poisson_envelope(setting: Setting, t, x, y, T: float = 1.0, shift: float = 0.0) -> np.ndarray:
    """Envelope of the Poisson kernel: short-time form for t <= T, exponential decay beyond.

    ``shift = 1`` gives the envelope for the Poisson kernel of ``id + L``.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    kind = setting.kind
    rate = math.sqrt(float(specfun.eigenvalue(setting, setting.origin)) + shift)
    if kind.is_jacobi:
        a, b = setting.alpha, setting.beta
        if kind is SettingKind.JACOBI_SCALED:
            short = ((np.sqrt(x * y) / (t + x + y)) ** (2 * a + 1)
                     * (np.sqrt((1 - x) * (1 - y)) / (t + 2 - x - y)) ** (2 * b + 1) * t / (t * t + (x - y) ** 2))
            long = (x * y) ** (a + 0.5) * ((1 - x) * (1 - y)) ** (b + 0.5) * np.exp(-t * rate)
        else:
            short = _jacobi_short(a, b, t, x, y)
            long = np.exp(-t * rate)
            if kind is SettingKind.JACOBI_FUN:
                w = _lebesgue_factor_jacobi(a, b, x, y)
                short, long = short * w, long * w
    else:
        nu = setting.nu
        pre = (1 - x) * (1 - y)
        short = pre * (t + x + y) ** (-2 * nu - 1) * (t + 2 - x - y) ** -2.0 * t / (t * t + (x - y) ** 2)
        long = pre * np.exp(-t * rate)
        if kind is SettingKind.FB_LEBESGUE:
            w = (x * y) ** (nu + 0.5)
            short, long = short * w, long * w
    return np.where(t <= T, short, long)


def heat_large_time_envelope(setting: Setting, t, x, y) -> np.ndarray:
    """Bottom-mode form of the scaled Jacobi heat kernel for large t."""
    if setting.kind is not SettingKind.JACOBI_SCALED:
        raise ParameterError("large-time heat envelope is stated for the scaled Jacobi setting")
    a, b = setting.alpha, setting.beta
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lam0 = math.pi ** 2 * ((a + b + 1) / 2) ** 2
    return (x * y) ** (a + 0.5) * ((1 - x) * (1 - y)) ** (b + 0.5) * np.exp(-np.asarray(t) * lam0)


# ---------------------------------------------------------------------------
# Potential kernel envelopes

def _singular_profile(sigma, s, c, d):
    """The sigma vs 1/2 trichotomy factor with s = near-sum, c = far-sum, d = |x - y|."""
    with np.errstate(divide="ignore"):
        if sigma > 0.5 + ACTIVATION_TOL:
            return np.ones_like(d)
        ratio = s * c / d
        if activated(sigma, 0.5):
            return np.log(ratio)
        return ratio ** (1 - 2 * sigma)


def jacobi_potential_envelope(alpha: float, beta: float, sigma: float, x, y) -> np.ndarray:
    """Envelope of the Jacobi potential kernel in the polynomial frame on (0, pi)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    c = 2 * math.pi - x - y
    d = np.abs(x - y)
    out = 1.0 + np.zeros_like(s)
    if activated(sigma, alpha + 1):
        out = out + np.log(2 * math.pi / s)
    if activated(sigma, beta + 1):
        out = out + np.log(2 * math.pi / c)
    return out + s ** (2 * sigma - 2 * (alpha + 1)) * c ** (2 * sigma - 2 * (beta + 1)) * _singular_profile(sigma, s, c, d)


def fb_potential_envelope(nu: float, sigma: float, x, y) -> np.ndarray:
    """Envelope of the Fourier-Bessel potential kernel in the natural-measure frame."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    c = 2 - x - y
    d = np.abs(x - y)
    out = 1.0 + np.zeros_like(s)
    if activated(sigma, nu + 1):
        out = out + np.log(2 / s)
    if activated(sigma, 1.5):
        out = out + np.log(2 / c)
    out = out + s ** (2 * sigma - 2 * (nu + 1)) * c ** (2 * sigma - 3) * _singular_profile(sigma, s, c, d)
    return (1 - x) * (1 - y) * out


def potential_envelope(setting: Setting, sigma: float, x, y) -> np.ndarray:
    """Envelope of the potential kernel in any setting (+inf on the diagonal when sigma <= 1/2)."""
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    kind = setting.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind.is_jacobi:
            a, b = setting.alpha, setting.beta
            if kind is SettingKind.JACOBI_SCALED:
                x, y = math.pi * x, math.pi * y
            out = jacobi_potential_envelope(a, b, sigma, x, y)
            if kind is not SettingKind.JACOBI_POL:
                out = out * _lebesgue_factor_jacobi(a, b, x, y)
        else:
            nu = setting.nu
            out = fb_potential_envelope(nu, sigma, x, y)
            if kind is SettingKind.FB_LEBESGUE:
                out = out * (x * y) ** (nu + 0.5)
    if sigma <= 0.5:
        out = np.where(x == y, np.inf, out)
    return out


# ---------------------------------------------------------------------------
# Kernel decompositions and the U_xi kernel

def kernel_component(family: str, i: int, p: JacobiParams, sigma: float, theta, phi) -> np.ndarray:
    """Component ``i`` (1..6) of the potential-kernel decomposition.

    Args:
        family: ``"pol"`` for the natural-measure kernel, ``"fun"`` for the
            Lebesgue-measure kernel.
    """
    if i not in range(1, 7):
        raise ParameterError(f"component index must be 1..6, got {i}")
    if family not in ("pol", "fun"):
        raise ParameterError(f"family must be 'pol' or 'fun', got {family!r}")
    a, b = p.alpha, p.beta
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    s = th + ph
    c = 2 * math.pi - th - ph
    d = np.abs(th - ph)
    zero = np.zeros(np.broadcast(th, ph).shape)
    with np.errstate(divide="ignore"):
        if family == "pol":
            if i == 1:
                return zero + 1.0
            if i == 2:
                return np.log(2 * math.pi / s) if activated(sigma, a + 1) else zero
            if i == 3:
                return np.log(2 * math.pi / c) if activated(sigma, b + 1) else zero
            if i == 4:
                return s ** (2 * sigma - 2 * (a + 1)) * c ** (2 * sigma - 2 * (b + 1)) if sigma > 0.5 + ACTIVATION_TOL else zero
            weight = s ** (-2 * a - 1) * c ** (-2 * b - 1)
            if i == 5:
                return weight * np.log(s * c / d) if activated(sigma, 0.5) else zero
            return weight * d ** (2 * sigma - 1) if sigma < 0.5 - ACTIVATION_TOL else zero
        w = _lebesgue_factor_jacobi(a, b, th, ph)
        if i == 1:
            return w
        if i == 2:
            return w * np.log(2 * math.pi / s) if activated(sigma, a + 1) else zero
        if i == 3:
            return w * np.log(2 * math.pi / c) if activated(sigma, b + 1) else zero
        shape = (th * ph / s ** 2) ** (a + 0.5) * ((math.pi - th) * (math.pi - ph) / c ** 2) ** (b + 0.5)
        if i == 4:
            return shape * (s * c) ** (2 * sigma - 1) if sigma > 0.5 + ACTIVATION_TOL else zero
        if i == 5:
            return shape * np.log(s * c / d) if activated(sigma, 0.5) else zero
        return shape * d ** (2 * sigma - 1) if sigma < 0.5 - ACTIVATION_TOL else zero


def component_sum(family: str, p: JacobiParams, sigma: float, theta, phi) -> np.ndarray:
    return sum(kernel_component(family, i, p, sigma, theta, phi) for i in range(1, 7))


def u_xi_kernel(p: JacobiParams, xi: float, theta: float, phi: float) -> float:
    """|theta - phi|^xi divided by the measure of the ball centred at theta with radius |theta - phi|."""
    if not 0 < xi <= 1:
        raise ParameterError(f"xi must lie in (0, 1], got {xi}")
    r = abs(theta - phi)
    if r == 0:
        raise potentials.SingularityError("U_xi kernel is singular on the diagonal")
    return r ** xi / ball_measure(p, theta, r)


# ---------------------------------------------------------------------------
# Bands

@dataclass
class EnvelopeBand:
    """Observed range of kernel/envelope ratios over a sweep."""

    lower_ratio: float
    upper_ratio: float
    sample_count: int
    argmin: list = field(default_factory=list)
    argmax: list = field(default_factory=list)
    unresolved: int = 0

    @property
    def width(self) -> float:
        return self.upper_ratio / self.lower_ratio

    @classmethod
    def from_ratios(cls, ratios: np.ndarray, coords: np.ndarray, resolved: np.ndarray | None = None
                    ) -> "EnvelopeBand":
        """Build a band from ratios; points with ``resolved`` False are counted, not used."""
        ratios = np.asarray(ratios, dtype=float).ravel()
        coords = np.asarray(coords).reshape(ratios.size, -1)
        keep = np.ones(ratios.size, bool) if resolved is None else np.asarray(resolved, bool).ravel()
        r = ratios[keep]
        if r.size == 0:
            raise specfun.NumericalError("no resolved samples")
        ok = np.isfinite(r)
        if not ok.all() or np.any(r <= 0):
            bad = int((~ok).sum() + (r[ok] <= 0).sum())
            raise specfun.NumericalError(f"{bad} ratios are non-finite or non-positive")
        c = coords[keep]
        lo, hi = int(np.argmin(r)), int(np.argmax(r))
        return cls(float(r[lo]), float(r[hi]), int(r.size),
                   [float(v) for v in c[lo]], [float(v) for v in c[hi]], int(ratios.size - r.size))


def resolved_mask(values: np.ndarray, bounds: np.ndarray, factor: float = 10.0) -> np.ndarray:
    """True where a computed value exceeds ``factor`` times its error bound."""
    return np.abs(values) > factor * np.asarray(bounds)


def default_switch_time(setting: Setting, times) -> float:
    """Largest sampled time rescaled by interval length / pi."""
    lo, hi = setting.interval
    return float(np.max(times)) * (hi - lo) / math.pi


def poisson_band(setting: Setting, times, grid: GradedGrid | np.ndarray, tol: float = 1e-10,
                 T: float | None = None, config: kernels.KernelConfig = kernels.DEFAULT_CONFIG) -> EnvelopeBand:
    """Band of Poisson kernel / envelope over times x grid x grid.

    ``T`` is the envelope's switch time.  By default it is the largest
    sampled time measured in units of the interval length (``|I| / pi``), so
    on (0, pi) the short-time form covers the sweep and the settings on
    (0, 1) switch at the dilated time.  Points whose value is not resolved
    above roundoff and truncation are excluded and counted.
    """
    pts = grid.points if isinstance(grid, GradedGrid) else np.asarray(grid, dtype=float)
    ix, iy = np.triu_indices(len(pts))
    times = np.asarray(times, dtype=float)
    T = default_switch_time(setting, times) if T is None else T
    vals, bounds = kernels.poisson_kernel_batch(setting, times, pts[ix], pts[iy], tol, config=config)
    env = poisson_envelope(setting, times[:, None], pts[ix][None], pts[iy][None], T)
    coords = np.stack(np.broadcast_arrays(times[:, None], pts[ix][None], pts[iy][None]), axis=-1).reshape(-1, 3)
    return EnvelopeBand.from_ratios(vals / env, coords, resolved_mask(vals, bounds))


def potential_band(spec: potentials.PotentialSpec, grid: GradedGrid | np.ndarray, tol: float = 1e-10,
                   config: kernels.KernelConfig = kernels.DEFAULT_CONFIG) -> EnvelopeBand:
    """Band of potential kernel / envelope over grid x grid (diagonal skipped when infinite)."""
    pts = grid.points if isinstance(grid, GradedGrid) else np.asarray(grid, dtype=float)
    k = 0 if spec.sigma > 0.5 else 1
    ix, iy = np.triu_indices(len(pts), k=k)
    vals, errs = potentials.potential_kernel_batch(spec, pts[ix], pts[iy], tol, config)
    env = potential_envelope(spec.setting, spec.sigma, pts[ix], pts[iy])
    return EnvelopeBand.from_ratios(vals / env, np.stack([pts[ix], pts[iy]], axis=1), resolved_mask(vals, errs))


def band_report(entries: list[dict]) -> str:
    """JSON text for a list of ``{"parameters": ..., "grid": ..., "band": EnvelopeBand}`` records."""
    rows = []
    for e in entries:
        row = {k: v for k, v in e.items() if k != "band"}
        row.update(asdict(e["band"]))
        rows.append(row)
    return json.dumps(rows, indent=2, sort_keys=True)
