"""Lp-Lq mapping types of the potential operators, their audit, and sharpness probes.

Exponent pairs live in the unit square with coordinates ``(1/p, 1/q)``; a zero
coordinate encodes an infinite exponent.  Every condition below is affine in
these coordinates.

Two independent encodings of the mapping types are kept:

* :func:`classify` is a decision tree over the parameter regimes.
* :func:`stated_claims` lists every positive and negative assertion as a
  region together with a lower or upper bound on the type.

:func:`consistency_audit` cross-checks the first against the second and
against the structural rules every nonnegative symmetric kernel operator on a
finite measure space obeys.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import measures
from .envelopes import kernel_component
from .potentials import PotentialSpec, potential_kernel_batch
from .specfun import JacobiParams, NumericalError, ParameterError, Setting, SettingKind

BOUNDARY_TOL = 1e-12
NEAR_BOUNDARY = 1e-6

# probe verdicts: growth laws hold up to constants, so only the functional form is checked
MIN_LADDER = 8
LAW_BAND = 2.0
SLOPE_TOL = 0.15
BOUNDED_BAND = 4.0


class MappingType(enum.IntEnum):
    """Mapping type of an operator at one exponent pair; larger is stronger."""

    NONE = 0
    RESTRICTED_WEAK = 1
    WEAK = 2
    STRONG = 3

    @property
    def label(self) -> str:
        return {0: "None", 1: "RestrictedWeak", 2: "Weak", 3: "Strong"}[int(self)]

    @classmethod
    def from_label(cls, label: str) -> "MappingType":
        for m in cls:
            if m.label.lower() == label.lower():
                return m
        raise ParameterError(f"unknown mapping type {label!r}")


@dataclass(frozen=True)
class ExponentPair:
    """The pair ``(1/p, 1/q)``."""

    inv_p: float
    inv_q: float

    def __post_init__(self):
        for v in (self.inv_p, self.inv_q):
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"exponent coordinates must lie in [0, 1], got ({self.inv_p}, {self.inv_q})")

    @classmethod
    def from_pq(cls, p: float, q: float) -> "ExponentPair":
        for v in (p, q):
            if not v >= 1:
                raise ParameterError(f"exponents must satisfy 1 <= p, q <= inf, got ({p}, {q})")
        return cls(0.0 if math.isinf(p) else 1.0 / p, 0.0 if math.isinf(q) else 1.0 / q)

    @property
    def p(self) -> float:
        return math.inf if self.inv_p == 0 else 1.0 / self.inv_p

    @property
    def q(self) -> float:
        return math.inf if self.inv_q == 0 else 1.0 / self.inv_q

    def dual(self) -> "ExponentPair":
        """``(q', p')``: the pair reached by duality for a self-adjoint operator."""
        return ExponentPair(1.0 - self.inv_q, 1.0 - self.inv_p)


@dataclass(frozen=True)
class Thresholds:
    """Critical parameter combinations.

    ``delta`` governs the natural-measure Jacobi operator, ``kappa`` the
    Lebesgue-measure ones, ``eta`` the natural-measure Fourier-Bessel one.
    For Fourier-Bessel settings ``delta`` and ``kappa`` are those of the
    Jacobi parameters the Bessel operator is matched with.
    """

    delta: float
    kappa: float
    eta: float | None = None


def thresholds(setting: Setting) -> Thresholds:
    if setting.kind.is_jacobi:
        a, b = setting.alpha, setting.beta
        return Thresholds(max(a + 1, b + 1, 0.5), min(a + 0.5, b + 0.5))
    nu = setting.nu
    eta = max(nu + 1, 0.5)
    return Thresholds(delta=eta, kappa=min(nu + 0.5, 1.0), eta=eta)


def _eq(x: float, y: float) -> bool:
    return abs(x - y) <= BOUNDARY_TOL


def _regime(spec: PotentialSpec) -> tuple[str, float]:
    """``("natural", delta)`` or ``("lebesgue", kappa)`` for the operator's measure space."""
    th = thresholds(spec.setting)
    if spec.setting.kind in (SettingKind.JACOBI_POL, SettingKind.FB_NATURAL):
        return "natural", th.delta
    return "lebesgue", th.kappa


# ---------------------------------------------------------------------------
# Decision-tree classifier

def _natural_type(sigma: float, delta: float, a: float, b: float) -> MappingType:
    if sigma > delta + BOUNDARY_TOL:
        return MappingType.STRONG
    if _eq(sigma, delta):
        return MappingType.NONE if (_eq(a, 1) and _eq(b, 0)) else MappingType.STRONG
    return _line_type(sigma / delta, a, b)


def _line_type(c: float, a: float, b: float) -> MappingType:
    """Types for an operator with critical line ``1/q = 1/p - c`` (0 < c < 1)."""
    if _eq(a, 1) and _eq(b, 1 - c):
        return MappingType.WEAK
    if _eq(a, c) and _eq(b, 0):
        return MappingType.RESTRICTED_WEAK
    if b >= a - c - BOUNDARY_TOL:
        return MappingType.STRONG
    return MappingType.NONE


def _lebesgue_type(sigma: float, kappa: float, a: float, b: float, keep_corner_exception: bool = True
                   ) -> MappingType:
    if kappa >= 0:
        if sigma > 0.5 + BOUNDARY_TOL:
            return MappingType.STRONG
        if _eq(sigma, 0.5):
            return MappingType.NONE if (_eq(a, 1) and _eq(b, 0)) else MappingType.STRONG
        return _line_type(2 * sigma, a, b)
    edge_p, edge_q = 1 + kappa, -kappa
    inside_p = a < edge_p - BOUNDARY_TOL
    on_p = _eq(a, edge_p)
    on_q = _eq(b, edge_q)
    above_q = b > edge_q + BOUNDARY_TOL
    if sigma >= kappa + 0.5 - BOUNDARY_TOL:
        if inside_p and above_q:
            return MappingType.STRONG
        if inside_p and on_q:
            return MappingType.WEAK
        if on_p and (above_q or on_q):
            if on_q and keep_corner_exception and _eq(sigma, kappa + 0.5):
                return MappingType.NONE
            return MappingType.RESTRICTED_WEAK
        return MappingType.NONE
    corner = 2 * sigma - kappa
    if inside_p and above_q and b >= a - 2 * sigma - BOUNDARY_TOL:
        return MappingType.STRONG
    if on_q and a < corner - BOUNDARY_TOL:
        return MappingType.WEAK
    if on_q and _eq(a, corner):
        return MappingType.RESTRICTED_WEAK
    if on_p and b >= 1 + kappa - 2 * sigma - BOUNDARY_TOL:
        return MappingType.RESTRICTED_WEAK
    return MappingType.NONE


def classify(spec: PotentialSpec, pq: ExponentPair, strict: bool = False) -> MappingType | None:
    """Strongest mapping type of the potential operator at ``pq``.

    The Bessel variant shares the types of the Riesz one; its kernel has the
    same local behaviour.  The scaled Jacobi setting is a dilation of the
    Lebesgue-measure Jacobi setting and shares its types.

    With ``strict`` the answer is derived from the literal list of stated
    claims instead, and ``None`` is returned where no claim decides the pair.
    """
    if strict:
        return _strict_type(spec, pq)
    regime, value = _regime(spec)
    if regime == "natural":
        return _natural_type(spec.sigma, value, pq.inv_p, pq.inv_q)
    return _lebesgue_type(spec.sigma, value, pq.inv_p, pq.inv_q)


def classify_without_corner_exception(spec: PotentialSpec, pq: ExponentPair) -> MappingType:
    """Deliberately wrong classifier ignoring the critical-order corner exception (for audit tests)."""
    regime, value = _regime(spec)
    if regime == "natural":
        return _natural_type(spec.sigma, value, pq.inv_p, pq.inv_q)
    return _lebesgue_type(spec.sigma, value, pq.inv_p, pq.inv_q, keep_corner_exception=False)


# ---------------------------------------------------------------------------
# Literal claims

@dataclass(frozen=True)
class Claim:
    """The type on ``region`` is at least (``bound == "min"``) or at most (``"max"``) ``level``."""

    region: Callable[[float, float], bool]
    bound: str
    level: MappingType
    clause: str


def _line_claims(c: float, tag: str) -> list[Claim]:
    weak_pt = lambda a, b: _eq(a, 1) and _eq(b, 1 - c)
    rw_pt = lambda a, b: _eq(a, c) and _eq(b, 0)
    on_or_above = lambda a, b: b >= a - c - BOUNDARY_TOL
    return [
        Claim(lambda a, b: on_or_above(a, b) and not weak_pt(a, b) and not rw_pt(a, b), "min", MappingType.STRONG,
              f"{tag}: strong on and above the critical line"),
        Claim(weak_pt, "min", MappingType.WEAK, f"{tag}: weak at the L1 end of the line"),
        Claim(rw_pt, "min", MappingType.RESTRICTED_WEAK, f"{tag}: restricted weak at the L-infinity end"),
        Claim(weak_pt, "max", MappingType.WEAK, f"{tag}: not strong at the L1 end"),
        Claim(rw_pt, "max", MappingType.RESTRICTED_WEAK, f"{tag}: not weak at the L-infinity end"),
        Claim(lambda a, b: b < a - c - BOUNDARY_TOL, "max", MappingType.NONE,
              f"{tag}: not restricted weak below the line"),
    ]


def _corner_claims(tag: str) -> list[Claim]:
    corner = lambda a, b: _eq(a, 1) and _eq(b, 0)
    return [Claim(lambda a, b: not corner(a, b), "min", MappingType.STRONG, f"{tag}: strong off (1, inf)"),
            Claim(corner, "max", MappingType.NONE, f"{tag}: not restricted weak at (1, inf)")]


def stated_claims(spec: PotentialSpec) -> list[Claim]:
    """Every positive and negative assertion about the operator, as region/bound pairs."""
    regime, value = _regime(spec)
    sigma = spec.sigma
    everywhere = lambda a, b: True
    if regime == "natural":
        delta = value
        if sigma > delta + BOUNDARY_TOL:
            return [Claim(everywhere, "min", MappingType.STRONG, "order above threshold: strong everywhere")]
        if _eq(sigma, delta):
            return _corner_claims("order at threshold")
        return _line_claims(sigma / delta, "order below threshold")
    kappa = value
    if kappa >= 0:
        if sigma > 0.5 + BOUNDARY_TOL:
            return [Claim(everywhere, "min", MappingType.STRONG, "order above 1/2: strong everywhere")]
        if _eq(sigma, 0.5):
            return _corner_claims("order 1/2")
        return _line_claims(2 * sigma, "order below 1/2")
    ep, eq = 1 + kappa, -kappa
    inside_p = lambda a: a < ep - BOUNDARY_TOL
    above_q = lambda b: b > eq + BOUNDARY_TOL
    claims = []
    if sigma >= kappa + 0.5 - BOUNDARY_TOL:
        critical = _eq(sigma, kappa + 0.5)
        tag = "critical order" if critical else "large order"
        corner = lambda a, b: _eq(a, ep) and _eq(b, eq)
        weak_set = lambda a, b: inside_p(a) and _eq(b, eq)
        rw_set = lambda a, b: _eq(a, ep) and b >= eq - BOUNDARY_TOL and not (critical and corner(a, b))
        strong_set = lambda a, b: inside_p(a) and above_q(b)
        claims += [Claim(strong_set, "min", MappingType.STRONG, f"{tag}: strong in the open strip"),
                   Claim(weak_set, "min", MappingType.WEAK, f"{tag}: weak on the lower strip edge"),
                   Claim(rw_set, "min", MappingType.RESTRICTED_WEAK, f"{tag}: restricted weak on the right edge"),
                   Claim(weak_set, "max", MappingType.WEAK, f"{tag}: weak not improvable"),
                   Claim(rw_set, "max", MappingType.RESTRICTED_WEAK, f"{tag}: restricted weak not improvable")]
        if critical:
            claims.append(Claim(corner, "max", MappingType.NONE, "critical order: corner excluded"))
        covered = lambda a, b: strong_set(a, b) or weak_set(a, b) or rw_set(a, b) or (critical and corner(a, b))
    else:
        tag = "small order"
        pivot = 2 * sigma - kappa
        strong_set = lambda a, b: inside_p(a) and above_q(b) and b >= a - 2 * sigma - BOUNDARY_TOL
        weak_set = lambda a, b: _eq(b, eq) and a < pivot - BOUNDARY_TOL
        rw_set = lambda a, b: (_eq(b, eq) and _eq(a, pivot)) or (_eq(a, ep) and b >= ep - 2 * sigma - BOUNDARY_TOL)
        claims += [Claim(strong_set, "min", MappingType.STRONG, f"{tag}: strong in the truncated strip"),
                   Claim(weak_set, "min", MappingType.WEAK, f"{tag}: weak on the lower edge"),
                   Claim(rw_set, "min", MappingType.RESTRICTED_WEAK, f"{tag}: restricted weak at the pivot and right edge"),
                   Claim(weak_set, "max", MappingType.WEAK, f"{tag}: weak not improvable"),
                   Claim(rw_set, "max", MappingType.RESTRICTED_WEAK, f"{tag}: restricted weak not improvable")]
        covered = lambda a, b: strong_set(a, b) or weak_set(a, b) or rw_set(a, b)
    claims.append(Claim(lambda a, b: not covered(a, b), "max", MappingType.NONE,
                        "pairs not covered: not restricted weak"))
    return claims


def _strict_type(spec: PotentialSpec, pq: ExponentPair) -> MappingType | None:
    a, b = pq.inv_p, pq.inv_q
    lows = [c.level for c in stated_claims(spec) if c.bound == "min" and c.region(a, b)]
    highs = [c.level for c in stated_claims(spec) if c.bound == "max" and c.region(a, b)]
    if lows:
        return max(lows)
    if highs and min(highs) == MappingType.NONE:
        return MappingType.NONE
    return None


# ---------------------------------------------------------------------------
# Audit

def critical_coordinates(spec: PotentialSpec) -> list[float]:
    """Coordinates where some boundary of the type regions passes."""
    regime, value = _regime(spec)
    s = spec.sigma
    pts = {0.0, 1.0}
    if regime == "natural":
        c = s / value
        pts |= {c, 1 - c}
    else:
        pts |= {2 * s, 1 - 2 * s, 1 + value, -value, 2 * s - value, 1 + value - 2 * s}
    return sorted(v for v in pts if 0 <= v <= 1)


def audit_axis(spec: PotentialSpec, resolution: int) -> np.ndarray:
    """Uniform grid of the unit interval merged with the critical coordinates and their reflections."""
    base = np.linspace(0.0, 1.0, resolution)
    crit = np.array(critical_coordinates(spec))
    merged = np.unique(np.round(np.concatenate([base, crit, 1 - crit]), 14))
    return merged[(merged >= 0) & (merged <= 1)]


@dataclass(frozen=True)
class Violation:
    rule: str
    pair: tuple[float, float]
    detail: str


def consistency_audit(spec: PotentialSpec, resolution: int = 64,
                      classifier: Callable[[PotentialSpec, ExponentPair], MappingType] = classify
                      ) -> list[Violation]:
    """Check a classifier against the stated claims and the rules (A)-(D).

    Rules checked, on a grid that contains every critical coordinate:

    * claims: the type respects every stated lower and upper bound;
    * monotone: the type does not decrease when 1/p decreases or 1/q increases
      (finite measure, so Lebesgue and Lorentz spaces are nested);
    * duality: strong type at (p, q) implies strong type at (q', p');
    * strong-(1, q): implies strong type for 1/q~ >= 1/p~ - 1/q';
    * weak-(1, q): implies restricted weak (q', inf) and strong type on the
      open segment joining the two;
    * weak-(p, inf): coincides with strong-(p, inf) and implies strong-(1, p').
    """
    axis = audit_axis(spec, resolution)
    n = len(axis)
    index = {round(float(v), 12): i for i, v in enumerate(axis)}
    grid = np.empty((n, n), dtype=int)
    for i, a in enumerate(axis):
        for j, b in enumerate(axis):
            grid[i, j] = int(classifier(spec, ExponentPair(float(a), float(b))))
    out: list[Violation] = []
    claims = stated_claims(spec)

    def add(rule, i, j, detail):
        out.append(Violation(rule, (float(axis[i]), float(axis[j])), detail))

    for i, a in enumerate(axis):
        for j, b in enumerate(axis):
            t = grid[i, j]
            for c in claims:
                if not c.region(a, b):
                    continue
                if (c.bound == "min" and t < c.level) or (c.bound == "max" and t > c.level):
                    add("claims", i, j, f"{MappingType(t).label} contradicts '{c.clause}'")
    # monotone along both axes (adjacent comparisons suffice on a product grid)
    for i in range(1, n):
        bad = grid[i - 1] < grid[i]
        for j in np.nonzero(bad)[0]:
            add("monotone", i, j, "type increases as 1/p increases")
    for j in range(n - 1):
        bad = grid[:, j + 1] < grid[:, j]
        for i in np.nonzero(bad)[0]:
            add("monotone", i, j, "type decreases as 1/q increases")
    strong = MappingType.STRONG
    for i, a in enumerate(axis):
        for j, b in enumerate(axis):
            t = grid[i, j]
            if t == strong:
                di, dj = index.get(round(1 - float(b), 12)), index.get(round(1 - float(a), 12))
                if di is not None and dj is not None and grid[di, dj] != strong:
                    add("duality", i, j, "strong type not inherited by the dual pair")
            if _eq(a, 1) and t == strong:
                need = axis[None, :] >= axis[:, None] - (1 - b) - BOUNDARY_TOL
                for ii, jj in zip(*np.nonzero(need & (grid != strong))):
                    add("strong-L1", ii, jj, f"implied by strong type at (1, {b:.6g})")
            if _eq(a, 1) and t == MappingType.WEAK and 0 < b < 1:
                k = index.get(round(1 - float(b), 12))
                if k is not None and grid[k, 0] < MappingType.RESTRICTED_WEAK:
                    add("weak-L1", k, 0, f"restricted weak implied by weak type at (1, {b:.6g})")
                on_seg = np.abs(axis[None, :] - (axis[:, None] - (1 - b))) <= BOUNDARY_TOL
                open_seg = on_seg & (axis[:, None] < 1 - BOUNDARY_TOL) & (axis[None, :] > BOUNDARY_TOL)
                for ii, jj in zip(*np.nonzero(open_seg & (grid != strong))):
                    add("weak-L1", ii, jj, f"strong type implied on the segment from (1, {b:.6g})")
            if _eq(b, 0):
                if t == MappingType.WEAK:
                    add("weak-Linf", i, j, "weak type with q = inf equals strong type")
                if t >= MappingType.WEAK and a > 0:
                    k = index.get(round(1 - float(a), 12))
                    last = index.get(1.0)
                    if k is not None and last is not None and grid[last, k] != strong:
                        add("weak-Linf", last, k, f"strong (1, p') implied by type at ({a:.6g}, inf)")
    return out


def boundary_flags(spec: PotentialSpec, pq: ExponentPair) -> list[str]:
    """Critical features lying within ``NEAR_BOUNDARY`` of ``pq`` without passing through it exactly."""
    a, b = pq.inv_p, pq.inv_q
    regime, value = _regime(spec)
    s = spec.sigma
    lines = []
    if regime == "natural":
        lines.append(("critical line", b - (a - s / value)))
    else:
        lines += [("critical line", b - (a - 2 * s)), ("p edge", a - (1 + value)), ("q edge", b + value)]
    return [name for name, dist in lines if BOUNDARY_TOL < abs(dist) <= NEAR_BOUNDARY]


def region_grid(spec: PotentialSpec, resolution: int) -> list[tuple[float, float, str]]:
    """Rows ``(1/p, 1/q, type)`` on the grid ``k / resolution``; doubling the resolution keeps old nodes."""
    if resolution < 8:
        raise ParameterError(f"resolution must be at least 8, got {resolution}")
    axis = np.arange(resolution + 1) / resolution
    return [(float(a), float(b), classify(spec, ExponentPair(float(a), float(b))).label)
            for a in axis for b in axis]


def write_region_csv(path, rows: Sequence[tuple[float, float, str]]) -> None:
    import csv
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["inv_p", "inv_q", "type"])
        for a, b, t in rows:
            w.writerow([repr(a), repr(b), t])


def gnuplot_script(csv_path: str, title: str = "mapping types") -> str:
    """A gnuplot script drawing a region CSV as coloured points."""
    return "\n".join([
        "set datafile separator ','",
        f"set title '{title}'",
        "set xlabel '1/p'", "set ylabel '1/q'",
        "set xrange [0:1]", "set yrange [0:1]", "set size square",
        "level(t) = (t eq 'Strong') ? 3 : (t eq 'Weak') ? 2 : (t eq 'RestrictedWeak') ? 1 : 0",
        "set palette defined (0 'white', 1 'orange', 2 'red', 3 'blue')",
        "set cbrange [0:3]",
        f"plot '{csv_path}' every ::1 using 1:2:(level(strcol(3))) with points pt 5 ps 0.6 palette notitle",
        "",
    ])


# ---------------------------------------------------------------------------
# Extremal functions

@dataclass(frozen=True)
class ExtremalCase:
    """Catalogued test function used to show that a mapping property fails.

    Attributes:
        case_id: Catalogue key, ``E1`` .. ``E8``.
        description: Formula of the function.
        parameter: Name of the ladder parameter (``eps``) or ``None``.
        growth_law: Predicted behaviour of the probe built on it.
    """

    case_id: str
    description: str
    parameter: str | None
    growth_law: str


CATALOG: dict[str, ExtremalCase] = {
    "E1": ExtremalCase("E1", "indicator of (0, eps)", "eps", "||T f||_inf / ||f||_1 ~ log(2 pi / eps)"),
    "E2": ExtremalCase("E2", "1_(0,1)(x) / (x^(2 sigma) log(2/x))", None,
                       "partial output ~ log log(2/eta), divergent"),
    "E3": ExtremalCase("E3", "x^A 1_(0,1)(x), A = -2 delta/p + 2 delta eps", "eps",
                       "||T f||_q^q restricted to (eta, 1) ~ eta^((2 sigma + A) q + 2 alpha + 2)"),
    "E4": ExtremalCase("E4", "1_(1/2,1)(x) / ((1 - x)^(2 sigma) log(2/(1 - x)))", None,
                       "partial output ~ log log(1/eta), divergent"),
    "E5": ExtremalCase("E5", "(1 - x)^A 1_(1/2,1)(x), A = -1/p + eps", "eps",
                       "||T f||_q^q restricted to (1 + eta, 3/2) ~ eta^((2 sigma + A) q + 1)"),
    "E6": ExtremalCase("E6", "indicator of (1 - eps, 1)", "eps", "||T f||_inf / ||f||_1 ~ log(pi / eps)"),
    "E7": ExtremalCase("E7", "1_(0,1)(x) / (x^(1 + kappa) log(2/x))", None,
                       "partial output ~ log log(2/eta), divergent"),
    "E8": ExtremalCase("E8", "1_(0,2)(x) x^(kappa - 2 sigma) / log(pi/x)", None,
                       "weak quasinorm restricted to (eta, 0.01) ~ log log(pi/(2 eta)), divergent"),
}


@dataclass(frozen=True)
class TestFunction:
    """A function on the setting interval with its jump/singular points."""

    __test__ = False

    func: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    breaks: tuple[float, ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        out = np.zeros_like(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[inside] = self.func(x[inside])
        return out


def _needs(cond: bool, message: str):
    if not cond:
        raise ParameterError(message)


def extremal_function(case_id: str, spec: PotentialSpec, eps: float | None = None,
                      pq: ExponentPair | None = None) -> TestFunction:
    """Build catalogue function ``case_id`` for the operator ``spec``.

    Args:
        eps: Ladder parameter (width of the indicator for E1/E6, the slack
            in the exponent for E3/E5).
        pq: Target exponent pair; required by E3 and E5.
    """
    if case_id not in CATALOG:
        raise ParameterError(f"unknown case {case_id!r}; known: {sorted(CATALOG)}")
    th = thresholds(spec.setting)
    s = spec.sigma
    if CATALOG[case_id].parameter == "eps":
        _needs(eps is not None and eps > 0, f"{case_id} needs eps > 0")
    if case_id == "E1":
        _needs(eps < 1, "E1 needs eps < 1")
        return TestFunction(lambda x: np.ones_like(x), (0.0, eps), (eps,))
    if case_id == "E6":
        _needs(eps < 1, "E6 needs eps < 1")
        return TestFunction(lambda x: np.ones_like(x), (1 - eps, 1.0), (1 - eps, 1.0))
    if case_id == "E2":
        return TestFunction(lambda x: 1 / (x ** (2 * s) * np.log(2 / x)), (0.0, 1.0), (1.0,))
    if case_id == "E4":
        return TestFunction(lambda x: 1 / ((1 - x) ** (2 * s) * np.log(2 / (1 - x))), (0.5, 1.0), (0.5, 1.0))
    if case_id == "E7":
        k = th.kappa
        return TestFunction(lambda x: 1 / (x ** (1 + k) * np.log(2 / x)), (0.0, 1.0), (1.0,))
    if case_id == "E8":
        k = th.kappa
        _needs(k < 0 and 2 * s - k < 1 + k, "E8 needs kappa < 0 and 2 sigma - kappa < 1 + kappa")
        return TestFunction(lambda x: x ** (k - 2 * s) / np.log(math.pi / x), (0.0, 2.0), (2.0,))
    _needs(pq is not None, f"{case_id} needs the exponent pair")
    if case_id == "E3":
        d = th.delta
        slack = pq.inv_p - s / d - pq.inv_q
        _needs(0 < eps < slack, f"E3 needs 0 < eps < 1/p - sigma/delta - 1/q = {slack:.6g}")
        A = -2 * d * pq.inv_p + 2 * d * eps
        return TestFunction(lambda x: x ** A, (0.0, 1.0), (1.0,))
    slack = pq.inv_p - 2 * s - pq.inv_q
    _needs(0 < eps < slack, f"E5 needs 0 < eps < 1/p - 2 sigma - 1/q = {slack:.6g}")
    A = -pq.inv_p + eps
    return TestFunction(lambda x: (1 - x) ** A, (0.5, 1.0), (0.5, 1.0))


def extremal_exponent(case_id: str, spec: PotentialSpec, eps: float, pq: ExponentPair) -> float:
    """The power ``A`` used by E3 or E5."""
    if case_id == "E3":
        return -2 * thresholds(spec.setting).delta * pq.inv_p + 2 * thresholds(spec.setting).delta * eps
    if case_id == "E5":
        return -pq.inv_p + eps
    raise ParameterError(f"{case_id} has no power parameter")


# ---------------------------------------------------------------------------
# Quadrature for the component operators

def graded_rule(lo: float, hi: float, breaks: Sequence[float] = (), ratio: float = 0.15, levels: int = 60,
                order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on (lo, hi), geometrically graded toward every break point.

    Grading toward a nonzero break point stops while the innermost panel is
    still about a thousand ulps of the point wide, so no node rounds onto it.
    Break points closer than about 1e6 ulps to an earlier-listed one are
    dropped, so list the singular point first.
    """
    kept = [lo, hi]
    for b in breaks:
        b = float(b)
        if lo < b < hi and all(abs(b - k) > 1e6 * np.finfo(float).eps * max(abs(b), 1e-300) for k in kept):
            kept.append(b)
    pts = sorted(kept)
    xs, ws = [], []
    for u, v in zip(pts[:-1], pts[1:]):
        h = 0.5 * (v - u)
        m = u + h
        edges = [m]
        for end, sign in ((u, 1.0), (v, -1.0)):
            depth = levels
            if end != 0.0:
                depth = min(levels, int(math.log(1e3 * np.finfo(float).eps * abs(end) / h) / math.log(ratio)))
            k = ratio ** np.arange(1, max(depth, 0) + 1)
            edges += list(end + sign * h * k) + [end]
        e = np.unique(np.array(edges))
        a, b = e[:-1], e[1:]
        gx, gw = np.polynomial.legendre.leggauss(order)
        xs.append((0.5 * (b - a))[:, None] * gx + (0.5 * (a + b))[:, None])
        ws.append((0.5 * (b - a))[:, None] * gw)
    return np.concatenate([x.ravel() for x in xs]), np.concatenate([w.ravel() for w in ws])


def component_operator(family: str, components: Sequence[int], p: JacobiParams, sigma: float
                       ) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Kernel ``sum_i K_i(theta, phi)`` of selected decomposition components."""
    comps = tuple(components)
    return lambda th, ph: sum(kernel_component(family, i, p, sigma, th, ph) for i in comps)


def probe_kernel(spec: PotentialSpec, components: Sequence[int] | str):
    """Kernel used by a probe and its label.

    ``components = "full"`` evaluates the potential kernel itself (slow, used
    as a cross-check of the component model); otherwise the listed
    decomposition components are summed.
    """
    family, p = _family(spec)
    if isinstance(components, str):
        if components != "full":
            raise ParameterError(f"components must be a list of indices or 'full', got {components!r}")

        def full(th, ph):
            ph = np.asarray(ph, dtype=float)
            return potential_kernel_batch(spec, np.full_like(ph, th), ph)[0].reshape(ph.shape)
        return full, f"{family}:full"
    comps = [int(i) for i in components]
    return component_operator(family, comps, p, spec.sigma), f"{family}:{'+'.join(str(i) for i in comps)}"


def _measure_density(family: str, p: JacobiParams):
    if family == "fun":
        return lambda x: np.ones_like(x)
    setting = Setting(SettingKind.JACOBI_POL, p)
    return lambda x: measures.density(setting, x)


def apply_kernel(kernel, density, f: TestFunction, theta, lo: float = 0.0, hi: float = math.pi,
                 cut_factor: float | None = None) -> np.ndarray:
    """``int K(theta, phi) f(phi) density(phi) dphi`` for each theta.

    With ``cut_factor`` only ``phi > cut_factor * theta`` contributes (the
    off-diagonal minorant used in lower-bound arguments).
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    b = min(hi, f.support[1])
    out = np.zeros(len(theta))
    for k, t in enumerate(theta):
        a = max(lo, f.support[0]) if cut_factor is None else max(lo, f.support[0], cut_factor * t)
        if b <= a:
            continue
        x, w = graded_rule(a, b, (t, *f.breaks))
        vals = kernel(t, x) * f(x) * density(x)
        if not np.all(np.isfinite(vals)):
            raise NumericalError(f"non-finite integrand at theta = {t:.6g}")
        out[k] = np.sum(vals * w)
    return out


def lp_norm_of(f: Callable, q: float, density, lo: float, hi: float, breaks: Sequence[float] = ()) -> float:
    """``||f||_q`` of a function on (lo, hi) against ``density``; ``q = inf`` is a sampled maximum."""
    x, w = graded_rule(lo, hi, breaks, levels=40, order=7)
    v = np.abs(np.asarray(f(x), dtype=float))
    if math.isinf(q):
        return float(np.max(v))
    return float(np.sum(v ** q * density(x) * w) ** (1 / q))


# ---------------------------------------------------------------------------
# Probes

@dataclass
class ProbeReport:
    """Outcome of a sharpness probe.

    Attributes:
        ladder: Ladder values (eps or truncation eta).
        input_norms: Norm of the test function in the source space.
        output_norms: Output norm, partial integral or quasinorm per ladder value.
        ratios: ``output / input``.
        predicted: The growth law evaluated on the ladder.
        fitted: Fitted log-log slope (exponent cases) or the band of ``ratio / predicted``.
        confirmed: Whether the observed growth matches the law.
    """

    case_id: str
    component: str
    pair: tuple[float, float]
    ladder: list[float]
    input_norms: list[float]
    output_norms: list[float]
    ratios: list[float]
    predicted: list[float]
    fitted: float
    expected: float | None
    confirmed: bool
    notes: str = ""
    extras: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _family(spec: PotentialSpec) -> tuple[str, JacobiParams]:
    st = spec.setting
    if not st.kind.is_jacobi or st.kind == SettingKind.JACOBI_SCALED:
        raise ParameterError("probes run in the Jacobi polynomial or function setting")
    return ("pol" if st.kind == SettingKind.JACOBI_POL else "fun"), st.params


def _law_band(ratios: np.ndarray, law: np.ndarray) -> float:
    r = ratios / law
    return float(r.max() / r.min())


def blowup_probe(spec: PotentialSpec, components: Sequence[int], case_id: str, pq: ExponentPair,
                 ladder: Sequence[float], eps: float | None = None) -> ProbeReport:
    """Numerically follow a catalogued counterexample along a ladder.

    ``components`` selects kernel components (1..6) of the decomposition for
    the setting's family.  The meaning of ``ladder`` depends on the case:

    * E1, E6: indicator widths eps; output is the sup norm, growth law a logarithm.
    * E2, E4, E7: truncation eta of the test function's support near its
      singular end; the output at a fixed point grows like an iterated
      logarithm because the untruncated integral diverges.
    * E3, E5: truncation eta of the output norm integral near the output
      singularity; the fitted exponent is compared with the predicted one.
    * E8: truncation eta of the weak quasinorm supremum.
    """
    family, p = _family(spec)
    ladder = np.asarray(ladder, dtype=float)
    if len(ladder) < 2 or not (np.all(np.diff(ladder) > 0) or np.all(np.diff(ladder) < 0)):
        raise ParameterError("ladder must be strictly monotone with at least two values")
    s = spec.sigma
    K, label = probe_kernel(spec, components)
    dens = _measure_density(family, p)
    enough = len(ladder) >= MIN_LADDER
    inputs, outputs = [], []
    if case_id in ("E1", "E6"):
        theta = (np.geomspace(1e-12, 0.5, 40) if case_id == "E1"
                 else 1.0 + np.concatenate([-np.geomspace(1e-12, 0.3, 20), np.geomspace(1e-12, 0.3, 20)]))
        for e in ladder:
            f = extremal_function(case_id, spec, e)
            inputs.append(lp_norm_of(f, pq.p, dens, *f.support, f.breaks))
            outputs.append(float(np.max(apply_kernel(K, dens, f, theta))))
        law = np.log((2 * math.pi if case_id == "E1" else math.pi) / ladder)
        ratios = np.array(outputs) / np.array(inputs)
        band = _law_band(ratios, law)
        grows = bool(np.all(np.diff(ratios) * np.sign(-np.diff(ladder)) > 0))
        return ProbeReport(case_id, label, (pq.inv_p, pq.inv_q), ladder.tolist(), inputs, outputs,
                           ratios.tolist(), law.tolist(), band, None, bool(enough and grows and band <= LAW_BAND),
                           "fitted = max/min of ratio / law")
    if case_id in ("E2", "E4", "E7"):
        f = extremal_function(case_id, spec)
        near = f.support[0] if case_id != "E4" else f.support[1]
        probe_at = np.array([0.5 * min(ladder.min(), 1e-3)]) if case_id == "E2" else np.array([1.0 if case_id == "E4" else 1.5])
        for eta in ladder:
            if case_id == "E4":
                g = TestFunction(f.func, (0.5, 1 - eta), (0.5, 1 - eta))
            else:
                g = TestFunction(f.func, (eta, f.support[1]), (eta, f.support[1]))
            inputs.append(lp_norm_of(g, pq.p, dens, *g.support, g.breaks))
            outputs.append(float(apply_kernel(K, dens, g, probe_at)[0]))
        base = math.log(math.log(2.0 if case_id != "E4" else 2.0))
        law = np.log(np.log((2.0 if case_id != "E4" else 2.0) / ladder)) - base
        out = np.array(outputs)
        band = _law_band(out, law)
        grows = bool(np.all(np.diff(out) * np.sign(-np.diff(ladder)) > 0))
        return ProbeReport(case_id, label, (pq.inv_p, pq.inv_q), ladder.tolist(), inputs, outputs,
                           (out / np.array(inputs)).tolist(), law.tolist(), band, None,
                           bool(enough and grows and band <= LAW_BAND),
                           f"test function truncated at distance eta from {near}; input norms stay bounded")
    if case_id in ("E3", "E5"):
        _needs(eps is not None, f"{case_id} needs eps")
        f = extremal_function(case_id, spec, eps, pq)
        A = extremal_exponent(case_id, spec, eps, pq)
        inputs_val = lp_norm_of(f, pq.p, dens, *f.support, f.breaks)
        if case_id == "E3":
            expected = (2 * s + A) * pq.q + 2 * p.alpha + 2 if pq.inv_q > 0 else 2 * s + A
            lo_of, hi = (lambda eta: eta), 1.0
        else:
            expected = (2 * s + A) * pq.q + 1 if pq.inv_q > 0 else 2 * s + A
            lo_of, hi = (lambda eta: 1.0 + eta), 1.5
        for eta in ladder:
            lo = lo_of(eta)
            x, w = graded_rule(lo, hi, (), levels=30, order=7)
            vals = apply_kernel(K, dens, f, x)
            if pq.inv_q > 0:
                outputs.append(float(np.sum(vals ** pq.q * dens(x) * w)))
            else:
                outputs.append(float(np.max(vals)))
            inputs.append(inputs_val)
        slope = float(np.polyfit(np.log(ladder), np.log(outputs), 1)[0])
        ok = enough and expected < 0 and abs(slope - expected) <= SLOPE_TOL * abs(expected)
        return ProbeReport(case_id, label, (pq.inv_p, pq.inv_q), ladder.tolist(), inputs, outputs,
                           (np.array(outputs) / inputs_val).tolist(), (ladder ** expected).tolist(), slope,
                           float(expected), bool(ok),
                           "outputs are ||T f||_q^q over the truncated range (sup for q = inf)",
                           {"A": A, "eps": eps})
    if case_id == "E8":
        f = extremal_function(case_id, spec)
        k = thresholds(spec.setting).kappa
        inputs_val = lp_norm_of(f, pq.p, dens, *f.support, f.breaks)
        top = 1e-2
        for eta in ladder:
            theta = np.geomspace(eta, top, 24)
            vals = apply_kernel(K, dens, f, theta, cut_factor=2.0)
            outputs.append(float(np.max(vals * theta ** (-k))))
            inputs.append(inputs_val)
        law = np.log(np.log(math.pi / (2 * ladder))) - math.log(math.log(math.pi / 2))
        out = np.array(outputs)
        band = _law_band(out, law)
        grows = bool(np.all(np.diff(out) * np.sign(-np.diff(ladder)) > 0))
        return ProbeReport(case_id, label, (pq.inv_p, pq.inv_q), ladder.tolist(), inputs, outputs,
                           (out / inputs_val).tolist(), law.tolist(), band, None, bool(enough and grows and band <= LAW_BAND),
                           "outputs are sup theta^(-kappa) T f(theta) over (eta, 0.01) with T restricted to phi > 2 theta, a minorant of the operator")
    raise ParameterError(f"no probe for case {case_id!r}")


def bounded_ratio_probe(spec: PotentialSpec, components: Sequence[int], pq: ExponentPair,
                        ladder: Sequence[float]) -> ProbeReport:
    """Strong-type spot check: ``||T 1_(0,eps)||_q / ||1_(0,eps)||_p`` along a ladder of eps.

    On a pair where strong type holds the ratio stays bounded; the fitted
    log-log slope is reported (near zero on the critical line, positive
    power growth below it).
    """
    family, p = _family(spec)
    K, label = probe_kernel(spec, components)
    dens = _measure_density(family, p)
    ladder = np.asarray(ladder, dtype=float)
    hi = spec.setting.interval[1]
    inputs, outputs = [], []
    for e in ladder:
        f = extremal_function("E1", spec, e)
        inputs.append(lp_norm_of(f, pq.p, dens, *f.support, f.breaks))
        x, w = graded_rule(0.0, hi, (e,), levels=40, order=7)
        vals = apply_kernel(K, dens, f, x)
        if pq.inv_q > 0:
            outputs.append(float(np.sum(vals ** pq.q * dens(x) * w) ** (1 / pq.q)))
        else:
            outputs.append(float(np.max(vals)))
    ratios = np.array(outputs) / np.array(inputs)
    slope = float(np.polyfit(np.log(ladder), np.log(ratios), 1)[0])
    band = float(ratios.max() / ratios.min())
    return ProbeReport("E1", label, (pq.inv_p, pq.inv_q),
                       ladder.tolist(), inputs, outputs, ratios.tolist(), [1.0] * len(ladder), slope, 0.0,
                       bool(band <= BOUNDED_BAND), "fitted = log-log slope of the ratio; confirmed = bounded band",
                       {"band": band})
