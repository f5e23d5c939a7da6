"""Circle geometry, shift maps, orbits, and periodic-point structure.

The curve is the unit-length circle [0, 1) with wraparound metric.  A
shift is given by a monotone lift L with L(t+1) = L(t) + sigma; iterates,
inverses, and powers are all handled through the extended lift, so
numerically-defined shifts (inverse and composed lifts) work the same way
as symbolic ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exprlang import Expr, ZeroHit, as_function, differentiate, find_zeros, parse

__all__ = [
    "wrap", "circle_dist", "Arc", "GammaArc", "Shift", "PeriodicStructure",
    "StructureError", "NoPeriodicStructureError",
    "detect_orientation_and_multiplicity", "compute_periodic_structure",
    "decompose_components", "orbit_limit_endpoints",
]

ORBIT_GUARD = 10 ** 6
POINT_TOL = 1e-9


class StructureError(ValueError):
    """Inconsistent or undetectable periodic structure."""


class NoPeriodicStructureError(StructureError):
    """No periodic points found up to the requested multiplicity bound."""


def wrap(x):
    """Reduce to [0, 1)."""
    return x - np.floor(x)


def circle_dist(s, t):
    """Wraparound metric d(s,t) = min(|s-t|, 1-|s-t|)."""
    d = np.abs(wrap(s) - wrap(t))
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class Arc:
    """Arc traversed positively from start to end.

    start lies in [0, 1); end in (start, start+1], so a full circle is
    (0, 1) and wrapping arcs simply have end > 1.
    """

    start: float
    end: float

    def __post_init__(self):
        if not 0.0 <= self.start < 1.0:
            raise ValueError("arc start must lie in [0,1)")
        if not self.start < self.end <= self.start + 1.0:
            raise ValueError("arc end must lie in (start, start+1]")

    @property
    def length(self) -> float:
        return self.end - self.start

    def offset(self, t) -> float:
        """Positive offset of t from start, in [0, 1)."""
        return wrap(np.asarray(t, dtype=float) - self.start)

    def contains(self, t, tol: float = 0.0) -> bool:
        off = float(self.offset(t))
        return tol < off < self.length - tol or (tol == 0.0 and off == 0.0 and self.length == 1.0)

    def midpoint(self) -> float:
        return float(wrap(self.start + 0.5 * self.length))


@dataclass(frozen=True)
class GammaArc(Arc):
    """Component of the moving region, with its repelling/attracting ends."""

    tau_minus: float = 0.0
    tau_plus: float = 0.0


class Shift:
    """Circle diffeomorphism given by a monotone lift.

    lift_ext is the lift on all of R (L(x+1) = L(x) + orientation);
    deriv is alpha'(t) as a function on the circle.  Both accept arrays.
    """

    def __init__(self, lift_ext: Callable, deriv: Callable, orientation: int,
                 lift_expr: Expr | None = None, deriv_expr: Expr | None = None):
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.lift_ext = lift_ext
        self.deriv = deriv
        self.orientation = orientation
        self.lift_expr = lift_expr
        self.deriv_expr = deriv_expr
        self._inv: Shift | None = None
        # bracket half-width for inverse solves: max |L(x) - sigma*x| + 1
        g = np.linspace(0.0, 1.0, 257)
        self._bracket = float(np.max(np.abs(np.asarray(lift_ext(g)) - orientation * g))) + 1.0

    @classmethod
    def from_lift(cls, lift, orientation: str = "auto", grid: int = 4096) -> "Shift":
        """Build and validate a shift from a lift expression (string or Expr)."""
        lift_expr = parse(lift) if isinstance(lift, str) else lift
        deriv_expr = differentiate(lift_expr)
        lf = as_function(lift_expr)
        df = as_function(deriv_expr)

        xs = np.linspace(0.0, 1.0, grid + 1)
        ls = np.asarray(lf(xs), dtype=float)
        if not np.all(np.isfinite(ls)):
            raise StructureError("lift evaluates to non-finite values on [0,1]")
        jump = ls[-1] - ls[0]
        if abs(abs(jump) - 1.0) > 1e-9:
            raise StructureError(f"|L(1)-L(0)| = {abs(jump)!r}, expected 1 within 1e-9")
        sigma = 1 if jump > 0 else -1
        if orientation == "preserve" and sigma != 1:
            raise StructureError("lift is decreasing but orientation 'preserve' was requested")
        if orientation == "reverse" and sigma != -1:
            raise StructureError("lift is increasing but orientation 'reverse' was requested")
        diffs = np.diff(ls) * sigma
        if np.min(diffs) <= 0.0:
            k = int(np.argmin(diffs))
            raise StructureError(f"lift is not strictly monotone near t={xs[k]:.6f}")
        ds = np.asarray(df(xs), dtype=float)
        if not np.all(np.isfinite(ds)) or np.min(np.abs(ds)) <= 0.0:
            raise StructureError("lift derivative vanishes on [0,1]; not a diffeomorphism")

        def lift_ext(x):
            x = np.asarray(x, dtype=float)
            n = np.floor(x)
            out = np.asarray(lf(x - n)) + sigma * n
            return float(out) if out.ndim == 0 else out

        def deriv(t):
            out = np.asarray(df(wrap(np.asarray(t, dtype=float))))
            return float(out) if out.ndim == 0 else out

        return cls(lift_ext, deriv, sigma, lift_expr, deriv_expr)

    def __call__(self, t):
        return wrap(self.lift_ext(t))

    def derivative(self, t):
        """alpha'(t), signed."""
        return self.deriv(t)

    def _solve_inverse(self, y):
        """Solve L(x) = y for the extended lift (vector bisection + Newton)."""
        y = np.asarray(y, dtype=float)
        s = float(self.orientation)
        a = s * y - self._bracket
        b = s * y + self._bracket
        for _ in range(60):
            m = 0.5 * (a + b)
            gm = s * np.asarray(self.lift_ext(m)) - s * y
            neg = gm < 0
            a = np.where(neg, m, a)
            b = np.where(neg, b, m)
        x = 0.5 * (a + b)
        for _ in range(3):
            g = np.asarray(self.lift_ext(x)) - y
            dg = np.asarray(self.deriv(x))
            step = g / np.where(np.abs(dg) > 1e-300, dg, 1.0)
            x = x - np.clip(step, -0.5, 0.5)
        resid = np.max(np.abs(np.asarray(self.lift_ext(x)) - y))
        if not resid <= 1e-10:
            raise StructureError("inverse lift solve failed to converge; lift not monotone?")
        return float(x) if np.ndim(y) == 0 else x

    def inverse(self) -> "Shift":
        """The shift alpha_{-1}, with derivative 1/alpha'(alpha_{-1})."""
        if self._inv is not None:
            return self._inv
        outer = self

        def lift_ext(x):
            return outer._solve_inverse(x)

        def deriv(t):
            u = wrap(outer._solve_inverse(wrap(np.asarray(t, dtype=float))))
            out = 1.0 / np.asarray(outer.deriv(u))
            return float(out) if out.ndim == 0 else out

        inv = Shift(lift_ext, deriv, outer.orientation)
        inv._inv = outer
        self._inv = inv
        return inv

    def power(self, m: int) -> "Shift":
        """The m-fold iterate alpha_m as a shift in its own right."""
        if m < 1:
            raise ValueError("power requires m >= 1")
        if m == 1:
            return self
        outer = self

        def lift_ext(x):
            y = np.asarray(x, dtype=float)
            for _ in range(m):
                y = np.asarray(outer.lift_ext(y))
            return float(y) if y.ndim == 0 else y

        def deriv(t):
            u = wrap(np.asarray(t, dtype=float))
            prod = np.ones_like(u)
            for _ in range(m):
                prod = prod * np.asarray(outer.deriv(u))
                u = wrap(np.asarray(outer.lift_ext(u)))
            return float(prod) if prod.ndim == 0 else prod

        return Shift(lift_ext, deriv, outer.orientation ** m)

    def apply(self, t, k: int = 1):
        """alpha_k(t); negative k through the inverse lift."""
        if abs(k) > ORBIT_GUARD:
            raise ValueError(f"orbit index guard exceeded (|k| <= {ORBIT_GUARD})")
        x = np.asarray(t, dtype=float)
        out = wrap(x)
        if k >= 0:
            for _ in range(k):
                out = wrap(self.lift_ext(out))
        else:
            inv = self.inverse()
            for _ in range(-k):
                out = wrap(inv.lift_ext(out))
        return float(out) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class PeriodicStructure:
    """Fixed-point structure of alpha_m on the circle.

    lambda_points / lambda_arcs make up the set of periodic points; y is
    its boundary; omega are the interior components (the Carleman part)
    and gamma the moving components with their attraction endpoints.
    yprime is never populated by the detector (finite boundaries only) but
    may be supplied for user-built structures with limit points.
    """

    m: int
    orientation: int
    lambda_points: tuple[float, ...]
    lambda_arcs: tuple[Arc, ...]
    y: tuple[float, ...]
    omega: tuple[Arc, ...]
    gamma: tuple[GammaArc, ...]
    yprime: tuple[float, ...] = ()
    uncertain: bool = False
    point_tol: float = POINT_TOL

    @property
    def full_circle(self) -> bool:
        return any(a.length == 1.0 for a in self.lambda_arcs)

    def in_lambda(self, t, tol: float | None = None) -> bool:
        tol = self.point_tol if tol is None else tol
        if self.full_circle:
            return True
        for p in self.lambda_points:
            if circle_dist(t, p) <= tol:
                return True
        for a in self.lambda_arcs:
            off = float(a.offset(t))
            if off <= a.length + tol or off >= 1.0 - tol:
                return True
        return False

    def gamma_containing(self, t) -> GammaArc | None:
        for g in self.gamma:
            if g.contains(t):
                return g
        return None

    def nearest_y(self, t) -> float:
        if not self.y:
            raise StructureError("structure has empty boundary Y")
        return min(self.y, key=lambda p: float(circle_dist(t, p)))


def _touches_integer(vals: np.ndarray, tol: float) -> list[int]:
    lo = math.floor(float(np.min(vals)) - tol)
    hi = math.ceil(float(np.max(vals)) + tol)
    out = []
    for n in range(lo, hi + 1):
        if float(np.min(vals)) - tol <= n <= float(np.max(vals)) + tol:
            out.append(n)
    return out


def _iterated_lift_minus_id(shift: Shift, j: int, xs: np.ndarray) -> np.ndarray:
    y = xs.copy()
    for _ in range(j):
        y = np.asarray(shift.lift_ext(y))
    return y - xs


def detect_orientation_and_multiplicity(shift: Shift, m_max: int = 16,
                                        grid: int = 4096) -> tuple[int, int]:
    """Orientation from the lift, multiplicity from the first iterate with
    periodic points.

    Orientation-reversing shifts always get m = 2 (they have two fixed
    points and all other periodic points have multiplicity two).
    """
    if shift.orientation == -1:
        return -1, 2
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    xs = np.linspace(0.0, 1.0, grid + 1)
    for j in range(1, m_max + 1):
        u = _iterated_lift_minus_id(shift, j, xs)
        umin, umax = float(np.min(u)), float(np.max(u))
        # refine the extreme cells a little before testing integer touch
        for pick, best in ((np.argmin, umin), (np.argmax, umax)):
            i = int(pick(u))
            a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid)]
            fine = np.linspace(a, b, 65)
            uf = _iterated_lift_minus_id(shift, j, fine)
            umin = min(umin, float(np.min(uf)))
            umax = max(umax, float(np.max(uf)))
        for n in range(math.ceil(umin - 1e-7), math.floor(umax + 1e-7) + 1):
            if umin - 1e-7 <= n <= umax + 1e-7:
                return 1, j
    raise NoPeriodicStructureError(f"no periodic structure with multiplicity <= {m_max}")


def compute_periodic_structure(shift: Shift, m: int | None = None,
                               grid: int = 4096, tol: float = 1e-12,
                               flat_tol: float = 1e-11) -> PeriodicStructure:
    """Detect the fixed-point set of alpha_m and decompose the circle.

    Tangential (suspect) fixed-point zeros mark the structure uncertain;
    downstream verdicts refuse to decide on uncertain structures.
    """
    if m is None:
        orientation, m = detect_orientation_and_multiplicity(shift, grid=grid)
    else:
        orientation = shift.orientation

    lift_m = shift.power(m) if m > 1 else shift
    xs = np.linspace(0.0, 1.0, grid + 1)
    u = _iterated_lift_minus_id(lift_m, 1, xs)
    candidates = _touches_integer(u, tol=1e-7)
    found: list[tuple[int, list[ZeroHit]]] = []
    for n in candidates:
        def v(x, n=n):
            y = np.asarray(lift_m.lift_ext(np.asarray(x, dtype=float)))
            out = y - np.asarray(x, dtype=float) - n
            return float(out) if np.ndim(x) == 0 else out
        hits = find_zeros(v, 0.0, 1.0, tol=tol, cells=grid, flat_tol=flat_tol)
        if hits:
            found.append((n, hits))
    if not found:
        raise NoPeriodicStructureError("alpha_m has no fixed points on the sampled grid")
    if len(found) > 1:
        raise StructureError(
            f"fixed points found at several lift branches n={[n for n, _ in found]}")
    n, hits = found[0]

    def v(x):
        y = np.asarray(lift_m.lift_ext(np.asarray(x, dtype=float)))
        out = y - np.asarray(x, dtype=float) - n
        return float(out) if np.ndim(x) == 0 else out

    uncertain = any(h.suspect for h in hits)

    points = [h.location for h in hits if h.kind != "interval"]
    intervals = [(float(h.lo), float(h.hi)) for h in hits if h.kind == "interval"]

    # full-circle fixed set
    if intervals and intervals[0][0] <= 1e-12 and intervals[0][1] >= 1.0 - 1e-12:
        full = Arc(0.0, 1.0)
        return PeriodicStructure(m, orientation, (), (full,), (), (full,), (),
                                 uncertain=uncertain)

    # components as (start, end) with end >= start, sorted by start
    comps = sorted([(p, p) for p in points] + intervals)
    touch = POINT_TOL

    merged: list[list[float]] = []
    for a, b in comps:
        if merged and a - merged[-1][1] <= touch:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    # components touching through the seam at 0==1 fuse into one wrapping arc
    if len(merged) >= 2 and (merged[0][0] + 1.0) - merged[-1][1] <= touch:
        a_last, _ = merged[-1]
        _, b_first = merged[0]
        merged = merged[1:-1] + [[a_last, b_first + 1.0]]
        merged.sort()

    lambda_points: list[float] = []
    lambda_arcs: list[Arc] = []
    y: list[float] = []
    for a, b in merged:
        if b - a <= 8 * tol:
            p = wrap(0.5 * (a + b))
            lambda_points.append(p)
            y.append(p)
        else:
            arc = Arc(wrap(a), wrap(a) + (b - a))
            lambda_arcs.append(arc)
            y.append(arc.start)
            y.append(wrap(arc.end))

    omega = [Arc(a.start, a.end) for a in lambda_arcs]

    gamma: list[GammaArc] = []
    n_comp = len(merged)
    for i, (a, b) in enumerate(merged):
        next_start = merged[(i + 1) % n_comp][0] + (1.0 if i == n_comp - 1 else 0.0)
        length = next_start - b
        if length <= touch:
            continue
        arc = Arc(wrap(b), wrap(b) + length)
        vm = float(v(arc.midpoint()))
        if vm > 0:
            tau_minus, tau_plus = wrap(arc.start), wrap(arc.end)
        else:
            tau_minus, tau_plus = wrap(arc.end), wrap(arc.start)
        gamma.append(GammaArc(arc.start, arc.end, tau_minus, tau_plus))

    return PeriodicStructure(m, orientation,
                             tuple(lambda_points), tuple(lambda_arcs),
                             tuple(sorted(set(y))), tuple(omega), tuple(gamma),
                             uncertain=uncertain)


def decompose_components(ps: PeriodicStructure) -> tuple[tuple[Arc, ...], tuple[GammaArc, ...]]:
    """The (omega, gamma) families of the finite decomposition."""
    return ps.omega, ps.gamma


def orbit_limit_endpoints(ps: PeriodicStructure, t: float) -> tuple[float, float]:
    """Repelling/attracting endpoints (tau_minus, tau_plus) of the component
    containing t; (t, t) on the fixed-point set."""
    if ps.in_lambda(t):
        return float(t), float(t)
    g = ps.gamma_containing(t)
    if g is None:
        near = ps.nearest_y(t)
        raise StructureError(
            f"t={t!r} lies in no component (tolerance boundary near Y point {near!r})")
    return g.tau_minus, g.tau_plus
