"""Closed-form spectra of weighted shift operators.

Spectral radii over Lebesgue spaces and the sharp upper bound over
rearrangement-invariant spaces, the one-sided-core annuli, and the full
spectrum of d*W as a union of origin-centered annuli (from the moving
components) and m-th-root curve images (from the Carleman part).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .exprlang import as_function, find_zeros
from .circle import GammaArc, PeriodicStructure, Shift, wrap
from .indices import SpaceIndices
from .analysis import orbit_product

__all__ = ["Annulus", "SpectrumSet", "radius_lebesgue", "radius_bound",
           "shift_spectrum", "one_sided_core_annuli", "spectrum_contains",
           "spectrum_to_csv"]

GC_THRESHOLD = 1e-10
ARC_SAMPLES = 256


@dataclass(frozen=True)
class Annulus:
    """Origin-centered annulus r_in <= |z| <= r_out (a disk when r_in = 0)."""

    r_in: float
    r_out: float

    def __post_init__(self):
        if not 0.0 <= self.r_in <= self.r_out:
            raise ValueError("annulus requires 0 <= r_in <= r_out")


@dataclass(frozen=True)
class SpectrumSet:
    """Spectrum of d*W: annuli plus sampled curve images with m-fold roots.

    curve_samples hold all m-th roots of the sampled d_m values (for
    export); curve_values hold the raw d_m samples per Carleman arc, used
    for resolution-limited membership tests in the z^m plane.
    """

    m: int
    annuli: tuple[Annulus, ...]             # merged, for reporting
    raw_annuli: tuple[Annulus, ...]         # one per component / Y' point
    curve_samples: tuple[complex, ...]
    curve_values: tuple[tuple[complex, ...], ...]
    tol: float = 1e-9

    @property
    def curve_resolution(self) -> float:
        res = 0.0
        for arc_vals in self.curve_values:
            if len(arc_vals) < 2:
                continue
            diffs = np.abs(np.diff(np.asarray(arc_vals)))
            res = max(res, float(np.max(diffs)))
        return res


def _lambda_samples(structure: PeriodicStructure) -> np.ndarray:
    """Sample points covering the fixed-point set (points plus arc grids)."""
    pts = list(structure.lambda_points)
    for a in structure.lambda_arcs:
        pts.extend(wrap(np.linspace(a.start, a.end, ARC_SAMPLES + 1)).tolist())
    if not pts:
        raise ValueError("structure has an empty periodic-point set")
    return np.asarray(sorted(set(pts)))


def radius_lebesgue(g, shift: Shift, structure: PeriodicStructure, p: float) -> float:
    """Spectral radius of g*W on L^p: max over the fixed-point set of
    |g(tau)| |alpha'(tau)|^{-1/p}."""
    if not 1.0 < p < float("inf"):
        raise ValueError("radius_lebesgue requires 1 < p < inf")
    if structure.m != 1:
        raise ValueError("radius_lebesgue applies to shifts with fixed points (m=1); "
                         "use shift_spectrum for higher multiplicity")
    gf = as_function(g)
    taus = _lambda_samples(structure)
    vals = np.abs(np.asarray(gf(taus))) * np.abs(np.asarray(shift.deriv(taus))) ** (-1.0 / p)
    return float(np.max(vals))


def radius_bound(g, shift: Shift, structure: PeriodicStructure,
                 x: SpaceIndices) -> float:
    """Sharp upper bound for the spectral radius of g*W on X: max over the
    fixed-point set of |g| * max{|alpha'|^{-alpha_X}, |alpha'|^{-beta_X}}."""
    if structure.m != 1:
        raise ValueError("radius_bound applies to shifts with fixed points (m=1)")
    gf = as_function(g)
    taus = _lambda_samples(structure)
    ap = np.abs(np.asarray(shift.deriv(taus)))
    factor = np.maximum(ap ** (-x.alpha), ap ** (-x.beta))
    return float(np.max(np.abs(np.asarray(gf(taus))) * factor))


def _delta_Delta(d, shift: Shift, m: int, x: SpaceIndices, t) -> tuple[float, float]:
    dm = abs(float(orbit_product(d, shift, m, t)))
    ap = abs(float(orbit_product(shift.deriv, shift, m, t)))
    lo = min(ap ** (-x.alpha), ap ** (-x.beta))
    hi = max(ap ** (-x.alpha), ap ** (-x.beta))
    return dm * lo, dm * hi


def _merge(annuli: list[Annulus], tol: float = 1e-12) -> tuple[Annulus, ...]:
    if not annuli:
        return ()
    srt = sorted(annuli, key=lambda a: (a.r_in, a.r_out))
    out = [srt[0]]
    for a in srt[1:]:
        if a.r_in <= out[-1].r_out + tol:
            out[-1] = Annulus(out[-1].r_in, max(out[-1].r_out, a.r_out))
        else:
            out.append(a)
    return tuple(out)


def shift_spectrum(d, shift: Shift, structure: PeriodicStructure,
                   x: SpaceIndices, samples: int = 512) -> SpectrumSet:
    """Spectrum of d*W: curve part {z : z^m = d_m(t)} over the Carleman
    region, one annulus (or disk, when d_m vanishes on the closure) per
    moving component, and one annulus per declared Y' point."""
    if samples < 64:
        raise ValueError("samples must be >= 64")
    m = structure.m
    d_fn = as_function(d)

    curve_samples: list[complex] = []
    curve_values: list[tuple[complex, ...]] = []
    for arc in structure.omega:
        ts = wrap(np.linspace(arc.start, arc.end, samples + 1))
        dm = np.asarray(orbit_product(d_fn, shift, m, ts), dtype=float)
        vals = tuple(complex(v) for v in dm)
        curve_values.append(vals)
        for v in vals:
            r = abs(v) ** (1.0 / m)
            theta = cmath.phase(v)
            for k in range(m):
                curve_samples.append(r * cmath.exp(1j * (theta + 2 * cmath.pi * k) / m))

    raw: list[Annulus] = []
    for g in structure.gamma:
        endpoints = [g.tau_minus, g.tau_plus]
        dd = [_delta_Delta(d_fn, shift, m, x, tau) for tau in endpoints]
        delta_min = min(v[0] for v in dd)
        Delta_max = max(v[1] for v in dd)

        def dm_arc(t):
            return orbit_product(d_fn, shift, m, wrap(np.asarray(t, dtype=float)))

        ts = wrap(np.linspace(g.start, g.end, samples + 1))
        min_abs = float(np.min(np.abs(np.asarray(dm_arc(ts), dtype=float))))
        invertible = min_abs > GC_THRESHOLD
        if invertible:
            hits = find_zeros(dm_arc, g.start, g.end, cells=samples)
            if any(h.kind == "interval" or h.certain() for h in hits):
                invertible = False
        if invertible:
            raw.append(Annulus(delta_min ** (1.0 / m), Delta_max ** (1.0 / m)))
        else:
            raw.append(Annulus(0.0, Delta_max ** (1.0 / m)))

    for tau in structure.yprime:
        delta, Delta = _delta_Delta(d_fn, shift, m, x, tau)
        raw.append(Annulus(delta ** (1.0 / m), Delta ** (1.0 / m)))

    return SpectrumSet(m, _merge(raw), tuple(raw),
                       tuple(curve_samples), tuple(curve_values))


def one_sided_core_annuli(shift: Shift, arc: GammaArc,
                          x: SpaceIndices) -> tuple[Annulus, Annulus]:
    """Intersection of the left and right spectra of W on X(arc): one
    annulus per endpoint fixed point, degenerating to circles when the
    indices coincide."""
    out = []
    for tau in (arc.tau_minus, arc.tau_plus):
        ap = abs(float(shift.deriv(tau)))
        lo = min(ap ** (-x.alpha), ap ** (-x.beta))
        hi = max(ap ** (-x.alpha), ap ** (-x.beta))
        out.append(Annulus(lo, hi))
    return tuple(out)


def spectrum_contains(ss: SpectrumSet, z: complex, tol: float | None = None) -> str:
    """Membership query: "inside", "boundary", or "outside".

    Annuli are tested exactly on |z| with a tol band at the radii; curve
    parts are tested by nearest-sample distance of z^m, which is resolution
    limited by construction.
    """
    tol = ss.tol if tol is None else tol
    r = abs(z)
    boundary = False
    for a in ss.annuli:
        if a.r_in + tol < r < a.r_out - tol:
            return "inside"
        if abs(r - a.r_in) <= tol or abs(r - a.r_out) <= tol:
            boundary = True
    if ss.curve_values:
        w = complex(z) ** ss.m
        res = ss.curve_resolution
        dist = min(min(abs(w - v) for v in arc_vals)
                   for arc_vals in ss.curve_values if arc_vals)
        if dist <= max(tol, res):
            return "inside"
    return "boundary" if boundary else "outside"


def spectrum_to_csv(ss: SpectrumSet) -> str:
    """CSV export: `annulus,r_in,r_out` and `curve,re,im` rows (4 decimals)."""
    lines = ["kind,r_in|re,r_out|im"]
    for a in ss.annuli:
        lines.append(f"annulus,{a.r_in:.4f},{a.r_out:.4f}")
    for zt in ss.curve_samples:
        lines.append(f"curve,{zt.real:.4f},{zt.imag:.4f}")
    return "\n".join(lines) + "\n"
