"""Box-counting estimates and the certified dimension-bound search.

Box-count slopes of finite-depth samples and certified contraction
bounds are the two honest numerical surrogates produced here; neither is
ever labeled a Hausdorff dimension.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import GeometryError, ValidationError
from .dynamics import _require_lambda
from .induced import (
    ContractionCertificate,
    InducedGeometry,
    certificate_to_json,
    negative_geometry,
    verify_contraction,
)
from .invariant_sets import ThinSetSpec


@dataclass(frozen=True)
class BoxCountResult:
    epsilons: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    r2: float
    slope_claim: bool  # False when too few points for the slope to mean much
    n_points: int


def box_count(
    points: Sequence[complex],
    epsilons: Sequence[float],
    anchor_offset: tuple[float, float] = (0.0, 0.0),
) -> BoxCountResult:
    """Occupied epsilon-grid boxes at each scale, with a least-squares slope.

    The grid is anchored at the bounding-box corner of the points;
    anchor_offset shifts it by the given fraction of each epsilon (used
    for grid-stability checks).  Scales must be strictly decreasing, at
    least three of them, spanning at least one decade.  Fewer than 100
    points clears slope_claim but the slope is still reported.
    """
    pts = [complex(p) for p in points]
    if not pts:
        raise ValidationError("no points to count")
    eps = [float(e) for e in epsilons]
    if len(eps) < 3:
        raise ValidationError("need at least 3 scales")
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValidationError("scales must be positive and strictly decreasing")
    if eps[0] / eps[-1] < 10.0:
        raise ValidationError("scales must span at least one decade")

    x0 = min(p.real for p in pts)
    y0 = min(p.imag for p in pts)
    ox, oy = anchor_offset
    counts: list[int] = []
    for e in eps:
        boxes = {
            (math.floor((p.real - x0) / e - ox), math.floor((p.imag - y0) / e - oy))
            for p in pts
        }
        counts.append(len(boxes))

    xs = [math.log(1.0 / e) for e in eps]
    ys = [math.log(n) for n in counts]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    ss_tot = sum((y - my) ** 2 for y in ys)
    ss_res = sum((y - (my + slope * (x - mx))) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return BoxCountResult(
        tuple(eps), tuple(counts), slope, r2, len(pts) >= 100, len(pts)
    )


# ---------------------------------------------------------------------------
# certified bound search


@dataclass(frozen=True)
class DimensionReport:
    boxcount: Optional[BoxCountResult]
    certificate: Optional[ContractionCertificate]
    bound_achieved: Optional[float]  # 1 + delta of the best passing certificate
    provenance: dict
    status: str  # "ok" | "no certificate in grid"


def _geometry_for(lam: complex, c: float, l0: int, r_span: int) -> InducedGeometry:
    """Build a geometry deep enough that its bands cover -(M + r_span)."""
    n_levels = 4
    while True:
        geo = negative_geometry(lam, c, l0, n_levels)
        try:
            geo.level_of_column(-(geo.m + r_span))
            return geo
        except GeometryError:
            if n_levels >= 64:
                raise
            n_levels *= 2


def dimension_bound_search(
    lam: complex,
    spec: ThinSetSpec,
    delta_grid: Sequence[float],
    m_grid: Sequence[int] = (),
    l0_grid: Optional[Sequence[int]] = None,
    c: Optional[float] = None,
    r_span: int = 20,
    boxcount: Optional[BoxCountResult] = None,
) -> DimensionReport:
    """Scan the grids and return the smallest passing 1 + delta.

    Positive-only mode scans (delta, M) and certifies columns M..M+r_span.
    With l0_grid (c required) it scans (delta, l0), derives M from each
    geometry, and certifies both sides.  Absence of a certificate is a
    result ("no certificate in grid"), not an error.
    """
    lam = _require_lambda(lam)
    deltas = sorted(float(d) for d in delta_grid)
    if not deltas:
        raise ValidationError("delta grid must be nonempty")
    if any(not 0.0 < d < 1.0 for d in deltas):
        raise ValidationError("deltas must lie in (0, 1)")
    if l0_grid is None and not m_grid:
        raise ValidationError("need an M grid (or an l0 grid with c)")
    if l0_grid is not None and c is None:
        raise ValidationError("l0 scanning needs the supergrowth constant c")

    best: Optional[ContractionCertificate] = None
    if l0_grid is None:
        ms = sorted(set(int(m) for m in m_grid))
        if any(m < 1 for m in ms):
            raise ValidationError("M values must be >= 1")
        for m in ms:
            for d in deltas:
                if best is not None and 1.0 + d >= 1.0 + best.delta:
                    break
                cert = verify_contraction(
                    lam, spec, d, range(m, m + r_span + 1), m=m,
                    enumerate_rectangles=False,
                )
                if cert.passed:
                    best = cert
                    break
        provenance = {
            "lambda": [lam.real, lam.imag],
            "mode": "positive-only",
            "delta_grid": deltas,
            "m_grid": ms,
            "r_span": r_span,
        }
    else:
        l0s = sorted(set(int(l) for l in l0_grid))
        for l0 in l0s:
            geo = _geometry_for(lam, c, l0, r_span)
            for d in deltas:
                if best is not None and 1.0 + d >= 1.0 + best.delta:
                    break
                m = geo.m
                cols = list(range(m, m + r_span + 1)) + list(
                    range(-(m + r_span), -m + 1)
                )
                cert = verify_contraction(
                    lam, spec, d, cols, geometry=geo,
                    enumerate_rectangles=False,
                )
                if cert.passed:
                    best = cert
                    break
        provenance = {
            "lambda": [lam.real, lam.imag],
            "mode": "two-sided",
            "delta_grid": deltas,
            "l0_grid": l0s,
            "c": c,
            "r_span": r_span,
        }

    if best is None:
        return DimensionReport(boxcount, None, None, provenance, "no certificate in grid")
    return DimensionReport(boxcount, best, 1.0 + best.delta, provenance, "ok")


def report_to_json(report: DimensionReport) -> str:
    doc = {
        "format_version": 1,
        "status": report.status,
        "bound_achieved": report.bound_achieved,
        "provenance": report.provenance,
        "certificate": (
            json.loads(certificate_to_json(report.certificate))
            if report.certificate is not None
            else None
        ),
        "boxcount": (
            {
                "epsilons": list(report.boxcount.epsilons),
                "counts": list(report.boxcount.counts),
                "slope": report.boxcount.slope,
                "r2": report.boxcount.r2,
                "slope_claim": report.boxcount.slope_claim,
                "n_points": report.boxcount.n_points,
            }
            if report.boxcount is not None
            else None
        ),
    }
    return json.dumps(doc, indent=2, sort_keys=True)
