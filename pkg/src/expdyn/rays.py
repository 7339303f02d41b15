"""Dynamic ray tracing by inverse-branch pullback.

A ray with bounded address s is traced at parameter t by following the
parameter forward through the chain t_0 = t, t_{j+1} = |lambda| e^{t_j}
until it exceeds a fixed escape cap (or a depth budget), seeding at

    z = t_j + i (2 pi s_j - Arg lambda),

the asymptotic position of the shifted ray, and pulling back j times with
the inverse branches prescribed by s_{j-1}, ..., s_0.  Branch contraction
makes the pullback forget the seed error; convergence is confirmed by
re-tracing five levels deeper and comparing.

For chains that never escape (attracting real dynamics, small t) the full
depth budget is used; that regime is exactly where landing_probe operates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import NonConvergenceError, NumericRangeError, ValidationError
from .dynamics import TAU, _require_lambda, eval_map, inverse_branch
from .coding import ExternalAddress, strip_index

ESCAPE_CAP = 1e14
_LOG_CAP = math.log(ESCAPE_CAP)
# forward coding re-check is meaningless once arg reduction loses ulps
_CODING_MODULUS_LIMIT = 1e15
_CODING_STEPS_MAX = 60
LOW_CONFIDENCE_T = 2.0


@dataclass(frozen=True)
class RaySample:
    t: float
    point: complex
    depth: int
    residual: float
    low_confidence: bool


@dataclass(frozen=True)
class Ray:
    address: ExternalAddress
    samples: tuple[RaySample, ...]
    depth: int
    residual: float
    tol: float


def _trace_single(
    lam: complex, s: ExternalAddress, t: float, depth: int
) -> tuple[complex, int]:
    """One pullback trace; returns (point, effective depth used)."""
    lam_abs = abs(lam)
    log_lam = math.log(lam_abs)
    arg_lam = math.atan2(lam.imag, lam.real)

    chain = [float(t)]
    while len(chain) <= depth:
        if log_lam + chain[-1] > _LOG_CAP:
            break
        chain.append(lam_abs * math.exp(chain[-1]))
    j = len(chain) - 1

    z = complex(chain[j], TAU * s.entry(j) - arg_lam)
    for i in range(j - 1, -1, -1):
        z = inverse_branch(lam, z, s.entry(i))
    return z, j


def _check_coding(lam: complex, z: complex, s: ExternalAddress, horizon: int) -> None:
    w = z
    for n in range(min(horizon, _CODING_STEPS_MAX)):
        if abs(w) > _CODING_MODULUS_LIMIT:
            return
        if strip_index(lam, w) != s.entry(n):
            raise NonConvergenceError(
                f"traced point leaves strip {s.entry(n)} at forward step {n}"
            )
        try:
            w = eval_map(lam, w)
        except NumericRangeError:
            return


def trace_ray(
    lam: complex,
    s: ExternalAddress,
    t_values: Sequence[float],
    depth: int = 20,
    tol: float = 1e-10,
) -> Ray:
    """Trace the ray of address s at the given parameters.

    Each sample is accepted only if re-tracing five levels deeper moves it
    by less than tol, and its forward itinerary matches the address prefix
    as far as native iteration can check.
    """
    lam = _require_lambda(lam)
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    if not (tol > 0.0):
        raise ValidationError("tol must be positive")
    ts = sorted(float(t) for t in t_values)
    if not ts:
        raise ValidationError("need at least one t value")
    if any(t < 1.0 for t in ts):
        raise ValidationError("ray parameters must be >= 1")
    if any(b >= a for a, b in zip(ts[1:], ts)):
        raise ValidationError("t values must be distinct")

    samples: list[RaySample] = []
    for t in ts:
        z, j = _trace_single(lam, s, t, depth)
        z5, _ = _trace_single(lam, s, t, depth + 5)
        residual = abs(z - z5)
        if not residual < tol:
            raise NonConvergenceError(
                f"pullback at t={t:g} moved by {residual:.3e} between depths "
                f"{depth} and {depth + 5} (tol {tol:g})"
            )
        _check_coding(lam, z, s, j)
        samples.append(RaySample(t, z, j, residual, t < LOW_CONFIDENCE_T))
    worst = max(s.residual for s in samples)
    return Ray(s, tuple(samples), depth, worst, tol)


def ray_asymptote(lam: complex, s: ExternalAddress) -> float:
    """Limit of Im along the ray: 2 pi s_0 - Arg lambda."""
    lam = _require_lambda(lam)
    return TAU * s.entry(0) - math.atan2(lam.imag, lam.real)


# ---------------------------------------------------------------------------
# landing heuristics


@dataclass(frozen=True)
class LandingProbe:
    status: str  # "apparently-landing" | "apparently-accumulating" | "undecided"
    endpoints: tuple[complex, ...]
    limit: Optional[complex]
    spread: float


_SPREAD_ACCUMULATING = 0.5
_SPREAD_COLLAPSED = 1e-9
_CAUCHY_FACTOR = 2.0
_CAUCHY_GAPS = 5


def landing_probe(
    lam: complex,
    s: ExternalAddress,
    t_min_sequence: Sequence[float],
    depth: int = 40,
    tol: float = 1e-10,
) -> LandingProbe:
    """Heuristic small-t endpoint classification; never a proof.

    Traces the ray at each parameter of the decreasing sequence and looks
    at the endpoints: a spread above 0.5 reads as accumulation, endpoints
    collapsed below 1e-9 read as landing, and so do endpoint gaps that
    halve five times in a row after normalizing by the parameter gaps
    (raw endpoint gaps would echo the caller's parameter spacing and
    misread any geometric t sequence as convergence).  Anything else is
    undecided.
    """
    lam = _require_lambda(lam)
    ts = [float(t) for t in t_min_sequence]
    if not ts:
        raise ValidationError("need at least one probe parameter")
    if any(t <= 0.0 for t in ts):
        raise ValidationError("probe parameters must be positive")
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValidationError("probe parameters must be strictly decreasing")

    pts: list[complex] = []
    for t in ts:
        z, _ = _trace_single(lam, s, t, depth)
        z5, _ = _trace_single(lam, s, t, depth + 5)
        if not abs(z - z5) < tol:
            raise NonConvergenceError(
                f"probe pullback at t={t:g} did not converge (moved {abs(z - z5):.3e})"
            )
        pts.append(z5)

    window = pts[-5:]
    spread = max(
        (abs(a - b) for i, a in enumerate(window) for b in window[i + 1 :]),
        default=0.0,
    )
    if len(pts) < 2:
        return LandingProbe("undecided", tuple(pts), None, spread)
    if spread > _SPREAD_ACCUMULATING:
        return LandingProbe("apparently-accumulating", tuple(pts), None, spread)
    if spread < _SPREAD_COLLAPSED:
        return LandingProbe("apparently-landing", tuple(pts), pts[-1], spread)
    gaps = [
        abs(z1 - z0) / (t0 - t1)
        for z0, z1, t0, t1 in zip(pts, pts[1:], ts, ts[1:])
    ]
    if len(gaps) >= _CAUCHY_GAPS:
        tail = gaps[-_CAUCHY_GAPS:]
        if all(g1 <= g0 / _CAUCHY_FACTOR for g0, g1 in zip(tail, tail[1:])):
            return LandingProbe("apparently-landing", tuple(pts), pts[-1], spread)
    return LandingProbe("undecided", tuple(pts), None, spread)


# ---------------------------------------------------------------------------
# export


def ray_to_csv(ray: Ray) -> str:
    lines = ["t,re,im,depth,residual"]
    for s in ray.samples:
        lines.append(
            f"{s.t:.17g},{s.point.real:.17g},{s.point.imag:.17g},"
            f"{s.depth},{s.residual:.17g}"
        )
    return "\n".join(lines) + "\n"


def write_ray_csv(ray: Ray, dest) -> None:
    """Write the CSV form to a path or text file object, LF line endings."""
    text = ray_to_csv(ray)
    if hasattr(dest, "write"):
        dest.write(text)
        return
    with open(dest, "w", encoding="ascii", newline="") as fh:
        fh.write(text)
