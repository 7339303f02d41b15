"""Core dynamics of the exponential family z -> lambda * e^z.

Forward iteration is done in log-polar form: a point is stored as
(log modulus, argument), with the log modulus a TowerReal so that orbits
may grow through iterated exponentials without overflow.  The recursion
is exact in that representation:

    log|z_{n+1}| = log|lambda| + Re z_n
    arg  z_{n+1} = (Im z_n + Arg lambda)  mod 2 pi

Arguments are native floats.  Once |z_n| exceeds 2 pi / ulp the reduction
of Im z_n modulo 2 pi carries no information; from that step on arguments
are marked untrusted (they are still propagated deterministically).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    DomainError,
    NumericRangeError,
    ValidationError,
)
from .towers import NEG_SENTINEL, TowerReal, ZERO

TAU = 2.0 * math.pi
_EXP_SAFE = 709.78
# |z| beyond which Im z mod 2pi is below one ulp of Im z
ARG_TRUST_LIMIT = TAU / 2.220446049250313e-16


def _require_lambda(lam: complex) -> complex:
    lam = complex(lam)
    if lam == 0:
        raise ValidationError("lambda must be nonzero")
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValidationError("lambda must be finite")
    return lam


def _require_point(z: complex) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("point must be finite")
    return z


def _principal(theta: float) -> float:
    """Reduce to (-pi, pi]."""
    r = math.remainder(theta, TAU)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class LogPolarComplex:
    """Point stored as (log modulus, argument in (-pi, pi], trust flag)."""

    log_modulus: TowerReal
    argument: float
    arg_trusted: bool = True

    @classmethod
    def from_complex(cls, z: complex) -> "LogPolarComplex":
        z = _require_point(z)
        m = abs(z)
        if m == 0.0:
            return cls(TowerReal(0, NEG_SENTINEL), 0.0, True)
        return cls(TowerReal.from_float(math.log(m)), math.atan2(z.imag, z.real), True)

    def modulus_float(self) -> float:
        """Native modulus, or inf when it exceeds the float range."""
        lm = self.log_modulus
        if lm.level == 0 and lm.mantissa <= _EXP_SAFE:
            return math.exp(lm.mantissa)
        return math.inf

    def to_complex(self) -> complex:
        m = self.modulus_float()
        if m == math.inf:
            raise NumericRangeError("point modulus exceeds the native float range")
        return complex(m * math.cos(self.argument), m * math.sin(self.argument))

    def real_part_tower(self) -> TowerReal:
        """Re z as a TowerReal (clamped to the negative sentinel if below range)."""
        c = math.cos(self.argument)
        m = self.modulus_float()
        if m != math.inf:
            return TowerReal.from_float(m * c)
        if c == 0.0:
            return ZERO
        if c > 0.0:
            return self.log_modulus.add_float(math.log(c)).exp()
        return TowerReal(0, NEG_SENTINEL)

    def imag_part_float(self) -> Optional[float]:
        """Im z as a native float, or None when not representable."""
        s = math.sin(self.argument)
        m = self.modulus_float()
        if m != math.inf:
            return m * s
        if s == 0.0:
            return 0.0
        t = self.log_modulus.add_float(math.log(abs(s)))
        v = t.exp().to_float()
        if v == math.inf:
            return None
        return math.copysign(v, s)


def eval_map(lam: complex, z: complex) -> complex:
    """One application of z -> lambda * e^z in native arithmetic."""
    lam = _require_lambda(lam)
    z = _require_point(z)
    if math.log(abs(lam)) + z.real > _EXP_SAFE:
        raise NumericRangeError(
            f"Re(z) = {z.real:.6g} exceeds the native exponent budget for this lambda"
        )
    return lam * cmath.exp(z)


def step_log_polar(lam: complex, p: LogPolarComplex) -> LogPolarComplex:
    """One exact map step in log-polar form."""
    lam = _require_lambda(lam)
    log_lam = math.log(abs(lam))
    arg_lam = math.atan2(lam.imag, lam.real)

    alpha = p.real_part_tower()
    new_logmod = alpha.add_float(log_lam)

    m = p.modulus_float()
    s = math.sin(p.argument)
    if m != math.inf:
        new_arg = _principal(m * s + arg_lam)
        trusted = p.arg_trusted and (m <= ARG_TRUST_LIMIT or s == 0.0)
    elif s == 0.0:
        # exactly real direction: Im z is exactly zero at any modulus
        new_arg = _principal(arg_lam)
        trusted = p.arg_trusted
    else:
        im = p.imag_part_float()
        if im is None:
            new_arg = 0.0
        else:
            new_arg = _principal(im + arg_lam)
        trusted = False
    return LogPolarComplex(new_logmod, new_arg, trusted)


# ---------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class OrbitPoint:
    index: int
    point: LogPolarComplex
    native: Optional[complex]
    escaped: bool
    precision_flag: bool


@dataclass(frozen=True)
class OrbitResult:
    lam: complex
    points: tuple[OrbitPoint, ...]
    escaped_at: Optional[int]
    precision_loss_at: Optional[int]


def iterate_orbit(
    lam: complex,
    z0: complex,
    n: int,
    escape_log_modulus: float = 1e8,
    derivative_flag_threshold: float = 1e15,
) -> OrbitResult:
    """Orbit z0, f(z0), ..., f^n(z0) in log-polar form with per-step status.

    ``escaped`` marks the first index whose log modulus exceeds
    ``escape_log_modulus``; ``precision_flag`` is set once the accumulated
    derivative bound prod |f'| along the orbit exceeds
    ``derivative_flag_threshold`` (native re/im values past that point
    carry amplified rounding error).
    """
    lam = _require_lambda(lam)
    if n < 0:
        raise ValidationError("orbit length must be non-negative")
    escape = TowerReal.from_float(escape_log_modulus)
    log_flag = math.log(derivative_flag_threshold)

    cur = LogPolarComplex.from_complex(z0)
    native: Optional[complex] = complex(z0)
    pts: list[OrbitPoint] = []
    escaped_at: Optional[int] = None
    precision_at: Optional[int] = None
    deriv_log_sum = 0.0

    for i in range(n + 1):
        esc = cur.log_modulus > escape
        if esc and escaped_at is None:
            escaped_at = i
        flag = precision_at is not None
        pts.append(OrbitPoint(i, cur, native, esc, flag))
        if i == n:
            break
        if native is not None:
            try:
                native = eval_map(lam, native)
            except NumericRangeError:
                native = None
        cur = step_log_polar(lam, cur)
        # |f'| at the previous point equals |f| at this one
        lm = cur.log_modulus
        deriv_log_sum += lm.mantissa if lm.level == 0 else math.inf
        if precision_at is None and deriv_log_sum > log_flag:
            precision_at = i + 1
    return OrbitResult(lam, tuple(pts), escaped_at, precision_at)


def singular_orbit(lam: complex, n: int) -> tuple[LogPolarComplex, ...]:
    """beta_1 .. beta_n, the forward orbit of 0 (beta_1 = lambda), exactly
    in log-polar form."""
    lam = _require_lambda(lam)
    if n < 1:
        raise ValidationError("need at least one orbit point")
    out = [LogPolarComplex.from_complex(lam)]
    for _ in range(n - 1):
        out.append(step_log_polar(lam, out[-1]))
    return tuple(out)


def orbit_derivative_log(lam: complex, z0: complex, n: int) -> float:
    """log |(f^n)'(z0)| = sum of log |f^i(z0)| for i = 1..n, native range only."""
    lam = _require_lambda(lam)
    if n < 1:
        raise ValidationError("derivative order must be >= 1")
    z = _require_point(z0)
    total = 0.0
    for _ in range(n):
        z = eval_map(lam, z)
        m = abs(z)
        if m == 0.0:
            raise NumericRangeError("orbit modulus underflowed to zero")
        total += math.log(m)
    return total


# ---------------------------------------------------------------------------
# inverse branches


def inverse_branch(lam: complex, w: complex, k: int) -> complex:
    """The preimage z of w under lambda * e^z with Im z in strip k.

    Strip k is ((2k-1) pi - Arg lambda, (2k+1) pi - Arg lambda], upper edge
    inclusive.
    """
    lam = _require_lambda(lam)
    w = _require_point(w)
    if w == 0:
        raise DomainError("0 has no preimage under lambda * e^z")
    base = cmath.log(w) - cmath.log(lam)
    arg_lam = math.atan2(lam.imag, lam.real)
    lo = (2 * k - 1) * math.pi - arg_lam
    t = (lo - base.imag) / TAU
    j = math.floor(t) + 1
    return complex(base.real, base.imag + TAU * j)


# ---------------------------------------------------------------------------
# super-growth of the singular orbit


@dataclass(frozen=True)
class SupergrowthReport:
    lam: complex
    c: float
    n_min: int
    n_checked: int
    holds: bool
    first_failure_index: Optional[int]
    ratios: tuple[Optional[float], ...]
    tail_ratio: Optional[float]
    largest_passing_c: Optional[float]
    sustained: bool
    escape_threshold: Optional[float]
    alphas: tuple[TowerReal, ...]


def _largest_growth_root(c: float) -> Optional[float]:
    """Largest solution of c * e^x = x (exists iff 0 < c <= 1/e)."""
    if c >= 1.0 / math.e:
        return None
    x0 = -math.log(c)  # argmin of c e^x - x, negative there
    hi = x0 + 1.0
    while c * math.exp(hi) - hi <= 0.0:
        hi = x0 + 2.0 * (hi - x0)
    lo = x0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if c * math.exp(mid) - mid > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _tower_diff_float(a: TowerReal, b: TowerReal) -> float:
    """a - b as a float, +-inf when the difference leaves the float range."""
    fa, fb = a.to_float(), b.to_float()
    if fa != math.inf and fb != math.inf:
        return fa - fb
    if fa == math.inf and fb == math.inf:
        # both huge: compare exactly, magnitude of the gap is itself huge
        if a > b:
            return math.inf
        if b > a:
            return -math.inf
        return 0.0
    return math.inf if fa == math.inf else -math.inf


def check_supergrowth(
    lam: complex, c: float, n: int, n_min: int = 1
) -> SupergrowthReport:
    """Check alpha_{k+1} >= c * e^{alpha_k} along the singular orbit.

    ``holds`` additionally requires the growth to be self-sustaining at the
    horizon: for c below 1/e the map x -> c e^x has a largest fixed point,
    and only orbits past it are driven to infinity by the inequality.  A
    bounded orbit (attracting fixed point) can satisfy every finite ratio
    check while alpha stays small forever; the surrogate rejects it.
    """
    lam = _require_lambda(lam)
    if not (c > 0.0 and math.isfinite(c)):
        raise ValidationError("c must be a positive real")
    if n < 2 or n_min < 1 or n_min >= n:
        raise ValidationError("need 1 <= n_min < n and n >= 2")

    orbit = singular_orbit(lam, n)
    alphas = tuple(p.real_part_tower() for p in orbit)  # alphas[i] = alpha_{i+1}
    log_c = math.log(c)

    ratios: list[Optional[float]] = []
    first_fail: Optional[int] = None
    log_margins: list[float] = []
    for k in range(n_min, n):
        a_prev = alphas[k - 1]
        a_next = alphas[k]
        if not a_next > ZERO:
            ok = False
            ratios.append(None)
            log_margins.append(-math.inf)
        else:
            lhs = a_next.log()
            rhs = a_prev.add_float(log_c)
            ok = lhs >= rhs
            fa, fb = lhs.to_float(), rhs.to_float()
            if fa != math.inf and fb != math.inf:
                # both logs native: the difference carries float precision
                d = fa - fb
                ratios.append(math.exp(d) if abs(d) <= _EXP_SAFE else None)
                log_margins.append(d)
            else:
                # past native range the ratio is below representation
                # resolution (towers differing by a factor collapse to the
                # same mantissa); report it as unresolvable, not as 1
                ratios.append(None)
                if not ok:
                    log_margins.append(-math.inf)
        if not ok and first_fail is None:
            first_fail = k

    threshold = _largest_growth_root(c)
    if threshold is None:
        sustained = alphas[-1] > ZERO
    else:
        sustained = alphas[-1] > TowerReal.from_float(threshold)
    holds = first_fail is None and sustained

    # largest c passing the ratio checks over this horizon, from the
    # margins that are resolvable (none resolvable: no improvement on c)
    worst = min(log_margins) if log_margins else 0.0
    if worst == -math.inf:
        largest_c: Optional[float] = 0.0
    else:
        largest_c = c * math.exp(worst) if worst + log_c <= _EXP_SAFE else None

    tail_ratio = _tail_ratio(alphas)
    return SupergrowthReport(
        lam=lam,
        c=c,
        n_min=n_min,
        n_checked=n,
        holds=holds,
        first_failure_index=first_fail,
        ratios=tuple(ratios),
        tail_ratio=tail_ratio,
        largest_passing_c=largest_c,
        sustained=sustained,
        escape_threshold=threshold,
        alphas=alphas,
    )


def _tail_ratio(alphas: Sequence[TowerReal]) -> Optional[float]:
    """(alpha_1 + ... + alpha_k) / alpha_{k+1} at the deepest native k+1."""
    best: Optional[float] = None
    partial = 0.0
    for i in range(1, len(alphas)):
        a = alphas[i - 1].to_float()
        if a == math.inf:
            break
        partial += a
        nxt = alphas[i].to_float()
        if nxt != math.inf and nxt > 0.0:
            best = partial / nxt
    return best
