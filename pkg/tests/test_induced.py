"""Rectangle families, column sums, negative-side geometry, certificates."""

import cmath
import dataclasses
import json
import math
import random

import pytest

from expdyn import (
    DomainError,
    GeometryError,
    LogPolarComplex,
    RectangleIndex,
    ValidationError,
    build_zm,
    certificate_to_json,
    cover_iterate,
    eval_map,
    horizontal_strip,
    induced_apply,
    negative_geometry,
    positive_sum,
    step_log_polar,
    verify_contraction,
)

STRIP = horizontal_strip(0.0, math.pi)
TAU = 2.0 * math.pi


# ---------------------------------------------------------------------------
# rectangle families

def test_zm_family_for_the_strip():
    fam = build_zm(STRIP, 1.0, 5, 10)
    assert fam.m == 5 and fam.r_max == 10
    assert sorted(fam.per_column_counts) == [-10, -9, -8, -7, -6, -5,
                                             5, 6, 7, 8, 9, 10]
    assert set(fam.per_column_counts.values()) == {1}
    assert fam.count(-5) == 1
    assert fam.count(99) == 0
    assert len(fam.rectangles) == 12
    assert fam.rectangles == tuple(sorted(fam.rectangles,
                                          key=lambda q: (q.r, q.k)))


def test_zm_family_truncates_at_rmax():
    fam = build_zm(STRIP, 1.0, 5, 6)
    assert sorted(fam.per_column_counts) == [-6, -5, 5, 6]


def test_zm_family_rotated_lambda_doubles_the_strips():
    # rotating lambda shifts the strip grid so the set straddles two strips
    fam = build_zm(STRIP, cmath.rect(1.0, 2.5), 5, 10)
    assert set(fam.per_column_counts.values()) == {2}


def test_zm_validation():
    with pytest.raises(ValidationError):
        build_zm(STRIP, 1.0, 0, 10)
    with pytest.raises(ValidationError):
        build_zm(STRIP, 1.0, 5, 5)


# ---------------------------------------------------------------------------
# positive column sums

def test_positive_sum_is_independent_of_m_in_range():
    assert positive_sum(1.0, STRIP, 10, 0.5, 5) == 0.0536547399495383
    assert positive_sum(1.0, STRIP, 10, 0.5, 10) == 0.0536547399495383


def test_positive_sum_one_sided_is_half():
    two = positive_sum(1.0, STRIP, 10, 0.5, 10, both_sides=True)
    one = positive_sum(1.0, STRIP, 10, 0.5, 10, both_sides=False)
    assert one == two / 2.0


def test_positive_sum_accepts_rectangle_index():
    b1 = positive_sum(1.0, STRIP, RectangleIndex(0, 10), 0.5, 10)
    assert b1 == positive_sum(1.0, STRIP, 10, 0.5, 10)


def test_positive_sum_upper_bounds_a_sampled_branch_sum():
    # Monte Carlo lower bound: sample the source rectangle, group image
    # points by target cell in the positive strip-0 region, and sum the
    # worst derivative reciprocal per cell
    rng = random.Random(7)
    lam, r, m, delta = 1.0, 3, 2, 0.5
    bound = positive_sum(lam, STRIP, r, delta, m, both_sides=False)
    assert bound == 0.9765572986408728
    cells = {}
    for _ in range(10 ** 4):
        z = complex(r + rng.random(), rng.random() * math.pi)
        w = eval_map(lam, z)
        s = math.floor(w.real)
        k = math.floor((w.imag + math.pi) / TAU)
        if s < m or k != 0:
            continue
        d = abs(w)  # |f'(z)| = |f(z)| for this family
        cells[(k, s)] = min(cells.get((k, s), math.inf), d)
    mc = sum(v ** -(1 + delta) for v in cells.values())
    assert mc == 0.19146296760432926
    assert mc <= bound


def test_positive_sum_validation():
    with pytest.raises(ValidationError):
        positive_sum(1.0, STRIP, 10, 0.0, 5)
    with pytest.raises(ValidationError):
        positive_sum(1.0, STRIP, 10, 1.0, 5)
    with pytest.raises(ValidationError):
        positive_sum(1.0, STRIP, 3, 0.5, 5)
    with pytest.raises(ValidationError):
        positive_sum(1.0, STRIP, 10, 0.5, 0)


# ---------------------------------------------------------------------------
# negative-side geometry

def test_geometry_for_supergrowing_real_lambda():
    geo = negative_geometry(0.65, 0.65, 4, 6)
    assert geo.m == 7
    assert geo.d == 0.25  # c / (4 |lambda|)
    assert geo.l0 == 4 and geo.n_levels == 6
    # bands decrease and deepen doubly exponentially; once the boundary
    # leaves float range the remaining floors are all -inf
    finite = [s for s in geo.sigmas if s != -math.inf]
    assert all(b < a for a, b in zip(finite, finite[1:]))
    assert all(s == -math.inf for s in geo.sigmas[len(finite):])
    assert geo.sigmas[0] == pytest.approx(-3.944559, abs=1e-6)
    assert geo.sigmas[3] == pytest.approx(-336.025735, abs=1e-6)
    assert geo.sigmas[5] == -math.inf
    assert [geo.level_of_column(r) for r in (-7, -9, -12, -20, -300)] == \
        [5, 5, 5, 6, 6]
    assert geo.log_beta_float(6) == 324.47080018300846
    assert geo.r_prime_min(5) == 243


def test_geometry_level_ties_go_to_the_smaller_level():
    geo = negative_geometry(0.65, 0.65, 4, 6)
    for r in range(-30, -geo.m + 1):
        l = geo.level_of_column(r)
        assert geo.sigma(l + 1) < r + 1 and geo.sigma(l) > r


def test_geometry_validation():
    with pytest.raises(ValidationError):
        negative_geometry(0.65, 0.7, 4, 6)  # c > |lambda|
    with pytest.raises(ValidationError):
        negative_geometry(0.65, 0.65, 0, 6)
    with pytest.raises(GeometryError):
        # attracting parameter: supergrowth fails outright
        negative_geometry(0.2, 0.1, 3, 4)
    geo = negative_geometry(0.65, 0.65, 4, 6)
    with pytest.raises(ValidationError):
        geo.sigma(3)
    with pytest.raises(ValidationError):
        geo.level_of_column(0)
    # the deepest computed band has an infinite floor, so far-out columns
    # still resolve to a level instead of erroring
    assert geo.level_of_column(-10 ** 6) == 7


# ---------------------------------------------------------------------------
# the induced map

def test_induced_map_is_f_on_the_positive_part():
    geo = dataclasses.replace(negative_geometry(1.0, 1.0, 3, 6), m=5)
    p, steps = induced_apply(geo, STRIP, 6.0)
    assert steps == 1
    assert (p.log_modulus.level, p.log_modulus.mantissa) == (0, 6.0)
    assert p.argument == 0.0


def test_induced_map_iterates_levels_on_the_negative_part():
    geo = negative_geometry(0.65, 0.65, 4, 6)
    q, steps = induced_apply(geo, STRIP, -16.5)
    assert steps == geo.level_of_column(-17) + 2 == 8
    assert (q.log_modulus.level, q.log_modulus.mantissa) == (1, 324.4709638537972)
    # composition consistency: the induced step is exactly f^steps
    p = LogPolarComplex.from_complex(-16.5 + 0.0j)
    for _ in range(steps):
        p = step_log_polar(0.65, p)
    assert p == q


def test_induced_map_rejects_the_gap_and_missed_rectangles():
    geo = negative_geometry(0.65, 0.65, 4, 6)
    with pytest.raises(DomainError,
                       match=r"rectangle column 0 lies inside \|Re\| < M = 7"):
        induced_apply(geo, STRIP, 0.0)
    with pytest.raises(DomainError, match="does not meet the thin set"):
        induced_apply(geo, STRIP, complex(8.0, 40.0))


# ---------------------------------------------------------------------------
# contraction certificates

def test_positive_certificate_passes_at_m_ten():
    cert = verify_contraction(1.0, STRIP, 0.5, range(10, 31), m=10)
    assert cert.passed
    assert cert.status == "pass"
    assert cert.max_sum == 0.0536547399495383
    assert len(cert.per_column) == 21
    assert cert.column_bound(10) == cert.max_sum
    assert cert.c is None and cert.l0 is None
    # per-column bounds decay at least like e^(-delta/2) per column
    bounds = [b for _, b in cert.per_column]
    ratios = [b2 / b1 for b1, b2 in zip(bounds, bounds[1:])]
    assert max(ratios) <= math.exp(-0.25)
    assert max(ratios) == pytest.approx(math.exp(-0.5), rel=1e-10)


def test_certificate_tightens_with_m():
    cert = verify_contraction(1.0, STRIP, 0.5, range(12, 33), m=12)
    assert cert.passed
    assert cert.max_sum == 0.01973670580368357


def test_certificate_failure_is_reported_not_raised():
    cert = verify_contraction(1.0, STRIP, 0.01, range(10, 31), m=10)
    assert not cert.passed
    assert cert.max_sum == 8.146695738234074
    assert cert.status == ("certificate not achieved at M=10, delta=0.01 "
                           "(max bound 8.1467)")


def test_certificate_without_rectangle_enumeration():
    cert = verify_contraction(1.0, STRIP, 0.5, range(10, 31), m=10,
                              enumerate_rectangles=False)
    assert cert.passed and cert.max_sum == 0.0536547399495383
    assert cert.per_rectangle == ()
    assert len(cert.per_column) == 21


def test_two_sided_certificate_with_geometry():
    geo = negative_geometry(1.0, 1.0, 3, 6)
    assert geo.m == 16
    cols = list(range(geo.m, geo.m + 21)) + list(range(-geo.m - 20, -geo.m + 1))
    cert = verify_contraction(1.0, STRIP, 0.2, cols, geometry=geo)
    assert cert.passed
    assert cert.m == 16 and cert.c == 1.0 and cert.l0 == 3
    assert cert.max_sum == 0.34889479114215693
    # deep negative columns land beyond native resolution: honest zeros
    neg = [b for r, b in cert.per_column if r < 0]
    assert len(neg) == 21 and all(b == 0.0 for b in neg)


def test_mixed_depth_negative_bounds():
    geo = negative_geometry(0.65, 0.65, 4, 6)
    cert = verify_contraction(0.65, STRIP, 0.5,
                              [-20, -12, -7] + list(range(7, 17)), geometry=geo)
    assert cert.passed
    assert cert.max_sum == 0.29928725932049105
    assert cert.column_bound(-7) == 8.022493104028301e-48
    assert cert.column_bound(-12) == cert.column_bound(-7)  # same level ball
    assert cert.column_bound(-20) == 0.0
    assert cert.column_bound(7) == cert.max_sum
    with pytest.raises(ValidationError):
        cert.column_bound(11**3)


def test_certificate_validation():
    with pytest.raises(ValidationError):
        verify_contraction(1.0, STRIP, 0.5, range(10, 31))  # no M anywhere
    with pytest.raises(ValidationError):
        verify_contraction(1.0, STRIP, 1.5, range(10, 31), m=10)
    with pytest.raises(ValidationError):
        verify_contraction(1.0, STRIP, 0.5, [], m=10)
    with pytest.raises(ValidationError):
        verify_contraction(1.0, STRIP, 0.5, [3], m=10)  # inside the gap
    with pytest.raises(ValidationError):
        verify_contraction(1.0, STRIP, 0.5, [-12], m=10)  # needs geometry
    geo = negative_geometry(1.0, 1.0, 3, 6)
    with pytest.raises(ValidationError):
        verify_contraction(1.0, STRIP, 0.5, [20], m=10, geometry=geo)


def test_certificate_json_is_deterministic():
    cert = verify_contraction(1.0, STRIP, 0.5, range(10, 13), m=10)
    text = certificate_to_json(cert)
    assert text == certificate_to_json(cert)
    doc = json.loads(text)
    assert doc["format_version"] == 1
    assert doc["M"] == 10
    assert doc["pass"] is True
    assert doc["max_sum"] == cert.max_sum
    assert list(doc) == sorted(doc)


# ---------------------------------------------------------------------------
# iterated covers

def test_one_sided_cover_run():
    run = cover_iterate(1.0, STRIP, 0.5, 5, 10 ** 5, m=10)
    assert not run.aborted
    assert run.start_column == 10
    assert not run.two_sided
    totals = [lv.total for lv in run.levels]
    assert totals == [19.655406945087897, 0.5272892162643755, 0.0, 0.0, 0.0, 0.0]
    # depth zero is the baseline cell (2 pi + 1)^(1+delta)
    assert totals[0] == pytest.approx((TAU + 1.0) ** 1.5, rel=1e-12)
    assert run.levels[0].cells == 1.0
    assert run.levels[1].cells == 55594.0
    budgets = [lv.budget for lv in run.levels]
    assert budgets[0] == TAU + 1.0
    assert budgets[1:] == [(TAU + 1.0) / 2 ** n for n in range(1, 6)]
    for lv in run.levels[1:]:
        assert lv.total < lv.budget
    assert all(lv.tail_mass == 0.0 for lv in run.levels)


def test_two_sided_cover_run():
    geo = negative_geometry(1.0, 1.0, 3, 6)
    run = cover_iterate(1.0, STRIP, 0.2, 4, 10 ** 5, geometry=geo)
    assert run.two_sided
    assert [lv.total for lv in run.levels] == \
        [10.833920188558238, 6.132437790904324, 0.0, 0.0, 0.0]


def test_cover_aborts_on_cell_blowup():
    run = cover_iterate(1.0, STRIP, 0.5, 5, 10 ** 5, m=10, cell_limit=10.0)
    assert run.aborted
    assert len(run.levels) == 1


def test_cover_validation():
    with pytest.raises(ValidationError):
        cover_iterate(1.0, STRIP, 0.5, 0, 10 ** 5, m=10)
    with pytest.raises(ValidationError):
        cover_iterate(1.0, STRIP, 0.5, 3, 0, m=10)
    with pytest.raises(ValidationError):
        cover_iterate(1.0, STRIP, 0.5, 3, 10 ** 5)
