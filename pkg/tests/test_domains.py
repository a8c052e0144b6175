import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbmsim.domains import (
    Ball,
    Box,
    CombSchedule,
    DomainError,
    Polygon,
    area,
    contains,
    distance_to_boundary,
    make_comb_domain,
    make_koch_snowflake,
    make_lshape,
    parse_domain,
    segment_in_domain,
    unit_disk,
    unit_square,
)

coord = st.floats(0.001, 0.999)


def test_contains_examples():
    sq = unit_square()
    assert contains(sq, (0.5, 0.5))
    assert not contains(sq, (0.0, 0.5))
    comb = make_comb_domain()
    assert contains(comb, (0.25, 0.37))
    assert contains(comb, (2**-3, 0.6))
    with pytest.raises(DomainError):
        contains(sq, (0.5, 0.5, 0.5))


def test_comb_point_off_all_strips():
    comb = make_comb_domain(CombSchedule.default(8))
    x = 0.3 + 1e-9
    far = all(
        min(abs(x - j * 2.0**-k) for j in range(2**k + 1)) >= e
        for k, e in enumerate(comb.schedule.eps, start=1)
    )
    assert contains(comb, (x, x)) == (not far)
    assert not contains(comb, (x, x))


def test_segment_examples():
    assert segment_in_domain(unit_disk(), (-0.3, 0), (0.3, 0))
    assert not segment_in_domain(make_lshape(), (0.4, 0.9), (0.6, 0.9))
    comb = make_comb_domain()
    assert segment_in_domain(comb, (0.25, 0.25), (0.25, 0.5))
    # dense sampling agrees
    t = np.linspace(0, 1, 1001)[:, None]
    pts = np.array([0.25, 0.25]) + t * np.array([0.0, 0.25])
    assert comb.contains(pts).all()


def test_area_examples():
    assert area(unit_square()) == (1.0, 0.0)
    a, se = area(unit_disk())
    assert a == pytest.approx(math.pi, abs=1e-12) and se == 0
    tri = make_koch_snowflake(0)
    assert len(tri.vertices) == 3
    assert tri.exact_area() == pytest.approx(math.sqrt(3) / 4)
    star = make_koch_snowflake(1)
    assert len(star.vertices) == 12
    assert star.exact_area() == pytest.approx(math.sqrt(3) / 3)
    for d in range(4):
        assert len(make_koch_snowflake(d).vertices) == 3 * 4**d


def test_comb_area_below_half():
    comb = make_comb_domain(CombSchedule.default(8))
    a, se = area(comb, mc_samples=200_000, seed=1)
    assert a + 3 * se < 0.5
    # exact strip-union area, monotone in K and below the sum of strip bounds
    exact = [make_comb_domain(CombSchedule.default(K)).rect_area((0, 0), (1, 1)) for K in range(1, 9)]
    assert all(b >= a_ for a_, b in zip(exact, exact[1:]))
    assert exact[-1] < sum(2.0 ** (-k - 1) for k in range(1, 9)) < 0.5
    assert abs(a - exact[-1]) < 4 * se


def test_comb_schedule_bounds():
    for bound, limit in CombSchedule.default(8).strip_bounds():
        assert bound < limit
    with pytest.raises(DomainError):
        make_comb_domain(CombSchedule((0.2,)))


def test_distance_examples():
    assert distance_to_boundary(unit_square(), (0.5, 0.5)) == pytest.approx(0.5)
    assert distance_to_boundary(unit_disk(), (0.3, 0)) == pytest.approx(0.7)
    snow = make_koch_snowflake(2)
    c = snow.anchor
    v = snow.vertices
    w = np.roll(v, -1, axis=0)
    d = w - v
    t = np.clip(np.einsum("ij,ij->i", c - v, d) / np.einsum("ij,ij->i", d, d), 0, 1)
    brute = np.min(np.linalg.norm(v + t[:, None] * d - c, axis=1))
    assert distance_to_boundary(snow, c) == pytest.approx(brute, rel=1e-12)
    with pytest.raises(DomainError):
        distance_to_boundary(unit_square(), (1.5, 0.5))


def test_snowflake_is_simple():
    for d in range(3):
        assert make_koch_snowflake(d).is_simple()


@settings(max_examples=60, deadline=None)
@given(coord, coord, coord, coord)
def test_segment_implies_sampled_points_inside(a, b, c, d):
    for dom in (make_lshape(), make_koch_snowflake(1), make_comb_domain()):
        p, q = np.array([a, b]), np.array([c, d])
        if not (dom.contains(p) and dom.contains(q)):
            continue
        if segment_in_domain(dom, p, q):
            t = np.linspace(0, 1, 257)[:, None]
            assert dom.contains(p + t * (q - p)).all()


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99), st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
def test_convex_segments(a, b, c, d):
    ball = Ball(center=np.zeros(2), radius=1.0)
    box = Box(lower=(-1.0, -1.0), upper=(1.0, 1.0))
    for dom in (ball, box):
        if dom.contains((a, b)) and dom.contains((c, d)):
            assert segment_in_domain(dom, (a, b), (c, d))


@settings(max_examples=40, deadline=None)
@given(coord, coord)
def test_distance_ball_is_certified(a, b):
    for dom in (unit_square(), make_lshape(), make_koch_snowflake(2)):
        x = np.array([a, b])
        if not dom.contains(x):
            continue
        d = dom.distance_to_boundary(x)
        ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        for r in (0.5, 0.9, 1 - 1e-9):
            y = x + r * d * np.stack([np.cos(ang), np.sin(ang)], axis=1)
            assert dom.contains(y).all()


def test_parse_domain_shorthands(tmp_path):
    assert parse_domain("square").exact_area() == 1.0
    assert parse_domain("interval").dim == 1
    assert parse_domain("disk").exact_area() == pytest.approx(math.pi)
    assert isinstance(parse_domain("lshape"), Polygon)
    assert len(parse_domain("snowflake:2").vertices) == 48
    assert parse_domain("comb:4").schedule.max_level == 4
    d = unit_square().to_dict()
    assert parse_domain(d).exact_area() == 1.0
    with pytest.raises(DomainError):
        parse_domain("nonsense")
