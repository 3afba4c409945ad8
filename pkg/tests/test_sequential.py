import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairwin.metric import ColoredPoint, ConfigError, PartitionConstraint, is_feasible, radius_of
from fairwin.sequential import (
    brute_force_opt,
    candidate_radii,
    fair_assign,
    fair_center_3approx,
    gonzalez,
    heads_at_radius,
)

RED, BLUE = 0, 1
CAPS11 = PartitionConstraint((1, 1))


def line(xs, colors=None):
    colors = colors or [RED] * len(xs)
    return [ColoredPoint([x], c, i + 1) for i, (x, c) in enumerate(zip(xs, colors))]


def xs(points):
    return sorted(float(q.coords[0]) for q in points)


def three_points():
    return line([0, 1, 10], [RED, BLUE, RED])


def test_candidate_radii():
    np.testing.assert_array_equal(candidate_radii(line([0, 1, 3])), [0, 1, 2, 3])


# -- gonzalez --------------------------------------------------------------

def test_gonzalez_examples():
    sol = gonzalez(line([0, 10, 20]), 2)
    assert xs(sol.centers) == [0, 20] and sol.radius == 10
    sol = gonzalez(line([0, 1, 2, 9]), 2)
    assert xs(sol.centers) == [0, 9] and sol.radius == 2
    assert gonzalez(line([3, 1, 4, 1, 5]), 9).radius == 0


def unconstrained_opt(points, k):
    return min(radius_of(points, cs) for cs in itertools.combinations(points, min(k, len(points))))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=9), st.integers(1, 4))
def test_gonzalez_two_approx(values, k):
    pts = line(values)
    assert gonzalez(pts, k).radius <= 2 * unconstrained_opt(pts, k) * (1 + 1e-12) + 1e-12


# -- heads -----------------------------------------------------------------

def test_heads_examples():
    assert xs(heads_at_radius(line([0, 1, 10]), 1)) == [0, 10]
    assert xs(heads_at_radius(line([0, 3, 6]), 1)) == [0, 3, 6]
    assert xs(heads_at_radius(line([2, 2, 5]), 0)) == [2, 5]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=1, max_size=15), st.floats(0, 10))
def test_heads_separated_and_dominating(values, r):
    pts = line(values)
    heads = heads_at_radius(pts, r)
    for a, b in itertools.combinations(heads, 2):
        assert math.dist(a.coords, b.coords) > 2 * r
    for q in pts:
        assert min(math.dist(q.coords, h.coords) for h in heads) <= 2 * r


# -- fair_assign -----------------------------------------------------------

def test_fair_assign_trivial():
    pts = line([0])
    assert fair_assign(pts, pts, 0, PartitionConstraint((1,))) == pts


def test_fair_assign_capacity_infeasible():
    pts = line([0, 10])
    assert fair_assign(pts, pts, 1, PartitionConstraint((1, 1))) is None


def matching_oracle(heads, points, r, caps):
    """Enumerate every assignment of one point per head."""
    options = [[q for q in points if math.dist(q.coords, h.coords) <= r] for h in heads]
    found = []
    for combo in itertools.product(*options):
        if len(set(combo)) == len(combo) and is_feasible(combo, caps):
            found.append(combo)
    return found


def test_fair_assign_derived():
    pts = three_points()
    heads = [pts[0], pts[2]]
    oracle = matching_oracle(heads, pts, 1, CAPS11)
    assert [sorted((float(q.coords[0]), q.color) for q in c) for c in oracle] == [[(1.0, BLUE), (10.0, RED)]]
    got = fair_assign(heads, pts, 1, CAPS11)
    assert sorted((float(q.coords[0]), q.color) for q in got) == [(1.0, BLUE), (10.0, RED)]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_fair_assign_agrees_with_oracle(seed):
    rng = np.random.default_rng(seed)
    pts = [ColoredPoint(rng.uniform(0, 10, 2), int(rng.integers(3)), i + 1) for i in range(8)]
    caps = PartitionConstraint(tuple(int(x) for x in rng.integers(1, 3, size=3)))
    r = float(rng.uniform(0.5, 4))
    heads = heads_at_radius(pts, r)
    got = fair_assign(heads, pts, r, caps)
    expected = matching_oracle(heads, pts, r, caps) if len(heads) <= caps.k else []
    assert (got is not None) == bool(expected)
    if got is not None:
        assert is_feasible(got, caps)
        for h, cnt in zip(heads, got):
            assert math.dist(h.coords, cnt.coords) <= r


def test_fair_assign_prefers_newest():
    pts = line([0, 0.5, 0.2])
    got = fair_assign(pts[:1], pts, 1, PartitionConstraint((1,)))
    assert got[0].arrival == 3


# -- fair_center_3approx / brute force ------------------------------------

def test_three_approx_examples():
    sol = fair_center_3approx(three_points(), CAPS11)
    assert sol.radius <= 3
    assert is_feasible(sol.centers, CAPS11)
    same = [ColoredPoint([2.0, 2.0], 0, t) for t in range(1, 5)]
    assert fair_center_3approx(same, PartitionConstraint((1,))).radius == 0
    one = line([7])
    sol = fair_center_3approx(one, PartitionConstraint((1,)))
    assert sol.centers == one and sol.radius == 0


def test_three_approx_errors():
    with pytest.raises(ConfigError):
        fair_center_3approx([], CAPS11)
    with pytest.raises(ConfigError):
        fair_center_3approx(line([0], [4]), CAPS11)


def test_brute_force_examples():
    assert brute_force_opt(three_points(), CAPS11).radius == 1
    assert brute_force_opt(three_points(), PartitionConstraint((2, 1))).radius == 0
    sol = brute_force_opt(line([0, 10]), PartitionConstraint((1,)))
    assert sol.radius == 10 and len(sol.centers) == 1


def test_brute_force_limit():
    with pytest.raises(ConfigError):
        brute_force_opt(line(list(range(19))), PartitionConstraint((1,)))


def naive_opt(points, caps):
    best = math.inf
    for size in range(1, min(caps.k, len(points)) + 1):
        for cs in itertools.combinations(points, size):
            if is_feasible(cs, caps):
                best = min(best, radius_of(points, cs))
    return best


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_brute_force_matches_naive(seed):
    rng = np.random.default_rng(seed)
    pts = [ColoredPoint(rng.normal(size=2), int(rng.integers(2)), i + 1) for i in range(7)]
    caps = PartitionConstraint((1, 2))
    sol = brute_force_opt(pts, caps)
    assert is_feasible(sol.centers, caps)
    assert sol.radius == pytest.approx(naive_opt(pts, caps), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_three_approx_bounds(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 13))
    n_colors = int(rng.integers(1, 4))
    pts = [ColoredPoint(rng.uniform(0, 10, 2), int(rng.integers(n_colors)), i + 1) for i in range(n)]
    caps = PartitionConstraint(tuple(int(x) for x in rng.integers(1, 3, size=n_colors)))
    opt = brute_force_opt(pts, caps).radius
    sol = fair_center_3approx(pts, caps)
    assert is_feasible(sol.centers, caps)
    assert opt * (1 - 1e-12) <= sol.radius <= 3 * opt * (1 + 1e-12)
