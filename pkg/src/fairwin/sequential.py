"""Sequential fair-center solvers.

``fair_center_3approx`` is the solver the sliding-window query runs on its
coreset. It is the partition-matroid case of the matroid-center scheme:
pick a greedy set of heads pairwise more than ``2r`` apart, then match heads
to colors (each color ``i`` has capacity ``k_i``) so that every head gets a
center of its matched color within ``r``. Every point is then within ``3r``
of a center. For any ``r >= OPT`` the matching exists, so binary search over
the pairwise distances lands on some ``r <= OPT``.
"""

from __future__ import annotations

import itertools
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .metric import (
    ColoredPoint,
    ConfigError,
    PartitionConstraint,
    Solution,
    coords_matrix,
    radius_of,
)

BRUTE_FORCE_LIMIT = 18


def candidate_radii(points: Sequence[ColoredPoint]) -> np.ndarray:
    """Ascending distinct pairwise distances of ``points``, plus 0."""
    x = coords_matrix(list(points))
    if len(x) < 2:
        return np.zeros(1)
    return np.unique(np.concatenate([[0.0], pdist(x)]))


def gonzalez(points: Sequence[ColoredPoint], k: int) -> Solution:
    """Color-blind farthest-first traversal starting from ``points[0]``."""
    points = list(points)
    if not points:
        raise ConfigError("gonzalez needs at least one point")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    x = coords_matrix(points)
    chosen = [0]
    mind = cdist(x[:1], x)[0]
    while len(chosen) < k:
        j = int(np.argmax(mind))
        if mind[j] == 0.0:
            break
        chosen.append(j)
        np.minimum(mind, cdist(x[j:j + 1], x)[0], out=mind)
    return Solution([points[i] for i in chosen], float(mind.max()))


def _greedy_heads(x: np.ndarray, r: float, limit: Optional[int] = None):
    """Indices of the greedy 2r-separated heads, with each head's distance row.

    Scanning stops early once more than ``limit`` heads have been found.
    """
    n = x.shape[0]
    mind = np.full(n, np.inf)
    heads, rows = [], []
    i = 0
    while i < n:
        ahead = np.flatnonzero(mind[i:] > 2.0 * r)
        if ahead.size == 0:
            break
        j = i + int(ahead[0])
        row = cdist(x[j:j + 1], x)[0]
        heads.append(j)
        rows.append(row)
        if limit is not None and len(heads) > limit:
            break
        np.minimum(mind, row, out=mind)
        i = j + 1
    return heads, rows


def heads_at_radius(points: Sequence[ColoredPoint], r: float) -> list:
    """Points kept by an in-order scan that keeps q iff d(q, kept) > 2r."""
    points = list(points)
    if r < 0:
        raise ConfigError(f"radius must be nonnegative, got {r}")
    if not points:
        return []
    heads, _ = _greedy_heads(coords_matrix(points), r)
    return [points[i] for i in heads]


def _match_heads(eligible: list, caps: Sequence[int]) -> Optional[list]:
    """Saturating assignment of heads to colors with capacities, or None.

    ``eligible[h]`` lists the colors head ``h`` may take. Each color is split
    into ``caps[i]`` unit slots and matched by augmenting paths (Kuhn);
    instances have at most ``k`` heads.
    """
    if len(eligible) > sum(caps):
        return None
    slots = {c: list(range(sum(caps[:c]), sum(caps[:c + 1]))) for c in range(len(caps))}
    slot_color = [c for c in range(len(caps)) for _ in range(caps[c])]
    slot_owner = [-1] * len(slot_color)

    def augment(h, seen):
        for c in eligible[h]:
            for s in slots[c]:
                if s in seen:
                    continue
                seen.add(s)
                if slot_owner[s] == -1 or augment(slot_owner[s], seen):
                    slot_owner[s] = h
                    return True
        return False

    for h in range(len(eligible)):
        if not augment(h, set()):
            return None
    match = [-1] * len(eligible)
    for s, h in enumerate(slot_owner):
        if h >= 0:
            match[h] = slot_color[s]
    return match


def _assign(points, colors, arrivals, heads, rows, r, c) -> Optional[list]:
    eligible = []
    for row in rows:
        near = row <= r
        eligible.append(sorted(set(colors[near].tolist())))
    match = _match_heads(eligible, c.caps)
    if match is None:
        return None
    centers = []
    for row, color in zip(rows, match):
        cand = np.flatnonzero((row <= r) & (colors == color))
        centers.append(points[int(cand[np.argmax(arrivals[cand])])])
    return centers


def _check_colors(points, c: PartitionConstraint):
    colors = np.fromiter((p.color for p in points), dtype=np.int64, count=len(points))
    if colors.size and colors.max() >= c.n_colors:
        raise ConfigError(f"color {int(colors.max())} has no capacity in {c.caps}")
    return colors


def fair_assign(heads: Sequence[ColoredPoint], points: Sequence[ColoredPoint], r: float,
                c: PartitionConstraint) -> Optional[list]:
    """One center per head, within ``r`` of it, respecting ``c``; None if impossible.

    Among the eligible points of the matched color the most recently arrived
    one is chosen.
    """
    points = list(points)
    heads = list(heads)
    if not heads:
        return []
    colors = _check_colors(points, c)
    arrivals = np.fromiter((p.arrival for p in points), dtype=np.int64, count=len(points))
    x = coords_matrix(points)
    rows = list(cdist(coords_matrix(heads), x))
    return _assign(points, colors, arrivals, heads, rows, r, c)


def fair_center_3approx(points: Sequence[ColoredPoint], c: PartitionConstraint) -> Solution:
    points = list(points)
    if not points:
        raise ConfigError("fair_center_3approx needs at least one point")
    colors = _check_colors(points, c)
    arrivals = np.fromiter((p.arrival for p in points), dtype=np.int64, count=len(points))
    x = coords_matrix(points)
    radii = candidate_radii(points)

    def attempt(r):
        heads, rows = _greedy_heads(x, r, limit=c.k)
        if len(heads) > c.k:
            return None
        return _assign(points, colors, arrivals, heads, rows, r, c)

    lo, hi = -1, len(radii) - 1
    best = attempt(radii[hi])
    if best is None:
        raise ConfigError("constraint infeasible")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        found = attempt(radii[mid])
        if found is None:
            lo = mid
        else:
            hi, best = mid, found
    return Solution(best, radius_of(points, best))


def brute_force_opt(points: Sequence[ColoredPoint], c: PartitionConstraint) -> Solution:
    """Exact optimum by enumerating every feasible center set of size <= k.

    Ties go to the center set whose sorted arrival tuple is lexicographically
    smallest.
    """
    points = sorted(points, key=lambda p: p.arrival)
    n = len(points)
    if n == 0:
        raise ConfigError("brute_force_opt needs at least one point")
    if n > BRUTE_FORCE_LIMIT:
        raise ConfigError(f"brute force limited to {BRUTE_FORCE_LIMIT} points, got {n}")
    colors = _check_colors(points, c)
    caps = np.asarray(c.caps)
    x = coords_matrix(points)
    dm = cdist(x, x)
    best_r, best_key = np.inf, None
    for size in range(1, min(c.k, n) + 1):
        combos = np.array(list(itertools.combinations(range(n), size)), dtype=np.int64)
        counts = np.zeros((len(combos), c.n_colors), dtype=np.int64)
        for j in range(size):
            np.add.at(counts, (np.arange(len(combos)), colors[combos[:, j]]), 1)
        combos = combos[(counts <= caps).all(axis=1)]
        if len(combos) == 0:
            continue
        radii = dm[:, combos].min(axis=2).max(axis=0)
        r = radii.min()
        if r > best_r:
            continue
        # combinations() is lexicographic, so the first minimizer is the smallest key
        key = tuple(points[i].arrival for i in combos[int(np.argmax(radii == r))])
        if r < best_r or key < best_key:
            best_r, best_key = r, key
    by_arrival = {p.arrival: p for p in points}
    centers = [by_arrival[a] for a in best_key]
    return Solution(centers, radius_of(points, centers))
