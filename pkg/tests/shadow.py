"""Shadow checks: compare sketch contents against the exact retained window."""

from collections import Counter

import numpy as np
from scipy.spatial import cKDTree

from fairwin.metric import coords_matrix

REL = 1e-9


def _pairwise_min(points):
    if len(points) < 2:
        return np.inf
    x = coords_matrix(points)
    d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    return d[np.triu_indices(len(points), 1)].min()


def _nearest(x, points):
    if not points:
        return np.full(len(x), np.inf)
    d, _ = cKDTree(coords_matrix(points)).query(x)
    return d


def coverage_violations(sketch, window):
    """Coverage of the window by RV (within 4*gamma) and R (within delta*gamma).

    For guesses holding more than k v-attractors only points no older than
    the oldest v-attractor are required to be covered.
    """
    out = []
    k = sketch.params.k
    if not window:
        return out
    x_all = coords_matrix(window)
    t_all = np.array([q.arrival for q in window])
    for g in sketch.guesses.values():
        x = x_all
        if len(g.av) > k:
            x = x_all[t_all >= min(g.av.keys)]
        if not len(x):
            continue
        dv = _nearest(x, g.rv_points())
        bad = np.flatnonzero(dv > 4 * g.gamma * (1 + REL))
        if bad.size:
            out.append(f"t={sketch.clock} gamma={g.gamma:g}: {bad.size} points beyond 4*gamma of RV")
        if not g.validation_only:
            dc = _nearest(x, g.r_points())
            bad = np.flatnonzero(dc > g.delta * g.gamma * (1 + REL))
            if bad.size:
                out.append(f"t={sketch.clock} gamma={g.gamma:g}: {bad.size} points beyond delta*gamma of R")
    return out


def size_violations(sketch):
    out = []
    k = sketch.params.k
    for g in sketch.guesses.values():
        if len(g.av) > k + 1:
            out.append(f"t={sketch.clock} gamma={g.gamma:g}: |AV|={len(g.av)}")
        if not g.validation_only and len(g.rv_points()) > 2 * (k + 1):
            out.append(f"t={sketch.clock} gamma={g.gamma:g}: |RV|={len(g.rv_points())}")
    return out


def structure_violations(sketch):
    """Separation, per-color caps and liveness of every stored point."""
    out = []
    caps = sketch.params.constraint.caps
    oldest_live = sketch.clock - sketch.params.n
    for g in sketch.guesses.values():
        if _pairwise_min(g.av_points()) <= 2 * g.gamma:
            out.append(f"t={sketch.clock} gamma={g.gamma:g}: AV not 2*gamma separated")
        if _pairwise_min(g.a_points()) <= g.delta * g.gamma / 2:
            out.append(f"t={sketch.clock} gamma={g.gamma:g}: A not delta*gamma/2 separated")
        per_attractor = g.rep_v.values() if g.validation_only else g.reps_c.values()
        for lists in per_attractor:
            for color, lst in lists.items():
                if len(lst) > caps[color]:
                    out.append(f"t={sketch.clock} gamma={g.gamma:g}: {len(lst)} reps of color {color}")
        for q in g.stored().values():
            if q.arrival <= oldest_live:
                out.append(f"t={sketch.clock} gamma={g.gamma:g}: expired point {q.arrival} stored")
    return out


def independence_violations(sketch, window):
    """Per valid guess and c-attractor a, the stored members of W(a) form a
    maximal independent set of W(a): min(k_i, count) points of each color.

    Needs a sketch built with ``trace=True``.
    """
    out = []
    caps = sketch.params.constraint.caps
    for g in sketch.guesses.values():
        if not g.valid or g.validation_only:
            continue
        stored = {q.arrival for q in g.r_points()}
        members = {}
        for q in window:
            members.setdefault(g.phi[q.arrival], []).append(q)
        for a, pts in members.items():
            total = Counter(q.color for q in pts)
            kept = Counter(q.color for q in pts if q.arrival in stored)
            for color, cnt in total.items():
                if kept[color] != min(caps[color], cnt):
                    out.append(f"t={sketch.clock} gamma={g.gamma:g} a={a} color={color}: "
                               f"{kept[color]} stored of {cnt}")
    return out
