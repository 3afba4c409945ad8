"""Sliding-window sketch for fair center.

For every radius guess ``gamma`` on a geometric grid the sketch keeps

* v-attractors (pairwise more than ``2*gamma`` apart, at most ``k+1``) each
  paired with its freshest attracted point, the v-representative; these
  certify whether ``gamma`` is a plausible lower bound on the optimum;
* c-attractors (pairwise more than ``delta*gamma/2`` apart) each holding, per
  color ``i``, the ``k_i`` freshest attracted points; the union of those
  c-representatives is the coreset a query solves on.

Representatives whose attractor expired or was dropped stay stored as
orphans until they expire themselves or a cleanup purges them. All stored
points are active: nothing outlives the window.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .metric import ColoredPoint, ConfigError, PartitionConstraint, Solution, radius_of
from .sequential import fair_center_3approx
from .window import WindowExtremum

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 3.0
DEFAULT_GUESS_FLOOR = 1e-9


class Mode(str, enum.Enum):
    STANDARD = "standard"
    VALIDATION_ONLY = "validation-only"
    OBLIVIOUS = "oblivious"


def ttl(p: ColoredPoint, t: int, n: int) -> int:
    """Remaining steps ``p`` stays in a window of length ``n`` at time ``t``."""
    if t < p.arrival:
        raise ConfigError(f"time {t} precedes arrival {p.arrival}")
    return max(0, n - (t - p.arrival))


def _log_floor(x: float, base: float) -> int:
    e = math.log(x) / math.log(base)
    r = round(e)
    return r if math.isclose(e, r, abs_tol=1e-9) else math.floor(e)


def _log_ceil(x: float, base: float) -> int:
    e = math.log(x) / math.log(base)
    r = round(e)
    return r if math.isclose(e, r, abs_tol=1e-9) else math.ceil(e)


def guess_exponents(dmin: float, dmax: float, beta: float) -> range:
    if not (dmin > 0 and dmax >= dmin and math.isfinite(dmax)):
        raise ConfigError(f"need 0 < dmin <= dmax, got dmin={dmin}, dmax={dmax}")
    if not beta > 0:
        raise ConfigError(f"beta must be > 0, got {beta}")
    return range(_log_floor(dmin, 1 + beta), _log_ceil(dmax, 1 + beta) + 1)


def guess_grid(dmin: float, dmax: float, beta: float) -> list:
    """Guesses ``(1+beta)**i`` covering ``[dmin, dmax]``, ascending."""
    return [(1 + beta) ** i for i in guess_exponents(dmin, dmax, beta)]


def delta_from_epsilon(epsilon: float, beta: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Coreset precision giving an (alpha + epsilon)-approximation."""
    if not 0 < epsilon < 1:
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    if not beta > 0:
        raise ConfigError(f"beta must be > 0, got {beta}")
    if not alpha >= 1:
        raise ConfigError(f"alpha must be >= 1, got {alpha}")
    return epsilon / ((1 + beta) * (1 + 2 * alpha))


@dataclass
class SketchParams:
    n: int
    constraint: PartitionConstraint
    beta: float = 2.0
    delta: Optional[float] = None
    dmin: Optional[float] = None
    dmax: Optional[float] = None
    mode: Mode = Mode.STANDARD
    epsilon: Optional[float] = None
    alpha: float = DEFAULT_ALPHA
    guess_floor: float = DEFAULT_GUESS_FLOOR

    def __post_init__(self):
        try:
            self.mode = Mode(self.mode)
        except ValueError:
            raise ConfigError(f"unknown mode {self.mode!r}") from None
        if self.n < 1:
            raise ConfigError(f"window length must be >= 1, got {self.n}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if self.epsilon is not None:
            self.delta = delta_from_epsilon(self.epsilon, self.beta, self.alpha)
        if self.delta is None:
            raise ConfigError("either delta or epsilon is required")
        if not 0 < self.delta <= 4:
            raise ConfigError(f"delta must be in (0, 4], got {self.delta}")
        if self.mode is not Mode.OBLIVIOUS:
            if self.dmin is None or self.dmax is None:
                raise ConfigError(f"mode {self.mode.value} needs dmin and dmax")
            guess_exponents(self.dmin, self.dmax, self.beta)
        if not self.guess_floor > 0:
            raise ConfigError("guess_floor must be > 0")

    @property
    def k(self) -> int:
        return self.constraint.k


class _Bag:
    """Keyed point set with a dense coordinate buffer for vectorized range queries."""

    def __init__(self):
        self.keys: list = []
        self.pos: dict = {}
        self.points: dict = {}
        self._x: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.keys)

    def __contains__(self, key):
        return key in self.pos

    def add(self, p: ColoredPoint) -> None:
        if self._x is None:
            self._x = np.empty((8, p.dim))
        elif len(self.keys) == self._x.shape[0]:
            self._x = np.concatenate([self._x, np.empty_like(self._x)])
        self.pos[p.arrival] = len(self.keys)
        self._x[len(self.keys)] = p.coords
        self.keys.append(p.arrival)
        self.points[p.arrival] = p

    def remove(self, key: int) -> ColoredPoint:
        i = self.pos.pop(key)
        last = self.keys.pop()
        if last != key:
            self.keys[i] = last
            self.pos[last] = i
            self._x[i] = self._x[len(self.keys)]
        return self.points.pop(key)

    def distances(self, coords: np.ndarray) -> np.ndarray:
        if not self.keys:
            return np.empty(0)
        diff = self._x[:len(self.keys)] - coords
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def within(self, coords: np.ndarray, radius: float) -> list:
        d = self.distances(coords)
        return [self.keys[i] for i in np.flatnonzero(d <= radius)]

    def values(self):
        return self.points.values()


class GuessState:
    """Validation and coreset structures for a single guess ``gamma``.

    In validation-only mode the coreset side is absent and each v-attractor
    keeps, per color ``i``, its ``k_i`` freshest attracted points.
    """

    def __init__(self, gamma: float, constraint: PartitionConstraint, delta: float,
                 validation_only: bool = False, trace: bool = False):
        self.gamma = gamma
        self.constraint = constraint
        self.k = constraint.k
        self.delta = delta
        self.validation_only = validation_only
        self.av = _Bag()
        self.rep_v: dict = {}  # v-attractor -> point, or color -> list in validation-only mode
        self.orphan_v: dict = {}
        self.v_owner: dict = {}  # v-representative -> its v-attractor
        self.a = _Bag()
        self.reps_c: dict = {}  # c-attractor -> color -> points, oldest first
        self.orphan_c: dict = {}
        self.c_owner: dict = {}
        # Analysis-only attractor assignments (arrival -> attractor arrival).
        self.psi: Optional[dict] = {} if trace else None
        self.phi: Optional[dict] = {} if trace else None

    # -- set views --------------------------------------------------------

    def rv_points(self) -> list:
        """v-representatives in arrival order."""
        if self.validation_only:
            pts = [q for per_color in self.rep_v.values() for lst in per_color.values() for q in lst]
        else:
            pts = list(self.rep_v.values())
        pts.extend(self.orphan_v.values())
        return sorted(pts, key=lambda q: q.arrival)

    def r_points(self) -> list:
        """c-representatives (the coreset) in arrival order."""
        pts = [q for per_color in self.reps_c.values() for lst in per_color.values() for q in lst]
        pts.extend(self.orphan_c.values())
        return sorted(pts, key=lambda q: q.arrival)

    def av_points(self) -> list:
        return sorted(self.av.values(), key=lambda q: q.arrival)

    def a_points(self) -> list:
        return sorted(self.a.values(), key=lambda q: q.arrival)

    def stored(self) -> dict:
        out = {}
        for group in (self.av_points(), self.rv_points(), self.a_points(), self.r_points()):
            for q in group:
                out[q.arrival] = q
        return out

    def slots(self) -> int:
        return len(self.av) + len(self.v_owner) + len(self.orphan_v) + len(self.a) \
            + len(self.c_owner) + len(self.orphan_c)

    @property
    def valid(self) -> bool:
        return len(self.av) <= self.k

    # -- removal ----------------------------------------------------------

    def _orphan_v_attractor(self, v: int) -> None:
        self.av.remove(v)
        reps = self.rep_v.pop(v)
        if self.validation_only:
            reps = [q for lst in reps.values() for q in lst]
        else:
            reps = [reps]
        for q in reps:
            del self.v_owner[q.arrival]
            self.orphan_v[q.arrival] = q

    def _orphan_c_attractor(self, a: int) -> None:
        self.a.remove(a)
        for lst in self.reps_c.pop(a).values():
            for q in lst:
                del self.c_owner[q.arrival]
                self.orphan_c[q.arrival] = q

    def _drop_v_rep(self, key: int) -> None:
        v = self.v_owner.pop(key)
        if self.validation_only:
            lst = self.rep_v[v]
            color_list = next(l for l in lst.values() if any(q.arrival == key for q in l))
            color_list[:] = [q for q in color_list if q.arrival != key]
        else:
            del self.rep_v[v]

    def _drop_c_rep(self, key: int) -> None:
        a = self.c_owner.pop(key)
        for lst in self.reps_c[a].values():
            for j, q in enumerate(lst):
                if q.arrival == key:
                    del lst[j]
                    return

    def expire(self, key: int) -> None:
        """Remove the point with arrival ``key`` from every set holding it."""
        if key in self.av:
            self._orphan_v_attractor(key)
        if key in self.v_owner:
            self._drop_v_rep(key)
        self.orphan_v.pop(key, None)
        if key in self.a:
            self._orphan_c_attractor(key)
        if key in self.c_owner:
            self._drop_c_rep(key)
        self.orphan_c.pop(key, None)
        if self.psi is not None:
            self.psi.pop(key, None)
            self.phi.pop(key, None)

    def cleanup(self) -> None:
        """Cap v-attractors at k+1 and purge points older than all of them."""
        if len(self.av) == self.k + 2:
            self._orphan_v_attractor(min(self.av.keys))
        if len(self.av) != self.k + 1:
            return
        oldest = min(self.av.keys)
        for a in [a for a in self.a.keys if a < oldest]:
            self._orphan_c_attractor(a)
        for key in [key for key in self.orphan_v if key < oldest]:
            del self.orphan_v[key]
        for key in [key for key in self.v_owner if key < oldest]:
            self._drop_v_rep(key)
        for key in [key for key in self.orphan_c if key < oldest]:
            del self.orphan_c[key]
        for key in [key for key in self.c_owner if key < oldest]:
            self._drop_c_rep(key)

    # -- insertion --------------------------------------------------------

    def insert(self, p: ColoredPoint) -> None:
        self._insert_v(p)
        if not self.validation_only:
            self._insert_c(p)

    def _insert_v(self, p: ColoredPoint) -> None:
        key = p.arrival
        near = self.av.within(p.coords, 2 * self.gamma)
        if not near:
            self.av.add(p)
            self.rep_v[key] = {p.color: [p]} if self.validation_only else p
            self.v_owner[key] = key
            if self.psi is not None:
                self.psi[key] = key
            self.cleanup()
            return
        # Longest-lived eligible attractor; arrivals are unique so no ties.
        v = max(near)
        if self.validation_only:
            lst = self.rep_v[v].setdefault(p.color, [])
            lst.append(p)
            if len(lst) > self.constraint.caps[p.color]:
                del self.v_owner[lst.pop(0).arrival]
        else:
            del self.v_owner[self.rep_v[v].arrival]
            self.rep_v[v] = p
        self.v_owner[key] = v
        if self.psi is not None:
            self.psi[key] = v

    def _insert_c(self, p: ColoredPoint) -> None:
        key = p.arrival
        near = self.a.within(p.coords, self.delta * self.gamma / 2)
        if not near:
            self.a.add(p)
            self.reps_c[key] = {p.color: [p]}
            self.c_owner[key] = key
            if self.phi is not None:
                self.phi[key] = key
            return
        # Fewest same-color representatives, then longest-lived attractor.
        a = min(near, key=lambda a: (len(self.reps_c[a].get(p.color, ())), -a))
        lst = self.reps_c[a].setdefault(p.color, [])
        lst.append(p)
        if len(lst) > self.constraint.caps[p.color]:
            del self.c_owner[lst.pop(0).arrival]
        self.c_owner[key] = a
        if self.phi is not None:
            self.phi[key] = a

    # -- query helpers ----------------------------------------------------

    def separated_heads(self) -> Optional[list]:
        """Greedy 2*gamma-separated subset of RV, or None once it exceeds k."""
        heads = []
        xs = []
        for q in self.rv_points():
            if heads:
                diff = np.asarray(xs) - q.coords
                if np.sqrt(np.einsum("ij,ij->i", diff, diff)).min() <= 2 * self.gamma:
                    continue
            heads.append(q)
            xs.append(q.coords)
            if len(heads) > self.k:
                return None
        return heads

    def coreset(self) -> list:
        return self.rv_points() if self.validation_only else self.r_points()


class _ExtentEstimator:
    """Running bounds on the distance range of the current window.

    The upper bound is a sliding maximum of distances to an anchor point.
    When the anchor expires the newest point becomes the anchor and the
    stored distances are shifted by the distance between old and new
    anchor, which keeps them upper bounds for the older points still in the
    window. The lower bound is a sliding minimum of positive distances from
    each arrival to the nearest v-attractor of the smallest live guess.
    """

    def __init__(self, n: int, floor: float):
        self.n = n
        self.floor = floor
        self.anchor: Optional[ColoredPoint] = None
        self.far = WindowExtremum(n, "max")
        self.near = WindowExtremum(n, "min")

    def observe(self, p: ColoredPoint, t: int, nearest: Optional[float]) -> None:
        self.far.expire(t)
        self.near.expire(t)
        if self.anchor is None or self.anchor.arrival <= t - self.n:
            if self.anchor is not None:
                self.far.shift(_dist(self.anchor, p))
            self.anchor = p
        self.far.push(t, _dist(self.anchor, p))
        if nearest is not None and nearest > 0:
            self.near.push(t, nearest)

    @property
    def dmax(self) -> float:
        return self.far.value or 0.0

    @property
    def dmin(self) -> float:
        lo = self.near.value
        if lo is None:
            lo = self.dmax
        return max(lo, self.floor)

    def exponents(self, beta: float) -> range:
        base = 1 + beta
        hi = 2 * self.dmax
        if hi <= self.floor:
            e = _log_ceil(self.floor, base)
            return range(e, e + 1)
        lo = max(self.dmin / (2 * base), self.floor)
        return range(_log_floor(lo, base), _log_ceil(max(hi, lo), base) + 1)


def _dist(a: ColoredPoint, b: ColoredPoint) -> float:
    diff = a.coords - b.coords
    return float(np.sqrt(diff @ diff))


class SlidingWindowSketch:
    """Single-writer sketch; feed points with :meth:`update`, read with :meth:`query`."""

    def __init__(self, params: SketchParams, trace: bool = False):
        self.params = params
        self.trace = trace
        self.clock = 0
        self.dim: Optional[int] = None
        self.guesses: dict = {}
        self.estimator: Optional[_ExtentEstimator] = None
        if params.mode is Mode.OBLIVIOUS:
            self.estimator = _ExtentEstimator(params.n, params.guess_floor)
        else:
            for i in guess_exponents(params.dmin, params.dmax, params.beta):
                self.guesses[i] = self._new_guess(i)

    def _new_guess(self, i: int) -> GuessState:
        p = self.params
        return GuessState((1 + p.beta) ** i, p.constraint, p.delta,
                          validation_only=p.mode is Mode.VALIDATION_ONLY, trace=self.trace)

    @property
    def gammas(self) -> list:
        return [self.guesses[i].gamma for i in sorted(self.guesses)]

    def ttl(self, p: ColoredPoint) -> int:
        return ttl(p, self.clock, self.params.n)

    def update(self, p: ColoredPoint) -> None:
        if p.arrival != self.clock + 1:
            raise ConfigError(f"out-of-order arrival {p.arrival}, expected {self.clock + 1}")
        self.params.constraint.check_color(p.color)
        if self.dim is None:
            self.dim = p.dim
        elif p.dim != self.dim:
            raise ConfigError(f"dimension mismatch: {p.dim} vs {self.dim}")
        self.clock += 1
        expired = self.clock - self.params.n
        if expired >= 1:
            for g in self.guesses.values():
                g.expire(expired)
        if self.estimator is not None:
            self._adapt_guesses(p)
        for i in sorted(self.guesses):
            self.guesses[i].insert(p)

    def extend(self, points: Iterable[ColoredPoint]) -> None:
        for p in points:
            self.update(p)

    def oblivious_bounds(self, p: ColoredPoint) -> tuple:
        """Feed ``p`` to the extent estimator and return (dmin_est, dmax_est)."""
        nearest = None
        if self.guesses:
            lowest = self.guesses[min(self.guesses)]
            d = lowest.av.distances(p.coords)
            if d.size:
                nearest = float(d.min())
        self.estimator.observe(p, self.clock, nearest)
        return self.estimator.dmin, self.estimator.dmax

    def _adapt_guesses(self, p: ColoredPoint) -> None:
        self.oblivious_bounds(p)
        wanted = self.estimator.exponents(self.params.beta)
        old = sorted(self.guesses)
        for i in wanted:
            if i in self.guesses:
                continue
            g = self._new_guess(i)
            if old:
                # Seed a new guess with the stored points of the closest live one.
                src = self.guesses[min(old, key=lambda j: (abs(j - i), -j))]
                for q in sorted(src.stored().values(), key=lambda q: q.arrival):
                    g.insert(q)
            self.guesses[i] = g
        for i in old:
            if i not in wanted:
                del self.guesses[i]

    def query(self) -> Solution:
        if not self.guesses or self.clock == 0:
            raise ConfigError("query on an empty sketch")
        chosen = None
        for i in sorted(self.guesses):
            g = self.guesses[i]
            if g.valid and g.separated_heads() is not None:
                chosen = g
                break
        if chosen is None:
            chosen = self.guesses[max(self.guesses)]
            log.warning("no valid guess; falling back to gamma=%g", chosen.gamma)
        coreset = chosen.coreset()
        sol = fair_center_3approx(coreset, self.params.constraint)
        sol.gamma = chosen.gamma
        return sol

    def memory(self) -> tuple:
        """(stored point slots across all guesses, distinct stored points)."""
        slots = 0
        distinct = set()
        for g in self.guesses.values():
            slots += g.slots()
            distinct.update(g.stored())
        return slots, len(distinct)


def memory_points(sketch: SlidingWindowSketch) -> int:
    return sketch.memory()[0]


def window_radius(window: Iterable[ColoredPoint], sol: Solution) -> float:
    return radius_of(window, sol.centers)
