"""JSON checkpoints of a :class:`SlidingWindowSketch`.

A snapshot is a versioned header, the sketch parameters, a table of every
stored point, and per-guess structures that refer to points by arrival
time. Loading a snapshot gives a sketch whose future updates and queries
match the original exactly.
"""

from __future__ import annotations

import json
from collections import deque

from .metric import ColoredPoint, ConfigError, PartitionConstraint
from .sketch import GuessState, Mode, SketchParams, SlidingWindowSketch, _ExtentEstimator

FORMAT = "fairwin-sketch"
VERSION = 1


def _params_dict(p: SketchParams) -> dict:
    return {
        "n": p.n, "caps": list(p.constraint.caps), "beta": p.beta, "delta": p.delta,
        "dmin": p.dmin, "dmax": p.dmax, "mode": p.mode.value, "alpha": p.alpha,
        "guess_floor": p.guess_floor,
    }


def _guess_dict(i: int, g: GuessState) -> dict:
    keys = lambda pts: [q.arrival for q in pts]
    if g.validation_only:
        rep_v = {str(v): {str(c): keys(lst) for c, lst in per.items()} for v, per in g.rep_v.items()}
    else:
        rep_v = {str(v): q.arrival for v, q in g.rep_v.items()}
    out = {
        "exponent": i,
        "av": list(g.av.keys),
        "rep_v": rep_v,
        "orphan_v": list(g.orphan_v),
        "a": list(g.a.keys),
        "reps_c": {str(a): {str(c): keys(lst) for c, lst in per.items()} for a, per in g.reps_c.items()},
        "orphan_c": list(g.orphan_c),
    }
    if g.psi is not None:
        out["psi"] = [[k, v] for k, v in g.psi.items()]
        out["phi"] = [[k, v] for k, v in g.phi.items()]
    return out


def to_dict(sketch: SlidingWindowSketch) -> dict:
    points = {}
    for g in sketch.guesses.values():
        points.update(g.stored())
    est = None
    if sketch.estimator is not None:
        e = sketch.estimator
        if e.anchor is not None:
            points[e.anchor.arrival] = e.anchor
        est = {
            "anchor": e.anchor.arrival if e.anchor is not None else None,
            "far": [list(x) for x in e.far.items],
            "near": [list(x) for x in e.near.items],
        }
    return {
        "format": FORMAT,
        "version": VERSION,
        "params": _params_dict(sketch.params),
        "clock": sketch.clock,
        "dim": sketch.dim,
        "trace": sketch.trace,
        "points": [[q.arrival, q.color, q.coords.tolist()] for q in sorted(points.values(), key=lambda q: q.arrival)],
        "guesses": [_guess_dict(i, sketch.guesses[i]) for i in sorted(sketch.guesses)],
        "estimator": est,
    }


def _load_guess(sk: SlidingWindowSketch, d: dict, pts: dict) -> GuessState:
    g = sk._new_guess(d["exponent"])
    for key in d["av"]:
        g.av.add(pts[key])
    for v, rep in d["rep_v"].items():
        v = int(v)
        if g.validation_only:
            g.rep_v[v] = {int(c): [pts[k] for k in lst] for c, lst in rep.items()}
            for lst in g.rep_v[v].values():
                for q in lst:
                    g.v_owner[q.arrival] = v
        else:
            g.rep_v[v] = pts[rep]
            g.v_owner[rep] = v
    g.orphan_v = {k: pts[k] for k in d["orphan_v"]}
    for key in d["a"]:
        g.a.add(pts[key])
    for a, per in d["reps_c"].items():
        a = int(a)
        g.reps_c[a] = {int(c): [pts[k] for k in lst] for c, lst in per.items()}
        for lst in g.reps_c[a].values():
            for q in lst:
                g.c_owner[q.arrival] = a
    g.orphan_c = {k: pts[k] for k in d["orphan_c"]}
    if g.psi is not None:
        g.psi = {k: v for k, v in d.get("psi", [])}
        g.phi = {k: v for k, v in d.get("phi", [])}
    return g


def from_dict(d: dict) -> SlidingWindowSketch:
    if d.get("format") != FORMAT:
        raise ConfigError("not a sketch snapshot")
    if d.get("version") != VERSION:
        raise ConfigError(f"unsupported snapshot version {d.get('version')}")
    p = dict(d["params"])
    caps = p.pop("caps")
    params = SketchParams(constraint=PartitionConstraint(tuple(caps)), **p)
    sk = SlidingWindowSketch(params, trace=d["trace"])
    sk.guesses = {}
    sk.clock = d["clock"]
    sk.dim = d["dim"]
    pts = {a: ColoredPoint(x, c, a) for a, c, x in d["points"]}
    for gd in d["guesses"]:
        sk.guesses[gd["exponent"]] = _load_guess(sk, gd, pts)
    est = d["estimator"]
    if params.mode is Mode.OBLIVIOUS:
        e = _ExtentEstimator(params.n, params.guess_floor)
        if est is not None:
            e.anchor = pts[est["anchor"]] if est["anchor"] is not None else None
            e.far.items = deque((t, v) for t, v in est["far"])
            e.near.items = deque((t, v) for t, v in est["near"])
        sk.estimator = e
    return sk


def dumps(sketch: SlidingWindowSketch) -> str:
    return json.dumps(to_dict(sketch), separators=(",", ":"))


def loads(text: str) -> SlidingWindowSketch:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed snapshot: {exc}") from exc
    return from_dict(d)


def save(sketch: SlidingWindowSketch, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(sketch))


def load(path) -> SlidingWindowSketch:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
