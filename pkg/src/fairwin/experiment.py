"""Experiment driver: stream a source through sketches, query, measure, report."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .data import CsvStream, DataError, gen_blobs, gen_rotated
from .metric import ColoredPoint, ConfigError, PartitionConstraint, coords_matrix, radius_of
from .sequential import BRUTE_FORCE_LIMIT, brute_force_opt, fair_center_3approx
from .sketch import Mode, SketchParams, SlidingWindowSketch, delta_from_epsilon

log = logging.getLogger(__name__)

BASELINES = ("none", "seq", "oracle")
REPORT_COLUMNS = (
    "t", "mode", "delta", "coreset_radius", "window_radius", "baseline_radius",
    "ratio", "mem_slots", "mem_points", "update_us", "query_us",
)
VALIDATION_DELTA = 4.0


@dataclass
class ExperimentConfig:
    source: str
    window: int = 2000
    caps: Optional[dict] = None
    k_total: int = 14
    beta: float = 2.0
    deltas: tuple = (0.5, 1.0, 2.0, 4.0)
    epsilon: Optional[float] = None
    modes: tuple = ("standard",)
    query_every: int = 50
    measure: int = 50
    baseline: str = "none"
    seed: int = 0
    out: Optional[str] = None
    color_col: Optional[str] = None
    caps_prefix: int = 10_000
    dmin: Optional[float] = None
    dmax: Optional[float] = None
    timings: bool = True
    threads: Optional[int] = None
    serial: bool = False

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.measure < 1:
            raise ConfigError(f"measure must be >= 1, got {self.measure}")
        if self.query_every < 1:
            raise ConfigError(f"query_every must be >= 1, got {self.query_every}")
        if self.baseline not in BASELINES:
            raise ConfigError(f"baseline must be one of {BASELINES}, got {self.baseline!r}")
        if self.baseline == "oracle" and self.window > BRUTE_FORCE_LIMIT:
            raise ConfigError(f"oracle baseline needs window <= {BRUTE_FORCE_LIMIT}")
        try:
            self.modes = tuple(Mode(m) for m in self.modes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.modes:
            raise ConfigError("at least one mode is required")
        self.deltas = tuple(float(x) for x in self.deltas)
        if self.epsilon is not None:
            self.deltas = (delta_from_epsilon(self.epsilon, self.beta),)
        if not self.deltas:
            raise ConfigError("at least one delta is required")

    @property
    def steps(self) -> int:
        """Stream length needed for all measured queries."""
        return self.window + (self.measure - 1) * self.query_every


@dataclass
class ReportRow:
    t: int
    mode: str
    delta: float
    coreset_radius: float
    window_radius: float
    baseline_radius: Optional[float]
    ratio: Optional[float]
    mem_slots: int
    mem_points: int
    update_us: float
    query_us: float


# -- sources ---------------------------------------------------------------

def _parse_spec(spec: str) -> tuple:
    kind, _, rest = spec.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"bad generator option {item!r} in {spec!r}")
        opts[key.strip()] = value.strip()
    return kind.strip(), opts


def open_source(source: str, seed: int = 0, color_col: Optional[str] = None):
    """Iterator of points for a CSV path or a generator spec.

    Specs: ``blobs:d=5,n=1000000`` and ``rotated:base=FILE,dim=15`` where
    ``base`` may also be ``blobs`` (then ``d`` and ``n`` describe the base).
    """
    kind, opts = _parse_spec(source) if ":" in source and not Path(source).exists() else ("file", {})
    try:
        if kind == "file":
            return iter(CsvStream(source, color_col))
        if kind == "blobs":
            return gen_blobs(int(opts.get("d", 2)), int(opts.get("n", 1_000_000)), seed)
        if kind == "rotated":
            base = opts.get("base")
            if base is None:
                raise ConfigError(f"rotated needs base=...: {source!r}")
            if base == "blobs":
                base_it = gen_blobs(int(opts.get("d", 3)), int(opts.get("n", 1_000_000)), seed)
            else:
                base_it = iter(CsvStream(base, color_col))
            return gen_rotated(base_it, int(opts["dim"]), seed + 1)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad source spec {source!r}: {exc}") from exc
    raise ConfigError(f"unknown source kind {kind!r}")


def load_stream(cfg: ExperimentConfig) -> list:
    points = list(itertools.islice(open_source(cfg.source, cfg.seed, cfg.color_col), cfg.steps))
    if len(points) < cfg.window:
        raise DataError(f"source has {len(points)} points, window needs {cfg.window}")
    return points


def proportional_caps(counts: dict, n_colors: int, total: int) -> tuple:
    """Largest-remainder split of ``total`` by color frequency, at least 1 each."""
    freq = np.array([counts.get(c, 0) for c in range(n_colors)], dtype=float)
    if freq.sum() == 0:
        freq[:] = 1.0
    quota = total * freq / freq.sum()
    caps = np.floor(quota).astype(int)
    order = sorted(range(n_colors), key=lambda c: (-(quota[c] - caps[c]), c))
    for c in order[: total - caps.sum()]:
        caps[c] += 1
    for c in range(n_colors):
        if caps[c] == 0:
            caps[c] = 1
            donors = [j for j in range(n_colors) if caps[j] > 1]
            if donors:
                caps[max(donors, key=lambda j: (caps[j], -j))] -= 1
    return tuple(int(x) for x in caps)


def resolve_caps(cfg: ExperimentConfig, points: Sequence[ColoredPoint]) -> PartitionConstraint:
    n_colors = max(p.color for p in points) + 1
    if cfg.caps is not None:
        caps = []
        for c in range(n_colors):
            if c not in cfg.caps:
                raise ConfigError(f"no capacity given for color {c}")
            caps.append(cfg.caps[c])
        return PartitionConstraint(tuple(caps))
    counts = {}
    for p in points[: cfg.caps_prefix]:
        counts[p.color] = counts.get(p.color, 0) + 1
    return PartitionConstraint(proportional_caps(counts, n_colors, cfg.k_total))


def stream_extent(points: Sequence[ColoredPoint]) -> tuple:
    """(min positive pairwise distance, upper bound on the diameter).

    The upper bound is the bounding-box diagonal.
    """
    x = np.unique(coords_matrix(list(points)), axis=0)
    if len(x) < 2:
        return 1.0, 1.0
    nn, _ = cKDTree(x).query(x, k=2)
    dmin = float(nn[:, 1].min())
    dmax = float(np.linalg.norm(x.max(axis=0) - x.min(axis=0)))
    return dmin, max(dmax, dmin)


# -- running ---------------------------------------------------------------

@dataclass
class _Probe:
    t: int
    centers: list
    coreset_radius: float
    mem_slots: int
    mem_points: int
    update_us: float
    query_us: float


def _run_one(params: SketchParams, points, query_times, timings) -> list:
    sketch = SlidingWindowSketch(params)
    probes = []
    spent, count = 0.0, 0
    clock = time.perf_counter
    for p in points:
        start = clock()
        sketch.update(p)
        spent += clock() - start
        count += 1
        if p.arrival in query_times:
            start = clock()
            sol = sketch.query()
            q_us = (clock() - start) * 1e6
            slots, distinct = sketch.memory()
            u_us = spent / count * 1e6
            if not timings:
                u_us = q_us = 0.0
            probes.append(_Probe(p.arrival, sol.centers, sol.radius, slots, distinct, u_us, q_us))
            spent, count = 0.0, 0
    return probes


def _thread_cap(cfg: ExperimentConfig) -> int:
    if cfg.serial:
        return 1
    if cfg.threads is not None:
        return max(1, cfg.threads)
    env = os.environ.get("FAIRWIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FAIRWIN_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def sketch_configs(cfg: ExperimentConfig) -> list:
    out = []
    for mode in cfg.modes:
        if mode is Mode.VALIDATION_ONLY:
            out.append((mode, VALIDATION_DELTA))
        else:
            out.extend((mode, d) for d in cfg.deltas)
    return list(dict.fromkeys(out))


def run_experiment(cfg: ExperimentConfig, points: Optional[Sequence[ColoredPoint]] = None) -> list:
    if points is None:
        points = load_stream(cfg)
    points = list(points)
    constraint = resolve_caps(cfg, points)
    dmin, dmax = stream_extent(points)
    dmin = cfg.dmin if cfg.dmin is not None else dmin
    dmax = cfg.dmax if cfg.dmax is not None else dmax
    n = cfg.window
    query_times = {t for t in range(n, len(points) + 1, cfg.query_every)}
    query_times = set(sorted(query_times)[: cfg.measure])
    log.info("stream=%d window=%d caps=%s dmin=%g dmax=%g", len(points), n, constraint.caps, dmin, dmax)

    configs = sketch_configs(cfg)
    params = [SketchParams(n=n, constraint=constraint, beta=cfg.beta, delta=d, dmin=dmin,
                           dmax=dmax, mode=m) for m, d in configs]
    workers = min(_thread_cap(cfg), len(params))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: _run_one(p, points, query_times, cfg.timings), params))
    else:
        results = [_run_one(p, points, query_times, cfg.timings) for p in params]

    baseline = {}
    for t in sorted(query_times):
        win = points[t - n:t]
        if cfg.baseline == "seq":
            baseline[t] = fair_center_3approx(win, constraint).radius
        elif cfg.baseline == "oracle":
            baseline[t] = brute_force_opt(win, constraint).radius

    rows = []
    for (mode, delta), probes in zip(configs, results):
        for pr in probes:
            win = points[pr.t - n:pr.t]
            wr = radius_of(win, pr.centers)
            br = baseline.get(pr.t)
            rows.append(ReportRow(
                t=pr.t, mode=mode.value, delta=delta, coreset_radius=pr.coreset_radius,
                window_radius=wr, baseline_radius=br, ratio=_ratio(wr, br),
                mem_slots=pr.mem_slots, mem_points=pr.mem_points,
                update_us=pr.update_us, query_us=pr.query_us,
            ))
    if cfg.out:
        write_report(rows, cfg.out, "json" if str(cfg.out).endswith(".json") else "csv")
    return rows


def _ratio(value: float, base: Optional[float]) -> Optional[float]:
    if base is None:
        return None
    if base == 0.0:
        return 1.0 if value == 0.0 else math.inf
    return value / base


def summarize(rows: Sequence[ReportRow]) -> list:
    """Per (mode, delta) means over the measured queries."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.mode, r.delta), []).append(r)
    out = []
    for (mode, delta), rs in groups.items():
        entry = {"mode": mode, "delta": delta, "queries": len(rs)}
        for col in REPORT_COLUMNS[3:]:
            vals = [getattr(r, col) for r in rs if getattr(r, col) is not None]
            entry[col] = float(np.mean(vals)) if vals else None
        out.append(entry)
    return out


# -- reports ---------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(rows: Sequence[ReportRow], path, fmt: str = "csv") -> None:
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown report format {fmt!r}")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if fmt == "json":
                json.dump([{c: getattr(r, c) for c in REPORT_COLUMNS} for r in rows], fh, indent=1)
                fh.write("\n")
            else:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(REPORT_COLUMNS)
                for r in rows:
                    writer.writerow([_fmt(getattr(r, c)) for c in REPORT_COLUMNS])
    except OSError as exc:
        raise ConfigError(f"cannot write report {path}: {exc}") from exc


def read_report(path, fmt: str = "csv") -> list:
    types = {f.name: f.type for f in fields(ReportRow)}
    with open(path, newline="", encoding="utf-8") as fh:
        if fmt == "json":
            return [ReportRow(**d) for d in json.load(fh)]
        rows = []
        for rec in csv.DictReader(fh):
            vals = {}
            for col, raw in rec.items():
                kind = types[col]
                if raw == "":
                    vals[col] = None
                elif kind == "int":
                    vals[col] = int(raw)
                elif kind == "str":
                    vals[col] = raw
                else:
                    vals[col] = float(raw)
            rows.append(ReportRow(**vals))
        return rows
