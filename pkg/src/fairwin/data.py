"""Stream sources: CSV ingestion and seeded synthetic generators.

Generators use numpy's PCG64 bit generator (``numpy.random.default_rng``),
so a seed reproduces the same stream on every platform.
"""

from __future__ import annotations

import csv
import logging
import math
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .metric import ColoredPoint, ConfigError

log = logging.getLogger(__name__)

BLOB_COMPONENTS = 21
BLOB_SIGMA = 2.0
BLOB_COLORS = 7
BLOB_BOX = 100.0
_CHUNK = 8192


class DataError(ConfigError):
    """Unreadable input or input without a single usable row."""


class CsvStream:
    """Iterable over the valid rows of a headed CSV file as colored points.

    Color labels get dense ids in order of first occurrence (``labels`` maps
    label -> id). Rows with a wrong field count or a non-numeric feature are
    skipped and counted in ``skipped``. Arrival times are 1, 2, ... over the
    valid rows.
    """

    def __init__(self, path, color_column: Optional[str] = None,
                 feature_columns: Optional[Sequence[str]] = None):
        self.path = path
        self.color_column = color_column
        self.feature_columns = list(feature_columns) if feature_columns else None
        self.labels: dict = {}
        self.skipped = 0
        self.valid = 0

    def _columns(self, header):
        if self.color_column is None:
            color_idx = len(header) - 1
        elif self.color_column in header:
            color_idx = header.index(self.color_column)
        else:
            raise DataError(f"{self.path}: no column named {self.color_column!r}")
        if self.feature_columns is None:
            feat_idx = [i for i in range(len(header)) if i != color_idx]
        else:
            missing = [c for c in self.feature_columns if c not in header]
            if missing:
                raise DataError(f"{self.path}: missing feature columns {missing}")
            feat_idx = [header.index(c) for c in self.feature_columns]
        if not feat_idx:
            raise DataError(f"{self.path}: no feature columns")
        return color_idx, feat_idx

    def __iter__(self) -> Iterator[ColoredPoint]:
        self.labels = {}
        self.skipped = 0
        self.valid = 0
        try:
            fh = open(self.path, newline="", encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read {self.path}: {exc}") from exc
        with fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{self.path}: empty file")
            color_idx, feat_idx = self._columns([h.strip() for h in header])
            for row in reader:
                if not row:
                    continue
                try:
                    if len(row) != len(header):
                        raise ValueError("field count")
                    coords = [float(row[i]) for i in feat_idx]
                    if not all(math.isfinite(x) for x in coords):
                        raise ValueError("non-finite")
                    label = row[color_idx].strip()
                    if not label:
                        raise ValueError("empty label")
                except ValueError:
                    self.skipped += 1
                    continue
                color = self.labels.setdefault(label, len(self.labels))
                self.valid += 1
                yield ColoredPoint(coords, color, self.valid)
        if self.skipped:
            log.warning("%s: skipped %d malformed rows", self.path, self.skipped)
        if self.valid == 0:
            raise DataError(f"{self.path}: no valid rows")


def parse_csv(path, color_column: Optional[str] = None,
              feature_columns: Optional[Sequence[str]] = None) -> CsvStream:
    return CsvStream(path, color_column, feature_columns)


def gen_blobs(d: int, n_points: int, seed: int = 0, components: int = BLOB_COMPONENTS,
              sigma: float = BLOB_SIGMA, n_colors: int = BLOB_COLORS,
              box: float = BLOB_BOX) -> Iterator[ColoredPoint]:
    """Isotropic Gaussian mixture with uniformly placed means and random colors.

    Means are uniform in ``[0, box]^d``; each point picks a component and a
    color uniformly at random.
    """
    if d < 1:
        raise ConfigError(f"blobs need d >= 1, got {d}")
    if n_points < 1:
        raise ConfigError(f"n_points must be >= 1, got {n_points}")
    rng = np.random.default_rng(seed)
    means = rng.uniform(0.0, box, size=(components, d))
    t = 0
    while t < n_points:
        m = min(_CHUNK, n_points - t)
        comp = rng.integers(components, size=m)
        colors = rng.integers(n_colors, size=m)
        x = means[comp] + sigma * rng.standard_normal((m, d))
        for row, color in zip(x, colors):
            t += 1
            yield ColoredPoint(row, int(color), t)


def random_rotation(dim: int, seed: int = 0) -> np.ndarray:
    """Orthogonal matrix from the QR factorization of a seeded Gaussian matrix."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def gen_rotated(base: Iterable[ColoredPoint], target_dim: int, seed: int = 0) -> Iterator[ColoredPoint]:
    """Zero-pad ``base`` to ``target_dim`` coordinates and apply one fixed rotation."""
    rot = None
    for p in base:
        if rot is None:
            if target_dim < p.dim:
                raise ConfigError(f"target_dim {target_dim} below base dimension {p.dim}")
            rot = random_rotation(target_dim, seed)
        padded = np.zeros(target_dim)
        padded[:p.dim] = p.coords
        yield ColoredPoint(rot @ padded, p.color, p.arrival)
