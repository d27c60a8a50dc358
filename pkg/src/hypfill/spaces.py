"""Finite metric spaces: validation, generators, snowflaking, separated nets.

All spaces are immutable tables of pairwise distances over at least three
labeled points.  Everything downstream (fillings, cones, map analysis)
consumes these tables through :class:`FiniteMetricSpace`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    AsymmetryError,
    BadArgument,
    BadCount,
    BadExponent,
    FileFormatError,
    NonpositiveDistance,
    NonzeroDiagonal,
    TooFewPoints,
    TriangleError,
    UnknownPoint,
)

# Relative tolerance for inequality checks on derived (rounded) distances.
# Equality checks (diagonal, symmetry) stay exact.
REL_TOL = 1e-9

SPACE_KINDS = ("line", "circle", "cantor", "random")


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite metric space: labels plus a validated symmetric distance table.

    Construct through :func:`validate_metric`; the table is stored read-only.
    """

    labels: tuple[str, ...]
    dist: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    @property
    def min_separation(self) -> float:
        off = self.dist[~np.eye(self.n, dtype=bool)]
        return float(off.min())

    def distance(self, i: int, j: int) -> float:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise UnknownPoint(f"point index out of range: ({i}, {j})")
        return float(self.dist[i, j])

    def rescaled(self, c: float) -> "FiniteMetricSpace":
        """The same point set with all distances multiplied by c > 0."""
        if c <= 0:
            raise BadArgument("rescaling factor must be positive")
        return validate_metric(self.dist * c, self.labels)


@dataclass(frozen=True)
class NetParams:
    """Separation radius for net selection; the scan order is always
    ascending point index."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise BadArgument("net radius must be positive")


def validate_metric(dist, labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Check a square table against the metric axioms and wrap it.

    Diagonal and symmetry comparisons are exact; the triangle inequality is
    checked with relative tolerance ``REL_TOL`` because snowflaked or
    Euclidean-derived tables carry rounding.

    Raises TooFewPoints, NonzeroDiagonal, AsymmetryError,
    NonpositiveDistance, or TriangleError (with a witness triple).
    """
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise BadArgument(f"distance table must be square, got shape {d.shape}")
    n = d.shape[0]
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise BadArgument("label count does not match table size")

    diag = np.flatnonzero(np.diag(d) != 0.0)
    if diag.size:
        i = int(diag[0])
        raise NonzeroDiagonal(f"dist[{i}][{i}] = {d[i, i]} != 0")
    asym = np.argwhere(d != d.T)
    if asym.size:
        i, j = map(int, asym[0])
        raise AsymmetryError(f"dist[{i}][{j}]={d[i, j]} != dist[{j}][{i}]={d[j, i]}")
    off = ~np.eye(n, dtype=bool)
    bad = np.argwhere(off & (d <= 0.0))
    if bad.size:
        i, j = map(int, bad[0])
        raise NonpositiveDistance(f"dist[{i}][{j}]={d[i, j]} must be positive")

    for j in range(n):
        through_j = d[:, j][:, None] + d[j, :][None, :]
        viol = np.argwhere(d > through_j + REL_TOL * d)
        for i, k in viol:
            if i != j and k != j and i != k:
                raise TriangleError(int(i), int(j), int(k), float(d[i, k]),
                                    float(through_j[i, k]))

    d = d.copy()
    d.setflags(write=False)
    return FiniteMetricSpace(labels, d)


def separated_net(space: FiniteMetricSpace, r) -> list[int]:
    """Greedy maximal r-separated subset, scanned in ascending index order.

    A point joins iff its distance to every already-selected point is >= r.
    The result is r-separated and maximal: every point of the space lies
    within distance < r of the net.  Always contains index 0.
    """
    if isinstance(r, NetParams):
        r = r.radius
    if not r > 0:
        raise BadArgument("net radius must be positive")
    chosen: list[int] = []
    for i in range(space.n):
        if all(space.dist[i, j] >= r for j in chosen):
            chosen.append(i)
    return chosen


def generate_space(kind: str, n: int, seed: int = 0) -> FiniteMetricSpace:
    """Deterministic test-corpus spaces.

    line    -- {0..n-1} with |i-j|
    circle  -- n equally spaced points on the unit circle, chord distance
    cantor  -- n points of the middle-thirds construction at depth
               ceil(log2 n), real-line distance
    random  -- seeded points in the unit square, Euclidean distance
    """
    if n < 3:
        raise BadCount(f"need at least 3 points, got {n}")
    if kind == "line":
        idx = np.arange(n, dtype=np.float64)
        d = np.abs(idx[:, None] - idx[None, :])
    elif kind == "circle":
        ang = 2.0 * np.pi * np.arange(n) / n
        gap = np.abs(ang[:, None] - ang[None, :])
        d = 2.0 * np.sin(np.minimum(gap, 2.0 * np.pi - gap) / 2.0)
        d = (d + d.T) / 2.0
        np.fill_diagonal(d, 0.0)
    elif kind == "cantor":
        depth = max(1, math.ceil(math.log2(n)))
        pts = []
        for k in range(n):
            x = 0.0
            for bit in range(depth):
                if (k >> (depth - 1 - bit)) & 1:
                    x += 2.0 / 3.0 ** (bit + 1)
            pts.append(x)
        arr = np.array(pts)
        d = np.abs(arr[:, None] - arr[None, :])
    elif kind == "random":
        rng = np.random.default_rng(seed)
        pts = rng.random((n, 2))
        return space_from_points(pts)
    else:
        raise BadArgument(f"unknown space kind: {kind!r}")
    return validate_metric(d, None)


def space_from_points(points) -> FiniteMetricSpace:
    """Euclidean space over explicit coordinates."""
    pts = np.asarray(points, dtype=np.float64)
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=-1))
    return validate_metric(d, None)


def snowflake(space: FiniteMetricSpace, eps: float) -> FiniteMetricSpace:
    """Raise every distance to the power eps in (0, 1].

    Concavity of t -> t^eps preserves the triangle inequality, so the result
    is validated and returned as a new space.
    """
    if not (0 < eps <= 1):
        raise BadExponent(f"snowflake exponent must lie in (0, 1], got {eps}")
    return validate_metric(space.dist ** eps, space.labels)


# --- space files --------------------------------------------------------------

def space_to_dict(space: FiniteMetricSpace) -> dict:
    return {"labels": list(space.labels), "dist": space.dist.tolist()}


def save_space(space: FiniteMetricSpace, path) -> None:
    Path(path).write_text(
        json.dumps(space_to_dict(space), sort_keys=True), encoding="utf-8"
    )


def load_space(path) -> FiniteMetricSpace:
    """Read a space file: either a labels/dist table or points with a metric.

    Parsing problems raise FileFormatError; a table that parses but is not a
    metric raises the matching MetricError.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FileFormatError(f"{path}: expected a JSON object")
    if "dist" in raw:
        labels = raw.get("labels")
        try:
            return validate_metric(np.asarray(raw["dist"], dtype=np.float64), labels)
        except (ValueError, TypeError) as exc:
            raise FileFormatError(f"{path}: malformed dist table: {exc}") from exc
    if "points" in raw:
        if raw.get("metric", "euclidean") != "euclidean":
            raise FileFormatError(f"{path}: unsupported metric {raw.get('metric')!r}")
        try:
            return space_from_points(raw["points"])
        except (ValueError, TypeError) as exc:
            raise FileFormatError(f"{path}: malformed points: {exc}") from exc
    raise FileFormatError(f"{path}: need either 'dist' or 'points'")
