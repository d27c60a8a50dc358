"""Gromov products, four-point hyperbolicity scans, Busemann surrogates,
and the basepoint-free cross-difference on vertex graphs.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadArgument, TooLargeForExhaustive
from .filling import FillingGraph, LoadedFilling, Vertex, VertexGraph

DistanceOracle = Callable[[int, int], float]

EXHAUSTIVE_VERTEX_CAP = 80


def gromov_product(dist: DistanceOracle, x, y, o) -> float:
    """(x|y)_o = (d(x,o) + d(y,o) - d(x,y)) / 2.

    Nonnegative in any metric space and symmetric in x, y.  The oracle is a
    two-argument distance callable, e.g. ``space.distance`` or
    ``filling.graph_distance``.
    """
    return 0.5 * (dist(x, o) + dist(y, o) - dist(x, y))


def cross_difference(dist: DistanceOracle, x, y, z, u, o) -> float:
    """(x|y)_o + (z|u)_o - (x|z)_o - (y|u)_o.

    The basepoint terms cancel algebraically, so the value does not depend
    on o; it flips sign when y and z are swapped.
    """
    return (
        gromov_product(dist, x, y, o)
        + gromov_product(dist, z, u, o)
        - gromov_product(dist, x, z, o)
        - gromov_product(dist, y, u, o)
    )


@dataclass(frozen=True)
class HyperbolicityReport:
    """Minimal four-point defect over the scanned quadruples.

    In exhaustive mode ``delta`` is exact over all vertex quadruples; in
    sampled mode it is a lower bound.  ``witness`` is a worst quadruple
    (x, y, z, o) of vertex ids and ``sample_count`` the number of quadruples
    scanned.
    """

    delta: float
    mode: str
    sample_count: int
    witness: tuple[int, int, int, int]


def _as_graph(filling) -> VertexGraph:
    if isinstance(filling, VertexGraph):
        return filling
    if isinstance(filling, (FillingGraph, LoadedFilling)):
        return filling.graph
    raise BadArgument(f"expected a filling or vertex graph, got {type(filling)!r}")


def _delta_at_base(D: np.ndarray, o: int) -> tuple[float, tuple[int, int, int, int]]:
    """Worst defect min((x|z)_o, (z|y)_o) - (x|y)_o over x, y, z."""
    nv = D.shape[0]
    col = D[:, o]
    g = 0.5 * (col[:, None] + col[None, :] - D)
    best = np.full((nv, nv), -np.inf)
    for z in range(nv):
        np.maximum(best, np.minimum(g[:, z][:, None], g[z, :][None, :]), out=best)
    defect = best - g
    flat = int(np.argmax(defect))
    x, y = divmod(flat, nv)
    z = int(np.argmax(np.minimum(g[x, :], g[:, y])))
    return float(defect[x, y]), (x, y, z, o)


def hyperbolicity_delta(
    filling,
    mode: str = "exhaustive",
    sample_count: int = 100_000,
    seed: int = 0,
    max_exhaustive: int = EXHAUSTIVE_VERTEX_CAP,
    jobs: int | None = None,
) -> HyperbolicityReport:
    """Smallest delta for which the four-point condition
    (x|y)_o >= min((x|z)_o, (z|y)_o) - delta holds over the scanned
    quadruples (x, y, z, o) of vertices.

    Exhaustive mode refuses graphs with more than ``max_exhaustive`` vertices
    (the scan is quartic); it may be partitioned over ``jobs`` worker
    threads, with a reduction that does not depend on scheduling.  Sampled
    mode draws ``sample_count`` quadruples of four uniform vertex picks,
    deterministically per seed, and yields a lower bound on the exact delta.
    """
    graph = _as_graph(filling)
    nv = graph.vertex_count
    D = graph.dist.astype(np.float64)

    if mode == "exhaustive":
        if nv > max_exhaustive:
            raise TooLargeForExhaustive(
                f"{nv} vertices exceeds the exhaustive cap {max_exhaustive}"
            )
        if jobs is not None and jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(lambda o: _delta_at_base(D, o), range(nv)))
        else:
            results = [_delta_at_base(D, o) for o in range(nv)]
        delta, witness = -np.inf, (0, 0, 0, 0)
        for value, quad in results:
            if value > delta:
                delta, witness = value, quad
        return HyperbolicityReport(float(delta), "exhaustive", nv ** 4, witness)

    if mode == "sampled":
        if sample_count <= 0:
            raise BadArgument("sample_count must be positive")
        rng = np.random.default_rng(seed)
        quads = rng.integers(0, nv, size=(sample_count, 4))
        xs, ys, zs, os_ = quads.T
        pxy = 0.5 * (D[xs, os_] + D[ys, os_] - D[xs, ys])
        pxz = 0.5 * (D[xs, os_] + D[zs, os_] - D[xs, zs])
        pzy = 0.5 * (D[zs, os_] + D[ys, os_] - D[zs, ys])
        defect = np.minimum(pxz, pzy) - pxy
        i = int(np.argmax(defect))
        return HyperbolicityReport(
            float(defect[i]), "sampled", sample_count, tuple(int(q) for q in quads[i])
        )

    raise BadArgument(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class BusemannSurrogate:
    """Renormalized distance to the truncated descending direction.

    The descending column of the chosen anchor is traversed from its deepest
    vertex gamma(0) down to the root gamma(T), T being the band width, and
    b[v] = d(gamma(T), v) - T.  In the truncation gamma(T) is the root for
    every anchor, so the values are anchor-independent; the anchor is kept
    for reference.
    """

    filling: FillingGraph
    anchor: int
    column_ids: tuple[int, ...]
    values: np.ndarray
    origin_id: int
    depth: int

    def value(self, v: Vertex | int) -> float:
        i = v if isinstance(v, int) else self.filling.vertex_id(v)
        return float(self.values[i])


def busemann_values(filling: FillingGraph, z: int) -> BusemannSurrogate:
    """Busemann surrogate along the fixed descending ray of point z.

    b is 1-Lipschitz: |b(v) - b(w)| <= d(v, w) for all vertex pairs, and
    b(root) = -T.
    """
    column = filling.ray_ids[z]
    origin = column[-1]
    depth = filling.n_max - filling.n_min
    root = column[0]
    values = filling.graph.dist[root].astype(np.float64) - depth
    values.setflags(write=False)
    return BusemannSurrogate(filling, z, tuple(column), values, origin, depth)


def busemann_product(surrogate: BusemannSurrogate, x: Vertex | int, y: Vertex | int) -> float:
    """(x|y)_b = (b(x) + b(y) - d(x, y)) / 2."""
    filling = surrogate.filling
    i = x if isinstance(x, int) else filling.vertex_id(x)
    j = y if isinstance(y, int) else filling.vertex_id(y)
    return 0.5 * (
        float(surrogate.values[i])
        + float(surrogate.values[j])
        - filling.graph.graph_distance(i, j)
    )


def busemann_deviation(surrogate: BusemannSurrogate) -> float:
    """Largest gap between (x|y)_b and (x|y)_o - (x|w)_o - (y|w)_o over all
    vertex pairs, with o the deepest column vertex and w the root.

    Finiteness of this fitted constant is the truncated form of the
    renormalization identity relating the two products.
    """
    filling = surrogate.filling
    D = filling.graph.dist.astype(np.float64)
    b = surrogate.values
    o = surrogate.origin_id
    r = filling.root_id
    pb = 0.5 * (b[:, None] + b[None, :] - D)
    po = 0.5 * (D[:, o][:, None] + D[:, o][None, :] - D)
    pw = 0.5 * (D[:, o] + D[r, o] - D[:, r])
    rhs = po - pw[:, None] - pw[None, :]
    return float(np.abs(pb - rhs).max())


def busemann_three_point_fit(surrogate: BusemannSurrogate) -> float:
    """Smallest constant c with (x|y)_b >= min((x|e)_b, (e|y)_b) - c over
    all vertex triples."""
    filling = surrogate.filling
    D = filling.graph.dist.astype(np.float64)
    b = surrogate.values
    pb = 0.5 * (b[:, None] + b[None, :] - D)
    nv = D.shape[0]
    best = np.full((nv, nv), -np.inf)
    for e in range(nv):
        np.maximum(best, np.minimum(pb[:, e][:, None], pb[e, :][None, :]), out=best)
    return float((best - pb).max())


def visual_comparability(filling: FillingGraph,
                         surrogate: BusemannSurrogate | None = None) -> float:
    """Smallest C with d_Z(z, z') / alpha^-(.|.)_b in [1/C, C] for all base
    pairs, the boundary product being taken at the deepest ray vertices.
    """
    if surrogate is None:
        surrogate = busemann_values(filling, 0)
    alpha = filling.alpha
    worst = 1.0
    for z in range(filling.base.n):
        for w in range(z + 1, filling.base.n):
            p = busemann_product(
                surrogate,
                filling.ray_ids[z][-1],
                filling.ray_ids[w][-1],
            )
            ratio = filling.base.dist[z, w] / alpha ** (-p)
            worst = max(worst, ratio, 1.0 / ratio)
    return worst
