"""Truncated hyperbolic fillings of finite metric spaces.

Vertices are (net point, height) pairs over a band of integer heights; two
vertices are adjacent when their heights differ by at most one and their
inflated balls intersect, with the intersection witnessed literally by a
point of the base space (finite spaces are not geodesic, so the radii-sum
shortcut is wrong).  The infinite filling is represented by a finite band:
the single vertex at the top height stands in for the descending direction,
and levels below the minimum separation repeat the full point set.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadArgument,
    DisconnectedGraph,
    FileFormatError,
    HeightBandEmpty,
    TauTooSmall,
    UnknownAnchor,
    UnknownVertex,
)
from .spaces import FiniteMetricSpace, separated_net

DEFAULT_DEPTH_MARGIN = 3


@dataclass(frozen=True)
class FillingParams:
    """Construction parameters: scale base alpha > 1, ball inflation tau,
    and an optional explicit height band.

    tau must exceed max(3, alpha/(alpha-1)); heights left as None are
    derived from the space in :func:`build_filling`.
    """

    alpha: float
    tau: float
    n_min: int | None = None
    n_max: int | None = None
    depth_margin: int = DEFAULT_DEPTH_MARGIN

    def __post_init__(self):
        if not self.alpha > 1:
            raise BadArgument(f"alpha must exceed 1, got {self.alpha}")
        bound = max(3.0, self.alpha / (self.alpha - 1.0))
        if not self.tau > bound:
            raise TauTooSmall(f"tau must exceed {bound}, got {self.tau}")
        if self.n_min is not None and self.n_max is not None:
            if not self.n_min < self.n_max:
                raise HeightBandEmpty(
                    f"empty height band [{self.n_min}, {self.n_max}]"
                )


@dataclass(frozen=True, order=True)
class Vertex:
    """A net point at a height level: center indexes the base space."""

    center: int
    height: int


@dataclass(frozen=True)
class GeodesicPoint:
    """A point at real height on the fixed vertical ray of its anchor."""

    anchor: int
    height: float


class VertexGraph:
    """Unit-edge graph over a vertex list with cached all-pairs distances."""

    def __init__(self, vertices: list[Vertex], edges: set[tuple[int, int]]):
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        self.index: dict[Vertex, int] = {v: i for i, v in enumerate(self.vertices)}
        self.edges: frozenset[tuple[int, int]] = frozenset(
            (min(a, b), max(a, b)) for a, b in edges
        )
        nv = len(self.vertices)
        adj: list[list[int]] = [[] for _ in range(nv)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(nb)) for nb in adj
        )
        self.dist = _all_pairs_bfs(self.adjacency)
        self.dist.setflags(write=False)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def vertex_id(self, v: Vertex) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise UnknownVertex(f"vertex {v} not in graph") from None

    def graph_distance(self, v: Vertex | int, w: Vertex | int) -> int:
        i = v if isinstance(v, int) else self.vertex_id(v)
        j = w if isinstance(w, int) else self.vertex_id(w)
        nv = self.vertex_count
        if not (0 <= i < nv and 0 <= j < nv):
            raise UnknownVertex(f"vertex id out of range: ({i}, {j})")
        return int(self.dist[i, j])


def _all_pairs_bfs(adjacency) -> np.ndarray:
    nv = len(adjacency)
    dist = np.full((nv, nv), -1, dtype=np.int32)
    for s in range(nv):
        row = dist[s]
        row[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            du = row[u]
            for w in adjacency[u]:
                if row[w] < 0:
                    row[w] = du + 1
                    queue.append(w)
    if (dist < 0).any():
        raise DisconnectedGraph("vertex graph is not connected")
    return dist


@dataclass(frozen=True)
class FillingGraph:
    """A built filling: base space, resolved parameters, per-level nets,
    the vertex graph, the root vertex, and the fixed anchored rays."""

    base: FiniteMetricSpace
    params: FillingParams
    levels: dict[int, tuple[int, ...]]
    graph: VertexGraph
    root: Vertex
    # ray_ids[z][n - n_min] is the vertex id of the fixed ray of point z at
    # height n; min_anchor[i] is the smallest point whose ray passes through
    # vertex i.
    ray_ids: tuple[tuple[int, ...], ...]
    min_anchor: tuple[int, ...]

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def tau(self) -> float:
        return self.params.tau

    @property
    def n_min(self) -> int:
        return self.params.n_min

    @property
    def n_max(self) -> int:
        return self.params.n_max

    @property
    def vertices(self) -> tuple[Vertex, ...]:
        return self.graph.vertices

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    @property
    def root_id(self) -> int:
        return self.graph.index[self.root]

    def vertex_id(self, v: Vertex) -> int:
        return self.graph.vertex_id(v)

    def graph_distance(self, v: Vertex | int, w: Vertex | int) -> int:
        return self.graph.graph_distance(v, w)

    def ray_vertex_id(self, z: int, n: int) -> int:
        """Vertex id of point z's fixed ray at integer height n."""
        if not 0 <= z < self.base.n:
            raise UnknownAnchor(f"anchor {z} not in base space")
        if not self.n_min <= n <= self.n_max:
            raise BadArgument(f"height {n} outside band [{self.n_min}, {self.n_max}]")
        return self.ray_ids[z][n - self.n_min]

    def interior_ids(self) -> list[int]:
        """Vertices strictly inside the height band; envelope fits use these
        to keep truncation edge effects out of the constants."""
        return [
            i
            for i, v in enumerate(self.vertices)
            if self.n_min < v.height < self.n_max
        ]

    def heights(self) -> np.ndarray:
        return np.array([v.height for v in self.vertices], dtype=np.int64)


def default_height_band(space: FiniteMetricSpace, alpha: float,
                        depth_margin: int = DEFAULT_DEPTH_MARGIN) -> tuple[int, int]:
    """Band wide enough that the top level is a single net point and the
    bottom levels are saturated: n_min = floor(-log_a diam) - 1,
    n_max = ceil(-log_a s_min) + margin."""
    log_a = math.log(alpha)
    n_min = math.floor(-math.log(space.diameter) / log_a) - 1
    n_max = math.ceil(-math.log(space.min_separation) / log_a) + depth_margin
    return n_min, n_max


def build_filling(space: FiniteMetricSpace, params: FillingParams) -> FillingGraph:
    """Construct the truncated filling of a finite metric space.

    Levels are greedy maximal separated nets at radius alpha^-n; edges follow
    the inflated-ball intersection rule with the witness scanned over the
    base points; all-pairs graph distances are cached by breadth-first
    search.  The top level must be a single vertex (the truncated descending
    direction); with the default band this always holds.
    """
    alpha, tau = params.alpha, params.tau
    n_min, n_max = params.n_min, params.n_max
    if n_min is None or n_max is None:
        d_min, d_max = default_height_band(space, alpha, params.depth_margin)
        n_min = d_min if n_min is None else n_min
        n_max = d_max if n_max is None else n_max
    if not n_min < n_max:
        raise HeightBandEmpty(f"empty height band [{n_min}, {n_max}]")
    resolved = FillingParams(alpha, tau, n_min, n_max, params.depth_margin)

    heights = range(n_min, n_max + 1)
    levels = {n: tuple(separated_net(space, alpha ** (-n))) for n in heights}
    if len(levels[n_min]) != 1:
        raise BadArgument(
            f"top level has {len(levels[n_min])} net points; lower n_min so "
            "that alpha^-n_min exceeds the diameter"
        )

    vertices: list[Vertex] = []
    ids_at: dict[int, list[int]] = {}
    for n in heights:
        ids_at[n] = []
        for c in levels[n]:
            ids_at[n].append(len(vertices))
            vertices.append(Vertex(c, n))

    D = space.dist
    edges: set[tuple[int, int]] = set()
    for n in heights:
        for m in (n, n + 1):
            if m > n_max:
                continue
            ca, cb = levels[n], levels[m]
            in_a = D[:, ca] < tau * alpha ** (-n)
            in_b = D[:, cb] < tau * alpha ** (-m)
            meet = in_a.T.astype(np.int64) @ in_b.astype(np.int64)
            for ai, bi in zip(*np.nonzero(meet)):
                va, vb = ids_at[n][ai], ids_at[m][bi]
                if va != vb:
                    edges.add((min(va, vb), max(va, vb)))

    graph = VertexGraph(vertices, edges)
    root = vertices[0]

    ray_ids = []
    for z in range(space.n):
        col = []
        for n in heights:
            cand = levels[n]
            nearest = int(np.argmin(D[z, cand]))
            col.append(ids_at[n][nearest])
        ray_ids.append(tuple(col))

    min_anchor = [-1] * len(vertices)
    for z in range(space.n):
        for vid in ray_ids[z]:
            if min_anchor[vid] < 0:
                min_anchor[vid] = z

    return FillingGraph(
        base=space,
        params=resolved,
        levels=levels,
        graph=graph,
        root=root,
        ray_ids=tuple(ray_ids),
        min_anchor=tuple(min_anchor),
    )


def graph_distance(filling: FillingGraph, v: Vertex, w: Vertex) -> int:
    """Unweighted shortest-path distance between two vertices."""
    return filling.graph_distance(v, w)


def anchored_ray(filling: FillingGraph, z: int) -> list[Vertex]:
    """The fixed vertical ray of base point z: at each height the net vertex
    whose center is nearest to z (ties to the smaller center index).

    Covering by the nets puts the nearest center within alpha^-n of z, so
    every entry satisfies the anchoring bound d(z, center) < (tau/3) alpha^-n
    and consecutive entries are neighbors (z witnesses both balls).
    """
    if not 0 <= z < filling.base.n:
        raise UnknownAnchor(f"anchor {z} not in base space")
    return [filling.vertices[i] for i in filling.ray_ids[z]]


def eval_ray(filling: FillingGraph, z: int, t: float) -> GeodesicPoint:
    """Point of z's ray at height t, clamped into the band (the truncation
    surrogate for the infinite vertical geodesic)."""
    if not 0 <= z < filling.base.n:
        raise UnknownAnchor(f"anchor {z} not in base space")
    h = min(max(float(t), float(filling.n_min)), float(filling.n_max))
    return GeodesicPoint(z, h)


def point_distance(filling: FillingGraph, p: GeodesicPoint, q: GeodesicPoint) -> float:
    """Distance between ray points at real heights.

    Same anchor: exact height difference.  Distinct anchors: minimum over
    rounding each height to its floor/ceil ray vertex of the fractional
    offsets plus the vertex graph distance.  Documented approximation: the
    result is within +-2 of the true metric-graph distance.
    """
    for gp in (p, q):
        if not 0 <= gp.anchor < filling.base.n:
            raise UnknownAnchor(f"anchor {gp.anchor} not in base space")
        if not filling.n_min <= gp.height <= filling.n_max:
            raise BadArgument(
                f"height {gp.height} outside band [{filling.n_min}, {filling.n_max}]"
            )
    if p.anchor == q.anchor:
        return abs(p.height - q.height)
    best = math.inf
    for hp in {math.floor(p.height), math.ceil(p.height)}:
        for hq in {math.floor(q.height), math.ceil(q.height)}:
            vp = filling.ray_vertex_id(p.anchor, hp)
            vq = filling.ray_vertex_id(q.anchor, hq)
            d = abs(p.height - hp) + filling.graph.dist[vp, vq] + abs(q.height - hq)
            best = min(best, d)
    return float(best)


# --- filling files -------------------------------------------------------------

def filling_to_dict(filling: FillingGraph) -> dict:
    return {
        "alpha": filling.alpha,
        "tau": filling.tau,
        "n_min": filling.n_min,
        "n_max": filling.n_max,
        "vertices": [
            {"id": i, "center": v.center, "height": v.height}
            for i, v in enumerate(filling.vertices)
        ],
        "edges": sorted([a, b] for a, b in filling.graph.edges),
    }


def save_filling(filling: FillingGraph, path) -> None:
    Path(path).write_text(
        json.dumps(filling_to_dict(filling), sort_keys=True), encoding="utf-8"
    )


@dataclass(frozen=True)
class LoadedFilling:
    """A filling read back from file: parameters plus the vertex graph.

    Levels, rays and the base space are not part of the file format, so
    operations needing them require the original :class:`FillingGraph`.
    """

    alpha: float
    tau: float
    n_min: int
    n_max: int
    graph: VertexGraph


def load_filling(path) -> LoadedFilling:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    try:
        vertices = [None] * len(raw["vertices"])
        for item in raw["vertices"]:
            vertices[int(item["id"])] = Vertex(int(item["center"]), int(item["height"]))
        if any(v is None for v in vertices):
            raise FileFormatError(f"{path}: vertex ids are not 0..n-1")
        edges = {(int(a), int(b)) for a, b in raw["edges"]}
        return LoadedFilling(
            alpha=float(raw["alpha"]),
            tau=float(raw["tau"]),
            n_min=int(raw["n_min"]),
            n_max=int(raw["n_max"]),
            graph=VertexGraph(vertices, edges),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FileFormatError(f"{path}: malformed filling file: {exc}") from exc


def filling_to_dot(filling: FillingGraph | LoadedFilling) -> str:
    """Graphviz dump with one node per vertex labeled "center@height"."""
    lines = ["graph filling {"]
    for i, v in enumerate(filling.graph.vertices):
        lines.append(f'  v{i} [label="{v.center}@{v.height}"];')
    for a, b in sorted(filling.graph.edges):
        lines.append(f"  v{a} -- v{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
