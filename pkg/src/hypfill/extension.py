"""Extending a boundary map to the fillings through the hyperbolic cone.

The pipeline has three legs.  A per-point distortion profile turns the map's
local magnification into a monotone piecewise-linear function between log
scales; the induced cone map sends (z, t) to (f(z), 2^-profile(-log2 t));
and the scale/height bridges translate between cone points and ray points of
a filling.  Composing bridge-inverse, cone map, and bridge gives the raw
extension, which a final rounding step snaps to vertices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cone import ConePoint
from .errors import DegeneratePoint, UnknownPoint
from .filling import FillingGraph, GeodesicPoint, Vertex
from .qsmap import PointMap


@dataclass(frozen=True)
class DistortionProfile:
    """Monotone piecewise-linear transport of log scales at one point.

    Knots map -log2(source radius) to -log2(image radius).  Below the first
    knot (scales above the diameter) the profile continues with slope 1;
    above the last knot (scales below the resolution of the finite space) it
    continues with the slope of its finest segment, the best available
    estimate of the map's behavior past the resolution.  Both tail slopes
    are positive, so the range is all of the reals.
    """

    knots_in: np.ndarray
    knots_out: np.ndarray
    deep_slope: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.knots_in, dtype=np.float64)
        p = np.asarray(self.knots_out, dtype=np.float64)
        if t.ndim != 1 or t.shape != p.shape or t.size == 0:
            raise ValueError("knot arrays must be one-dimensional and equal-length")
        if not (np.diff(t) > 0).all():
            raise ValueError("knot inputs must be strictly increasing")
        if not (np.diff(p) >= 0).all():
            raise ValueError("knot outputs must be nondecreasing")
        if not self.deep_slope > 0:
            raise ValueError("deep tail slope must be positive")
        object.__setattr__(self, "knots_in", t)
        object.__setattr__(self, "knots_out", p)


def build_profile(pmap: PointMap, z: int) -> DistortionProfile:
    """Distortion profile of the map at source point z.

    For each distinct distance r from z, L(r) is the largest image distance
    from f(z) among points within r; knots are (-log2 r, -log2 L(r)).
    L is nondecreasing in r, so the profile is automatically monotone.
    """
    if not 0 <= z < pmap.n:
        raise UnknownPoint(f"point {z} not in source space")
    others = [y for y in range(pmap.n) if y != z]
    if not others:
        raise DegeneratePoint(f"point {z} has no distinct neighbor")
    src = pmap.source.dist[z, others]
    img = pmap.image_dist()[z, others]
    order = np.argsort(src, kind="stable")
    src, img = src[order], np.maximum.accumulate(img[order])
    radii = np.unique(src)
    # L at each distinct radius is the running max at the last point within it
    boundary = np.searchsorted(src, radii, side="right") - 1
    lvals = img[boundary]
    knots_in = -np.log2(radii[::-1])
    knots_out = -np.log2(lvals[::-1])
    deep_slope = 1.0
    if knots_in.size >= 2:
        slope = (knots_out[-1] - knots_out[-2]) / (knots_in[-1] - knots_in[-2])
        if slope > 0:
            deep_slope = float(slope)
    return DistortionProfile(knots_in, knots_out, deep_slope)


def eval_profile(profile: DistortionProfile, t: float) -> float:
    """Piecewise-linear value; slope-1 continuation below the first knot,
    finest-segment slope above the last."""
    ts, ps = profile.knots_in, profile.knots_out
    if t <= ts[0]:
        return float(ps[0] + (t - ts[0]))
    if t >= ts[-1]:
        return float(ps[-1] + profile.deep_slope * (t - ts[-1]))
    return float(np.interp(t, ts, ps))


def build_profiles(pmap: PointMap) -> list[DistortionProfile]:
    return [build_profile(pmap, z) for z in range(pmap.n)]


def cone_map(pmap: PointMap, profiles, p: ConePoint) -> ConePoint:
    """Induced map between cones: (z, t) -> (f(z), 2^-profile_z(-log2 t)).

    Sends the vertical ray over z onto the vertical ray over f(z).
    """
    phi = eval_profile(profiles[p.point], -math.log2(p.scale))
    return ConePoint(pmap.forward[p.point], 2.0 ** (-phi))


def cone_to_filling(filling: FillingGraph, p: ConePoint) -> GeodesicPoint:
    """Scale-to-height bridge: (z, s) lands on z's ray at height
    -log s / log alpha, clamped into the band."""
    h = -math.log(p.scale) / math.log(filling.alpha)
    h = min(max(h, float(filling.n_min)), float(filling.n_max))
    return GeodesicPoint(p.point, h)


def filling_to_cone(filling: FillingGraph, v: Vertex) -> ConePoint:
    """Height-to-scale bridge at a vertex: scale alpha^-h(v), base point the
    smallest-index point whose fixed ray passes through the vertex.

    Every vertex carries its own center's ray, so the reverse lookup always
    succeeds; the nearest-point fallback only covers graphs built by other
    means.  The chosen point sits within (tau/3) alpha^-h(v) of the vertex
    center, matching the anchoring bound.
    """
    i = filling.vertex_id(v)
    z0 = filling.min_anchor[i]
    if z0 < 0:
        d = filling.base.dist[:, v.center]
        z0 = int(np.argmin(d))
    return ConePoint(z0, filling.alpha ** (-float(v.height)))


@dataclass(frozen=True)
class ExtensionResult:
    """The raw extension and its vertex snapping.

    geodesic_map holds the clamped ray points per source vertex id;
    raw_heights the unclamped image heights; cone_anchors the base point
    chosen by the height-to-scale bridge.  vertex_map and snap_deviation are
    filled by :func:`snap_to_vertices`; constants collects fitted envelope
    data written by the analysis layer.
    """

    source: FillingGraph
    target: FillingGraph
    geodesic_map: tuple[GeodesicPoint, ...]
    raw_heights: tuple[float, ...]
    cone_anchors: tuple[int, ...]
    vertex_map: tuple[int, ...] | None = None
    snap_deviation: float | None = None
    constants: dict | None = None


def extend_map(pmap: PointMap, source: FillingGraph, target: FillingGraph,
               profiles=None) -> ExtensionResult:
    """Raw extension: bridge each source vertex into the cone, apply the
    cone map, bridge back into the target filling.

    Before clamping, the image height of a vertex v with chosen point z0 is
    (log 2 / log alpha_W) * profile_z0(h(v) * log2 alpha_Z).
    """
    if profiles is None:
        profiles = build_profiles(pmap)
    log_aw = math.log(target.alpha)
    points, raws, anchors = [], [], []
    for v in source.vertices:
        cp = filling_to_cone(source, v)
        image = cone_map(pmap, profiles, cp)
        raw = -math.log(image.scale) / log_aw
        points.append(cone_to_filling(target, image))
        raws.append(raw)
        anchors.append(cp.point)
    return ExtensionResult(
        source=source,
        target=target,
        geodesic_map=tuple(points),
        raw_heights=tuple(raws),
        cone_anchors=tuple(anchors),
    )


def _round_half_down(h: float) -> int:
    return math.ceil(h - 0.5)


def snap_to_vertices(target: FillingGraph, result: ExtensionResult) -> ExtensionResult:
    """Replace each ray point by the ray vertex at the nearest integer
    height, ties rounding down.  The snapped vertex lies on the same fixed
    ray, so the displacement is the height offset, at most 1/2.
    """
    ids = []
    worst = 0.0
    for gp in result.geodesic_map:
        n = _round_half_down(gp.height)
        n = min(max(n, target.n_min), target.n_max)
        ids.append(target.ray_vertex_id(gp.anchor, n))
        worst = max(worst, abs(gp.height - n))
    return replace(result, vertex_map=tuple(ids), snap_deviation=worst)


# --- extension files -------------------------------------------------------------

def extension_to_dict(result: ExtensionResult) -> dict:
    return {
        "vertex_map": [
            [i, int(t)] for i, t in enumerate(result.vertex_map or [])
        ],
        "geodesic_map": [
            [i, gp.anchor, gp.height] for i, gp in enumerate(result.geodesic_map)
        ],
        "constants": dict(result.constants or {}),
    }


def save_extension(result: ExtensionResult, path) -> None:
    Path(path).write_text(
        json.dumps(extension_to_dict(result), sort_keys=True), encoding="utf-8"
    )
