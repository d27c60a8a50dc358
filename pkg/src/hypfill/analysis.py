"""Quantitative verification: rough quasi-isometry envelopes, composition
constants, strong four-point checks, boundary-map extraction, and the
round-trip report tying the pipeline together.

Envelope constants are fitted over the interior height band only; the band
edges have no deeper neighbors and would inflate every constant with
truncation artifacts rather than geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, EmptyMap, OmegaDirectionViolated
from .extension import build_profiles, extend_map, snap_to_vertices
from .filling import FillingGraph, FillingParams, build_filling
from .qsmap import PointMap, PowerControl, fit_lambda, qs_check, qs_fit_lambda


@dataclass(frozen=True)
class QIEnvelope:
    """Additive constant and coboundedness of a vertex map at given slopes.

    For every checked pair, L1*d - k <= d' <= L2*d + k, and every interior
    target vertex lies within ``cobound`` of the image.
    """

    L1: float
    L2: float
    k: float
    cobound: float


def _vertex_array(G, n_source: int) -> np.ndarray:
    arr = np.asarray(G, dtype=np.int64)
    if arr.ndim != 1 or arr.size != n_source:
        raise EmptyMap("vertex map must list one target id per source vertex")
    return arr


def qi_envelope(G, source: FillingGraph, target: FillingGraph,
                L1: float, L2: float) -> QIEnvelope:
    """Fit the minimal additive constant of a vertex map at fixed slopes.

    k is the largest of L1*d - d' and d' - L2*d over all interior source
    vertex pairs (never below 0); cobound is the largest distance from an
    interior target vertex to the image of the interior source set.
    """
    if not (0 < L1 <= L2):
        raise BadParams(f"need 0 < L1 <= L2, got ({L1}, {L2})")
    g = _vertex_array(G, source.vertex_count)
    inner = source.interior_ids()
    if not inner:
        raise EmptyMap("interior height band is empty")
    dz = source.graph.dist[np.ix_(inner, inner)].astype(np.float64)
    gi = g[inner]
    dw = target.graph.dist[np.ix_(gi, gi)].astype(np.float64)
    k = max(
        float((L1 * dz - dw).max()),
        float((dw - L2 * dz).max()),
        0.0,
    )
    tgt_inner = target.interior_ids()
    cobound = float(
        target.graph.dist[np.ix_(tgt_inner, gi)].min(axis=1).max()
    )
    return QIEnvelope(L1, L2, k, cobound)


def predicted_slopes(theta: float, alpha_z: float, alpha_w: float) -> tuple[float, float]:
    """Slopes of the extension of a power quasi-symmetric map:
    (log alpha_Z / (theta log alpha_W), theta log alpha_Z / log alpha_W).
    """
    if theta < 1 or alpha_z <= 1 or alpha_w <= 1:
        raise BadParams("need theta >= 1 and both alphas > 1")
    r = math.log(alpha_z) / math.log(alpha_w)
    return r / theta, r * theta


def predicted_exponents(L1: float, L2: float, alpha_z: float,
                        alpha_w: float) -> tuple[float, float]:
    """Boundary control exponents recovered from slopes:
    theta_i = (log alpha_W / log alpha_Z) * L_i.

    Composed with :func:`predicted_slopes` this returns (1/theta, theta).
    """
    if not (0 < L1 <= L2) or alpha_z <= 1 or alpha_w <= 1:
        raise BadParams("need 0 < L1 <= L2 and both alphas > 1")
    r = math.log(alpha_w) / math.log(alpha_z)
    return r * L1, r * L2


def composition_constant(env1, env2) -> tuple[tuple[float, float], float]:
    """Predicted envelope of a composition g o f from factor envelopes
    f = (a1, a2, k1) and g = (a3, a4, k2): slopes (a1*a3, a2*a4) and
    additive constant a4*(k1+1) + 2*k2 + 1.
    """
    a1, a2, k1 = env1
    a3, a4, k2 = env2
    return (a1 * a3, a2 * a4), a4 * (k1 + 1.0) + 2.0 * k2 + 1.0


def strong_qi_check(G, source: FillingGraph, target: FillingGraph,
                    c1: float, c2: float, sample_count: int = 20_000,
                    seed: int = 0) -> float:
    """Largest violation of the two-sided cross-difference envelope
    c1*<x,y,z,u> - d <= <Gx,Gy,Gz,Gu> <= c2*<x,y,z,u> + d
    over seeded interior quadruples with nonnegative source cross-difference.
    """
    if not (0 < c1 <= c2):
        raise BadParams(f"need 0 < c1 <= c2, got ({c1}, {c2})")
    g = _vertex_array(G, source.vertex_count)
    inner = np.asarray(source.interior_ids(), dtype=np.int64)
    rng = np.random.default_rng(seed)
    quads = inner[rng.integers(0, inner.size, size=(sample_count, 4))]
    xs, ys, zs, us = quads.T
    dz = source.graph.dist.astype(np.float64)
    dw = target.graph.dist.astype(np.float64)
    cd_src = 0.5 * (dz[xs, zs] + dz[ys, us] - dz[xs, ys] - dz[zs, us])
    gx, gy, gz, gu = g[xs], g[ys], g[zs], g[us]
    cd_img = 0.5 * (dw[gx, gz] + dw[gy, gu] - dw[gx, gy] - dw[gz, gu])
    keep = cd_src >= 0
    cd_src, cd_img = cd_src[keep], cd_img[keep]
    if cd_src.size == 0:
        return 0.0
    return max(
        float((c1 * cd_src - cd_img).max()),
        float((cd_img - c2 * cd_src).max()),
        0.0,
    )


@dataclass(frozen=True)
class BoundaryResult:
    """Boundary map read off a vertex map between fillings.

    forward[z] is the target point whose deep ray vertex is closest to the
    image of z's deep ray vertex; mu[z] bounds, over interior heights, the
    distance from the image of z's ray to the chosen target ray.  A vertex
    map need not induce a bijection; the flag reports it rather than failing.
    """

    forward: tuple[int, ...]
    mu: tuple[float, ...]
    bijective: bool
    source: FillingGraph
    target: FillingGraph

    def as_point_map(self) -> PointMap:
        if not self.bijective:
            raise BadParams("boundary map is not a bijection")
        return PointMap(self.source.base, self.target.base, self.forward)


def boundary_map(G, source: FillingGraph, target: FillingGraph) -> BoundaryResult:
    """Extract the boundary map of a vertex map that respects the truncated
    descending direction (image of the source root in the bottom quarter of
    the target band; otherwise OmegaDirectionViolated).
    """
    g = _vertex_array(G, source.vertex_count)
    root_image_height = target.vertices[g[source.root_id]].height
    cutoff = target.n_min + (target.n_max - target.n_min) / 4.0
    if root_image_height > cutoff:
        raise OmegaDirectionViolated(
            f"root image height {root_image_height} above cutoff {cutoff}"
        )
    dw = target.graph.dist
    deep_targets = [target.ray_ids[w][-1] for w in range(target.base.n)]
    forward = []
    mus = []
    inner_heights = range(source.n_min + 1, source.n_max)
    for z in range(source.base.n):
        deep_image = g[source.ray_ids[z][-1]]
        w = int(np.argmin(dw[deep_image, deep_targets]))
        forward.append(w)
        ray_w = list(target.ray_ids[w])
        mu = 0.0
        for n in inner_heights:
            img = g[source.ray_ids[z][n - source.n_min]]
            mu = max(mu, float(dw[img, ray_w].min()))
        mus.append(mu)
    bijective = sorted(forward) == list(range(target.base.n))
    return BoundaryResult(
        tuple(forward), tuple(mus), bijective, source, target
    )


@dataclass(frozen=True)
class RoundTripReport:
    """End-to-end record: input control, extension envelope at the predicted
    slopes, recovered boundary map, recovered control, and pass flags."""

    theta: float
    input_lambda: float
    slopes: tuple[float, float]
    envelope: QIEnvelope
    recovered_forward: tuple[int, ...]
    recovered_theta: tuple[float, float]
    recovered_lambda: float
    boundary_equal: bool
    bijective: bool
    qs_pass: bool
    environment: dict

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "input_lambda": self.input_lambda,
            "slopes": list(self.slopes),
            "envelope": {
                "L1": self.envelope.L1,
                "L2": self.envelope.L2,
                "k": self.envelope.k,
                "cobound": self.envelope.cobound,
            },
            "recovered_forward": list(self.recovered_forward),
            "recovered_theta": list(self.recovered_theta),
            "recovered_lambda": self.recovered_lambda,
            "boundary_equal": self.boundary_equal,
            "bijective": self.bijective,
            "qs_pass": self.qs_pass,
            "environment": self.environment,
        }


def roundtrip(pmap: PointMap, theta: float, alphas=(2.0, 2.0), taus=(4.0, 4.0),
              depth: int = 3) -> RoundTripReport:
    """Build both fillings, extend the map, fit the envelope at the
    predicted slopes, extract the boundary map, and fit the recovered
    control at the predicted exponents.
    """
    alpha_z, alpha_w = alphas
    tau_z, tau_w = taus
    input_lambda = qs_fit_lambda(pmap, theta)
    source = build_filling(
        pmap.source, FillingParams(alpha_z, tau_z, depth_margin=depth)
    )
    target = build_filling(
        pmap.target, FillingParams(alpha_w, tau_w, depth_margin=depth)
    )
    profiles = build_profiles(pmap)
    result = snap_to_vertices(target, extend_map(pmap, source, target, profiles))
    L1, L2 = predicted_slopes(theta, alpha_z, alpha_w)
    env = qi_envelope(result.vertex_map, source, target, L1, L2)
    bnd = boundary_map(result.vertex_map, source, target)
    theta1, theta2 = predicted_exponents(L1, L2, alpha_z, alpha_w)
    boundary_equal = bnd.forward == pmap.forward
    recovered_lambda = float("inf")
    qs_pass = False
    if bnd.bijective:
        recovered = bnd.as_point_map()
        recovered_lambda = fit_lambda(recovered, theta1, theta2)
        ctrl = PowerControl(theta1, theta2, max(recovered_lambda, 1.0))
        qs_pass = qs_check(recovered, ctrl).passed
    return RoundTripReport(
        theta=theta,
        input_lambda=input_lambda,
        slopes=(L1, L2),
        envelope=env,
        recovered_forward=bnd.forward,
        recovered_theta=(theta1, theta2),
        recovered_lambda=recovered_lambda,
        boundary_equal=boundary_equal,
        bijective=bnd.bijective,
        qs_pass=qs_pass,
        environment={
            "alpha_z": alpha_z,
            "alpha_w": alpha_w,
            "tau_z": tau_z,
            "tau_w": tau_w,
            "depth_margin": depth,
            "source_band": [source.n_min, source.n_max],
            "target_band": [target.n_min, target.n_max],
            "max_mu": max(bnd.mu),
            "snap_deviation": result.snap_deviation,
        },
    )
