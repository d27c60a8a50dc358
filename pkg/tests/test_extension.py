import json
import math

import numpy as np
import pytest

from hypfill.cone import ConePoint
from hypfill.errors import UnknownVertex
from hypfill.extension import (
    build_profile,
    build_profiles,
    cone_map,
    cone_to_filling,
    eval_profile,
    extend_map,
    extension_to_dict,
    filling_to_cone,
    save_extension,
    snap_to_vertices,
)
from hypfill.filling import FillingParams, Vertex, build_filling, point_distance
from hypfill.qsmap import identity_map
from hypfill.spaces import generate_space, snowflake, validate_metric


@pytest.fixture(scope="module")
def line3():
    return generate_space("line", 3)


@pytest.fixture(scope="module")
def snowflake_pipeline(line16, line16_flake, line16_filling):
    pmap = identity_map(line16, line16_flake)
    target = build_filling(line16_flake, FillingParams(2.0, 4.0, depth_margin=3))
    raw = extend_map(pmap, line16_filling, target)
    return pmap, line16_filling, target, snap_to_vertices(target, raw)


class TestProfiles:
    def test_identity_line_knots(self, line3):
        prof = build_profile(identity_map(line3, line3), 0)
        # distances 1 and 2 from the left endpoint
        assert list(prof.knots_in) == [-1.0, 0.0]
        assert list(prof.knots_out) == [-1.0, 0.0]
        for t in (-3.0, -0.4, 0.0, 2.5):
            assert eval_profile(prof, t) == pytest.approx(t, abs=1e-12)

    def test_rescaled_target_shifts_by_one(self, line3):
        doubled = identity_map(line3, line3.rescaled(2.0))
        base = build_profile(identity_map(line3, line3), 1)
        shifted = build_profile(doubled, 1)
        assert np.allclose(shifted.knots_out, base.knots_out - 1.0)

    def test_snowflake_half_knots(self, line16, line16_flake):
        prof = build_profile(identity_map(line16, line16_flake), 0)
        assert np.allclose(prof.knots_out, prof.knots_in / 2.0)
        assert prof.deep_slope == pytest.approx(0.5)

    def test_snowflake_grid_envelope(self, line16, line16_flake):
        # difference quotients over a wide grid stay inside [1/2, 2]
        prof = build_profile(identity_map(line16, line16_flake), 3)
        grid = np.linspace(-12.0, 12.0, 1000)
        vals = np.array([eval_profile(prof, t) for t in grid])
        slopes = np.diff(vals) / np.diff(grid)
        assert slopes.min() >= 0.5 - 1e-9
        assert slopes.max() <= 2.0 + 1e-9

    def test_eval_at_knots(self, rand8):
        prof = build_profile(identity_map(rand8, rand8), 2)
        for t, p in zip(prof.knots_in, prof.knots_out):
            assert eval_profile(prof, t) == p

    def test_slope_one_below_first_knot(self, rand8):
        prof = build_profile(identity_map(rand8, rand8), 2)
        t0, p0 = prof.knots_in[0], prof.knots_out[0]
        assert eval_profile(prof, t0 - 2.5) == pytest.approx(p0 - 2.5, abs=1e-12)

    def test_finest_slope_above_last_knot(self, line16, line16_flake):
        prof = build_profile(identity_map(line16, line16_flake), 0)
        t1, p1 = prof.knots_in[-1], prof.knots_out[-1]
        assert eval_profile(prof, t1 + 4.0) == pytest.approx(
            p1 + 4.0 * prof.deep_slope, abs=1e-12
        )

    def test_monotone_on_grid(self, rand8):
        prof = build_profile(identity_map(rand8, snowflake(rand8, 0.7)), 5)
        grid = np.linspace(-20.0, 20.0, 1000)
        vals = [eval_profile(prof, t) for t in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_profiles_of_nearby_points_stay_close(self, line16, line16_flake):
        # the profiles of two points agree up to a constant at scales above
        # their separation; report the fitted bound
        pmap = identity_map(line16, line16_flake)
        profiles = build_profiles(pmap)
        mu1 = 0.0
        for x in range(pmap.n):
            for y in range(x + 1, pmap.n):
                d = pmap.source.dist[x, y]
                for t in np.geomspace(d, 64.0 * d, 40):
                    gap = abs(
                        eval_profile(profiles[x], -math.log2(t))
                        - eval_profile(profiles[y], -math.log2(t))
                    )
                    mu1 = max(mu1, gap)
        assert np.isfinite(mu1)
        assert mu1 <= 4.0  # frozen from the fitted value 2.5 on this corpus


class TestConeMap:
    def test_identity_profile_fixes_points(self, line3):
        pmap = identity_map(line3, line3)
        profiles = build_profiles(pmap)
        out = cone_map(pmap, profiles, ConePoint(0, 0.25))
        assert out.point == 0
        assert out.scale == pytest.approx(0.25, abs=1e-12)

    def test_doubling_target_doubles_scale(self, line3):
        pmap = identity_map(line3, line3.rescaled(2.0))
        profiles = build_profiles(pmap)
        for t in (0.1, 0.5, 2.0):
            out = cone_map(pmap, profiles, ConePoint(1, t))
            assert out.scale == pytest.approx(2.0 * t, rel=1e-12)

    def test_ray_preservation(self, rand8):
        pmap = identity_map(rand8, snowflake(rand8, 0.5))
        profiles = build_profiles(pmap)
        rng = np.random.default_rng(1)
        for _ in range(50):
            z = int(rng.integers(0, rand8.n))
            t = float(np.exp(rng.uniform(-4, 4)))
            assert cone_map(pmap, profiles, ConePoint(z, t)).point == pmap.forward[z]

    def test_cone_distortion_envelope(self, line16, line16_flake):
        # sampled cone pairs stay inside a theta-slope envelope with a
        # finite fitted additive constant
        from hypfill.cone import cone_distance

        pmap = identity_map(line16, line16_flake)
        profiles = build_profiles(pmap)
        theta = 2.0
        rng = np.random.default_rng(8)
        k_fit = 0.0
        for _ in range(400):
            za, zb = (int(v) for v in rng.integers(0, pmap.n, size=2))
            sa, sb = np.exp(rng.uniform(math.log(1e-3), math.log(8.0), size=2))
            p, q = ConePoint(za, float(sa)), ConePoint(zb, float(sb))
            rho = cone_distance(pmap.source, p, q)
            rho_im = cone_distance(
                pmap.target, cone_map(pmap, profiles, p), cone_map(pmap, profiles, q)
            )
            k_fit = max(k_fit, rho / theta - rho_im, rho_im - theta * rho)
        assert np.isfinite(k_fit)
        assert k_fit <= 4.0  # frozen from the fitted value 1.9 on this corpus


class TestScaleHeightBridges:
    def test_quarter_scale_is_height_two(self, abc_filling):
        gp = cone_to_filling(abc_filling, ConePoint(0, 0.25))
        assert gp.height == pytest.approx(2.0, abs=1e-12)
        assert gp.anchor == 0

    def test_unit_scale_is_height_zero(self, abc_filling):
        assert cone_to_filling(abc_filling, ConePoint(1, 1.0)).height == 0.0

    def test_deep_scale_clamps(self, abc_filling):
        gp = cone_to_filling(abc_filling, ConePoint(0, 2.0 ** -40))
        assert gp.height == abc_filling.n_max

    def test_reverse_lookup_on_own_ray(self, abc_filling):
        for n, centers in abc_filling.levels.items():
            for c in centers:
                v = Vertex(c, n)
                cp = filling_to_cone(abc_filling, v)
                assert cp.scale == 2.0 ** (-n)
                # chosen point anchors through the vertex
                assert abc_filling.ray_ids[cp.point][n - abc_filling.n_min] \
                    == abc_filling.vertex_id(v)

    def test_scale_always_alpha_power(self, line16_filling):
        for v in line16_filling.vertices:
            cp = filling_to_cone(line16_filling, v)
            assert cp.scale == 2.0 ** (-v.height)

    def test_anchoring_distance_bound(self, line16_filling):
        f = line16_filling
        bound = f.tau / 3.0
        for v in f.vertices:
            cp = filling_to_cone(f, v)
            assert f.base.dist[cp.point, v.center] < bound * f.alpha ** (-v.height)

    def test_unknown_vertex(self, abc_filling):
        with pytest.raises(UnknownVertex):
            filling_to_cone(abc_filling, Vertex(0, 99))

    def test_bridge_round_trip_lands_on_vertex(self, abc_filling):
        # cone_to_filling(filling_to_cone(v)) sits on the chosen anchor's ray
        # at exactly the original height
        for v in abc_filling.vertices:
            cp = filling_to_cone(abc_filling, v)
            gp = cone_to_filling(abc_filling, cp)
            assert gp.height == pytest.approx(float(v.height), abs=1e-9)
            back = abc_filling.ray_vertex_id(gp.anchor, round(gp.height))
            assert back == abc_filling.vertex_id(v)


class TestExtendMap:
    def test_identity_extension_is_identity(self, line16, line16_filling):
        pmap = identity_map(line16, line16)
        result = snap_to_vertices(
            line16_filling, extend_map(pmap, line16_filling, line16_filling)
        )
        worst = 0.0
        for i, v in enumerate(line16_filling.vertices):
            gp = result.geodesic_map[i]
            assert gp.height == pytest.approx(float(v.height), abs=1e-9)
            worst = max(
                worst,
                point_distance(
                    line16_filling,
                    gp,
                    # the vertex as a point of its own column
                    type(gp)(v.center, float(v.height)),
                ),
            )
            assert result.vertex_map[i] == i
        assert worst <= 1.0

    def test_height_formula(self, snowflake_pipeline):
        pmap, source, target, result = snowflake_pipeline
        profiles = build_profiles(pmap)
        log2_az = math.log2(source.alpha)
        scale = math.log(2.0) / math.log(target.alpha)
        for i, v in enumerate(source.vertices):
            z0 = result.cone_anchors[i]
            expected = scale * eval_profile(profiles[z0], v.height * log2_az)
            assert result.raw_heights[i] == pytest.approx(expected, abs=1e-9)

    def test_deep_heights_halve(self, snowflake_pipeline):
        _, source, _, result = snowflake_pipeline
        for i, v in enumerate(source.vertices):
            if v.height >= 1:  # below the finest geometric scale
                assert result.raw_heights[i] == pytest.approx(
                    v.height / 2.0, abs=1.0
                )

    def test_geodesic_heights_are_clamped_raw(self, snowflake_pipeline):
        _, _, target, result = snowflake_pipeline
        for raw, gp in zip(result.raw_heights, result.geodesic_map):
            assert gp.height == min(max(raw, target.n_min), target.n_max)


class TestSnap:
    def test_integral_heights_snap_in_place(self, line16, line16_filling):
        pmap = identity_map(line16, line16)
        result = snap_to_vertices(
            line16_filling, extend_map(pmap, line16_filling, line16_filling)
        )
        assert result.snap_deviation == 0.0

    def test_half_heights_round_down(self):
        from hypfill.extension import _round_half_down

        assert _round_half_down(2.5) == 2
        assert _round_half_down(2.4) == 2
        assert _round_half_down(2.6) == 3
        assert _round_half_down(-2.5) == -3

    def test_snap_displacement_within_one(self, snowflake_pipeline):
        _, _, target, result = snowflake_pipeline
        assert result.snap_deviation <= 0.5
        for i, gp in enumerate(result.geodesic_map):
            w = target.vertices[result.vertex_map[i]]
            moved = point_distance(
                target, gp, type(gp)(gp.anchor, float(w.height))
            )
            assert moved <= 1.0

    def test_snapped_vertices_live_on_anchor_ray(self, snowflake_pipeline):
        _, _, target, result = snowflake_pipeline
        for i, gp in enumerate(result.geodesic_map):
            vid = result.vertex_map[i]
            n = target.vertices[vid].height
            assert target.ray_vertex_id(gp.anchor, n) == vid


class TestExtensionFiles:
    def test_schema(self, tmp_path, snowflake_pipeline):
        _, _, _, result = snowflake_pipeline
        d = extension_to_dict(result)
        assert set(d) == {"vertex_map", "geodesic_map", "constants"}
        save_extension(result, tmp_path / "e.json")
        raw = json.loads((tmp_path / "e.json").read_text())
        assert len(raw["vertex_map"]) == len(result.geodesic_map)
        src_id, anchor, height = raw["geodesic_map"][0]
        assert src_id == 0
        assert isinstance(anchor, int) and isinstance(height, float)
