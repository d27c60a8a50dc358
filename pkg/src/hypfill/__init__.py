"""Hyperbolic fillings of finite metric spaces, the extension of power
quasi-symmetric maps to rough quasi-isometries of the fillings, and the
reverse boundary-map extraction, with empirically fitted constants."""

from .analysis import (
    BoundaryResult,
    QIEnvelope,
    RoundTripReport,
    boundary_map,
    composition_constant,
    predicted_exponents,
    predicted_slopes,
    qi_envelope,
    roundtrip,
    strong_qi_check,
)
from .cone import ConePoint, cone_distance
from .extension import (
    DistortionProfile,
    ExtensionResult,
    build_profile,
    build_profiles,
    cone_map,
    cone_to_filling,
    eval_profile,
    extend_map,
    filling_to_cone,
    snap_to_vertices,
)
from .filling import (
    FillingGraph,
    FillingParams,
    GeodesicPoint,
    Vertex,
    VertexGraph,
    anchored_ray,
    build_filling,
    eval_ray,
    graph_distance,
    point_distance,
)
from .gromov import (
    BusemannSurrogate,
    HyperbolicityReport,
    busemann_deviation,
    busemann_product,
    busemann_values,
    cross_difference,
    gromov_product,
    hyperbolicity_delta,
    visual_comparability,
)
from .qsmap import (
    PointMap,
    PowerControl,
    control_bound,
    identity_map,
    qs_check,
    qs_fit_lambda,
    qs_fit_theta,
)
from .spaces import (
    FiniteMetricSpace,
    NetParams,
    generate_space,
    separated_net,
    snowflake,
    validate_metric,
)

__version__ = "0.1.0"
