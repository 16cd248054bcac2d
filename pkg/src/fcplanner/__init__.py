"""Corridor path planning in the Frenet frame.

The pipeline turns a reference polyline, road limits, and perceived
obstacles into a smooth lateral deviation path: obstacles are inflated and
projected into (s, d) coordinates, a decision governor assigns each one to
the corridor floor or ceiling, station-wise bounds are generated, and a
distance-stepped kinematic optimization picks the path.
"""

from .corridor import Corridor, generate_bounds
from .decision import DecisionGovernor, DeviationDecision, Label, classify_obstacle
from .errors import (
    Blocked,
    DegenerateReference,
    DomainError,
    EmptyActuationSet,
    NoPath,
    OutOfDomain,
    PlanningError,
    SingularityGuard,
)
from .frenet import (
    FrenetPoint,
    ReferencePath,
    build_reference,
    cart_to_frenet,
    cart_to_frenet_many,
    frenet_to_cart,
    frenet_to_cart_many,
)
from .obstacles import (
    ObstaclePolygon,
    ObstacleSet,
    ProcessorConfig,
    RawObstacle,
    build_obstacle_set,
    cluster_pedestrians,
    convex_hull,
    inflate_vehicle,
    predict_dynamic,
)
from .optimizer import (
    ControlSequence,
    PlannerSolution,
    PlannerWeights,
    SolveStatus,
    SpaceState,
    beta_approx,
    beta_exact,
    curvature_bound_arrays,
    curvature_bounds,
    evaluate_cost,
    propagate,
    reference_steering,
    solve,
    steer_scale,
)

__version__ = "0.1.0"

__all__ = [
    "Blocked",
    "ControlSequence",
    "Corridor",
    "DecisionGovernor",
    "DegenerateReference",
    "DeviationDecision",
    "DomainError",
    "EmptyActuationSet",
    "FrenetPoint",
    "Label",
    "NoPath",
    "ObstaclePolygon",
    "ObstacleSet",
    "OutOfDomain",
    "PlannerSolution",
    "PlannerWeights",
    "PlanningError",
    "ProcessorConfig",
    "RawObstacle",
    "ReferencePath",
    "SingularityGuard",
    "SolveStatus",
    "SpaceState",
    "beta_approx",
    "beta_exact",
    "build_obstacle_set",
    "build_reference",
    "cart_to_frenet",
    "cart_to_frenet_many",
    "classify_obstacle",
    "cluster_pedestrians",
    "convex_hull",
    "curvature_bound_arrays",
    "curvature_bounds",
    "evaluate_cost",
    "frenet_to_cart",
    "frenet_to_cart_many",
    "generate_bounds",
    "inflate_vehicle",
    "predict_dynamic",
    "propagate",
    "reference_steering",
    "solve",
    "steer_scale",
]
