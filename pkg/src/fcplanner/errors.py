"""Exception types shared across the planning pipeline."""


class PlanningError(Exception):
    """Base class for planner failures."""


class DegenerateReference(PlanningError):
    """Reference polyline is too short, duplicated, or kinked to parameterize."""


class OutOfDomain(PlanningError):
    """Queried point or station lies outside the reference path extent."""


class DomainError(PlanningError):
    """Mathematical domain violation, e.g. a steering angle at or past pi/2."""


class Blocked(PlanningError):
    """Neither side of an obstacle leaves a passable gap."""


class SingularityGuard(PlanningError):
    """Relative heading too close to orthogonal against the reference."""


class EmptyActuationSet(PlanningError):
    """Reference curvature demands more steering than the vehicle has."""


class NoPath(PlanningError):
    """Grid search could not connect the start cell to the horizon."""
