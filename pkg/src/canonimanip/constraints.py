"""Spatial-constraint tuple between two interaction primitives and its
scalar residual.

A constraint asks the active object's world primitive to sit at a target
distance d from the passive primitive's point with a target angle theta
between the two world directions. The residual is the weighted quadratic

    rho = w_d (||p_a - p_p|| - d)^2 + w_theta (angle(v_a, v_p) - theta)^2

which is smooth, zero exactly at satisfaction, and separable into the
distance and angular parts. An absent angular target (theta None) drops
the angular term entirely, e.g. a plain place with no orientation goal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyCandidates
from .geometry import Pose, direction_angle, rotation_between
from .objects import Scene, SceneObject
from .primitives import InteractionPrimitive, primitive_to_world

DEFAULT_WEIGHT_D = 100.0      # m^-2 scale balancing radians^2
DEFAULT_WEIGHT_THETA = 1.0
DEFAULT_TOL_D = 0.005         # 5 mm
DEFAULT_TOL_THETA = math.radians(5.0)


@dataclass(frozen=True)
class SpatialConstraint:
    """Target spatial relation between active and passive primitives."""

    active_id: str
    active: InteractionPrimitive
    passive_id: str
    passive: InteractionPrimitive
    distance: float = 0.0                 # meters, >= 0
    angle: float | None = 0.0             # radians in [0, pi]; None = no target
    weight_d: float = DEFAULT_WEIGHT_D
    weight_theta: float = DEFAULT_WEIGHT_THETA

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError(f"target distance must be >= 0, got {self.distance}")
        if self.angle is not None and not 0 <= self.angle <= math.pi + 1e-12:
            raise ValueError(f"target angle must be in [0, pi], got {self.angle}")
        if self.weight_d <= 0 or self.weight_theta <= 0:
            raise ValueError("constraint weights must be positive")

    def with_active_direction(self, direction) -> "SpatialConstraint":
        return replace(self, active=InteractionPrimitive(
            self.active.point, direction, self.active.label))


@dataclass
class CandidateList:
    """Ordered spatial-constraint candidates for one stage."""

    candidates: list[SpatialConstraint]

    def __post_init__(self):
        if not self.candidates:
            raise EmptyCandidates("candidate list is empty")

    def __len__(self):
        return len(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]


def _world_primitives(c: SpatialConstraint, scene: Scene,
                      active_pose: Pose | None = None):
    active_obj = scene.get(c.active_id)
    passive_obj = scene.get(c.passive_id)
    if active_pose is not None:
        active_obj = SceneObject(object=active_obj.object, pose=active_pose,
                                 scale=active_obj.scale, static=active_obj.static)
    pa, va = primitive_to_world(c.active, active_obj)
    pp, vp = primitive_to_world(c.passive, passive_obj)
    return pa, va, pp, vp


def constraint_errors(c: SpatialConstraint, scene: Scene,
                      active_pose: Pose | None = None) -> tuple[float, float]:
    """Signed-magnitude errors (|gap| - d, |angle - theta|); the angular
    error is 0 when the constraint carries no angular target."""
    pa, va, pp, vp = _world_primitives(c, scene, active_pose)
    dist_err = float(np.linalg.norm(pa - pp)) - c.distance
    if c.angle is None:
        return dist_err, 0.0
    return dist_err, direction_angle(va, vp) - c.angle


def constraint_residual(c: SpatialConstraint, scene: Scene,
                        active_pose: Pose | None = None) -> float:
    """Scalar residual rho >= 0; zero iff both targets are met exactly.

    `active_pose` overrides the active object's scene pose (used when
    evaluating hypothetical end-effector placements)."""
    de, ae = constraint_errors(c, scene, active_pose)
    rho = c.weight_d * de * de
    if c.angle is not None:
        rho += c.weight_theta * ae * ae
    return rho


def constraint_satisfied(c: SpatialConstraint, scene: Scene,
                         tol_d: float = DEFAULT_TOL_D,
                         tol_theta: float = DEFAULT_TOL_THETA,
                         active_pose: Pose | None = None) -> bool:
    """True iff the distance error and (when targeted) the angular error
    are both within tolerance."""
    if tol_d <= 0 or tol_theta <= 0:
        raise ValueError("tolerances must be positive")
    de, ae = constraint_errors(c, scene, active_pose)
    return abs(de) <= tol_d and abs(ae) <= tol_theta


def target_world_direction(c: SpatialConstraint, scene: Scene) -> np.ndarray:
    """World direction the active primitive should reach: the passive world
    direction rotated by the target angle about a fixed orthogonal axis."""
    _, _, _, vp = _world_primitives(c, scene)
    theta = c.angle if c.angle is not None else 0.0
    if theta < 1e-12:
        return vp
    if theta > math.pi - 1e-12:
        return -vp
    pick = int(np.argmin(np.abs(vp)))
    axis = np.cross(vp, np.eye(3)[pick])
    axis /= np.linalg.norm(axis)
    rot = np.cos(theta) * vp + np.sin(theta) * np.cross(axis, vp)
    return rot / np.linalg.norm(rot)


def satisfying_active_pose(c: SpatialConstraint, scene: Scene) -> Pose:
    """A world pose for the active object that satisfies the constraint
    exactly: primitive point at d along the passive direction from the
    passive point, primitive direction at the target angle.

    The pose is the minimal-rotation adjustment of the active object's
    current orientation, so it is deterministic given the scene."""
    active_obj = scene.get(c.active_id)
    pa, va, pp, vp = _world_primitives(c, scene)
    u = target_world_direction(c, scene)
    r_new = rotation_between(va, u) @ active_obj.pose.rotation
    target_point = pp + c.distance * vp
    t_new = target_point - r_new.apply(active_obj.scale * c.active.point)
    return Pose(r_new, t_new)
