"""Canonical object descriptions, world scenes, obstacle queries, and
functional-grasp selection.

Obstacle geometry is a point set (the object's canonical points posed into
world), not a mesh; this matches single-view observation data and keeps the
collision penalty finite-difference friendly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCandidates, UnknownObject
from .geometry import Pose, SimilarityTransform, umeyama_align

VISIBLE_TANGIBLE = "visible_tangible"
INVISIBLE_INTANGIBLE = "invisible_intangible"

#: Reserved scene id for the end-effector pseudo-object. Its pose mirrors
#: the end-effector pose; it is excluded from obstacle queries.
GRIPPER_ID = "gripper"


@dataclass
class CanonicalObject:
    """Point-set object in its canonical (functionally aligned) frame."""

    id: str
    category: str
    points: np.ndarray                      # (N, 3) canonical, meters
    extents: np.ndarray                     # (3,) axis-aligned half-sizes
    named_points: dict[str, np.ndarray] = field(default_factory=dict)
    point_visibility: dict[str, str] = field(default_factory=dict)
    # Ground-truth functional directions keyed by action name (scenario
    # annotation used by the geometric checker oracle; may be empty).
    functional_axes: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if len(self.points) == 0:
            raise ValueError(f"object {self.id!r} has no points")
        self.extents = np.asarray(self.extents, dtype=float).reshape(3)
        self.named_points = {k: np.asarray(v, dtype=float).reshape(3)
                             for k, v in self.named_points.items()}
        self.functional_axes = {k: np.asarray(v, dtype=float).reshape(3)
                                for k, v in self.functional_axes.items()}
        lim = 2.0 * self.extents + 1e-9
        for label, p in self.named_points.items():
            if np.any(np.abs(p) > lim):
                raise ValueError(
                    f"named point {label!r} of {self.id!r} lies outside "
                    f"2x extents: {p.tolist()}")

    def named_point(self, label: str) -> np.ndarray:
        return self.named_points[label]

    def functional_axis(self, action: str) -> np.ndarray | None:
        v = self.functional_axes.get(action)
        if v is None:
            v = self.functional_axes.get("default")
        return v


@dataclass
class SceneObject:
    """Canonical object instanced into the world at a scaled rigid pose."""

    object: CanonicalObject
    pose: Pose = field(default_factory=Pose.identity)
    scale: float = 1.0
    static: bool = False

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def id(self) -> str:
        return self.object.id

    def world_points(self) -> np.ndarray:
        return self.pose.rotation.apply(self.scale * self.object.points) \
            + self.pose.translation


@dataclass
class Scene:
    """World: scene objects with unique ids plus gripper keypoints in the
    end-effector frame."""

    objects: list[SceneObject]
    gripper_keypoints: np.ndarray           # (K, 3) end-effector frame

    def __post_init__(self):
        self.gripper_keypoints = np.asarray(
            self.gripper_keypoints, dtype=float).reshape(-1, 3)
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate object ids in scene: {ids}")

    def get(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise UnknownObject(object_id)

    def has(self, object_id: str) -> bool:
        return any(o.id == object_id for o in self.objects)


@dataclass
class GraspCandidate:
    """End-effector grasp proposal from an external grasp source."""

    pose: Pose
    width: float = 0.0
    score: float = 0.0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError(f"width must be >= 0, got {self.width}")


def canonicalize_observation(observed, estimated_pose: Pose,
                             canonical_reference=None):
    """Map an observed world cloud into canonical space and, when a
    corresponded canonical reference is given, estimate the similarity
    transform from the reference onto the canonicalized observation.

    Returns (canonical cloud, SimilarityTransform). Without a reference the
    transform is the identity.
    """
    observed = np.asarray(observed, dtype=float).reshape(-1, 3)
    if len(observed) == 0:
        raise ValueError("observed cloud is empty")
    cloud = estimated_pose.inverse().apply(observed)
    if canonical_reference is None:
        return cloud, SimilarityTransform()
    return cloud, umeyama_align(canonical_reference, cloud)


def min_obstacle_distance(ee_pose: Pose, scene: Scene,
                          held_id: str | None = None) -> float:
    """Minimum distance from any world-space gripper keypoint to any point
    of any scene object, excluding the held object and the gripper
    pseudo-object. Returns +inf when there are no obstacles."""
    if len(scene.gripper_keypoints) == 0:
        raise ValueError("scene has no gripper keypoints")
    if held_id is not None:
        scene.get(held_id)  # raises UnknownObject
    kp = ee_pose.apply(scene.gripper_keypoints)
    best = math.inf
    for obj in scene.objects:
        if obj.id == held_id or obj.id == GRIPPER_ID:
            continue
        pts = obj.world_points()
        d2 = ((kp[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        best = min(best, math.sqrt(float(d2.min())))
    return best


def grasp_heatmap_weights(grasp_points, query_points, sigma: float) -> np.ndarray:
    """Superimposed Gaussian heatmap: w(q) = sum_g exp(-||q - g||^2 / 2 sigma^2)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    gp = np.asarray(grasp_points, dtype=float).reshape(-1, 3)
    if len(gp) == 0:
        raise ValueError("grasp_points is empty")
    qp = np.asarray(query_points, dtype=float).reshape(-1, 3)
    d2 = ((qp[:, None, :] - gp[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-d2 / (2.0 * sigma ** 2)).sum(axis=1)


def select_grasp(candidates: list[GraspCandidate], grasp_points,
                 object_pose: Pose, sigma: float = 0.02) -> GraspCandidate:
    """Pick the candidate maximizing score x heatmap weight at its contact
    point (the candidate translation mapped into the object's canonical
    frame). Ties break toward higher raw score, then lowest index."""
    if not candidates:
        raise EmptyCandidates("no grasp candidates")
    inv = object_pose.inverse()
    contacts = np.array([inv.apply(c.pose.translation) for c in candidates])
    weights = grasp_heatmap_weights(grasp_points, contacts, sigma)
    best_i = 0
    best_key = (-math.inf, -math.inf)
    for i, cand in enumerate(candidates):
        key = (cand.score * float(weights[i]), cand.score)
        if key > best_key:
            best_key = key
            best_i = i
    return candidates[best_i]
