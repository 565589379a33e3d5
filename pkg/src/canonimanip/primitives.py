"""Canonical interaction primitives and direction candidate sampling.

A primitive is a (point, unit direction) pair in an object's canonical
frame; it never references any camera, so everything downstream of it is
viewpoint invariant by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotUnit
from .geometry import _require_unit
from .objects import SceneObject


@dataclass(frozen=True)
class InteractionPrimitive:
    """Interaction point and unit direction in canonical space."""

    point: np.ndarray
    direction: np.ndarray
    label: str = ""

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float).reshape(3).copy()
        d = np.asarray(self.direction, dtype=float).reshape(3).copy()
        n = np.linalg.norm(d)
        if abs(n - 1.0) > 1e-6:
            raise NotUnit(f"primitive direction has norm {n:.8f}")
        p.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", d)


@dataclass
class DirectionCandidateSet:
    """Ordered unit directions; when scores are present the list is sorted
    by score descending."""

    directions: list[np.ndarray]
    scores: list[float] | None = None

    def __post_init__(self):
        self.directions = [_require_unit(d, "candidate direction")
                           for d in self.directions]
        if self.scores is not None:
            if len(self.scores) != len(self.directions):
                raise ValueError("scores length must match directions")
            order = sorted(range(len(self.scores)),
                           key=lambda i: (-self.scores[i], i))
            self.directions = [self.directions[i] for i in order]
            self.scores = [self.scores[i] for i in order]

    def __len__(self):
        return len(self.directions)


#: Default candidate order for the six signed canonical axes.
_AXIS_ORDER = [
    (0.0, 0.0, 1.0), (0.0, 0.0, -1.0),
    (1.0, 0.0, 0.0), (-1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0), (0.0, -1.0, 0.0),
]


def canonical_axis_candidates() -> DirectionCandidateSet:
    """The six signed canonical axes, ordered +z, -z, +x, -x, +y, -y."""
    return DirectionCandidateSet([np.array(a) for a in _AXIS_ORDER])


def refine_directions(v, count: int, cone_half_angle: float) -> DirectionCandidateSet:
    """Uniformly spaced fan of `count` directions on the cone of the given
    half-angle around v.

    The azimuth phase starts at the projection of world +x onto the plane
    normal to v (falling back to +y when v is parallel to x), making the
    fan deterministic for a given v.
    """
    v = _require_unit(v, "v")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not 0 < cone_half_angle < math.pi / 2:
        raise ValueError(f"cone_half_angle must be in (0, pi/2), "
                         f"got {cone_half_angle}")
    e1 = np.array([1.0, 0.0, 0.0]) - v[0] * v
    if np.linalg.norm(e1) < 1e-8:
        e1 = np.array([0.0, 1.0, 0.0]) - v[1] * v
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    c, s = math.cos(cone_half_angle), math.sin(cone_half_angle)
    out = []
    for j in range(count):
        phi = 2.0 * math.pi * j / count
        u = c * v + s * (math.cos(phi) * e1 + math.sin(phi) * e2)
        out.append(u / np.linalg.norm(u))
    return DirectionCandidateSet(out)


def primitive_to_world(primitive: InteractionPrimitive,
                       obj: SceneObject) -> tuple[np.ndarray, np.ndarray]:
    """World-space (point, unit direction) of a canonical primitive on a
    posed, scaled scene object."""
    point = obj.pose.apply(obj.scale * primitive.point)
    direction = obj.pose.rotation.apply(primitive.direction)
    direction = direction / np.linalg.norm(direction)
    return point, direction
