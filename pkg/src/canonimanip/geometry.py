"""Pose algebra on SE(3), similarity alignment, and direction utilities.

Conventions:
    Quaternions are (w, x, y, z), unit norm, right-handed, and describe
    active rotations. q and -q denote the same rotation; the stored
    canonical form has w >= 0. All translations are meters, all angles
    radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, NotUnit

_UNIT_TOL = 1e-6


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Rotation:
    """Unit quaternion rotation, canonicalized to w >= 0."""

    q: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(4).copy()
        n = np.linalg.norm(q)
        if n < 1e-12:
            raise NotUnit("zero quaternion")
        q /= n
        if q[0] < 0:
            q = -q
        q.flags.writeable = False
        object.__setattr__(self, "q", q)

    @staticmethod
    def identity() -> "Rotation":
        return Rotation()

    @staticmethod
    def from_axis_angle(axis, angle: float) -> "Rotation":
        a = np.asarray(axis, dtype=float).reshape(3)
        n = np.linalg.norm(a)
        if n < 1e-12:
            if abs(angle) < 1e-12:
                return Rotation.identity()
            raise NotUnit("zero rotation axis with nonzero angle")
        a = a / n
        h = 0.5 * angle
        return Rotation(np.concatenate(([math.cos(h)], math.sin(h) * a)))

    @staticmethod
    def from_matrix(m) -> "Rotation":
        m = np.asarray(m, dtype=float).reshape(3, 3)
        # Shepperd's method: pick the largest diagonal combination.
        t = np.trace(m)
        if t > 0:
            s = math.sqrt(t + 1.0) * 2
            w = 0.25 * s
            x = (m[2, 1] - m[1, 2]) / s
            y = (m[0, 2] - m[2, 0]) / s
            z = (m[1, 0] - m[0, 1]) / s
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
            w = (m[2, 1] - m[1, 2]) / s
            x = 0.25 * s
            y = (m[0, 1] + m[1, 0]) / s
            z = (m[0, 2] + m[2, 0]) / s
        elif m[1, 1] > m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
            w = (m[0, 2] - m[2, 0]) / s
            x = (m[0, 1] + m[1, 0]) / s
            y = 0.25 * s
            z = (m[1, 2] + m[2, 1]) / s
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
            w = (m[1, 0] - m[0, 1]) / s
            x = (m[0, 2] + m[2, 0]) / s
            y = (m[1, 2] + m[2, 1]) / s
            z = 0.25 * s
        return Rotation(np.array([w, x, y, z]))

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v @ self.matrix().T

    def inverse(self) -> "Rotation":
        w, x, y, z = self.q
        return Rotation(np.array([w, -x, -y, -z]))

    def __matmul__(self, other: "Rotation") -> "Rotation":
        w1, x1, y1, z1 = self.q
        w2, x2, y2, z2 = other.q
        return Rotation(
            np.array(
                [
                    w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                    w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                    w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                    w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
                ]
            )
        )

    def angle(self) -> float:
        """Rotation angle in [0, pi]."""
        return 2.0 * math.acos(min(1.0, abs(self.q[0])))

    def axis_angle(self) -> tuple[np.ndarray, float]:
        ang = self.angle()
        s = math.sqrt(max(0.0, 1.0 - self.q[0] ** 2))
        if s < 1e-12:
            return np.array([0.0, 0.0, 1.0]), ang
        return self.q[1:] / s, ang


@dataclass(frozen=True)
class Pose:
    """Rigid transform: x_world = R x + t."""

    rotation: Rotation = field(default_factory=Rotation.identity)
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "translation", _vec3(self.translation))

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_rt(rotation: Rotation, translation) -> "Pose":
        return Pose(rotation=rotation, translation=translation)

    def inverse(self) -> "Pose":
        rinv = self.rotation.inverse()
        return Pose(rinv, -rinv.apply(self.translation))

    def apply(self, point) -> np.ndarray:
        return self.rotation.apply(point) + self.translation

    def __matmul__(self, other: "Pose") -> "Pose":
        return compose_poses(self, other)


@dataclass(frozen=True)
class SimilarityTransform:
    """Scaled rigid transform: x -> s R x + t, with s > 0."""

    scale: float = 1.0
    rotation: Rotation = field(default_factory=Rotation.identity)
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "translation", _vec3(self.translation))

    def apply(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return self.scale * self.rotation.apply(points) + self.translation


@dataclass(frozen=True)
class Twist:
    """Local 6-dof pose perturbation: (linear m, angular axis-angle rad)."""

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "linear", _vec3(self.linear))
        object.__setattr__(self, "angular", _vec3(self.angular))

    def exp(self) -> Pose:
        """Pose with rotation exp(angular) and translation = linear.

        First-order parametrization: adequate as solver search coordinates,
        exact at zero (exp of the zero twist is the identity pose).
        """
        ang = float(np.linalg.norm(self.angular))
        if ang < 1e-16:
            rot = Rotation.identity()
        else:
            rot = Rotation.from_axis_angle(self.angular, ang)
        return Pose(rot, self.linear)


def transform_point(pose: Pose, point) -> np.ndarray:
    """Apply a rigid transform to a point: R p + t."""
    return pose.apply(point)


def compose_poses(a: Pose, b: Pose) -> Pose:
    """Compose so that the result applies b first, then a."""
    return Pose(a.rotation @ b.rotation, a.rotation.apply(b.translation) + a.translation)


def rotation_angle_between(a: Rotation, b: Rotation) -> float:
    """Geodesic angle between two rotations, in [0, pi]."""
    return (a.inverse() @ b).angle()


def _require_unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > _UNIT_TOL:
        raise NotUnit(f"{name} has norm {n:.8f}, expected 1 within {_UNIT_TOL}")
    return v


def direction_angle(u, v) -> float:
    """Angle between two unit directions: arccos(clamp(u.v, -1, 1))."""
    u = _require_unit(u, "u")
    v = _require_unit(v, "v")
    return math.acos(max(-1.0, min(1.0, float(np.dot(u, v)))))


def rotation_between(u, v) -> Rotation:
    """Minimal rotation taking unit vector u onto unit vector v."""
    u = _require_unit(u, "u")
    v = _require_unit(v, "v")
    c = float(np.dot(u, v))
    if c > 1.0 - 1e-14:
        return Rotation.identity()
    if c < -1.0 + 1e-12:
        # Antiparallel: rotate pi about any axis orthogonal to u.
        axis = np.cross(u, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-8:
            axis = np.cross(u, [0.0, 1.0, 0.0])
        return Rotation.from_axis_angle(axis, math.pi)
    axis = np.cross(u, v)
    return Rotation.from_axis_angle(axis, math.acos(max(-1.0, min(1.0, c))))


def umeyama_align(src, dst) -> SimilarityTransform:
    """Least-squares similarity transform {s, R, t} minimizing
    sum_i || dst_i - (s R src_i + t) ||^2 over corresponded point lists.

    R is always a proper rotation (det = +1); the reflection case is
    corrected by flipping the sign of the last singular vector.

    Raises DegenerateInput when the centered covariance of src has rank < 2
    (coincident or collinear points).
    """
    src = np.asarray(src, dtype=float).reshape(-1, 3)
    dst = np.asarray(dst, dtype=float).reshape(-1, 3)
    if src.shape != dst.shape or len(src) < 3:
        raise ValueError("src and dst must be equal-length lists of >= 3 points")
    n = len(src)
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    ds = src - mu_s
    dd = dst - mu_d
    cov = dd.T @ ds / n
    u_m, d, vt = np.linalg.svd(cov)
    if d[0] < 1e-300 or d[1] < 1e-12 * d[0]:
        raise DegenerateInput("source points are coincident or collinear")
    s_diag = np.ones(3)
    if np.linalg.det(u_m) * np.linalg.det(vt) < 0:
        s_diag[2] = -1.0
    r_mat = u_m @ np.diag(s_diag) @ vt
    var_s = (ds ** 2).sum() / n
    scale = float((d * s_diag).sum() / var_s)
    if not scale > 0:
        raise DegenerateInput("recovered non-positive scale")
    rot = Rotation.from_matrix(r_mat)
    t = mu_d - scale * rot.apply(mu_s)
    return SimilarityTransform(scale=scale, rotation=rot, translation=t)
