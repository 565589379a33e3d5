"""Shared fixtures: bundled scenario paths and small synthetic scenes."""

import os

import numpy as np
import pytest

from canonimanip.geometry import Pose, Rotation
from canonimanip.objects import CanonicalObject, Scene, SceneObject

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIO_DIR = os.path.join(ROOT, "scenarios")
GOLDEN_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")


def scenario_path(name: str) -> str:
    return os.path.join(SCENARIO_DIR, name)


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR


def random_rotation(rng) -> Rotation:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return Rotation.from_axis_angle(axis, rng.uniform(0.0, np.pi))


def random_pose(rng, span=0.5) -> Pose:
    return Pose(random_rotation(rng), rng.uniform(-span, span, 3))


def box_object(oid: str, half: float = 0.02, **kwargs) -> CanonicalObject:
    h = half
    pts = np.array([[sx * h, sy * h, sz * h]
                    for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)])
    defaults = dict(category="box", points=pts, extents=[h, h, h])
    defaults.update(kwargs)
    return CanonicalObject(id=oid, **defaults)


def two_object_scene(dist=0.3) -> Scene:
    a = box_object("a", named_points={"top": np.array([0.0, 0.0, 0.02])},
                   functional_axes={"default": np.array([0.0, 0.0, 1.0])})
    b = box_object("b", named_points={"top": np.array([0.0, 0.0, 0.02])},
                   functional_axes={"default": np.array([0.0, 0.0, 1.0])})
    return Scene(
        objects=[
            SceneObject(object=a, pose=Pose(Rotation.identity(),
                                            np.zeros(3))),
            SceneObject(object=b, pose=Pose(Rotation.identity(),
                                            np.array([dist, 0.0, 0.0]))),
        ],
        gripper_keypoints=np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -0.05]]),
    )
