"""Scene / task / plan / disturbance file formats.

All files are JSON; angles in files are degrees and distances meters
(internal APIs use radians). Unknown fields are rejected with their
location. The scene file additionally carries the ground-truth functional
axes consumed by the geometric checker oracle, which a real deployment
would not have; they are scenario annotations, not pipeline inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .geometry import Pose, Rotation
from .objects import (GRIPPER_ID, VISIBLE_TANGIBLE, INVISIBLE_INTANGIBLE,
                      CanonicalObject, Scene, SceneObject)
from .executor import Disturbance
from .planning import Stage, Task


def _require(cond, loc, msg):
    if not cond:
        raise ParseError(f"{loc}: {msg}")


def _no_unknown(d: dict, known: set, loc: str):
    for key in d:
        if key not in known:
            raise ParseError(f"{loc}: unknown field {key!r}")


def _vec(v, loc, n=3):
    _require(isinstance(v, list) and len(v) == n
             and all(isinstance(x, (int, float)) for x in v),
             loc, f"expected a list of {n} numbers")
    return np.asarray(v, dtype=float)


def pose_from_doc(d: dict, loc: str) -> Pose:
    _no_unknown(d, {"q", "t"}, loc)
    q = _vec(d.get("q", [1, 0, 0, 0]), f"{loc}.q", 4)
    t = _vec(d.get("t", [0, 0, 0]), f"{loc}.t", 3)
    return Pose(Rotation(q), t)


def box_surface_points(extents, resolution: int = 4) -> np.ndarray:
    """Deterministic point grid on the surface of an axis-aligned box with
    the given half-sizes; `resolution` samples per edge."""
    ex, ey, ez = (float(x) for x in extents)
    lin = np.linspace(-1.0, 1.0, resolution)
    pts = []
    for u in lin:
        for v in lin:
            pts.append((ex, u * ey, v * ez))
            pts.append((-ex, u * ey, v * ez))
            pts.append((u * ex, ey, v * ez))
            pts.append((u * ex, -ey, v * ez))
            pts.append((u * ex, v * ey, ez))
            pts.append((u * ex, v * ey, -ez))
    return np.unique(np.asarray(pts, dtype=float), axis=0)


_OBJECT_FIELDS = {"id", "category", "extents", "points", "shape",
                  "named_points", "functional_axes", "pose", "scale", "static"}
_SHAPE_FIELDS = {"type", "resolution"}
_NAMED_FIELDS = {"p", "visibility"}
_SCENE_FIELDS = {"gripper", "objects"}
_GRIPPER_FIELDS = {"keypoints", "approach_axis", "initial_pose"}


def _build_object(od: dict, loc: str) -> tuple[CanonicalObject, Pose, float, bool]:
    _no_unknown(od, _OBJECT_FIELDS, loc)
    _require("id" in od, loc, "missing 'id'")
    _require("extents" in od, loc, "missing 'extents'")
    extents = _vec(od["extents"], f"{loc}.extents")
    if "points" in od:
        pts = np.asarray(od["points"], dtype=float).reshape(-1, 3)
    elif "shape" in od:
        sd = od["shape"]
        _no_unknown(sd, _SHAPE_FIELDS, f"{loc}.shape")
        _require(sd.get("type") == "box", f"{loc}.shape.type",
                 "only 'box' is supported")
        pts = box_surface_points(extents, int(sd.get("resolution", 4)))
    else:
        raise ParseError(f"{loc}: needs 'points' or 'shape'")
    named = {}
    visibility = {}
    for label, nd in od.get("named_points", {}).items():
        nloc = f"{loc}.named_points[{label!r}]"
        _no_unknown(nd, _NAMED_FIELDS, nloc)
        named[label] = _vec(nd["p"], f"{nloc}.p")
        vis = nd.get("visibility", VISIBLE_TANGIBLE)
        _require(vis in (VISIBLE_TANGIBLE, INVISIBLE_INTANGIBLE),
                 f"{nloc}.visibility", f"unknown visibility {vis!r}")
        visibility[label] = vis
    axes = {}
    for label, vd in od.get("functional_axes", {}).items():
        v = _vec(vd, f"{loc}.functional_axes[{label!r}]")
        n = np.linalg.norm(v)
        _require(n > 1e-9, f"{loc}.functional_axes[{label!r}]", "zero axis")
        axes[label] = v / n
    try:
        obj = CanonicalObject(
            id=str(od["id"]), category=str(od.get("category", "")),
            points=pts, extents=extents, named_points=named,
            point_visibility=visibility, functional_axes=axes)
    except ValueError as exc:
        raise ParseError(f"{loc}: {exc}")
    pose = pose_from_doc(od.get("pose", {}), f"{loc}.pose")
    return obj, pose, float(od.get("scale", 1.0)), bool(od.get("static", False))


def build_scene(doc: dict) -> tuple[Scene, Pose]:
    """Construct a Scene from a scene document. The gripper spec becomes a
    pseudo scene object (id "gripper") whose named point "tcp" is the
    origin and whose functional axis is the approach axis; its pose is the
    initial end-effector pose, which is also returned."""
    _require(isinstance(doc, dict), "scene", "must be a JSON object")
    _no_unknown(doc, _SCENE_FIELDS, "scene")
    gd = doc.get("gripper", {})
    _no_unknown(gd, _GRIPPER_FIELDS, "scene.gripper")
    keypoints = np.asarray(gd.get("keypoints", [[0, 0, 0]]),
                           dtype=float).reshape(-1, 3)
    approach = _vec(gd.get("approach_axis", [0, 0, 1]),
                    "scene.gripper.approach_axis")
    approach = approach / np.linalg.norm(approach)
    ee_pose = pose_from_doc(gd.get("initial_pose", {}),
                            "scene.gripper.initial_pose")
    extents = np.maximum(np.abs(keypoints).max(axis=0), 0.01)
    gripper_obj = CanonicalObject(
        id=GRIPPER_ID, category="gripper", points=keypoints,
        extents=extents, named_points={"tcp": np.zeros(3)},
        point_visibility={"tcp": VISIBLE_TANGIBLE},
        functional_axes={"default": approach})
    objects = [SceneObject(object=gripper_obj, pose=ee_pose)]
    for i, od in enumerate(doc.get("objects", [])):
        obj, pose, scale, static = _build_object(od, f"scene.objects[{i}]")
        objects.append(SceneObject(object=obj, pose=pose, scale=scale,
                                   static=static))
    try:
        scene = Scene(objects=objects, gripper_keypoints=keypoints)
    except ValueError as exc:
        raise ParseError(f"scene: {exc}")
    return scene, ee_pose


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}")


def document_hash(*docs) -> str:
    """Content hash of one or more JSON documents, order-sensitive."""
    h = hashlib.sha256()
    for doc in docs:
        h.update(json.dumps(doc, sort_keys=True,
                            separators=(",", ":")).encode())
    return h.hexdigest()


def constraint_to_doc(c) -> dict:
    return {
        "active": {"object": c.active_id,
                   "point": [float(x) for x in c.active.point],
                   "direction": [float(x) for x in c.active.direction],
                   "label": c.active.label},
        "passive": {"object": c.passive_id,
                    "point": [float(x) for x in c.passive.point],
                    "direction": [float(x) for x in c.passive.direction],
                    "label": c.passive.label},
        "distance_m": float(c.distance),
        "angle_rad": None if c.angle is None else float(c.angle),
        "weight_d": float(c.weight_d),
        "weight_theta": float(c.weight_theta),
    }


def constraint_from_doc(d: dict):
    from .constraints import SpatialConstraint
    from .primitives import InteractionPrimitive
    return SpatialConstraint(
        active_id=d["active"]["object"],
        active=InteractionPrimitive(np.asarray(d["active"]["point"]),
                                    np.asarray(d["active"]["direction"]),
                                    d["active"].get("label", "")),
        passive_id=d["passive"]["object"],
        passive=InteractionPrimitive(np.asarray(d["passive"]["point"]),
                                     np.asarray(d["passive"]["direction"]),
                                     d["passive"].get("label", "")),
        distance=d["distance_m"],
        angle=d["angle_rad"],
        weight_d=d.get("weight_d", 100.0),
        weight_theta=d.get("weight_theta", 1.0),
    )


def stage_to_doc(stage: Stage) -> dict:
    return {
        "action": stage.action.value,
        "active": stage.active_id,
        "passive": stage.passive_id,
        "param": stage.param,
    }


def plan_to_doc(task: Task, outcomes, scene_hash: str,
                task_hash: str) -> dict:
    """Plan file: per-stage chosen constraints with RRC accounting."""
    stages = []
    for stage, outcome in zip(task.stages, outcomes):
        stages.append({
            **stage_to_doc(stage),
            "chosen": constraint_to_doc(outcome.chosen),
            "checks_used": outcome.checks_used,
            "refined": outcome.refined,
        })
    return {"scene_hash": scene_hash, "task_hash": task_hash,
            "instruction": task.instruction, "stages": stages}


def plan_from_doc(doc: dict):
    """Returns (scene_hash, [(stage-like dict, constraint), ...])."""
    from .planning import Action
    _require(isinstance(doc, dict) and "stages" in doc, "plan",
             "missing 'stages'")
    pairs = []
    for i, sd in enumerate(doc["stages"]):
        loc = f"plan.stages[{i}]"
        _require("chosen" in sd, loc, "missing 'chosen'")
        c = constraint_from_doc(sd["chosen"])
        action = Action(sd["action"])
        stage = Stage(action=action, active_id=sd["active"],
                      passive_id=sd["passive"],
                      active_point_label=sd["chosen"]["active"].get("label", ""),
                      passive_primitive=c.passive,
                      distance=c.distance, angle=c.angle,
                      param=float(sd.get("param", 0.0)))
        pairs.append((stage, c))
    return doc.get("scene_hash", ""), pairs


def disturbances_from_doc(doc, loc: str = "disturbances") -> list[Disturbance]:
    _require(isinstance(doc, list), loc, "must be a JSON list")
    out = []
    for i, dd in enumerate(doc):
        dloc = f"{loc}[{i}]"
        _no_unknown(dd, {"at_time_s", "object_id", "delta"}, dloc)
        for req in ("at_time_s", "object_id", "delta"):
            _require(req in dd, dloc, f"missing {req!r}")
        out.append(Disturbance(at_time=float(dd["at_time_s"]),
                               object_id=str(dd["object_id"]),
                               delta=pose_from_doc(dd["delta"], f"{dloc}.delta")))
    return out


def validate_task_against_scene(task_doc: dict, scene: Scene):
    """Reject a scenario whose task references named points missing from
    the scene, before any computation."""
    from .planning import load_task
    return load_task(task_doc, scene)
