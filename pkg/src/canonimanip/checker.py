"""Pluggable verdict oracles standing in for the image-conditioned Check
step: a scripted oracle for tests, a geometric desk-scale oracle, a remote
HTTP oracle, and an interactive terminal oracle.

Wire protocol (remote oracle): HTTP POST of a JSON body

    {"task": str, "stage": {"action": str, "active": str, "passive": str,
     "refine": bool},
     "candidate": {"direction": [x, y, z], "distance_m": num, "angle_rad": num},
     "image": {"format": "ppm", "base64": str}}

and a JSON response {"verdict": "success"|"failure"|"refine",
"reason": str}. Any transport fault, non-200 status, or unknown verdict
string raises OracleUnavailable; verdict strings are never coerced.
"""

from __future__ import annotations

import base64
import json
import math
import tempfile
from dataclasses import dataclass

import requests

from .errors import OracleUnavailable, ScriptExhausted
from .constraints import (DEFAULT_TOL_D, DEFAULT_TOL_THETA, SpatialConstraint,
                          constraint_satisfied, satisfying_active_pose)
from .geometry import direction_angle
from .objects import GRIPPER_ID, Scene, SceneObject
from .planning import CheckVerdict, Verdict
from .render import RenderedImage, ppm_bytes, write_ppm

DEFAULT_REFINE_BAND = math.radians(25.0)


@dataclass
class CheckRequest:
    """Everything a checker may condition on for one candidate."""

    task_instruction: str
    action: str
    active_id: str
    passive_id: str
    candidate: SpatialConstraint
    image: RenderedImage
    refine_phase: bool = False

    def __post_init__(self):
        if self.image.width <= 0 or self.image.height <= 0:
            raise ValueError("check request image has empty dimensions")


def scripted_check(script):
    """Checker returning the scripted verdicts in order, ignoring request
    content. Raises ScriptExhausted past the end of the script."""
    remaining = list(script)

    def check(req: CheckRequest) -> CheckVerdict:
        if not remaining:
            raise ScriptExhausted("scripted oracle has no verdicts left")
        item = remaining.pop(0)
        if isinstance(item, CheckVerdict):
            return item
        return CheckVerdict(Verdict(str(item).lower()))

    return check


def geometric_check(truth_scene: Scene,
                    tol_d: float = DEFAULT_TOL_D,
                    tol_theta: float = DEFAULT_TOL_THETA,
                    refine_band: float = DEFAULT_REFINE_BAND,
                    d_min: float = 0.02):
    """Deterministic, viewpoint-independent stand-in for the VLM check.

    Places the active object at the candidate's satisfying pose and tests
    the constraint against the object's TRUE functional direction (a
    scenario annotation), so a candidate built on a misaligned geometric
    axis fails or is sent to refinement exactly as the real check would.
    Success additionally requires the placed active object to keep at
    least d_min clearance from every third-party obstacle.
    """

    def check(req: CheckRequest) -> CheckVerdict:
        c = req.candidate
        active = truth_scene.get(c.active_id)
        true_axis = active.object.functional_axis(req.action)
        if true_axis is None:
            return CheckVerdict.failure(
                f"no functional axis annotated for {c.active_id!r}")
        err = direction_angle(c.active.direction, true_axis)
        placed = satisfying_active_pose(c, truth_scene)
        true_c = c.with_active_direction(true_axis)
        satisfied = constraint_satisfied(true_c, truth_scene, tol_d, tol_theta,
                                         active_pose=placed)
        if satisfied and _clear_of_obstacles(truth_scene, c, placed, d_min):
            return CheckVerdict.success()
        if err <= refine_band:
            return CheckVerdict.refine(
                f"direction off functional axis by {math.degrees(err):.1f} deg")
        return CheckVerdict.failure(
            f"direction off functional axis by {math.degrees(err):.1f} deg")

    return check


def _clear_of_obstacles(scene: Scene, c: SpatialConstraint, placed,
                        d_min: float) -> bool:
    shown = SceneObject(object=scene.get(c.active_id).object, pose=placed,
                        scale=scene.get(c.active_id).scale)
    pts = shown.world_points()
    for obj in scene.objects:
        if obj.id in (c.active_id, c.passive_id, GRIPPER_ID):
            continue
        d2 = ((pts[:, None, :] - obj.world_points()[None, :, :]) ** 2).sum(axis=2)
        if math.sqrt(float(d2.min())) < d_min:
            return False
    return True


def request_payload(req: CheckRequest) -> dict:
    """JSON body for the remote wire protocol."""
    return {
        "task": req.task_instruction,
        "stage": {
            "action": req.action,
            "active": req.active_id,
            "passive": req.passive_id,
            "refine": req.refine_phase,
        },
        "candidate": {
            "direction": [float(x) for x in req.candidate.active.direction],
            "distance_m": float(req.candidate.distance),
            "angle_rad": (float(req.candidate.angle)
                          if req.candidate.angle is not None else 0.0),
        },
        "image": {
            "format": "ppm",
            "base64": base64.b64encode(ppm_bytes(req.image)).decode("ascii"),
        },
    }


def remote_check(endpoint: str, timeout: float = 10.0):
    """Checker backed by an HTTP verdict service; one request per call."""

    def check(req: CheckRequest) -> CheckVerdict:
        try:
            resp = requests.post(endpoint, json=request_payload(req),
                                 timeout=timeout)
        except requests.RequestException as exc:
            raise OracleUnavailable(f"transport failure: {exc}")
        if resp.status_code != 200:
            raise OracleUnavailable(f"status {resp.status_code}")
        try:
            body = resp.json()
            verdict = Verdict(body["verdict"])
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise OracleUnavailable(f"malformed response: {exc}")
        return CheckVerdict(verdict, str(body.get("reason", "")))

    return check


_KEYMAP = {"s": Verdict.SUCCESS, "f": Verdict.FAILURE, "r": Verdict.REFINE}


def interactive_check(input_stream=None, output_stream=None):
    """Human-in-the-loop checker: writes the image to a temp file and maps
    an [s]uccess / [f]ail / [r]efine keypress to a verdict."""
    import sys

    def check(req: CheckRequest) -> CheckVerdict:
        instream = input_stream if input_stream is not None else sys.stdin
        out = output_stream if output_stream is not None else sys.stderr
        with tempfile.NamedTemporaryFile(suffix=".ppm", delete=False) as fh:
            path = fh.name
        write_ppm(req.image, path)
        out.write(f"candidate image: {path}\n"
                  f"[s]uccess / [f]ail / [r]efine? ")
        out.flush()
        line = instream.readline()
        if not line:
            raise OracleUnavailable("interactive input closed")
        key = line.strip().lower()[:1]
        if key not in _KEYMAP:
            raise OracleUnavailable(f"unrecognized answer {line.strip()!r}")
        return CheckVerdict(_KEYMAP[key])

    return check
