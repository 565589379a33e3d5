"""Task/stage model, candidate enumeration, and the render-and-check
self-correction loop (RRC).

The RRC loop walks an ordered candidate list, rendering each candidate and
asking a checker oracle for a verdict. A single Refine verdict switches to
a refinement phase that fans refined directions around the flagged
candidate; any further Refine is treated as Failure, and exhausting both
phases fails the stage. Note the loop evaluates candidates starting from
the first list entry (the published pseudocode increments its counter
before first use, which would skip it and contradict the ordered-list
semantics; see the README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import MissingNamedPoint, ParseError, UnknownObject
from .constraints import CandidateList, SpatialConstraint
from .objects import Scene
from .primitives import (InteractionPrimitive, canonical_axis_candidates,
                         refine_directions)


class Action(Enum):
    GRASP = "grasp"
    PLACE = "place"
    PUSH = "push"
    PULL = "pull"
    ROTATE = "rotate"
    POUR = "pour"


class Verdict(Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    REFINE = "refine"


@dataclass(frozen=True)
class CheckVerdict:
    verdict: Verdict
    reason: str = ""

    @staticmethod
    def success(reason: str = "") -> "CheckVerdict":
        return CheckVerdict(Verdict.SUCCESS, reason)

    @staticmethod
    def failure(reason: str = "") -> "CheckVerdict":
        return CheckVerdict(Verdict.FAILURE, reason)

    @staticmethod
    def refine(reason: str = "") -> "CheckVerdict":
        return CheckVerdict(Verdict.REFINE, reason)


@dataclass
class Stage:
    """One step of a decomposed task, governed by one spatial constraint."""

    action: Action
    active_id: str
    passive_id: str
    active_point_label: str
    passive_primitive: InteractionPrimitive
    distance: float = 0.0
    angle: float | None = 0.0              # radians; None = no angular target
    param: float = 0.0                     # action parameter v (m or degrees)
    scores: list[float] | None = None      # optional oracle candidate scores

    def __post_init__(self):
        if not math.isfinite(self.param):
            raise ValueError("action_param must be finite")


@dataclass
class Task:
    instruction: str
    stages: list[Stage]

    def __post_init__(self):
        if not self.stages:
            raise ValueError("task has no stages")


@dataclass
class RrcConfig:
    initial_max: int = 6                   # N, initial-phase budget
    refine_max: int = 6                    # M, refinement-phase budget
    cone_half_angle: float = math.radians(15.0)

    def __post_init__(self):
        if self.initial_max < 1 or self.refine_max < 1:
            raise ValueError("RRC budgets must be >= 1")


@dataclass
class RrcOutcome:
    """Chosen constraint, or stage failure when `chosen` is None."""

    chosen: SpatialConstraint | None
    checks_used: int
    refined: bool

    @property
    def failed(self) -> bool:
        return self.chosen is None


def load_task(doc: dict, scene: Scene) -> Task:
    """Build a Task from a pre-decomposed stage-list document.

    Raises ParseError for malformed fields (message carries the field
    path) and UnknownObject for ids absent from the scene."""
    if not isinstance(doc, dict):
        raise ParseError("task document must be a JSON object")
    known_top = {"instruction", "stages"}
    for key in doc:
        if key not in known_top:
            raise ParseError(f"task: unknown field {key!r}")
    instruction = doc.get("instruction", "")
    stages_doc = doc.get("stages")
    if not isinstance(stages_doc, list) or not stages_doc:
        raise ParseError("task.stages: must be a non-empty list")
    known = {"action", "active", "passive", "active_point", "passive_point",
             "passive_direction", "distance_m", "angle_deg", "param", "scores"}
    stages = []
    for i, sd in enumerate(stages_doc):
        loc = f"task.stages[{i}]"
        if not isinstance(sd, dict):
            raise ParseError(f"{loc}: must be an object")
        for key in sd:
            if key not in known:
                raise ParseError(f"{loc}: unknown field {key!r}")
        try:
            action = Action(str(sd["action"]).lower())
        except (KeyError, ValueError):
            raise ParseError(f"{loc}.action: expected one of "
                             f"{[a.value for a in Action]}")
        for req in ("active", "passive", "active_point", "passive_point"):
            if req not in sd:
                raise ParseError(f"{loc}.{req}: missing")
        active_id = str(sd["active"])
        passive_id = str(sd["passive"])
        for oid in (active_id, passive_id):
            if not scene.has(oid):
                raise UnknownObject(oid)
        passive_obj = scene.get(passive_id).object
        passive_label = str(sd["passive_point"])
        if passive_label not in passive_obj.named_points:
            raise MissingNamedPoint(
                f"{loc}.passive_point: {passive_label!r} not on {passive_id!r}")
        pdir = sd.get("passive_direction", [0.0, 0.0, 1.0])
        try:
            passive_prim = InteractionPrimitive(
                point=passive_obj.named_point(passive_label),
                direction=np.asarray(pdir, dtype=float),
                label=passive_label)
        except Exception as exc:
            raise ParseError(f"{loc}.passive_direction: {exc}")
        angle_deg = sd.get("angle_deg", 0.0)
        angle = None if angle_deg is None else math.radians(float(angle_deg))
        scores = sd.get("scores")
        if scores is not None and (not isinstance(scores, list)
                                   or not all(isinstance(x, (int, float))
                                              for x in scores)):
            raise ParseError(f"{loc}.scores: must be a list of numbers")
        stages.append(Stage(
            action=action,
            active_id=active_id,
            passive_id=passive_id,
            active_point_label=str(sd["active_point"]),
            passive_primitive=passive_prim,
            distance=float(sd.get("distance_m", 0.0)),
            angle=angle,
            param=float(sd.get("param", 0.0)),
            scores=list(scores) if scores is not None else None,
        ))
    return Task(instruction=instruction, stages=stages)


def enumerate_candidates(stage: Stage, scene: Scene) -> CandidateList:
    """Cross the six canonical axis candidates for the active direction
    with the stage's fixed passive primitive and targets. Ordered by the
    stage's oracle scores when supplied, else by the default axis order."""
    active_obj = scene.get(stage.active_id).object
    if stage.active_point_label not in active_obj.named_points:
        raise MissingNamedPoint(stage.active_point_label)
    point = active_obj.named_point(stage.active_point_label)
    dirs = canonical_axis_candidates()
    if stage.scores is not None:
        dirs = type(dirs)(directions=dirs.directions,
                          scores=list(stage.scores[:len(dirs)]))
    candidates = [
        SpatialConstraint(
            active_id=stage.active_id,
            active=InteractionPrimitive(point, d, stage.active_point_label),
            passive_id=stage.passive_id,
            passive=stage.passive_primitive,
            distance=stage.distance,
            angle=stage.angle,
        )
        for d in dirs.directions
    ]
    return CandidateList(candidates)


def run_rrc(stage: Stage, k_list: CandidateList, checker, renderer,
            cfg: RrcConfig, task_instruction: str = "") -> RrcOutcome:
    """Self-correction loop over the candidate list.

    `renderer(stage, candidate)` produces the interaction image;
    `checker(request)` returns a CheckVerdict. Exactly one checker call is
    made per rendered candidate; the checker is never queried more than
    initial_max + refine_max times. Transport faults raise
    OracleUnavailable out of the loop and never count as stage failure."""
    from .checker import CheckRequest   # local import to avoid a cycle

    checks = 0

    def ask(candidate: SpatialConstraint, refine_phase: bool) -> CheckVerdict:
        nonlocal checks
        image = renderer(stage, candidate)
        checks += 1
        return checker(CheckRequest(
            task_instruction=task_instruction,
            action=stage.action.value,
            active_id=stage.active_id,
            passive_id=stage.passive_id,
            candidate=candidate,
            image=image,
            refine_phase=refine_phase,
        ))

    for candidate in k_list.candidates[:cfg.initial_max]:
        result = ask(candidate, refine_phase=False)
        if result.verdict is Verdict.SUCCESS:
            return RrcOutcome(candidate, checks, refined=False)
        if result.verdict is Verdict.REFINE:
            fan = refine_directions(candidate.active.direction,
                                    cfg.refine_max, cfg.cone_half_angle)
            for direction in fan.directions:
                refined = candidate.with_active_direction(direction)
                r2 = ask(refined, refine_phase=True)
                # A second Refine verdict is treated as Failure.
                if r2.verdict is Verdict.SUCCESS:
                    return RrcOutcome(refined, checks, refined=True)
            return RrcOutcome(None, checks, refined=True)
    return RrcOutcome(None, checks, refined=False)
