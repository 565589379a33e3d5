"""Kinematic stage execution with simulated 6-dof pose tracking,
constraint-derived action primitives, disturbances, and open/closed-loop
modes.

No dynamics or contact: grasping toggles a rigid attachment when the
end-effector reaches the grasp waypoint, and the held object follows the
end-effector exactly. Closed-loop mode re-observes object poses through
the simulated tracker every tick and re-solves the target pose with a
warm start; open-loop mode solves once from the initial observation and
replays. Success is always judged on the true, noise-free poses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ActionStageMismatch, HeldObject, UnknownObject
from .constraints import (DEFAULT_TOL_D, DEFAULT_TOL_THETA, SpatialConstraint,
                          constraint_errors, constraint_satisfied)
from .geometry import Pose, Rotation, compose_poses, rotation_angle_between
from .objects import GRIPPER_ID, Scene, SceneObject
from .optimizer import (GraspTransform, LossConfig, SolverConfig,
                        solve_target_pose)
from .planning import Action, Stage
from .primitives import primitive_to_world

#: Path weights for per-tick re-solves. Deliberately lighter than the
#: standalone solver default: a heavy path term stalls the servo loop at a
#: standoff comparable to the success tolerance.
EXEC_LOSS = LossConfig(lambda_trans=0.1, lambda_rot=0.05, d_min=0.02)

GRASP_STANDOFF = 0.08     # m, pre-grasp offset in front of the grasp pose
WAYPOINT_TOL_TRANS = 2e-3
WAYPOINT_TOL_ROT = 0.02


@dataclass
class TrackerConfig:
    trans_noise_std: float = 0.0    # m, per-axis
    rot_noise_std: float = 0.0      # rad
    update_period: float = 0.02     # s (also the executor tick period)
    seed: int = 0

    def __post_init__(self):
        if self.trans_noise_std < 0 or self.rot_noise_std < 0:
            raise ValueError("noise stds must be >= 0")
        if not self.update_period > 0:
            raise ValueError("update_period must be positive")


@dataclass
class Disturbance:
    at_time: float
    object_id: str
    delta: Pose

    def __post_init__(self):
        if self.at_time < 0:
            raise ValueError("at_time must be >= 0")


@dataclass
class ExecutionLimits:
    max_ticks: int = 600
    max_step_trans: float = 0.02    # m per tick
    max_step_rot: float = 0.15      # rad per tick


@dataclass
class TraceRecord:
    time: float
    ee_pose: Pose
    object_poses: dict[str, Pose]
    gripper_open: bool
    stage_index: int
    residual: float
    action_label: str = ""


@dataclass
class ExecutionTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, rec: TraceRecord):
        if self.records and rec.time <= self.records[-1].time:
            raise ValueError("trace times must be strictly increasing")
        self.records.append(rec)

    def __len__(self):
        return len(self.records)


@dataclass
class StageOutcome:
    success: bool
    ticks: int
    reason: str = ""


@dataclass
class Waypoint:
    pose: Pose
    gripper: str | None = None      # None | "open" | "close"


@dataclass
class SimWorld:
    """Mutable execution state. The gripper pseudo-object's pose and the
    held object's pose are kept rigidly consistent with ee_pose."""

    scene: Scene
    ee_pose: Pose = field(default_factory=Pose.identity)
    gripper_open: bool = True
    held_id: str | None = None
    grasp: GraspTransform | None = None
    time: float = 0.0

    def __post_init__(self):
        self.set_ee(self.ee_pose)

    def set_ee(self, pose: Pose):
        self.ee_pose = pose
        if self.scene.has(GRIPPER_ID):
            self.scene.get(GRIPPER_ID).pose = pose
        if self.held_id is not None:
            self.scene.get(self.held_id).pose = self.grasp.object_pose(pose)

    def attach(self, object_id: str):
        obj = self.scene.get(object_id)
        self.grasp = GraspTransform.between(self.ee_pose, obj.pose)
        self.held_id = object_id
        self.gripper_open = False

    def detach(self):
        self.held_id = None
        self.grasp = None
        self.gripper_open = True


def simulate_tracker_observation(true_pose: Pose, cfg: TrackerConfig,
                                 rng: np.random.Generator) -> Pose:
    """True pose perturbed by zero-mean Gaussian translation noise and a
    random-axis rotation with |N(0, rot_noise_std)| angle. Exact when both
    stds are zero (the rng is still consumed identically)."""
    dt = rng.normal(0.0, 1.0, 3) * cfg.trans_noise_std
    axis = rng.normal(0.0, 1.0, 3)
    ang = abs(rng.normal(0.0, 1.0)) * cfg.rot_noise_std
    if cfg.rot_noise_std == 0.0 and cfg.trans_noise_std == 0.0:
        return true_pose
    n = np.linalg.norm(axis)
    rot = (Rotation.from_axis_angle(axis / n, ang) if n > 1e-12 and ang > 0
           else Rotation.identity())
    return Pose(rot @ true_pose.rotation, true_pose.translation + dt)


def inject_disturbance(world: SimWorld, d: Disturbance):
    """Left-compose the delta onto an object's pose. Held objects cannot
    be disturbed (they are rigidly attached)."""
    if not world.scene.has(d.object_id):
        raise UnknownObject(d.object_id)
    if d.object_id == world.held_id:
        raise HeldObject(d.object_id)
    obj = world.scene.get(d.object_id)
    obj.pose = compose_poses(d.delta, obj.pose)


def evaluate_success(world: SimWorld, constraint: SpatialConstraint,
                     tol_d: float = DEFAULT_TOL_D,
                     tol_theta: float = DEFAULT_TOL_THETA) -> bool:
    """constraint_satisfied on the TRUE (noise-free) poses."""
    return constraint_satisfied(constraint, world.scene, tol_d, tol_theta)


def _world_approach(chosen: SpatialConstraint, target_ee: Pose,
                    world: SimWorld) -> np.ndarray:
    """Approach direction at the target: the active primitive direction
    mapped through the target active pose."""
    if chosen.active_id != GRIPPER_ID and world.held_id == chosen.active_id:
        active_pose = world.grasp.object_pose(target_ee)
        d = active_pose.rotation.apply(chosen.active.direction)
    else:
        d = target_ee.rotation.apply(chosen.active.direction)
    return d / np.linalg.norm(d)


def apply_action_primitive(world: SimWorld, stage: Stage,
                           chosen: SpatialConstraint,
                           target_ee: Pose) -> list[Waypoint]:
    """Expand the stage action into waypoint sub-goals around the solved
    target end-effector pose."""
    action = stage.action
    v = stage.param
    if action in (Action.PLACE, Action.PUSH):
        # Approach the target against the passive direction (e.g. from
        # above when placing onto an upward-facing surface).
        _, vp = primitive_to_world(chosen.passive,
                                   world.scene.get(chosen.passive_id))
        approach = -vp
    else:
        approach = _world_approach(chosen, target_ee, world)

    def back(dist):
        return replace(target_ee,
                       translation=target_ee.translation - dist * approach)

    if action is Action.GRASP:
        return [Waypoint(back(GRASP_STANDOFF)),
                Waypoint(target_ee, gripper="close")]
    if action is Action.PLACE:
        return [Waypoint(back(v)), Waypoint(target_ee, gripper="open")]
    if action is Action.PUSH:
        return [Waypoint(back(v), gripper="close"), Waypoint(target_ee)]
    if action is Action.PULL:
        return [Waypoint(target_ee), Waypoint(back(-v))]
    if action is Action.ROTATE:
        # Rotate v degrees about the interaction direction through the
        # interaction point, applied to the current ee pose.
        active = world.scene.get(chosen.active_id)
        point, direction = primitive_to_world(chosen.active, active)
        rot = Rotation.from_axis_angle(direction, math.radians(v))
        about = Pose(rot, point - rot.apply(point))
        return [Waypoint(compose_poses(about, world.ee_pose))]
    if action is Action.POUR:
        # Translate the interaction point onto the target first, then
        # rotate about it to the target orientation.
        active = world.scene.get(chosen.active_id)
        if world.held_id == chosen.active_id:
            p_local = world.grasp.ee_to_object.apply(
                active.scale * chosen.active.point)
        else:
            p_local = active.scale * chosen.active.point
        target_point = target_ee.apply(p_local)
        cur_r = world.ee_pose.rotation
        t_rot = target_ee.rotation
        return [Waypoint(Pose(cur_r, target_point - cur_r.apply(p_local))),
                Waypoint(Pose(t_rot, target_point - t_rot.apply(p_local)))]
    raise ActionStageMismatch(f"unsupported action {action}")


def _step_toward(current: Pose, target: Pose, limits: ExecutionLimits) -> Pose:
    """Clamped straight-line / geodesic step from current toward target."""
    dt = target.translation - current.translation
    dist = float(np.linalg.norm(dt))
    drel = current.rotation.inverse() @ target.rotation
    ang = drel.angle()
    s_t = 1.0 if dist <= limits.max_step_trans else limits.max_step_trans / dist
    s_r = 1.0 if ang <= limits.max_step_rot else limits.max_step_rot / ang
    s = min(s_t, s_r)
    if s >= 1.0:
        return target
    new_t = current.translation + s * dt
    axis, a = drel.axis_angle()
    new_r = current.rotation @ Rotation.from_axis_angle(axis, s * a)
    return Pose(new_r, new_t)


def _reached(pose: Pose, target: Pose) -> bool:
    return (float(np.linalg.norm(pose.translation - target.translation))
            <= WAYPOINT_TOL_TRANS
            and rotation_angle_between(pose.rotation, target.rotation)
            <= WAYPOINT_TOL_ROT)


def _observed_scene(world: SimWorld, tracker: TrackerConfig,
                    rng: np.random.Generator) -> Scene:
    objects = []
    for obj in world.scene.objects:
        if obj.id == GRIPPER_ID:
            pose = world.ee_pose       # proprioception, exact
        else:
            pose = simulate_tracker_observation(obj.pose, tracker, rng)
        objects.append(SceneObject(object=obj.object, pose=pose,
                                   scale=obj.scale, static=obj.static))
    return Scene(objects=objects, gripper_keypoints=world.scene.gripper_keypoints)


def _solve(world: SimWorld, chosen: SpatialConstraint, observed: Scene,
           warm: Pose | None, max_iters: int, seed: int) -> Pose:
    if chosen.active_id != GRIPPER_ID and world.held_id == chosen.active_id:
        grasp = world.grasp
    else:
        grasp = GraspTransform.identity()
    start = warm if warm is not None else world.ee_pose
    # Cold starts may need a large reorientation; a bigger initial
    # line-search step lets the descent cover it within the budget.
    step = 0.02 if warm is not None else 0.1
    result = solve_target_pose(
        start, chosen, observed, grasp, EXEC_LOSS,
        SolverConfig(max_iters=max_iters, step=step, seed=seed))
    return result.target_pose


def _grasp_target_id(stage: Stage) -> str:
    # In a grasp stage the gripper acts on the passive object.
    return stage.passive_id


def _gripper_phase_done(world: SimWorld, stage: Stage) -> bool:
    if stage.action is Action.GRASP:
        return world.held_id == _grasp_target_id(stage)
    if stage.action is Action.PLACE:
        return world.gripper_open
    return True


def execute_stage(world: SimWorld, stage: Stage, chosen: SpatialConstraint,
                  mode: str = "closed_loop",
                  tracker: TrackerConfig | None = None,
                  disturbances: list[Disturbance] | None = None,
                  limits: ExecutionLimits | None = None,
                  stage_index: int = 0,
                  trace: ExecutionTrace | None = None,
                  tol_d: float = DEFAULT_TOL_D,
                  tol_theta: float = DEFAULT_TOL_THETA
                  ) -> tuple[StageOutcome, ExecutionTrace]:
    """Run one stage to success (on true poses) or tick exhaustion.

    closed_loop: every tick applies due disturbances, observes tracked
    poses, re-solves the target pose warm-started from the previous
    solution, and steps the end-effector clamped to the per-tick limits.
    open_loop: solves once from the initial observation and replays that
    fixed plan, ignoring later observations."""
    if mode not in ("closed_loop", "open_loop"):
        raise ValueError(f"unknown mode {mode!r}")
    tracker = tracker or TrackerConfig()
    limits = limits or ExecutionLimits()
    trace = trace if trace is not None else ExecutionTrace()
    rng = np.random.default_rng(tracker.seed)
    pending = sorted(disturbances or [], key=lambda d: d.at_time)
    label = f"{stage.action.value}:{stage.active_id}:{stage.passive_id}"

    warm: Pose | None = None
    cached: list[Waypoint] | None = None
    wp_index = 0

    def record(residual: float):
        trace.append(TraceRecord(
            time=world.time,
            ee_pose=world.ee_pose,
            object_poses={o.id: o.pose for o in world.scene.objects},
            gripper_open=world.gripper_open,
            stage_index=stage_index,
            residual=residual,
            action_label=label,
        ))

    def stage_satisfied() -> bool:
        return (_gripper_phase_done(world, stage)
                and evaluate_success(world, chosen, tol_d, tol_theta))

    # Rotate targets are defined relative to the starting pose, so they are
    # expanded once in either mode.
    freeze_waypoints = (mode == "open_loop" or stage.action is Action.ROTATE)

    for tick in range(limits.max_ticks):
        world.time += tracker.update_period
        while pending and pending[0].at_time <= world.time:
            inject_disturbance(world, pending.pop(0))

        if cached is None or not freeze_waypoints:
            observed = _observed_scene(world, tracker, rng)
            max_iters = 300 if warm is None else 25
            target = _solve(world, chosen, observed, warm, max_iters,
                            tracker.seed)
            warm = target
            cached = apply_action_primitive(world, stage, chosen, target)
        waypoints = cached

        wp_index = min(wp_index, len(waypoints) - 1)
        wp = waypoints[wp_index]
        world.set_ee(_step_toward(world.ee_pose, wp.pose, limits))
        if _reached(world.ee_pose, wp.pose):
            if wp.gripper == "close" and world.held_id is None:
                world.attach(_grasp_target_id(stage)
                             if stage.action is Action.GRASP
                             else stage.active_id)
            elif wp.gripper == "open" and world.held_id is not None:
                world.detach()
            if wp_index < len(waypoints) - 1:
                wp_index += 1

        de, ae = constraint_errors(chosen, world.scene)
        record(chosen.weight_d * de * de
               + (chosen.weight_theta * ae * ae if chosen.angle is not None
                  else 0.0))

        if stage_satisfied():
            return StageOutcome(True, tick + 1), trace

    ok = stage_satisfied()
    return StageOutcome(ok, limits.max_ticks,
                        "" if ok else "timeout"), trace


def execute_task(world: SimWorld, stages_with_constraints,
                 mode: str = "closed_loop",
                 tracker: TrackerConfig | None = None,
                 disturbances: list[Disturbance] | None = None,
                 limits: ExecutionLimits | None = None
                 ) -> tuple[list[StageOutcome], ExecutionTrace]:
    """Execute (stage, chosen constraint) pairs in order on a shared world
    and trace. Disturbances fire once, in whichever stage their absolute
    time falls. Stops early when a stage fails."""
    trace = ExecutionTrace()
    pending = sorted(disturbances or [], key=lambda d: d.at_time)
    outcomes = []
    for i, (stage, chosen) in enumerate(stages_with_constraints):
        outcome, trace = execute_stage(
            world, stage, chosen, mode=mode, tracker=tracker,
            disturbances=pending, limits=limits, stage_index=i, trace=trace)
        pending = [d for d in pending if d.at_time > world.time]
        outcomes.append(outcome)
        if not outcome.success:
            break
    return outcomes, trace
