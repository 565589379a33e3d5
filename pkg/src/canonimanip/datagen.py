"""Demonstration dataset writer: runs the full pipeline (enumerate, RRC
with the geometric oracle, closed-loop execution) over jittered episodes
and records JSONL traces for imitation learning.

One episode per line; failed episodes are written with outcome "failure"
rather than dropped, preserving attempt statistics. Poses serialize as
{"q": [w, x, y, z], "t": [x, y, z]}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, Rotation, compose_poses
from .objects import GRIPPER_ID, Scene
from .optimizer import GraspTransform
from .executor import ExecutionTrace, SimWorld, TrackerConfig, execute_task
from .planning import RrcConfig, enumerate_candidates, run_rrc


def pose_to_json(pose: Pose) -> dict:
    return {"q": [float(x) for x in pose.rotation.q],
            "t": [float(x) for x in pose.translation]}


def pose_from_json(d: dict) -> Pose:
    return Pose(Rotation(np.asarray(d["q"], dtype=float)),
                np.asarray(d["t"], dtype=float))


@dataclass
class EpisodeRecord:
    episode: int
    steps: list[dict]
    outcome: str                    # "success" | "failure"
    seed: int
    scenario_hash: str

    def __post_init__(self):
        if self.outcome == "success" and not self.steps:
            raise ValueError("success episodes must have steps")
        times = [s["t"] for s in self.steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("step times must be strictly increasing")

    def to_json_line(self) -> str:
        return json.dumps({
            "episode": self.episode,
            "outcome": self.outcome,
            "seed": self.seed,
            "scenario_hash": self.scenario_hash,
            "steps": self.steps,
        })

    @staticmethod
    def from_json_line(line: str) -> "EpisodeRecord":
        d = json.loads(line)
        return EpisodeRecord(episode=d["episode"], steps=d["steps"],
                             outcome=d["outcome"], seed=d["seed"],
                             scenario_hash=d["scenario_hash"])


def record_trace(trace: ExecutionTrace, episode: int, outcome: str,
                 seed: int, scenario_hash: str) -> EpisodeRecord:
    """Lossless conversion of an execution trace into an episode record."""
    steps = [
        {
            "t": rec.time,
            "ee_pose": pose_to_json(rec.ee_pose),
            "gripper_open": rec.gripper_open,
            "object_poses": {k: pose_to_json(v)
                             for k, v in rec.object_poses.items()},
            "stage": rec.stage_index,
            "action": rec.action_label,
        }
        for rec in trace.records
    ]
    return EpisodeRecord(episode=episode, steps=steps, outcome=outcome,
                         seed=seed, scenario_hash=scenario_hash)


@dataclass
class PoseJitter:
    """Per-episode initial pose randomization ranges (uniform)."""

    trans_range: float = 0.01       # m, per horizontal axis
    yaw_range: float = math.radians(10.0)

    def apply(self, pose: Pose, rng: np.random.Generator) -> Pose:
        dt = np.array([rng.uniform(-self.trans_range, self.trans_range),
                       rng.uniform(-self.trans_range, self.trans_range), 0.0])
        yaw = rng.uniform(-self.yaw_range, self.yaw_range)
        dr = Rotation.from_axis_angle([0.0, 0.0, 1.0], yaw)
        return Pose(dr @ pose.rotation, pose.translation + dt)


def replay_episode(record: EpisodeRecord, scene: Scene) -> dict[str, Pose]:
    """Re-simulate the recorded end-effector waypoints against the
    recorded initial scene and return the final object poses.

    Attachment is reconstructed from the recorded gripper transitions: on
    close, the grasp-stage target object (from the step's action label) is
    attached with the relative pose recorded at that step."""
    if not record.steps:
        return {}
    poses = {k: pose_from_json(v)
             for k, v in record.steps[0]["object_poses"].items()}
    held = None
    grasp = None
    prev_open = True
    for step in record.steps:
        ee = pose_from_json(step["ee_pose"])
        if held is not None:
            poses[held] = grasp.object_pose(ee)
        if GRIPPER_ID in poses:
            poses[GRIPPER_ID] = ee
        now_open = step["gripper_open"]
        if prev_open and not now_open:
            parts = step["action"].split(":")
            action = parts[0]
            target = parts[2] if action == "grasp" else parts[1]
            obj_pose = pose_from_json(step["object_poses"][target])
            grasp = GraspTransform.between(ee, obj_pose)
            held = target
            poses[held] = obj_pose
        elif not prev_open and now_open:
            held = None
            grasp = None
        prev_open = now_open
    return poses


def max_final_pose_deviation(record: EpisodeRecord, scene: Scene) -> float:
    """Self-consistency metric: max over objects of translation deviation
    plus rotation angle between replayed and recorded final poses."""
    replayed = replay_episode(record, scene)
    if not record.steps:
        return 0.0
    final = {k: pose_from_json(v)
             for k, v in record.steps[-1]["object_poses"].items()}
    worst = 0.0
    for oid, pose in final.items():
        rp = replayed[oid]
        dev = float(np.linalg.norm(rp.translation - pose.translation))
        dev += (rp.rotation.inverse() @ pose.rotation).angle()
        worst = max(worst, dev)
    return worst


def generate_dataset(build_world, task, episodes: int,
                     randomization: PoseJitter, seed: int, sink_path,
                     scenario_hash: str = "", checker_factory=None,
                     renderer=None, rrc_cfg: RrcConfig | None = None,
                     tracker: TrackerConfig | None = None) -> dict:
    """Run `episodes` full pipeline episodes and write one JSONL line each.

    `build_world()` must return a fresh SimWorld; per-episode seeds derive
    as seed + index and drive both the jitter and the tracker. The checker
    defaults to the geometric oracle on the episode's own (true) scene.
    Returns {"attempted": n, "succeeded": k}; only successful episodes
    count toward `succeeded`, but failures are still written.
    """
    from .checker import geometric_check
    from .render import CameraSpec, render_interaction
    from .constraints import satisfying_active_pose

    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    rrc_cfg = rrc_cfg or RrcConfig()
    camera = CameraSpec(width=64, height=48)

    attempted = 0
    succeeded = 0
    lines = []
    for i in range(episodes):
        ep_seed = seed + i
        rng = np.random.default_rng(ep_seed)
        world = build_world()
        for obj in world.scene.objects:
            if obj.static or obj.id == GRIPPER_ID:
                continue
            obj.pose = randomization.apply(obj.pose, rng)
        checker = (checker_factory(world.scene) if checker_factory
                   else geometric_check(world.scene))
        render = renderer or (
            lambda stage, cand: render_interaction(
                world.scene, cand, satisfying_active_pose(cand, world.scene),
                camera))

        chosen_pairs = []
        plan_ok = True
        for stage in task.stages:
            k_list = enumerate_candidates(stage, world.scene)
            outcome = run_rrc(stage, k_list, checker, render, rrc_cfg,
                              task_instruction=task.instruction)
            if outcome.failed:
                plan_ok = False
                break
            chosen_pairs.append((stage, outcome.chosen))

        attempted += 1
        if plan_ok:
            ep_tracker = TrackerConfig(
                trans_noise_std=tracker.trans_noise_std if tracker else 0.0,
                rot_noise_std=tracker.rot_noise_std if tracker else 0.0,
                update_period=tracker.update_period if tracker else 0.02,
                seed=ep_seed)
            outcomes, trace = execute_task(world, chosen_pairs,
                                           mode="closed_loop",
                                           tracker=ep_tracker)
            ok = bool(outcomes) and all(o.success for o in outcomes)
        else:
            trace = ExecutionTrace()
            ok = False
        record = record_trace(trace, episode=i,
                              outcome="success" if ok else "failure",
                              seed=ep_seed, scenario_hash=scenario_hash)
        lines.append(record.to_json_line())
        if ok:
            succeeded += 1

    with open(sink_path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")
    return {"attempted": attempted, "succeeded": succeeded}
