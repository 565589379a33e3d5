#!/usr/bin/env python3
"""Closed-loop vs open-loop execution under mid-task disturbances.

Runs the pick-and-place scenario over several seeds, displacing the target
pad partway through the place stage, and reports success rates for both
execution modes plus undisturbed controls.

Usage: python3 scripts/run_disturbance_study.py [--runs N] [--seed S]
"""

import argparse
import os
import sys

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from canonimanip import scenario_io as sio                       # noqa: E402
from canonimanip.checker import geometric_check                  # noqa: E402
from canonimanip.constraints import satisfying_active_pose       # noqa: E402
from canonimanip.executor import (Disturbance, SimWorld, TrackerConfig,  # noqa: E402
                                  execute_task)
from canonimanip.geometry import Pose, Rotation                  # noqa: E402
from canonimanip.planning import (RrcConfig, enumerate_candidates,  # noqa: E402
                                  load_task, run_rrc)
from canonimanip.render import CameraSpec, render_interaction    # noqa: E402


def plan(scene, task):
    checker = geometric_check(scene)
    camera = CameraSpec(width=64, height=48)

    def renderer(stage, cand):
        return render_interaction(scene, cand,
                                  satisfying_active_pose(cand, scene), camera)

    pairs = []
    for stage in task.stages:
        outcome = run_rrc(stage, enumerate_candidates(stage, scene), checker,
                          renderer, RrcConfig(), task.instruction)
        assert not outcome.failed
        pairs.append((stage, outcome.chosen))
    return pairs


def run(scene_doc, task_doc, mode, disturbances, seed):
    scene, ee = sio.build_scene(scene_doc)
    task = load_task(task_doc, scene)
    pairs = plan(scene, task)
    world = SimWorld(scene=scene, ee_pose=ee)
    outcomes, _ = execute_task(world, pairs, mode=mode,
                               tracker=TrackerConfig(seed=seed),
                               disturbances=disturbances)
    return len(outcomes) == len(pairs) and all(o.success for o in outcomes)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    scene_doc = sio.load_json(os.path.join(ROOT, "scenarios",
                                           "pick_place_scene.json"))
    task_doc = sio.load_json(os.path.join(ROOT, "scenarios",
                                          "pick_place_task.json"))

    tally = {"closed": 0, "open": 0, "closed_ctl": 0, "open_ctl": 0}
    for i in range(args.runs):
        rng = np.random.default_rng(args.seed + i)
        shift = rng.uniform(0.02, 0.05)
        ang = rng.uniform(0, 2 * np.pi)
        delta = Pose(Rotation.identity(),
                     np.array([shift * np.cos(ang), shift * np.sin(ang), 0.0]))
        # The grasp finishes around t = 0.5 s; disturb during the place.
        dist = [Disturbance(at_time=0.7, object_id="pad", delta=delta)]
        tally["closed"] += run(scene_doc, task_doc, "closed_loop", dist,
                               args.seed + i)
        tally["open"] += run(scene_doc, task_doc, "open_loop", dist,
                             args.seed + i)
        tally["closed_ctl"] += run(scene_doc, task_doc, "closed_loop", [],
                                   args.seed + i)
        tally["open_ctl"] += run(scene_doc, task_doc, "open_loop", [],
                                 args.seed + i)

    n = args.runs
    print(f"runs: {n}")
    print(f"closed-loop, disturbed:   {tally['closed']}/{n}")
    print(f"open-loop,   disturbed:   {tally['open']}/{n}")
    print(f"closed-loop, control:     {tally['closed_ctl']}/{n}")
    print(f"open-loop,   control:     {tally['open_ctl']}/{n}")


if __name__ == "__main__":
    main()
