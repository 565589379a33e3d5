"""Command-line entry points: plan, execute, bench-sampling, render.

Exit codes: 0 full success, 2 plan/stage failure, 1 errors (bad files,
bad indices, unavailable oracle). All commands are deterministic given
--seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bench as bench_mod
from . import scenario_io as sio
from .errors import (CanonimanipError, IndexOutOfRange, OracleUnavailable,
                     ParseError)
from .checker import geometric_check, interactive_check, remote_check, scripted_check
from .constraints import satisfying_active_pose
from .datagen import pose_to_json
from .executor import SimWorld, TrackerConfig, execute_task
from .planning import RrcConfig, enumerate_candidates, load_task, run_rrc
from .render import CameraSpec, render_interaction, write_ppm

ORACLE_URL_ENV = "CANONIMANIP_ORACLE_URL"


def _camera(args) -> CameraSpec:
    cam = CameraSpec(width=args.width, height=args.height)
    if getattr(args, "camera_azimuth", 0.0):
        cam = cam.with_azimuth(math.radians(args.camera_azimuth))
    return cam


def _make_checker(spec: str, scene):
    if spec == "geometric":
        return geometric_check(scene)
    if spec.startswith("scripted:"):
        doc = sio.load_json(spec.split(":", 1)[1])
        return scripted_check(doc)
    if spec == "remote" or spec.startswith("remote:"):
        url = spec.split(":", 1)[1] if ":" in spec else os.environ.get(
            ORACLE_URL_ENV, "")
        if not url:
            raise ParseError(f"--oracle remote needs a URL or {ORACLE_URL_ENV}")
        return remote_check(url)
    if spec == "interactive":
        return interactive_check()
    raise ParseError(f"unknown oracle {spec!r}")


def cmd_plan(args) -> int:
    scene_doc = sio.load_json(args.scene)
    task_doc = sio.load_json(args.task)
    scene, _ = sio.build_scene(scene_doc)
    task = load_task(task_doc, scene)
    checker = _make_checker(args.oracle, scene)
    camera = _camera(args)
    cfg = RrcConfig()

    def make_renderer(stage_index):
        counter = [0]

        def renderer(stage, cand):
            img = render_interaction(scene, cand,
                                     satisfying_active_pose(cand, scene),
                                     camera, grid=args.grid)
            if args.render_dir:
                os.makedirs(args.render_dir, exist_ok=True)
                write_ppm(img, os.path.join(
                    args.render_dir,
                    f"stage{stage_index}_check{counter[0]}.ppm"))
            counter[0] += 1
            return img

        return renderer

    outcomes = []
    for i, stage in enumerate(task.stages):
        k_list = enumerate_candidates(stage, scene)
        outcome = run_rrc(stage, k_list, checker, make_renderer(i), cfg,
                          task_instruction=task.instruction)
        if outcome.failed:
            print(f"stage {i} ({stage.action.value}): no candidate accepted "
                  f"after {outcome.checks_used} checks", file=sys.stderr)
            return 2
        outcomes.append(outcome)

    plan = sio.plan_to_doc(task, outcomes,
                           scene_hash=sio.document_hash(scene_doc),
                           task_hash=sio.document_hash(task_doc))
    out = json.dumps(plan, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


def cmd_execute(args) -> int:
    scene_doc = sio.load_json(args.scene)
    plan_doc = sio.load_json(args.plan)
    scene_hash, pairs = sio.plan_from_doc(plan_doc)
    if scene_hash != sio.document_hash(scene_doc):
        raise ParseError("plan was made for a different scene "
                         "(scene hash mismatch)")
    scene, ee_pose = sio.build_scene(scene_doc)
    disturbances = []
    if args.disturb:
        disturbances = sio.disturbances_from_doc(sio.load_json(args.disturb))
    world = SimWorld(scene=scene, ee_pose=ee_pose)
    tracker = TrackerConfig(seed=args.seed)
    mode = "closed_loop" if args.mode == "closed" else "open_loop"
    outcomes, trace = execute_task(world, pairs, mode=mode, tracker=tracker,
                                   disturbances=disturbances)
    if args.trace:
        with open(args.trace, "w") as fh:
            json.dump({
                "mode": args.mode,
                "seed": args.seed,
                "stages": [{"success": o.success, "ticks": o.ticks,
                            "reason": o.reason} for o in outcomes],
                "records": [{
                    "t": r.time,
                    "ee_pose": pose_to_json(r.ee_pose),
                    "object_poses": {k: pose_to_json(v)
                                     for k, v in r.object_poses.items()},
                    "gripper_open": r.gripper_open,
                    "stage": r.stage_index,
                    "residual": r.residual,
                    "action": r.action_label,
                } for r in trace.records],
            }, fh)
    ok = len(outcomes) == len(pairs) and all(o.success for o in outcomes)
    for i, o in enumerate(outcomes):
        status = "success" if o.success else f"failure ({o.reason})"
        print(f"stage {i}: {status} after {o.ticks} ticks", file=sys.stderr)
    return 0 if ok else 2


def cmd_bench_sampling(args) -> int:
    scene_doc = sio.load_json(args.scene)
    task_doc = sio.load_json(args.task)

    def build():
        scene, _ = sio.build_scene(scene_doc)
        return scene, load_task(task_doc, scene)

    report = bench_mod.run_sampling_benchmark(
        build, trials=args.trials, seed=args.seed, strategy=args.strategy)
    out = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    print(out)
    return 0


def cmd_render(args) -> int:
    scene_doc = sio.load_json(args.scene)
    task_doc = sio.load_json(args.task)
    scene, _ = sio.build_scene(scene_doc)
    task = load_task(task_doc, scene)
    if not 0 <= args.stage < len(task.stages):
        raise IndexOutOfRange(f"stage {args.stage} of {len(task.stages)}")
    stage = task.stages[args.stage]
    k_list = enumerate_candidates(stage, scene)
    if not 0 <= args.candidate < len(k_list):
        raise IndexOutOfRange(f"candidate {args.candidate} of {len(k_list)}")
    cand = k_list[args.candidate]
    img = render_interaction(scene, cand, satisfying_active_pose(cand, scene),
                             _camera(args), grid=args.grid)
    write_ppm(img, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="canonimanip",
        description="Object-centric manipulation planning and execution")
    sub = p.add_subparsers(dest="command", required=True)

    def add_camera_opts(sp):
        sp.add_argument("--camera-azimuth", type=float, default=0.0,
                        help="camera azimuth about world z, degrees")
        sp.add_argument("--width", type=int, default=320)
        sp.add_argument("--height", type=int, default=240)
        sp.add_argument("--grid", action="store_true",
                        help="overlay a Cartesian grid")

    sp = sub.add_parser("plan", help="enumerate candidates and run RRC")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--task", required=True)
    sp.add_argument("--oracle", default="geometric",
                    help="geometric | scripted:FILE | remote[:URL] | interactive")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--render-dir", default=None)
    sp.add_argument("--out", default=None)
    add_camera_opts(sp)
    sp.set_defaults(fn=cmd_plan)

    sp = sub.add_parser("execute", help="execute a plan in the simulator")
    sp.add_argument("--plan", required=True)
    sp.add_argument("--scene", required=True)
    sp.add_argument("--mode", choices=["open", "closed"], default="closed")
    sp.add_argument("--disturb", default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trace", default=None)
    sp.set_defaults(fn=cmd_execute)

    sp = sub.add_parser("bench-sampling",
                        help="axis vs uniform direction sampling benchmark")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--task", required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--strategy", choices=["axes", "uniform"], default="axes")
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_bench_sampling)

    sp = sub.add_parser("render", help="render one candidate to a PPM file")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--task", required=True)
    sp.add_argument("--stage", type=int, required=True)
    sp.add_argument("--candidate", type=int, required=True)
    sp.add_argument("--out", required=True)
    add_camera_opts(sp)
    sp.set_defaults(fn=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CanonimanipError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
