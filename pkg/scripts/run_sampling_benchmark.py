#!/usr/bin/env python3
"""Seed-paired comparison of canonical-axis candidate sampling against
uniform random direction sampling on the pour scenario.

Usage: python3 scripts/run_sampling_benchmark.py [--trials N] [--seed S]
"""

import argparse
import json
import os
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from canonimanip import scenario_io as sio          # noqa: E402
from canonimanip.bench import run_sampling_benchmark  # noqa: E402
from canonimanip.planning import load_task          # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scene", default=os.path.join(
        ROOT, "scenarios", "pour_tea_scene.json"))
    ap.add_argument("--task", default=os.path.join(
        ROOT, "scenarios", "pour_tea_task.json"))
    args = ap.parse_args()

    scene_doc = sio.load_json(args.scene)
    task_doc = sio.load_json(args.task)

    def build():
        scene, _ = sio.build_scene(scene_doc)
        return scene, load_task(task_doc, scene)

    reports = {
        strategy: run_sampling_benchmark(build, trials=args.trials,
                                         seed=args.seed, strategy=strategy)
        for strategy in ("axes", "uniform")
    }
    print(json.dumps(reports, indent=2))
    axes, uni = reports["axes"], reports["uniform"]
    print(f"\ncheck-count ratio (axes/uniform): "
          f"{axes['mean_checks_used'] / uni['mean_checks_used']:.2f}")
    print(f"success-rate gap (axes - uniform): "
          f"{axes['success_rate'] - uni['success_rate']:+.2f}")


if __name__ == "__main__":
    main()
