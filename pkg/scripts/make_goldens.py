#!/usr/bin/env python3
"""Regenerate the golden interaction renders under tests/golden/.

The renderer is integer-only, so these files are byte-stable across
platforms; regenerate them only after an intentional renderer change.
"""

import math
import os
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from canonimanip import scenario_io as sio                      # noqa: E402
from canonimanip.constraints import satisfying_active_pose      # noqa: E402
from canonimanip.planning import enumerate_candidates, load_task  # noqa: E402
from canonimanip.render import CameraSpec, render_interaction, write_ppm  # noqa: E402

GOLDEN_DIR = os.path.join(ROOT, "tests", "golden")

#: (name, scene file, task file, stage, candidate, grid, azimuth degrees)
GOLDENS = [
    ("place_default", "pick_place", 1, 0, False, 0.0),
    ("pour_grid", "pour_tea", 1, 1, True, 0.0),
    ("grasp_azimuth45", "pick_place", 0, 0, False, 45.0),
]


def render_golden(scenario: str, stage_index: int, candidate_index: int,
                  grid: bool, azimuth_deg: float):
    scene, _ = sio.build_scene(
        sio.load_json(os.path.join(ROOT, "scenarios", f"{scenario}_scene.json")))
    task = load_task(
        sio.load_json(os.path.join(ROOT, "scenarios", f"{scenario}_task.json")),
        scene)
    stage = task.stages[stage_index]
    cand = enumerate_candidates(stage, scene)[candidate_index]
    camera = CameraSpec()
    if azimuth_deg:
        camera = camera.with_azimuth(math.radians(azimuth_deg))
    return render_interaction(scene, cand, satisfying_active_pose(cand, scene),
                              camera, grid=grid)


def main():
    os.makedirs(GOLDEN_DIR, exist_ok=True)
    for name, scenario, stage, cand, grid, azim in GOLDENS:
        img = render_golden(scenario, stage, cand, grid, azim)
        path = os.path.join(GOLDEN_DIR, f"{name}.ppm")
        write_ppm(img, path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
