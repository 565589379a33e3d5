"""Sampling-efficiency benchmark: canonical-axis candidates vs uniformly
random directions under randomized canonical-to-functional misalignment,
scored by the geometric checker oracle with a shared per-trial budget.
"""

from __future__ import annotations

import math

import numpy as np

from .checker import geometric_check
from .constraints import CandidateList
from .geometry import Rotation
from .planning import RrcConfig, Task, enumerate_candidates, run_rrc
from .objects import Scene
from .render import CameraSpec, render_interaction
from .constraints import satisfying_active_pose

#: Verdict tolerance for the benchmark oracle; looser than the execution
#: tolerance because the refinement fan is coarse (6 azimuths).
BENCH_TOL_THETA = math.radians(10.0)
BENCH_MISALIGN_MAX = math.radians(15.0)


def perturb_axis(base: np.ndarray, alpha: float, phi: float) -> np.ndarray:
    """Unit vector at polar angle alpha from base, azimuth phi."""
    e1 = np.eye(3)[int(np.argmin(np.abs(base)))]
    e1 = e1 - float(np.dot(e1, base)) * base
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(base, e1)
    v = (math.cos(alpha) * base
         + math.sin(alpha) * (math.cos(phi) * e1 + math.sin(phi) * e2))
    return v / np.linalg.norm(v)


def run_sampling_trial(build_scene_and_task, strategy: str, seed: int,
                       stage_index: int = -1,
                       misalign_max: float = BENCH_MISALIGN_MAX,
                       cfg: RrcConfig | None = None):
    """One seeded trial: randomize the active object's functional axis
    around its annotated base, then run the RRC loop with either the six
    canonical-axis candidates or the same number of uniformly random unit
    directions (identical refine budget)."""
    if strategy not in ("axes", "uniform"):
        raise ValueError(f"unknown strategy {strategy!r}")
    cfg = cfg or RrcConfig()
    scene, task = build_scene_and_task()
    stage = task.stages[stage_index]
    rng = np.random.default_rng(seed)

    active = scene.get(stage.active_id).object
    base = active.functional_axis(stage.action.value)
    if base is None:
        raise ValueError(f"{stage.active_id!r} has no functional axis to perturb")
    alpha = rng.uniform(0.0, misalign_max)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    active.functional_axes[stage.action.value] = perturb_axis(base, alpha, phi)

    k_list = enumerate_candidates(stage, scene)
    if strategy == "uniform":
        dirs = rng.normal(size=(len(k_list), 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        k_list = CandidateList(
            [k_list[0].with_active_direction(d) for d in dirs])

    checker = geometric_check(scene, tol_theta=BENCH_TOL_THETA)
    camera = CameraSpec(width=64, height=48)

    def renderer(st, cand):
        return render_interaction(scene, cand,
                                  satisfying_active_pose(cand, scene), camera)

    return run_rrc(stage, k_list, checker, renderer, cfg,
                   task_instruction=task.instruction)


def run_sampling_benchmark(build_scene_and_task, trials: int, seed: int,
                           strategy: str, stage_index: int = -1,
                           misalign_max: float = BENCH_MISALIGN_MAX) -> dict:
    """Seeded benchmark over `trials` randomized misalignments. Trial i
    uses seed + i, so reports for the two strategies are seed-paired."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    checks = []
    successes = 0
    for i in range(trials):
        outcome = run_sampling_trial(build_scene_and_task, strategy,
                                     seed + i, stage_index, misalign_max)
        checks.append(outcome.checks_used)
        if not outcome.failed:
            successes += 1
    return {
        "strategy": strategy,
        "trials": trials,
        "seed": seed,
        "mean_checks_used": sum(checks) / trials,
        "success_rate": successes / trials,
    }
