"""Deterministic point-splat rendering, PPM I/O, and golden images."""

import math
import os

import numpy as np
import pytest

from canonimanip import scenario_io as sio
from canonimanip.constraints import satisfying_active_pose
from canonimanip.errors import DegenerateCamera
from canonimanip.planning import enumerate_candidates, load_task
from canonimanip.render import (ACTIVE_COLOR, BACKGROUND, PASSIVE_COLOR,
                                CameraSpec, RenderedImage, ppm_bytes,
                                read_ppm, render_interaction, render_svg,
                                write_ppm)

from conftest import GOLDEN_DIR, scenario_path
from test_constraints import make_constraint, two_object_scene


def render_demo(scenario, stage_index, candidate_index, grid=False,
                azimuth_deg=0.0):
    scene, _ = sio.build_scene(
        sio.load_json(scenario_path(f"{scenario}_scene.json")))
    task = load_task(sio.load_json(scenario_path(f"{scenario}_task.json")),
                     scene)
    stage = task.stages[stage_index]
    cand = enumerate_candidates(stage, scene)[candidate_index]
    camera = CameraSpec()
    if azimuth_deg:
        camera = camera.with_azimuth(math.radians(azimuth_deg))
    return render_interaction(scene, cand,
                              satisfying_active_pose(cand, scene),
                              camera, grid=grid)


class TestCameraSpec:
    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            CameraSpec(width=8, height=8)

    def test_bad_fov_rejected(self):
        with pytest.raises(ValueError):
            CameraSpec(vertical_fov=0.0)

    def test_azimuth_preserves_distance_and_height(self):
        cam = CameraSpec()
        rot = cam.with_azimuth(math.radians(30))
        assert np.isclose(np.linalg.norm(rot.eye - rot.look_at),
                          np.linalg.norm(cam.eye - cam.look_at))
        assert np.isclose(rot.eye[2], cam.eye[2])

    def test_degenerate_eye_rejected(self):
        cam = CameraSpec(eye=np.zeros(3), look_at=np.zeros(3))
        with pytest.raises(DegenerateCamera):
            render_interaction(two_object_scene(), make_constraint(),
                               satisfying_active_pose(make_constraint(),
                                                      two_object_scene()),
                               cam)

    def test_up_parallel_to_view_rejected(self):
        cam = CameraSpec(eye=np.array([0, 0, 1.0]), look_at=np.zeros(3),
                         up=np.array([0, 0, 1.0]))
        with pytest.raises(DegenerateCamera):
            render_interaction(two_object_scene(), make_constraint(),
                               satisfying_active_pose(make_constraint(),
                                                      two_object_scene()),
                               cam)


class TestRenderedImage:
    def test_buffer_size_checked(self):
        with pytest.raises(ValueError):
            RenderedImage(16, 16, b"short")


class TestRenderInteraction:
    def test_deterministic(self):
        a = render_demo("pick_place", 1, 0)
        b = render_demo("pick_place", 1, 0)
        assert a.pixels == b.pixels

    def test_palette_present(self):
        img = render_demo("pick_place", 1, 0)
        buf = np.frombuffer(img.pixels, dtype=np.uint8).reshape(-1, 3)
        colors = {tuple(c) for c in np.unique(buf, axis=0)}
        assert tuple(BACKGROUND) in colors
        assert tuple(ACTIVE_COLOR) in colors
        assert tuple(PASSIVE_COLOR) in colors

    def test_grid_changes_bytes(self):
        assert render_demo("pick_place", 1, 0).pixels \
            != render_demo("pick_place", 1, 0, grid=True).pixels

    def test_azimuth_changes_bytes(self):
        assert render_demo("pick_place", 1, 0).pixels \
            != render_demo("pick_place", 1, 0, azimuth_deg=25).pixels


class TestPpm:
    def test_header_and_round_trip(self, tmp_path):
        img = render_demo("pick_place", 1, 0)
        data = ppm_bytes(img)
        assert data.startswith(b"P6\n320 240\n255\n")
        assert len(data) == len(b"P6\n320 240\n255\n") + 3 * 320 * 240
        path = tmp_path / "out.ppm"
        write_ppm(img, path)
        back = read_ppm(path)
        assert back.width == img.width and back.height == img.height
        assert back.pixels == img.pixels

    def test_unwritable_path_raises(self):
        img = render_demo("pick_place", 1, 0)
        with pytest.raises(OSError):
            write_ppm(img, "/nonexistent-dir/out.ppm")

    def test_read_non_ppm_rejected(self, tmp_path):
        path = tmp_path / "bad.ppm"
        path.write_bytes(b"JUNKJUNKJUNK")
        with pytest.raises(ValueError):
            read_ppm(path)


class TestGolden:
    CASES = [
        ("place_default", ("pick_place", 1, 0, False, 0.0)),
        ("pour_grid", ("pour_tea", 1, 1, True, 0.0)),
        ("grasp_azimuth45", ("pick_place", 0, 0, False, 45.0)),
    ]

    @pytest.mark.parametrize("name,args", CASES)
    def test_byte_identical_to_committed(self, name, args):
        scenario, stage, cand, grid, azim = args
        img = render_demo(scenario, stage, cand, grid=grid, azimuth_deg=azim)
        golden = os.path.join(GOLDEN_DIR, f"{name}.ppm")
        with open(golden, "rb") as fh:
            assert fh.read() == ppm_bytes(img)


class TestSvg:
    def test_contains_expected_elements(self):
        scene, _ = sio.build_scene(
            sio.load_json(scenario_path("pick_place_scene.json")))
        task = load_task(
            sio.load_json(scenario_path("pick_place_task.json")), scene)
        cand = enumerate_candidates(task.stages[1], scene)[0]
        svg = render_svg(scene, cand, satisfying_active_pose(cand, scene),
                         CameraSpec())
        assert svg.startswith("<svg")
        assert "<circle" in svg and "<line" in svg
        assert svg.rstrip().endswith("</svg>")

    def test_deterministic(self):
        scene, _ = sio.build_scene(
            sio.load_json(scenario_path("pick_place_scene.json")))
        task = load_task(
            sio.load_json(scenario_path("pick_place_task.json")), scene)
        cand = enumerate_candidates(task.stages[1], scene)[0]
        args = (scene, cand, satisfying_active_pose(cand, scene), CameraSpec())
        assert render_svg(*args) == render_svg(*args)
