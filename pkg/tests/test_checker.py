"""Verdict oracles: scripted, geometric, remote HTTP, and interactive."""

import base64
import io
import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from canonimanip.checker import (CheckRequest, geometric_check,
                                 interactive_check, remote_check,
                                 request_payload, scripted_check)
from canonimanip.errors import OracleUnavailable, ScriptExhausted
from canonimanip.geometry import Pose, Rotation
from canonimanip.objects import Scene, SceneObject
from canonimanip.planning import Verdict
from canonimanip.render import RenderedImage

from conftest import box_object, two_object_scene
from test_constraints import make_constraint


def make_request(candidate, action="place", refine=False, image=None):
    return CheckRequest(
        task_instruction="test task",
        action=action,
        active_id=candidate.active_id,
        passive_id=candidate.passive_id,
        candidate=candidate,
        image=image or RenderedImage(16, 16, bytes(3 * 16 * 16)),
        refine_phase=refine,
    )


class TestScripted:
    def test_returns_in_order(self):
        check = scripted_check(["success", "refine", "failure"])
        req = make_request(make_constraint())
        assert check(req).verdict is Verdict.SUCCESS
        assert check(req).verdict is Verdict.REFINE
        assert check(req).verdict is Verdict.FAILURE

    def test_exhaustion(self):
        check = scripted_check([])
        with pytest.raises(ScriptExhausted):
            check(make_request(make_constraint()))


class TestGeometric:
    def test_aligned_candidate_succeeds(self):
        scene = two_object_scene()
        check = geometric_check(scene)
        c = make_constraint(distance=0.1, angle=0.0)
        assert check(make_request(c)).verdict is Verdict.SUCCESS

    def test_within_band_refines(self):
        scene = two_object_scene()
        check = geometric_check(scene)
        off = Rotation.from_axis_angle([1, 0, 0], math.radians(15)).apply(
            [0, 0, 1.0])
        c = make_constraint(distance=0.1, angle=0.0).with_active_direction(off)
        assert check(make_request(c)).verdict is Verdict.REFINE

    def test_beyond_band_fails(self):
        scene = two_object_scene()
        check = geometric_check(scene)
        c = make_constraint(distance=0.1,
                            angle=0.0).with_active_direction([1.0, 0, 0])
        assert check(make_request(c)).verdict is Verdict.FAILURE

    def test_missing_axis_fails(self):
        scene = Scene(objects=[SceneObject(object=box_object("a")),
                               SceneObject(object=box_object(
                                   "b", named_points={
                                       "top": np.array([0, 0, 0.02])}))],
                      gripper_keypoints=[[0, 0, 0]])
        check = geometric_check(scene)
        c = make_constraint(distance=0.1, angle=0.0)
        assert check(make_request(c)).verdict is Verdict.FAILURE

    def test_obstacle_blocks_success(self):
        scene = two_object_scene(dist=0.3)
        blocker = SceneObject(
            object=box_object("blocker"),
            pose=Pose(Rotation.identity(), np.array([0.3, 0.0, 0.07])))
        scene.objects.append(blocker)
        check = geometric_check(scene)
        # Satisfying pose puts "a" right where the blocker sits.
        c = make_constraint(distance=0.03, angle=0.0)
        assert check(make_request(c)).verdict is not Verdict.SUCCESS

    def test_ignores_image_content(self):
        scene = two_object_scene()
        check = geometric_check(scene)
        c = make_constraint(distance=0.1, angle=0.0)
        img_a = RenderedImage(16, 16, bytes(3 * 16 * 16))
        img_b = RenderedImage(16, 16, bytes([255]) * (3 * 16 * 16))
        assert check(make_request(c, image=img_a)).verdict \
            == check(make_request(c, image=img_b)).verdict

    def test_deterministic(self):
        scene = two_object_scene()
        check = geometric_check(scene)
        c = make_constraint(distance=0.1, angle=0.0)
        assert check(make_request(c)) == check(make_request(c))


class TestRequestPayload:
    def test_wire_fields(self):
        c = make_constraint(distance=0.1, angle=0.5)
        req = make_request(c, action="pour", refine=True)
        body = request_payload(req)
        assert body["task"] == "test task"
        assert body["stage"] == {"action": "pour", "active": "a",
                                 "passive": "b", "refine": True}
        assert np.allclose(body["candidate"]["direction"], [0, 0, 1])
        assert body["candidate"]["distance_m"] == 0.1
        assert np.isclose(body["candidate"]["angle_rad"], 0.5)
        assert body["image"]["format"] == "ppm"
        raw = base64.b64decode(body["image"]["base64"])
        assert raw.startswith(b"P6\n16 16\n255\n")


class _OracleHandler(BaseHTTPRequestHandler):
    responses = []          # list of (status, body-bytes)
    received = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        _OracleHandler.received.append(
            json.loads(self.rfile.read(length)))
        status, body = _OracleHandler.responses.pop(0)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def oracle_server():
    server = HTTPServer(("127.0.0.1", 0), _OracleHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _OracleHandler.responses = []
    _OracleHandler.received = []
    yield f"http://127.0.0.1:{server.server_port}/check"
    server.shutdown()
    server.server_close()


class TestRemote:
    def test_verdicts_pass_through(self, oracle_server):
        _OracleHandler.responses = [
            (200, json.dumps({"verdict": "success", "reason": "ok"}).encode()),
            (200, json.dumps({"verdict": "refine"}).encode()),
            (200, json.dumps({"verdict": "failure"}).encode()),
        ]
        check = remote_check(oracle_server)
        req = make_request(make_constraint())
        assert check(req).verdict is Verdict.SUCCESS
        assert check(req).verdict is Verdict.REFINE
        assert check(req).verdict is Verdict.FAILURE
        assert len(_OracleHandler.received) == 3

    def test_one_request_per_call(self, oracle_server):
        _OracleHandler.responses = [
            (200, json.dumps({"verdict": "success"}).encode())]
        remote_check(oracle_server)(make_request(make_constraint()))
        assert len(_OracleHandler.received) == 1

    def test_non_200_raises(self, oracle_server):
        _OracleHandler.responses = [(500, b"boom")]
        with pytest.raises(OracleUnavailable):
            remote_check(oracle_server)(make_request(make_constraint()))

    def test_malformed_json_raises(self, oracle_server):
        _OracleHandler.responses = [(200, b"not json")]
        with pytest.raises(OracleUnavailable):
            remote_check(oracle_server)(make_request(make_constraint()))

    def test_unknown_verdict_never_coerced(self, oracle_server):
        _OracleHandler.responses = [
            (200, json.dumps({"verdict": "SUCCESS"}).encode())]
        with pytest.raises(OracleUnavailable):
            remote_check(oracle_server)(make_request(make_constraint()))

    def test_transport_failure_raises(self):
        check = remote_check("http://127.0.0.1:1/unreachable", timeout=0.2)
        with pytest.raises(OracleUnavailable):
            check(make_request(make_constraint()))


class TestInteractive:
    def _run(self, text):
        out = io.StringIO()
        check = interactive_check(input_stream=io.StringIO(text),
                                  output_stream=out)
        verdict = check(make_request(make_constraint()))
        return verdict, out.getvalue()

    def test_success_key(self):
        verdict, prompt = self._run("s\n")
        assert verdict.verdict is Verdict.SUCCESS
        assert "[s]uccess" in prompt

    def test_failure_key(self):
        assert self._run("f\n")[0].verdict is Verdict.FAILURE

    def test_refine_key(self):
        assert self._run("r\n")[0].verdict is Verdict.REFINE

    def test_end_of_input_unavailable(self):
        with pytest.raises(OracleUnavailable):
            self._run("")

    def test_unknown_key_unavailable(self):
        with pytest.raises(OracleUnavailable):
            self._run("x\n")


def test_empty_image_rejected():
    with pytest.raises(ValueError):
        CheckRequest(task_instruction="", action="place", active_id="a",
                     passive_id="b", candidate=make_constraint(),
                     image=RenderedImage(0, 0, b""))
