"""Interaction primitives and direction candidate sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canonimanip.errors import NotUnit
from canonimanip.geometry import Pose, Rotation, direction_angle
from canonimanip.objects import SceneObject
from canonimanip.primitives import (DirectionCandidateSet,
                                    InteractionPrimitive,
                                    canonical_axis_candidates,
                                    primitive_to_world, refine_directions)

from conftest import box_object

seeds = st.integers(min_value=0, max_value=10_000)


class TestInteractionPrimitive:
    def test_non_unit_direction_rejected(self):
        with pytest.raises(NotUnit):
            InteractionPrimitive(np.zeros(3), np.array([0, 0, 2.0]))

    def test_fields_read_only(self):
        p = InteractionPrimitive(np.zeros(3), np.array([0, 0, 1.0]))
        with pytest.raises(ValueError):
            p.direction[0] = 1.0


class TestCanonicalAxisCandidates:
    def test_order(self):
        dirs = canonical_axis_candidates().directions
        expect = [[0, 0, 1], [0, 0, -1], [1, 0, 0],
                  [-1, 0, 0], [0, 1, 0], [0, -1, 0]]
        assert len(dirs) == 6
        for d, e in zip(dirs, expect):
            assert np.allclose(d, e)


class TestDirectionCandidateSet:
    def test_sorted_by_score_descending(self):
        dirs = canonical_axis_candidates().directions
        scores = [0.1, 0.9, 0.3, 0.2, 0.15, 0.05]
        cs = DirectionCandidateSet(directions=dirs, scores=scores)
        assert np.allclose(cs.directions[0], [0, 0, -1])
        assert cs.scores == sorted(scores, reverse=True)

    def test_score_ties_keep_original_order(self):
        dirs = canonical_axis_candidates().directions
        cs = DirectionCandidateSet(directions=dirs, scores=[1.0] * 6)
        for d, e in zip(cs.directions, canonical_axis_candidates().directions):
            assert np.allclose(d, e)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            DirectionCandidateSet(directions=[np.array([0, 0, 1.0])],
                                  scores=[1.0, 2.0])

    def test_non_unit_rejected(self):
        with pytest.raises(NotUnit):
            DirectionCandidateSet(directions=[np.array([0, 0, 2.0])])


class TestRefineDirections:
    @given(seeds, st.integers(min_value=1, max_value=12))
    @settings(max_examples=30, deadline=None)
    def test_all_on_cone_boundary(self, seed, count):
        rng = np.random.default_rng(seed)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        half = math.radians(15.0)
        fan = refine_directions(v, count, half)
        assert len(fan) == count
        for d in fan.directions:
            assert np.isclose(direction_angle(d, v), half, atol=1e-9)

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_pairwise_distinct(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        fan = refine_directions(v, 12, math.radians(15.0))
        for i, a in enumerate(fan.directions):
            for b in fan.directions[i + 1:]:
                assert np.linalg.norm(a - b) > 1e-6

    def test_deterministic_phase_from_world_x(self):
        fan = refine_directions(np.array([0, 0, 1.0]), 6, math.radians(15.0))
        first = fan.directions[0]
        # First fan entry leans toward +x.
        assert first[0] > 0 and abs(first[1]) < 1e-12

    def test_phase_fallback_when_parallel_to_x(self):
        fan = refine_directions(np.array([1.0, 0, 0]), 6, math.radians(15.0))
        assert fan.directions[0][1] > 0

    def test_bad_count_rejected(self):
        with pytest.raises(ValueError):
            refine_directions(np.array([0, 0, 1.0]), 0, math.radians(15.0))

    def test_bad_cone_angle_rejected(self):
        with pytest.raises(ValueError):
            refine_directions(np.array([0, 0, 1.0]), 6, math.pi)


class TestPrimitiveToWorld:
    def test_scaled_translated(self):
        obj = SceneObject(object=box_object("x", half=0.12),
                          pose=Pose(Rotation.identity(),
                                    np.array([0, 0, 1.0])),
                          scale=2.0)
        prim = InteractionPrimitive(np.array([0, 0, 0.1]),
                                    np.array([0, 0, 1.0]))
        point, direction = primitive_to_world(prim, obj)
        assert np.allclose(point, [0, 0, 1.2])
        assert np.allclose(direction, [0, 0, 1])

    def test_rotation_applies_to_direction(self):
        rot = Rotation.from_axis_angle([0, 1, 0], math.pi / 2)
        obj = SceneObject(object=box_object("x"), pose=Pose(rot, np.zeros(3)))
        prim = InteractionPrimitive(np.zeros(3), np.array([0, 0, 1.0]))
        _, direction = primitive_to_world(prim, obj)
        assert np.allclose(direction, [1, 0, 0], atol=1e-12)

    def test_direction_unit_under_scale(self):
        obj = SceneObject(object=box_object("x"), scale=5.0)
        prim = InteractionPrimitive(np.zeros(3), np.array([0, 0, 1.0]))
        _, direction = primitive_to_world(prim, obj)
        assert np.isclose(np.linalg.norm(direction), 1.0)
