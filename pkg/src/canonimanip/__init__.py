"""Object-centric manipulation planning with canonical interaction
primitives, render-and-check self-correction, and closed-loop constrained
execution in a kinematic simulator."""

__version__ = "0.1.0"

from .geometry import (Pose, Rotation, SimilarityTransform, Twist,
                       compose_poses, direction_angle, rotation_angle_between,
                       transform_point, umeyama_align)
from .objects import (CanonicalObject, GraspCandidate, Scene, SceneObject,
                      canonicalize_observation, grasp_heatmap_weights,
                      min_obstacle_distance, select_grasp)
from .primitives import (DirectionCandidateSet, InteractionPrimitive,
                         canonical_axis_candidates, primitive_to_world,
                         refine_directions)
from .constraints import (CandidateList, SpatialConstraint,
                          constraint_residual, constraint_satisfied,
                          satisfying_active_pose)
from .planning import (Action, CheckVerdict, RrcConfig, RrcOutcome, Stage,
                       Task, Verdict, enumerate_candidates, load_task, run_rrc)

__all__ = [name for name in dir() if not name.startswith("_")]
