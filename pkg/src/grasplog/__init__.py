"""Synthetic log-pile scenes with simulation-verified multi-log grasp maps.

The package generates procedural piles of cylindrical logs on rough
terrain, plans and verifies grapple grasps for every target subset of
logs, encodes the survivors as five-channel pixel maps, and ships an
evaluation harness plus reference losses for training grasp predictors.
"""

from .geometry import Angle2Enc, OrientedRect, Rng, decode_angle, encode_angle
from .graspmap import GraspMap, QualityParams, encode, quality_map, select_best
from .kernels import derive_seed, splitmix64
from .planner import (FailureReason, Grasp, TrialResult, generate_candidates,
                      reduce_candidates, simulate_grasp)
from .render import ImageGrid, render
from .scene import Log, Pile, generate_pile, load_pile, resettle, save_pile

__version__ = "0.1.0"

__all__ = [
    "Angle2Enc", "OrientedRect", "Rng", "decode_angle", "encode_angle",
    "GraspMap", "QualityParams", "encode", "quality_map", "select_best",
    "derive_seed", "splitmix64",
    "FailureReason", "Grasp", "TrialResult", "generate_candidates",
    "reduce_candidates", "simulate_grasp",
    "ImageGrid", "render",
    "Log", "Pile", "generate_pile", "load_pile", "resettle", "save_pile",
    "__version__",
]
