"""Evaluation and dataset tooling for audio-visual instance segmentation."""

from .dataset import (
    CategoryDef,
    DatasetManifest,
    Hypothesis,
    InstanceTrack,
    ValidationError,
    VideoMeta,
    Violation,
    compute_stats,
    dump_ground_truth,
    dump_predictions,
    load_ground_truth,
    load_predictions,
    to_avsd,
    to_avss,
)
from .evaluator import EvalConfig, MetricsReport, evaluate, format_table, match, pr_curve
from .masks import (
    FrameMask,
    MaskTrack,
    frame_area,
    frame_intersection_area,
    frame_union_area,
    rle_decode,
    rle_encode,
    spatiotemporal_iou,
)
from .synth import PerturbationOp, SceneSpec, generate, perturb, reference_evaluate

__version__ = "0.1.0"
