"""Shot boundary detection with a tiny spatio-temporal CNN.

The network is fully convolutional in time: one pass over a whole video
yields a prediction per frame while sharing every overlapping computation,
instead of re-running a fixed 10-frame window at each position. The
package contains the numeric core, the model, a synthetic transition
generator used for training, video ingestion, chunked inference, training
and evaluation tooling, and a command-line front end.
"""

from .dataset import SnippetDataset, load_dataset, sample_dataset, save_dataset
from .evaluate import EvalReport, f1_report, load_ground_truth, match_transitions
from .inference import (
    FrameLabels,
    ShotSegment,
    TransitionEvent,
    assemble_shots,
    classify_event,
    predict_video,
)
from .model import (
    ModelParams,
    PredictionSeries,
    build_model,
    forward,
    load_weights,
    param_count,
    save_weights,
    sgd_step,
)
from .synthetic import compose_sequence, procedural_clip
from .training import TrainConfig, evaluate_snippets, train
from .volume import (
    DOUBLE,
    SINGLE,
    ConvLayer,
    ShapeError,
    check_volume,
    conv3d_backward,
    conv3d_forward,
    relu,
    relu_backward,
    softmax,
    softmax_cross_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "ConvLayer",
    "DOUBLE",
    "EvalReport",
    "FrameLabels",
    "ModelParams",
    "PredictionSeries",
    "SINGLE",
    "ShapeError",
    "ShotBoundaryDetector",
    "ShotSegment",
    "SnippetDataset",
    "TrainConfig",
    "TransitionEvent",
    "assemble_shots",
    "build_model",
    "check_volume",
    "classify_event",
    "compose_sequence",
    "conv3d_backward",
    "conv3d_forward",
    "evaluate_snippets",
    "f1_report",
    "forward",
    "load_dataset",
    "load_ground_truth",
    "load_weights",
    "match_transitions",
    "param_count",
    "predict_video",
    "procedural_clip",
    "relu",
    "relu_backward",
    "sample_dataset",
    "save_dataset",
    "save_weights",
    "sgd_step",
    "softmax",
    "softmax_cross_entropy",
    "train",
]


def __getattr__(name):
    # sklearn is only needed by the estimator front end; import it lazily.
    if name == "ShotBoundaryDetector":
        from .estimator import ShotBoundaryDetector

        return ShotBoundaryDetector
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
