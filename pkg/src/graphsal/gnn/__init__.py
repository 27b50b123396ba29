from .model import (
    FORMAT_VERSION,
    MODEL_KINDS,
    DropoutMaskSet,
    GraphBatch,
    ModelParams,
    batch_graphs,
    embed,
    forward,
    init_params,
    params_from_json,
    params_to_json,
    sample_masks,
    score,
)
from .train import TrainConfig, TrainingDiverged, TrainLog, evaluate, predict, predict_batch, train

__all__ = [
    "DropoutMaskSet",
    "FORMAT_VERSION",
    "GraphBatch",
    "MODEL_KINDS",
    "ModelParams",
    "TrainConfig",
    "TrainLog",
    "TrainingDiverged",
    "batch_graphs",
    "embed",
    "evaluate",
    "forward",
    "init_params",
    "params_from_json",
    "params_to_json",
    "predict",
    "predict_batch",
    "sample_masks",
    "score",
    "train",
]
