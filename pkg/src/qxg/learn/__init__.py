from .iforest import IsolationForest, IsolationTree, average_path_length, train_iforest
from .lof import LofModel, train_lof
from .oneclass import (
    ActionMetrics,
    Metrics,
    OneClassBundle,
    OneClassModel,
    evaluate,
    train_one_class,
)
from .persist import (
    CorruptModelError,
    ModelFileError,
    ModelVersionError,
    load_model,
    model_id,
    save_model,
)
from .softmax import SoftmaxModel, loss_and_grad, train_multiclass

__all__ = [
    "ActionMetrics", "CorruptModelError", "IsolationForest", "IsolationTree", "LofModel",
    "Metrics", "ModelFileError", "ModelVersionError", "OneClassBundle", "OneClassModel",
    "SoftmaxModel", "average_path_length", "evaluate", "load_model", "loss_and_grad",
    "model_id", "save_model", "train_iforest", "train_lof", "train_multiclass",
    "train_one_class",
]
