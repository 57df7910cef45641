from .core import (EncoderLayer, Linear, Module, cross_entropy, nll,
                   positional_encoding, softmax)
from .models import (BiLstmClassifier, HybridClassifier, LstmConfig,
                     ModelConfig, build_model)
from .training import (Adam, EpochReport, EvalReport, TrainConfig,
                       TrainingDiverged, evaluate, measure_latency, train)
from .weights import (ArchitectureMismatchError, WeightChecksumError,
                      WeightFormatError, WeightVersionError, load_params,
                      save_params)

__all__ = [
    "Adam", "ArchitectureMismatchError", "BiLstmClassifier", "EncoderLayer",
    "EpochReport", "EvalReport", "HybridClassifier", "Linear", "LstmConfig",
    "ModelConfig", "Module", "TrainConfig", "TrainingDiverged",
    "WeightChecksumError", "WeightFormatError", "WeightVersionError",
    "build_model", "cross_entropy", "evaluate", "load_params",
    "measure_latency", "nll", "positional_encoding", "save_params",
    "softmax", "train",
]
