"""Co-purchase similarity models for sparse implicit feedback."""

from sparsecf._core import (
    ConfigError,
    Dataset,
    DomainError,
    IngestError,
    Model,
    TrainError,
    log_sigmoid,
    mc_shift,
    optimal_h,
    pair_objective,
    sigmoid,
    validate_objective,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "DomainError",
    "IngestError",
    "Model",
    "TrainError",
    "log_sigmoid",
    "mc_shift",
    "optimal_h",
    "pair_objective",
    "sigmoid",
    "validate_objective",
]

__version__ = "0.1.0"
