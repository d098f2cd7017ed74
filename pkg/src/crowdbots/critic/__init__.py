"""Reinforcement-predicting critics: features, recurrent model, training."""

from .features import (  # noqa: F401
    DatasetShortfall,
    FEATURE_COLUMNS,
    RETAIN_INDICES,
    build_dataset,
    build_features,
    joint_feature,
    label_for,
    normalized_reinforcement,
    read_dataset_rows,
    write_dataset_row,
)
from .lstm import CriticModel, Adam  # noqa: F401
from .training import (  # noqa: F401
    BONFERRONI_FACTOR,
    CriticReport,
    compare,
    cross_validate,
    fold_indices,
    mean_errors,
    permuted_control,
    students_t,
)
