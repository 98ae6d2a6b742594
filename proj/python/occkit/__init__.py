"""One-class image classification by transformation prediction."""

from ._core import (
    CorruptFile,
    DimensionError,
    Error,
    InvalidArgument,
    IoError,
    NumericalError,
    ParseError,
    SyntheticConfig,
    TrainedModel,
    TransformSet,
    VersionMismatch,
    aggregate,
    apply_linear,
    apply_rotation,
    apply_shift,
    aupr,
    auc,
    expand,
    generate_synthetic,
    load_image,
    load_model,
    load_transform_set,
    parse_transform_set,
    preset,
    preset_names,
    probability_matrix,
    run_experiment,
    save_model,
    score,
    score_images,
    synthesize,
    train,
)

__version__ = "0.1.0"
