"""Representative vector selection and emotion-intensity interpolation for
labeled style-embedding weight clusters."""

__version__ = "0.1.0"

from .cluster_stats import (
    ClusterModel,
    avg_std,
    centroid,
    fit_model,
    inside_boundary,
    mahalanobis,
    mahalanobis_batch,
    mean_distance,
    per_dim_std,
    rank_by_centroid,
    rank_neighbors,
)
from .dataset import (
    Cluster,
    DatasetError,
    EmbeddingRecord,
    LabeledEmbeddingSet,
    SyntheticCategory,
    SyntheticSpec,
    ValidationReport,
    generate_synthetic,
    load_csv,
    load_jsonl,
    partition,
    save_csv,
    save_jsonl,
    validate,
)
from .interpolation import (
    IntensitySchedule,
    InterpolationConfig,
    ScheduleLevel,
    anchor_point,
    generate_interpolated_cluster,
    linear_path,
    linear_schedule,
    nonlinear_ratios,
    sa_i2i_schedule,
)
from .projection import (
    PlotScene,
    Projection2D,
    build_scene,
    emit_plot,
    pca_fit,
    project,
)
from .representative import (
    I2IContext,
    Representative,
    SingularObjectiveError,
    SolverConfig,
    i2i_candidate_scan,
    i2i_objective,
    i2i_refine,
    i2i_representative,
    mean_representative,
)

__all__ = [
    "__version__",
    "Cluster",
    "ClusterModel",
    "DatasetError",
    "EmbeddingRecord",
    "I2IContext",
    "IntensitySchedule",
    "InterpolationConfig",
    "LabeledEmbeddingSet",
    "PlotScene",
    "Projection2D",
    "Representative",
    "ScheduleLevel",
    "SingularObjectiveError",
    "SolverConfig",
    "SyntheticCategory",
    "SyntheticSpec",
    "ValidationReport",
    "anchor_point",
    "avg_std",
    "build_scene",
    "centroid",
    "emit_plot",
    "fit_model",
    "generate_interpolated_cluster",
    "generate_synthetic",
    "i2i_candidate_scan",
    "i2i_objective",
    "i2i_refine",
    "i2i_representative",
    "inside_boundary",
    "linear_path",
    "linear_schedule",
    "load_csv",
    "load_jsonl",
    "mahalanobis",
    "mahalanobis_batch",
    "mean_distance",
    "mean_representative",
    "nonlinear_ratios",
    "partition",
    "pca_fit",
    "per_dim_std",
    "project",
    "rank_by_centroid",
    "rank_neighbors",
    "sa_i2i_schedule",
    "save_csv",
    "save_jsonl",
    "validate",
]
