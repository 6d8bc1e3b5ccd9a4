"""Style-similarity metrics for textured 3D models.

Pipeline: OBJ ingestion -> 2728-dim geometry+appearance descriptors ->
triplet preference collection (crowd simulation or interactive tools) ->
weighted-distance metric learning -> style-based search.
"""

from .config import APPEARANCE_DIM, FULL_DIM, FULL_LAYOUT, GEOMETRY_DIM, DescriptorConfig
from .extract import extract_features
from .mesh_io import (
    Model,
    PointSample,
    Silhouette,
    TextureImage,
    VoxelGrid,
    load_model,
    normalize,
    project_silhouettes,
    sample_surface,
    voxelize,
)
from .metric import (
    ConfigMismatchError,
    FeatureVector,
    TrainConfig,
    TripletRecord,
    WeightMatrix,
    cv_accuracy,
    distance,
    predict_triplet,
    train,
)
from .triplets import (
    HitBundle,
    SixChoiceTask,
    TaskResponse,
    expand_rerank,
    expand_six_choice,
    filter_by_controls,
    generate_hit_tasks,
)

__version__ = "0.1.0"

__all__ = [
    "APPEARANCE_DIM",
    "FULL_DIM",
    "FULL_LAYOUT",
    "GEOMETRY_DIM",
    "ConfigMismatchError",
    "DescriptorConfig",
    "FeatureVector",
    "HitBundle",
    "Model",
    "PointSample",
    "Silhouette",
    "SixChoiceTask",
    "TaskResponse",
    "TextureImage",
    "TrainConfig",
    "TripletRecord",
    "VoxelGrid",
    "WeightMatrix",
    "cv_accuracy",
    "distance",
    "expand_rerank",
    "expand_six_choice",
    "extract_features",
    "filter_by_controls",
    "generate_hit_tasks",
    "load_model",
    "normalize",
    "predict_triplet",
    "project_silhouettes",
    "sample_surface",
    "train",
    "voxelize",
]
