"""Fundamental-matrix estimation with a density-peaks prefilter ahead of RANSAC."""

from .density import (
    ClusterSelection,
    DensityPeaksResult,
    build_match_vectors,
    delta_and_parents,
    density_peaks,
    local_density,
    pairwise_distances,
    select_dc,
    select_inliers,
)
from .errors import (
    CoincidentCenters,
    DegenerateConfiguration,
    DegenerateInput,
    DegenerateLine,
    DensityFMError,
    EstimationError,
    FrustumEmpty,
    InputError,
    NoConsensus,
    RetriesExhausted,
    SingularInput,
    TooFewClusterInliers,
    TooFewPoints,
)
from .evaluation import BenchmarkRow, EvaluationConfig, benchmark, zhang_error
from .geometry import (
    MatchPair,
    canonicalize,
    enforce_rank2,
    epipolar_line,
    epipolar_residual,
    point_line_distance,
    symmetric_epipolar_distance,
)
from .linear import eight_point, hartley_normalize, seven_point
from .pipeline import PipelineConfig, PipelineReport, clustering_assisted_estimate, decision_figure
from .robust import EstimateResult, RansacConfig, lmeds, ransac, required_iterations
from .synthetic import CameraModel, SyntheticSceneConfig, f_from_cameras, generate_scene

__version__ = "0.1.0"
