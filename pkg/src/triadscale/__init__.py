"""Perceptual scaling and ordinal embedding from triplet comparisons.

Estimates 1-D perceptual scales and multi-dimensional embeddings from
"is i more similar to j or to k?" judgments, with simulated observers,
cross-validated evaluation, a command-line harness, and a live
collection service.
"""

from .model import (
    CSV_HEADER,
    DataError,
    DissimilarityMatrix,
    Embedding,
    EngineConfig,
    StimulusSet,
    Triplet,
    TripletResponse,
    answered,
    canonical_triplet_id,
    consistency_sign,
    read_responses_csv,
    stimulus_grid,
    write_responses_csv,
)
from .scaling import (
    NoisyObserver,
    ScalingFunctionSpec,
    TripletUniverse,
    derive_seed,
    enumerate_universe,
    eval_scaling,
    nmds_sort_budget,
    sample_triplets,
    triplet_budget,
)
from .isotonic import isotonic_fit, pava
from .ste import (
    fit_ste,
    fit_tste,
    ste_negloglik_and_grad,
    ste_probability,
    tste_negloglik_and_grad,
)
from .mlds import MldsScale, fit_mlds, fit_mlds_quadruplets
from .nmds import NmdsResult, classical_mds, fit_nmds
from .evaluate import (
    CvReport,
    DimensionSweep,
    consistency_floor,
    cross_validated_triplet_error,
    dimension_sweep,
    fit_engine,
    mse_1d,
    normalize_scale_1d,
    sweep_to_csv,
    triplet_error,
)
from .ekman import ingest_similarity

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
