"""Task difficulty as inductive bias complexity, estimated from dataset statistics."""
from .difficulty import (
    CombineResult,
    DifficultyReport,
    MetaTaskSpec,
    ResolutionError,
    SpecError,
    TaskSpec,
    combine,
    difficulty_general,
    difficulty_meta,
    difficulty_rl,
    model_information,
    rank_models,
    sweep,
)
from .estimators import LabeledDataset, intrinsic_dim_mle, margin_exact, evt_margin, max_norm_r
from .numerics import LogScalar, log_add, log_binomial, to_bits

__version__ = "0.1.0"
