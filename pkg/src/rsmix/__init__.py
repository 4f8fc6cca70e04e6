"""Shape-preserving point-cloud mixing augmentation toolkit."""

from .convda import ConvDAConfig
from .errors import ConfigError, FormatError
from .mixing import (
    FROM_BASE,
    FROM_PARTNER,
    MixParams,
    MixResult,
    RigidSubset,
    mix_labels,
    mix_pair,
    mixture_ratio,
    normalize_unit_sphere,
)
from .pipeline import PipelineConfig, augment_batch, stats_report

__version__ = "0.1.0"

__all__ = [
    "ConvDAConfig",
    "ConfigError",
    "FormatError",
    "FROM_BASE",
    "FROM_PARTNER",
    "MixParams",
    "MixResult",
    "RigidSubset",
    "PipelineConfig",
    "augment_batch",
    "mix_labels",
    "mix_pair",
    "mixture_ratio",
    "normalize_unit_sphere",
    "stats_report",
    "__version__",
]
