"""Multi-scale Thomas-Fermi approximation and direct solution of a two-component
Gross-Pitaevskii ground state with two boundary layers."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    DegenerateCase,
    DegenerateFit,
    GridMismatch,
    InvalidRegime,
    NearOriginBlowup,
    NegativeLambda,
    NewtonDiverged,
    NonPositive,
    SingularSystem,
    TFGPError,
)
from .model import ModelParams, derive_params, reference_params, tf_profile  # noqa: F401
