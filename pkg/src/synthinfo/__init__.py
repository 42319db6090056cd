"""Fisher-information accounting for synthetic data."""

from . import bayes, families, info, mle, synth
from .errors import (
    BoundaryError,
    ConfigError,
    DataError,
    DomainError,
    EnumerationBudgetError,
    FitError,
    ParameterError,
    SchemaError,
    SynthInfoError,
    UnsupportedOperation,
)
from .families import FAMILIES, get_family
from .info import InfoDecomposition, InfoEstimate, exact_decomposition, mc_fisher_marginal
from .mle import MleFit, fit_mle, naive_pooled_fit
from .sample import Sample
from .synth import fit, make_kind, synth_sample

__version__ = "0.1.0"
