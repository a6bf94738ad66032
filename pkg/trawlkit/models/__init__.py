# trawlkit/models/__init__.py
#
# Domain types: Levy seeds, trawl functions, periodic kernels, the ModelSpec
# bundle and the result records returned by the services.
#
# Everything is importable from the package, e.g.
# 'from trawlkit.models import ModelSpec, Exponential, GaussianSeed'.

from .levy import (
    CauchySeed,
    GammaSeed,
    GaussianSeed,
    LevyFamily,
    LevySeed,
    LevyTriplet,
    NegBinSeed,
    PoissonSeed,
    parse_seed,
)
from .kernels import (
    Exponential,
    FourierFinite,
    MemoryClass,
    NumericMonotone,
    One,
    PeriodicFunction,
    Sine,
    SupGamma,
    TabulatedC,
    TrawlFunction,
    correlation_factor_c,
    eval_p,
    parse_periodic,
    parse_trawl,
    trawl_integral,
)
from .model_spec import ModelSpec
from .results import (
    Acf,
    AsymptoticCovariances,
    CltDiagnostics,
    GmmFitResult,
    GmmSpec,
    MomFitResult,
    RunConfig,
    SimPath,
    SliceMatrix,
    TimeSeriesFile,
)

__all__ = [
    "LevyFamily", "LevyTriplet", "LevySeed",
    "GaussianSeed", "PoissonSeed", "GammaSeed", "NegBinSeed", "CauchySeed",
    "parse_seed",
    "TrawlFunction", "Exponential", "SupGamma", "NumericMonotone", "MemoryClass",
    "PeriodicFunction", "One", "Sine", "FourierFinite", "TabulatedC",
    "trawl_integral", "correlation_factor_c", "eval_p", "parse_trawl", "parse_periodic",
    "ModelSpec",
    "Acf", "SliceMatrix", "SimPath", "AsymptoticCovariances", "CltDiagnostics",
    "MomFitResult", "GmmSpec", "GmmFitResult", "TimeSeriesFile", "RunConfig",
]
