"""Statistical model checking beyond means.

Sample path rewards of Markov chains, wrap the empirical CDF in a DKW
confidence band and read off simultaneous confidence intervals for the mean,
higher moments, quantiles, CVaR and entropic risk.
"""

from .aggregators import (
    CVaR,
    ConfidenceInterval,
    EntropicRisk,
    Mean,
    Moment,
    Quantile,
    confidence_interval,
    confidence_intervals,
    cvar,
    entropic_risk,
    moment,
    point_estimate,
    quantile,
)
from .distribution import (
    GENERAL,
    Bounded,
    DkwBand,
    General,
    SampleSet,
    StepCdf,
    band_envelopes,
    dkw_delta,
    ecdf_from_samples,
    mean_of_step_cdf,
    stochastically_dominates,
)
from .errors import (
    BandError,
    DkwSmcError,
    ModelError,
    NonTermination,
    ParameterError,
    QueryError,
    StreamExhausted,
)
from .model import Model, ReachabilityReward, State, TotalReward, Transition
from .parser import Query, load_model, parse_model, parse_query, serialize_model
from .sequential import (
    MaxStages,
    SequentialConfig,
    StageResult,
    TargetWidth,
    sequential_bands,
    sequential_estimate,
    stage_schedule,
)
from .simulate import SimConfig, run_simulations, sample_path_ctmc, sample_path_dtmc, sample_stream, simulate

__version__ = "0.1.0"
