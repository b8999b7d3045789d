"""Pareto upper-tail fitting and top wealth shares from weighted survey data."""

__version__ = "0.1.0"

from .data import (
    ImplicateSet,
    RichList,
    TailView,
    WeightedSample,
    average_implicates,
    combine_survey_richlist,
    load_richlist_csv,
    load_survey,
    load_weighted_csv,
    tail_view,
)
from .density import histogram_density, kernel_density, select_bandwidth, wijk_curve
from .estimators import AlphaEstimate, alpha_ml, alpha_reg, alpha_wijk, estimate
from .gof import GofResult, cm_stat, ks_stat, select_wmin
from .model import (
    CompositeModel,
    ShareResult,
    build_model,
    normalize_bach,
    normalize_eckerstorfer,
    normalize_richlist,
    percentile,
    solve_w0,
    top_share,
)
from .pareto import ParetoTail
from .simulation import SimConfig, SimReport, run_study
