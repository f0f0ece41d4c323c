"""k-regret representative subsets under multiplicative utility functions."""

from .bounds import BoundReport, bound_report, ces_upper_bound, muf_lower_bound_scale, muf_upper_bound
from .dataset import Dataset, Point, dominates, normalize, scale_dimension, skyline
from .partition import IntervalSet, equiwidth_breakpoints, find_breakpoints, minwidth_breakpoints
from .selector import (
    AnswerSet,
    compute_t,
    eliminate_redundant,
    maxdom,
    minvar,
    random_subset,
    rf_minvar,
)
from .utility import (
    RegretReport,
    UtilityFunction,
    ces,
    cobb_douglas,
    evaluate,
    gain,
    max_regret_ratio,
    muf,
    regret,
    regret_ratio,
    sample_ces,
    sample_muf,
)

__all__ = [
    "AnswerSet", "BoundReport", "Dataset", "IntervalSet", "Point", "RegretReport",
    "UtilityFunction", "bound_report", "ces", "ces_upper_bound", "cobb_douglas", "compute_t",
    "dominates", "eliminate_redundant", "equiwidth_breakpoints", "evaluate", "find_breakpoints",
    "gain", "max_regret_ratio", "maxdom", "minvar", "minwidth_breakpoints", "muf",
    "muf_lower_bound_scale", "muf_upper_bound", "normalize", "random_subset", "regret",
    "regret_ratio", "rf_minvar", "sample_ces", "sample_muf", "scale_dimension", "skyline",
]

__version__ = "0.1.0"
