"""Gaussian mixture fitting with sequential outlier identification.

Outliers are removed one at a time (lowest mixture density first) and the
number to remove is chosen where the scaled squared sample Mahalanobis
distances of each component are closest to their Beta reference law.
"""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .dissim import ComponentDissim, step_dissim
from .gmm import MixtureFit, MixtureParams
from .gmm import fit as fit_mixture
from .gross import GrossReport, detect_gross, knn_distance
from .init import InitScheme, hier_init
from .metrics import adjusted_rand_index, outlier_f1
from .sequencer import (
    BacktrackConfig,
    DissimTrace,
    Rule,
    Solution,
    choose_backtrack,
    choose_minimum,
    finalize,
    outlier_mbc,
    run_sequence,
)

__all__ = [
    "BACKEND",
    "BacktrackConfig",
    "ComponentDissim",
    "DissimTrace",
    "GrossReport",
    "InitScheme",
    "MixtureFit",
    "MixtureParams",
    "Rule",
    "Solution",
    "adjusted_rand_index",
    "choose_backtrack",
    "choose_minimum",
    "detect_gross",
    "finalize",
    "fit_mixture",
    "hier_init",
    "knn_distance",
    "outlier_f1",
    "outlier_mbc",
    "run_sequence",
    "step_dissim",
]
