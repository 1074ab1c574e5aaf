"""Sequential outlier removal and selection of the outlier count.

At each step a mixture is fitted to the retained rows, scored by
:func:`~outliermbc.dissim.step_dissim`, and the retained row of lowest
mixture density is removed. The resulting dissimilarity curve is then read
by the minimum rule or the more conservative backtrack rule.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import gmm
from .dissim import DEFAULT_GRID, ComponentDissim, step_dissim
from .errors import EmptyComponent, InfeasibleBudget, InvalidStep, NoValidStep, NotPositiveDefinite, NumericalError
from .init import InitScheme, hier_init, next_init

log = logging.getLogger(__name__)

OUTLIER_LABEL = 0

# callables invoked with every finished trace (used by the test suite's audits)
TRACE_HOOKS = []


class Rule(enum.Enum):
    MINIMUM = "minimum"
    BACKTRACK = "backtrack"
    USER = "user"


@dataclass(frozen=True)
class StepRecord:
    m: int
    dissim: ComponentDissim
    removed_original_index: int | None
    params_snapshot: gmm.MixtureParams | None
    loglik: float

    @property
    def valid(self):
        return self.params_snapshot is not None and self.dissim.valid


@dataclass(frozen=True)
class DissimTrace:
    steps: tuple
    M: int
    G: int

    @property
    def curve(self):
        return np.array([s.dissim.aggregated for s in self.steps])

    @property
    def valid_mask(self):
        return np.array([s.valid for s in self.steps])

    def removed_before(self, m):
        """Original indices removed before the fit at step ``m``, in removal order."""
        return [s.removed_original_index for s in self.steps[:m]]


@dataclass(frozen=True)
class BacktrackConfig:
    alpha: float = 0.05
    beta: float = 0.10

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("backtrack thresholds must be non-negative")


@dataclass(frozen=True)
class Solution:
    chosen_o: int
    rule: Rule
    outlier_original_indices: tuple
    final_params: gmm.MixtureParams
    assignments: np.ndarray
    trace: DissimTrace

    def cluster_sizes(self):
        return [int(np.sum(self.assignments == g)) for g in range(1, self.final_params.G + 1)]


def _invalid_step(m, T, G):
    return StepRecord(m, ComponentDissim(np.full(G, math.inf), math.inf, T), None, None, math.nan)


def run_sequence(data, G, M, scheme=InitScheme.UPDATE, T=DEFAULT_GRID, tol=1e-8, max_iter=1000):
    """Fit, score and remove for m = 0..M; return the full trace.

    An EM failure at step m marks that step and every later one invalid.
    """
    data = np.asarray(data, dtype=np.float64)
    n, p = data.shape
    scheme = InitScheme.parse(scheme)
    if M < 0 or M >= n - G * (p + 2):
        raise InfeasibleBudget(f"need 0 <= M < n - G(p + 2) = {n - G * (p + 2)}, got M={M}")

    keep = np.arange(n)
    steps = []
    resp0 = hier_init(data, G)
    fit = None
    removed_pos = None
    for m in range(M + 1):
        X = data[keep]
        try:
            if m == 0:
                init = resp0
            else:
                init = next_init(fit, removed_pos, scheme, X)
            fit = gmm.fit(X, init, tol=tol, max_iter=max_iter)
            rec = step_dissim(X, fit, T)
        except (EmptyComponent, NotPositiveDefinite, NumericalError) as exc:
            log.info("step %d failed (%s); remaining steps marked invalid", m, exc)
            steps.extend(_invalid_step(k, T, G) for k in range(m, M + 1))
            break
        removed = None
        if m < M:
            # argmin returns the first minimum, i.e. the lowest original index
            removed_pos = int(np.argmin(fit.log_density))
            removed = int(keep[removed_pos])
            keep = np.delete(keep, removed_pos)
        steps.append(StepRecord(m, rec, removed, fit.params, fit.loglik))
    trace = DissimTrace(tuple(steps), M, G)
    for hook in TRACE_HOOKS:
        hook(trace)
    return trace


def choose_minimum(trace):
    """Smallest m attaining the minimum aggregated dissimilarity over valid steps."""
    curve = np.where(trace.valid_mask, trace.curve, math.inf)
    if not np.isfinite(curve).any():
        raise NoValidStep("trace has no valid step")
    return int(np.argmin(curve))


def choose_backtrack(trace, cfg=None):
    """Walk back from the minimum while single-step and total rises stay small.

    A step o -> o-1 is taken when (D[o-1] - D[o]) / D_min < alpha and
    (D[o-1] - D_min) / D_min <= beta and step o-1 is valid.
    """
    cfg = cfg or BacktrackConfig()
    o = choose_minimum(trace)
    curve, valid = trace.curve, trace.valid_mask
    d_min = curve[o]
    if not d_min > 0:
        return o
    while o > 0 and valid[o - 1]:
        step_rise = (curve[o - 1] - curve[o]) / d_min
        total_rise = (curve[o - 1] - d_min) / d_min
        if step_rise < cfg.alpha and total_rise <= cfg.beta:
            o -= 1
        else:
            break
    return o


def finalize(data, trace, o, rule=Rule.USER):
    """Solution with the first ``o`` removals as outliers and the step-o model."""
    data = np.asarray(data, dtype=np.float64)
    if not 0 <= o <= trace.M:
        raise InvalidStep(f"o={o} outside 0..{trace.M}")
    step = trace.steps[o]
    if not step.valid:
        raise InvalidStep(f"step {o} is invalid")
    outliers = tuple(trace.removed_before(o))
    keep = np.setdiff1d(np.arange(data.shape[0]), np.asarray(outliers, dtype=np.intp))
    resp, _ = gmm.estep(data[keep], step.params_snapshot)
    assignments = np.full(data.shape[0], OUTLIER_LABEL, dtype=np.intp)
    assignments[keep] = np.argmax(resp, axis=1) + 1
    return Solution(o, Rule(rule), outliers, step.params_snapshot, assignments, trace)


def outlier_mbc(data, G, M, scheme=InitScheme.UPDATE, T=DEFAULT_GRID, backtrack=None, tol=1e-8, max_iter=1000):
    """Run the sequence and finalize under both selection rules.

    Returns
    -------
    dict
        ``{"minimum": Solution, "backtrack": Solution, "trace": DissimTrace}``
    """
    trace = run_sequence(data, G, M, scheme=scheme, T=T, tol=tol, max_iter=max_iter)
    o_min = choose_minimum(trace)
    o_bt = choose_backtrack(trace, backtrack)
    return {
        "minimum": finalize(data, trace, o_min, Rule.MINIMUM),
        "backtrack": finalize(data, trace, o_bt, Rule.BACKTRACK),
        "trace": trace,
    }
