"""Distance between the empirical and Beta-reference law of scaled Mahalanobis distances.

For a component of estimated size n_g, the scaled squared sample Mahalanobis
distances of its members follow Beta(p/2, (n_g - p - 1)/2). Each component is
scored by the mean absolute CDF gap on the grid t/T, t = 1..T, and the scores
are pooled by a mixture-weighted quadratic mean.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DegenerateComponent, NumericalError
from .numcore import BetaRef, WeightedSample, cholesky, mahalanobis_sq_chol

DEFAULT_GRID = 10_000


@dataclass(frozen=True)
class ComponentDissim:
    per_component: np.ndarray
    aggregated: float
    grid_size: int

    @property
    def valid(self):
        return math.isfinite(self.aggregated)


def scaled_distances(data, fit, g):
    """Scaled squared sample Mahalanobis distances of all rows to component ``g``.

    The values are not clamped; weights are resp[:, g] / n_g.
    """
    data = np.asarray(data, dtype=np.float64)
    p = data.shape[1]
    n_g = float(fit.comp_sizes[g])
    if not n_g > p + 1:
        raise DegenerateComponent(f"component {g + 1} has n_g = {n_g:.3f} <= p + 1")
    sample_cov = n_g / (n_g - 1.0) * fit.params.covariances[g]
    L, _ = cholesky(sample_cov)
    d2 = mahalanobis_sq_chol(data, fit.params.means[g], L)
    values = n_g / (n_g - 1.0) ** 2 * d2
    weights = fit.resp[:, g] / n_g
    # renormalize away the rounding drift of the column sum
    return WeightedSample(values, weights / weights.sum())


def beta_reference(n_g, p):
    return BetaRef(p / 2.0, (n_g - p - 1.0) / 2.0)


def component_dissim(sample, ref, T=DEFAULT_GRID):
    """(1/T) sum_t |F_ref(t/T) - Fhat(t/T)| with Fhat the weighted ECDF."""
    if T < 1:
        raise ValueError("grid size must be at least 1")
    order = np.argsort(sample.values, kind="stable")
    # values above 1 stay put: they never fall below a grid point, so they
    # count only through the missing ECDF mass
    values = np.maximum(sample.values[order], 0.0)
    weights = np.ascontiguousarray(sample.weights[order])
    gap = kernels.grid_gap(np.ascontiguousarray(values), weights, float(ref.a), float(ref.b), ref.lbeta, int(T))
    if math.isnan(gap):
        raise NumericalError(f"incomplete beta did not converge for a={ref.a}, b={ref.b}")
    return gap


def aggregate(per_component, weights):
    """sqrt(sum_g pi_g D_g^2)."""
    d = np.asarray(per_component, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    return float(math.sqrt(np.dot(w, d * d)))


def step_dissim(data, fit, T=DEFAULT_GRID):
    """Score one fitted model; degenerate components make the record invalid (+inf)."""
    data = np.asarray(data, dtype=np.float64)
    p = data.shape[1]
    G = fit.params.G
    per = np.full(G, math.inf)
    for g in range(G):
        n_g = float(fit.comp_sizes[g])
        if not n_g > p + 1:
            return ComponentDissim(per, math.inf, T)
        per[g] = component_dissim(scaled_distances(data, fit, g), beta_reference(n_g, p), T)
    return ComponentDissim(per, aggregate(per, fit.params.weights), T)
