"""Gaussian mixtures with unrestricted covariances, fitted by EM."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptyComponent, MonotonicityError
from .numcore import cholesky, log_sum_exp, mahalanobis_sq_chol, spd_or_repaired

LOG_2PI = math.log(2.0 * math.pi)
MONOTONE_SLACK = 1e-9

# When true, every fit raises MonotonicityError on a log-likelihood decrease
# beyond MONOTONE_SLACK. The test suite switches this on.
STRICT_MONOTONE = False

# Running totals across all fits in this process.
audit = {"fits": 0, "violations": 0, "worst_drop": 0.0}


@dataclass(frozen=True)
class MixtureParams:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise DomainError("mixture weights must be non-negative and sum to 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", np.atleast_2d(np.asarray(self.means, dtype=np.float64)))
        object.__setattr__(self, "covariances", np.asarray(self.covariances, dtype=np.float64))

    @property
    def G(self):
        return self.weights.shape[0]

    @property
    def p(self):
        return self.means.shape[1]

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
        }


@dataclass(frozen=True)
class MixtureFit:
    params: MixtureParams
    resp: np.ndarray
    loglik: float
    comp_sizes: np.ndarray
    iters: int
    converged: bool
    loglik_path: tuple = field(default=())
    log_density: np.ndarray = field(default=None, repr=False)

    def hard_labels(self):
        """Argmax responsibility per row, labelled 1..G."""
        return np.argmax(self.resp, axis=1) + 1


def _component_logpdf(data, params):
    n, p = data.shape
    out = np.empty((n, params.G))
    for g in range(params.G):
        L, logdet = cholesky(params.covariances[g])
        maha = mahalanobis_sq_chol(data, params.means[g], L)
        out[:, g] = -0.5 * (p * LOG_2PI + logdet + maha)
    return out


def _log_joint(data, params):
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if data.shape[1] != params.p:
        raise DomainError(f"data has {data.shape[1]} columns, model has p={params.p}")
    with np.errstate(divide="ignore"):
        logw = np.log(params.weights)
    return _component_logpdf(data, params) + logw


def estep(data, params):
    """Responsibilities and log-likelihood under ``params``.

    Returns
    -------
    resp : (n, G) ndarray
    loglik : float
    """
    resp, loglik, _ = _estep(data, params)
    return resp, loglik


def _estep(data, params):
    lj = _log_joint(data, params)
    logdens = log_sum_exp(lj, axis=1)
    resp = np.exp(lj - logdens[:, None])
    return resp, float(np.sum(logdens)), logdens


def mstep(data, resp):
    """Weighted MLE of weights, means and covariances from responsibilities.

    Raises :class:`EmptyComponent` when a component's total responsibility
    falls below p + 2.
    """
    data = np.asarray(data, dtype=np.float64)
    resp = np.asarray(resp, dtype=np.float64)
    n, p = data.shape
    if resp.shape[0] != n:
        raise DomainError("responsibility rows do not match data rows")
    sizes = resp.sum(axis=0)
    small = np.flatnonzero(sizes < p + 2)
    if small.size:
        g = int(small[0])
        raise EmptyComponent(f"component {g + 1} has effective size {sizes[g]:.3f} < p + 2 = {p + 2}")
    G = resp.shape[1]
    means = (resp.T @ data) / sizes[:, None]
    covs = np.empty((G, p, p))
    for g in range(G):
        diff = data - means[g]
        s = (resp[:, g, None] * diff).T @ diff / sizes[g]
        covs[g] = spd_or_repaired(0.5 * (s + s.T))
    return MixtureParams(weights=sizes / n, means=means, covariances=covs)


def _record_path(path):
    drops = np.diff(np.asarray(path))
    worst = float(-drops.min()) if drops.size else 0.0
    audit["fits"] += 1
    if worst > MONOTONE_SLACK:
        audit["violations"] += 1
        audit["worst_drop"] = max(audit["worst_drop"], worst)
        if STRICT_MONOTONE:
            raise MonotonicityError(f"EM log-likelihood dropped by {worst:.3e}")


def fit(data, init_resp, tol=1e-8, max_iter=1000):
    """Run EM from an initial responsibility matrix.

    Alternates M- and E-steps, stopping once the relative change in
    log-likelihood drops below ``tol`` or after ``max_iter`` M-steps.
    """
    data = np.asarray(data, dtype=np.float64)
    init_resp = np.asarray(init_resp, dtype=np.float64)
    if init_resp.ndim != 2 or init_resp.shape[0] != data.shape[0]:
        raise DomainError("init_resp must be an (n, G) matrix")
    if np.max(np.abs(init_resp.sum(axis=1) - 1.0)) > 1e-8:
        raise DomainError("init_resp rows must sum to 1")

    params = mstep(data, init_resp)
    resp, loglik, logdens = _estep(data, params)
    path = [loglik]
    iters, converged = 1, False
    while iters < max_iter:
        new_params = mstep(data, resp)
        new_resp, new_ll, new_logdens = _estep(data, new_params)
        path.append(new_ll)
        iters += 1
        converged = abs(new_ll - loglik) < tol * abs(new_ll)
        params, resp, loglik, logdens = new_params, new_resp, new_ll, new_logdens
        if converged:
            break
    _record_path(path)
    return MixtureFit(
        params=params,
        resp=resp,
        loglik=loglik,
        comp_sizes=resp.sum(axis=0),
        iters=iters,
        converged=converged,
        loglik_path=tuple(path),
        log_density=logdens,
    )


def log_mixture_density(data, params):
    """log f(x_i) for each row."""
    return log_sum_exp(_log_joint(data, params), axis=1)


def mixture_density(data, params):
    """Mixture density f(x_i) = sum_g pi_g phi(x_i; mu_g, Sigma_g) for each row."""
    return np.exp(log_mixture_density(data, params))
