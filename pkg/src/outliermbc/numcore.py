"""Numerical primitives.

Cholesky factorization with a one-shot ridge repair, Mahalanobis distances
through triangular solves, log-sum-exp, the regularized incomplete beta
function (Beta CDF), chi-square quantiles and weighted empirical CDFs.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._backend import kernels
from .errors import DomainError, NotPositiveDefinite, NumericalError

RIDGE_SCALE = 1e-8
SYM_RTOL = 1e-12


def _check_symmetric(m):
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m - m.T)) > SYM_RTOL * scale:
        raise DomainError("matrix is not symmetric")


def _factor(m):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None


def cholesky(m):
    """Lower Cholesky factor and log-determinant of a symmetric matrix.

    If the plain factorization fails, a ridge of ``1e-8 * trace(m) / dim`` is
    added to the diagonal once and the factorization retried.

    Returns
    -------
    L : ndarray
        Lower-triangular factor with ``L @ L.T == m`` (or the repaired ``m``).
    logdet : float
        ``2 * sum(log(diag(L)))``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    _check_symmetric(m)
    L = _factor(m)
    if L is None:
        L = _factor(ridge_repaired(m))
    if L is None or not np.all(np.diag(L) > 0):
        raise NotPositiveDefinite("Cholesky factorization failed after ridge repair")
    return L, 2.0 * float(np.sum(np.log(np.diag(L))))


def ridge_repaired(m):
    """``m`` with the repair ridge added to its diagonal."""
    dim = m.shape[0]
    ridge = RIDGE_SCALE * float(np.trace(m)) / dim
    if not ridge > 0:
        ridge = RIDGE_SCALE
    return m + ridge * np.eye(dim)


def spd_or_repaired(m):
    """Return ``m`` if it factorizes, else its ridge-repaired version."""
    if _factor(m) is not None:
        return m
    fixed = ridge_repaired(m)
    if _factor(fixed) is None:
        raise NotPositiveDefinite("covariance not positive definite after ridge repair")
    return fixed


def mahalanobis_sq_chol(x, mu, L):
    """Squared Mahalanobis distances of the rows of ``x`` given a Cholesky factor."""
    diff = np.atleast_2d(x) - mu
    z = solve_triangular(L, diff.T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", z, z)


def mahalanobis_sq(x, mu, cov):
    """(x - mu)^T cov^{-1} (x - mu) via triangular solves.

    ``x`` may be a single p-vector (returns a float) or an (n, p) matrix
    (returns an n-vector).
    """
    x = np.asarray(x, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    if x.shape[-1] != mu.shape[-1] or cov.shape[0] != mu.shape[-1]:
        raise DomainError("dimension mismatch between x, mu and cov")
    L, _ = cholesky(cov)
    d = mahalanobis_sq_chol(x, mu, L)
    return float(d[0]) if x.ndim == 1 else d


def log_sum_exp(v, axis=None):
    """log(sum(exp(v))) computed after subtracting the maximum."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise DomainError("log_sum_exp of an empty sequence")
    vmax = np.max(v, axis=axis, keepdims=True)
    vmax = np.where(np.isfinite(vmax), vmax, 0.0)
    out = np.log(np.sum(np.exp(v - vmax), axis=axis, keepdims=True)) + vmax
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


# Stirling series coefficients B_2k / (2k (2k - 1)), k = 1..8
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156, -3617 / 122400)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lgamma_corr(x):
    # lgamma(x) - ((x - 0.5) log x - x + log sqrt(2 pi)), valid for x >= 10
    inv, inv2 = 1.0 / x, 1.0 / (x * x)
    total, power = 0.0, inv
    for c in _STIRLING:
        total += c * power
        power *= inv2
    return total


def log_beta(a, b):
    """log B(a, b) without the cancellation of lgamma(b) - lgamma(a + b) for large b."""
    p, q = min(a, b), max(a, b)
    if p >= 10.0:
        corr = _lgamma_corr(p) + _lgamma_corr(q) - _lgamma_corr(p + q)
        return (-0.5 * math.log(q) + _HALF_LOG_2PI + corr
                + (p - 0.5) * math.log(p / (p + q)) + q * math.log1p(-p / (p + q)))
    if q >= 10.0:
        corr = _lgamma_corr(q) - _lgamma_corr(p + q)
        return (math.lgamma(p) + corr + p - p * math.log(p + q)
                + (q - 0.5) * math.log1p(-p / (p + q)))
    return math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)


@dataclass(frozen=True)
class BetaRef:
    """Shape parameters of a Beta reference distribution."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta shapes must be positive, got ({self.a}, {self.b})")

    @property
    def lbeta(self):
        """log B(a, b)."""
        return log_beta(self.a, self.b)

    def cdf(self, y):
        return beta_cdf(y, self)


def beta_cdf(y, ref):
    """Regularized incomplete beta function I_y(a, b).

    Lentz continued fraction on whichever side of the mean converges fast,
    with I_y(a, b) = 1 - I_{1-y}(b, a) for the other side. Accepts a scalar
    or an array of ``y``.
    """
    arr = np.asarray(y, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr)):
        raise DomainError("beta_cdf argument outside [0, 1]")
    out = kernels.betainc(float(ref.a), float(ref.b), arr, ref.lbeta)
    if np.any(np.isnan(out)):
        raise NumericalError(f"incomplete beta did not converge for a={ref.a}, b={ref.b}")
    return float(out) if arr.ndim == 0 else out


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    if x <= 0.0:
        return 0.0
    lead = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        ap, term = a, 1.0 / a
        total = term
        for _ in range(10_000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return min(1.0, total * math.exp(lead))
    # Lentz continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / 1e-300
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = 1e-300 if abs(d) < 1e-300 else d
        c = b + an / c
        c = 1e-300 if abs(c) < 1e-300 else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return max(0.0, 1.0 - math.exp(lead) * h)


def chisq_cdf(q, dof):
    return gammainc_lower(dof / 2.0, q / 2.0)


def _chisq_pdf(q, dof):
    k = dof / 2.0
    return math.exp((k - 1.0) * math.log(q) - q / 2.0 - k * math.log(2.0) - math.lgamma(k))


def chisq_quantile(prob, dof):
    """Quantile of the chi-square distribution.

    Bisection on ``[0, dof + 20 sqrt(2 dof)]`` (widened if needed), then a
    few Newton steps kept inside the final bracket.
    """
    if not 0.0 < prob < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {prob}")
    if int(dof) != dof or dof < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {dof}")
    lo, hi = 0.0, dof + 20.0 * math.sqrt(2.0 * dof)
    while chisq_cdf(hi, dof) < prob:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chisq_cdf(mid, dof) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(hi, 1e-300):
            break
    q = 0.5 * (lo + hi)
    for _ in range(5):
        pdf = _chisq_pdf(q, dof)
        if pdf <= 0:
            break
        step = (chisq_cdf(q, dof) - prob) / pdf
        nq = q - step
        if not lo <= nq <= hi:
            break
        q = nq
        if abs(step) < 1e-15 * q:
            break
    return q


@dataclass(frozen=True)
class WeightedSample:
    """Values with non-negative weights summing to one."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if v.shape != w.shape or v.ndim != 1:
            raise DomainError("values and weights must be 1-D of equal length")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise DomainError(f"weights sum to {w.sum()}, expected 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)


def weighted_ecdf_eval(sample, t):
    """sum_j w_j * 1[v_j <= t] for a scalar or array of ``t``."""
    order = np.argsort(sample.values, kind="stable")
    vs = sample.values[order]
    cum = np.concatenate(([0.0], np.cumsum(sample.weights[order])))
    ts = np.asarray(t, dtype=np.float64)
    counts = np.searchsorted(vs, ts, side="right")
    w = sample.weights
    if w.size and np.all(w == w[0]):
        out = counts / w.size
    else:
        out = cum[counts]
        # the top of the cumulative sum may drift from 1 by rounding
        out = np.where(counts == vs.size, 1.0, out)
    return float(out) if ts.ndim == 0 else out
