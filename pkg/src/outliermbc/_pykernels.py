"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``.

Same signatures, same tie-breaking and update order; used when the extension
is not built or ``OUTLIERMBC_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

MAXIT = 300
EPS = 1e-14
FPMIN = 1e-300


def _guard(v):
    return np.where(np.abs(v) < FPMIN, FPMIN, v)


def _betacf(a, b, x):
    # Modified Lentz, vectorized; converged entries are frozen.
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 / _guard(1.0 - qab * x / qap)
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, MAXIT + 1):
        live = ~done
        if not live.any():
            break
        xl, cl, dl = x[live], c[live], d[live]
        m2 = 2 * m
        aa = m * (b - m) * xl / ((qam + m2) * (a + m2))
        dl = 1.0 / _guard(1.0 + aa * dl)
        cl = _guard(1.0 + aa / cl)
        hl = h[live] * (dl * cl)
        aa = -(a + m) * (qab + m) * xl / ((a + m2) * (qap + m2))
        dl = 1.0 / _guard(1.0 + aa * dl)
        cl = _guard(1.0 + aa / cl)
        delta = dl * cl
        h[live] = hl * delta
        c[live], d[live] = cl, dl
        conv = np.abs(delta - 1.0) < EPS
        idx = np.flatnonzero(live)
        done[idx[conv]] = True
    h[~done] = np.nan
    return h


def betainc(a, b, x, lbeta):
    """Regularized incomplete beta I_x(a, b) over an array; NaN marks non-convergence.

    ``lbeta`` is log B(a, b), supplied by the caller.
    """
    xs = np.asarray(x, dtype=np.float64)
    flat = xs.ravel()
    out = np.empty_like(flat)
    out[flat <= 0.0] = 0.0
    out[flat >= 1.0] = 1.0
    inner = (flat > 0.0) & (flat < 1.0)
    xi = flat[inner]
    front = np.exp(a * np.log(xi) + b * np.log1p(-xi) - lbeta)
    low = xi < (a + 1.0) / (a + b + 2.0)
    vals = np.empty_like(xi)
    if low.any():
        vals[low] = front[low] * _betacf(a, b, xi[low]) / a
    if (~low).any():
        vals[~low] = 1.0 - front[~low] * _betacf(b, a, 1.0 - xi[~low]) / b
    out[inner] = vals
    return out.reshape(xs.shape)


def grid_gap(values, weights, a, b, lbeta, T):
    """Mean of |I_t(a,b) - Fhat(t)| over t = 1/T, ..., T/T (values sorted ascending)."""
    values = np.asarray(values, dtype=np.float64)
    grid = np.arange(1, T + 1, dtype=np.float64) / T
    ref = betainc(a, b, grid, lbeta)
    if np.isnan(ref).any():
        return math.nan
    cum = np.concatenate(([0.0], np.cumsum(weights)))
    ecdf = cum[np.searchsorted(values, grid, side="right")]
    return float(np.abs(ref - ecdf).sum() / T)


def ward_merges(X):
    """Ward agglomeration by the nearest-neighbour chain; see the compiled twin."""
    x = np.ascontiguousarray(X, dtype=np.float64)
    n = x.shape[0]
    dist = np.zeros((n, n))
    for d in range(x.shape[1]):
        diff = x[:, None, d] - x[None, :, d]
        dist += diff * diff
    np.fill_diagonal(dist, np.inf)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    left = np.empty(max(n - 1, 0), dtype=np.intp)
    right = np.empty(max(n - 1, 0), dtype=np.intp)
    height = np.empty(max(n - 1, 0))
    chain = []
    first = 0
    nm = 0
    while nm < n - 1:
        if not chain:
            while not active[first]:
                first += 1
            chain.append(first)
        a = chain[-1]
        prev = chain[-2] if len(chain) >= 2 else -1
        b = int(np.argmin(dist[a]))
        best = dist[a, b]
        if prev >= 0 and dist[a, prev] <= best:
            b, best = prev, dist[a, prev]
        if b != prev:
            chain.append(b)
            continue
        del chain[-2:]
        lo, hi = min(a, b), max(a, b)
        left[nm], right[nm], height[nm] = lo, hi, best
        nm += 1
        si, sj = size[lo], size[hi]
        others = active.copy()
        others[[lo, hi]] = False
        sk = size[others]
        upd = ((si + sk) * dist[lo, others] + (sj + sk) * dist[hi, others] - sk * best) / (si + sj + sk)
        dist[lo, others] = upd
        dist[others, lo] = upd
        dist[hi, :] = np.inf
        dist[:, hi] = np.inf
        size[lo] = si + sj
        active[hi] = False
    return left, right, height
