"""Gross outliers: points whose kNN distance dwarfs the budget's reference distance."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

THRESHOLD_FACTOR = 3.0


@dataclass(frozen=True)
class GrossReport:
    knn_distances: np.ndarray
    k: int
    reference_value: float
    gross_indices: tuple

    def to_dict(self):
        return {
            "k": self.k,
            "reference_value": self.reference_value,
            "gross_indices": list(self.gross_indices),
        }


def knn_distance(data, k, block=None):
    """Euclidean distance from every row to its k-th nearest other row.

    Exhaustive pairwise computation in row blocks; the row itself is
    excluded by index, so exact duplicates count as neighbours at distance 0.
    """
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    if not 1 <= k <= n - 1:
        raise DomainError(f"k must lie in 1..n-1 = 1..{n - 1}, got {k}")
    out = np.empty(n)
    if block is None:
        block = max(1, 4_000_000 // max(n * data.shape[1], 1))
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = data[start:stop, None, :] - data[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = np.partition(d2, k - 1, axis=1)[:, k - 1]
    return np.sqrt(out)


def default_k(n):
    return max(1, int(np.floor(0.01 * n)))


def detect_gross(data, M, k=None):
    """Flag points whose kNN distance exceeds 3x the (M+1)-th largest kNN distance.

    Only the M points with the largest kNN distances are candidates; ties at
    the cut are broken towards the lowest index.
    """
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    if not 0 <= M <= n - 2:
        raise DomainError(f"M must lie in 0..n-2 = 0..{n - 2}, got {M}")
    k = default_k(n) if k is None else int(k)
    dists = knn_distance(data, k)
    order = np.lexsort((np.arange(n), -dists))
    candidates = order[:M]
    reference = float(dists[order[M]])
    flagged = candidates[dists[candidates] > THRESHOLD_FACTOR * reference]
    return GrossReport(dists, k, reference, tuple(sorted(int(i) for i in flagged)))
