"""Initial responsibilities: Ward hierarchical clustering and per-step schemes."""

import enum

import numpy as np

from ._backend import kernels
from .errors import TooFewPoints


class InitScheme(enum.Enum):
    UPDATE = "update"
    REINIT = "reinit"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def ward_partition(data, G):
    """Labels 0..G-1 from cutting the Ward tree at G groups.

    Groups are numbered by their lowest member index.
    """
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    if n < G:
        raise TooFewPoints(f"cannot form {G} groups from {n} points")
    if G < 1:
        raise TooFewPoints("G must be at least 1")
    if n == 1:
        return np.zeros(1, dtype=np.intp)
    left, right, height = kernels.ward_merges(data)
    order = np.argsort(height, kind="stable")
    parent = np.arange(n)

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for k in order[: n - G]:
        ra, rb = root(left[k]), root(right[k])
        if ra < rb:
            parent[rb] = ra
        else:
            parent[ra] = rb
    roots = np.array([root(i) for i in range(n)])
    # roots are the minimum index of each group, so sorted unique = first-appearance order
    _, labels = np.unique(roots, return_inverse=True)
    return labels


def hier_init(data, G):
    """One-hot (n, G) responsibilities from a Ward clustering cut at G groups."""
    labels = ward_partition(data, G)
    resp = np.zeros((labels.shape[0], G))
    resp[np.arange(labels.shape[0]), labels] = 1.0
    return resp


def next_init(prev_fit, removed_row, scheme, data_after_removal):
    """Initial responsibilities for the fit following one removal.

    ``removed_row`` indexes the rows of ``prev_fit.resp``. Under the update
    scheme that row is deleted and the rest reused unchanged; under reinit
    the Ward clustering is rerun on the reduced data.
    """
    scheme = InitScheme.parse(scheme)
    if scheme is InitScheme.UPDATE:
        return np.delete(prev_fit.resp, removed_row, axis=0)
    return hier_init(data_after_removal, prev_fit.params.G)
