"""Simulated Gaussian mixtures with uniform outliers.

Random streams use numpy's counter-based Philox generator keyed by
``(seed, crc32(scenario name) * 256 + stream)``: stream 0 draws the mixture,
stream 1 the outliers. The same (scenario, seed) therefore gives the same
data on every platform numpy supports, and scenarios sharing a seed do not
share random numbers.
"""

import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RejectionStall, UnknownScenario
from .numcore import chisq_quantile, cholesky, mahalanobis_sq_chol

OUTLIER_LABEL = 0
PROPOSAL_CAP = 10_000_000

TCLUST_MEANS_2D = np.array([[0.0, 8.0], [8.0, 0.0], [-8.0, -8.0]])
# (a, b, c, d, e, f) per covariance model
TCLUST_CONSTANTS = {
    1: (1, 1, 1, 1, 0, 1),
    2: (5, 1, 5, 1, 0, 5),
    3: (5, 5, 1, 3, -2, 3),
    4: (1, 20, 5, 15, -10, 15),
    5: (1, 45, 30, 15, -10, 15),
}
TCLUST_PROPORTIONS = {
    "equal": (1 / 3, 1 / 3, 1 / 3),
    "unequal": (1 / 5, 2 / 5, 2 / 5),
}

# Built-in three-component design for the small/large illustrative datasets.
ILLUSTRATIVE_MEANS = np.array([[0.0, 0.0], [9.0, 1.0], [3.0, 9.0]])
ILLUSTRATIVE_COVS = np.array([
    [[0.2, 0.075], [0.075, 0.15]],
    [[0.125, -0.0375], [-0.0375, 0.25]],
    [[0.25, 0.0], [0.0, 0.1]],
])
ILLUSTRATIVE_PROPORTIONS = (0.4, 0.3, 0.3)
ILLUSTRATIVE_SIZES = {"small": (1000, 10), "large": (4000, 40)}


@dataclass(frozen=True)
class RejectEllipsoids:
    """Accept a uniform proposal only outside every component's ``level`` ellipsoid."""

    level: float = 0.99

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise DomainError("ellipsoid level must lie in (0, 1)")

    def to_dict(self):
        return {"kind": "reject_ellipsoids", "level": self.level}


@dataclass(frozen=True)
class PlainBox:
    """Uniform on the data-centred box with ``expand_factor`` times the data range."""

    expand_factor: float = 2.0

    def __post_init__(self):
        if not self.expand_factor >= 0.0:
            raise DomainError("expand_factor must be non-negative")

    def to_dict(self):
        return {"kind": "plain_box", "expand_factor": self.expand_factor}


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    p: int
    proportions: tuple
    n_obs: int
    n_outliers: int
    means: np.ndarray
    covariances: np.ndarray
    outlier_mode: object = field(default_factory=RejectEllipsoids)
    seed: int = 1

    def __post_init__(self):
        props = np.asarray(self.proportions, dtype=np.float64)
        if abs(props.sum() - 1.0) > 1e-10 or np.any(props <= 0):
            raise DomainError("proportions must be positive and sum to 1")
        if self.n_obs <= 0 or self.n_outliers < 0:
            raise DomainError("counts must be positive")
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        object.__setattr__(self, "covariances", np.asarray(self.covariances, dtype=np.float64))

    @property
    def G(self):
        return len(self.proportions)

    def component_counts(self):
        """floor(proportion * n_obs) for all but the last; the remainder goes last."""
        counts = [int(np.floor(pr * self.n_obs + 1e-9)) for pr in self.proportions[:-1]]
        counts.append(self.n_obs - sum(counts))
        return counts

    def to_dict(self):
        return {
            "name": self.name,
            "p": self.p,
            "proportions": list(self.proportions),
            "component_counts": self.component_counts(),
            "n_obs": self.n_obs,
            "n_outliers": self.n_outliers,
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
            "outlier_mode": self.outlier_mode.to_dict(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class LabeledData:
    data: np.ndarray
    labels: np.ndarray

    @property
    def outlier_indices(self):
        return np.flatnonzero(self.labels == OUTLIER_LABEL)


def rng_for(name, seed, stream):
    """Philox generator for a (scenario, seed, stream) triple."""
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode()) * 256 + stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def tclust_scenario(p, proportions_id, model_id, seed):
    """One of the 20 covariance/proportion/dimension designs (900 points, 100 outliers)."""
    if p not in (2, 6):
        raise UnknownScenario(f"dimension must be 2 or 6, got {p}")
    if proportions_id not in TCLUST_PROPORTIONS:
        raise UnknownScenario(f"proportions must be one of {sorted(TCLUST_PROPORTIONS)}, got {proportions_id!r}")
    if model_id not in TCLUST_CONSTANTS:
        raise UnknownScenario(f"model must be 1..5, got {model_id}")
    a, b, c, d, e, f = TCLUST_CONSTANTS[model_id]
    cov2 = np.array([[[1, 0], [0, a]], [[b, 0], [0, c]], [[d, e], [e, f]]], dtype=np.float64)
    means = np.zeros((3, p))
    means[:, :2] = TCLUST_MEANS_2D
    covs = np.zeros((3, p, p))
    for g in range(3):
        covs[g] = np.eye(p)
        covs[g, :2, :2] = cov2[g]
    return ScenarioSpec(
        name=f"tclust-p{p}-{proportions_id}-m{model_id}",
        p=p,
        proportions=TCLUST_PROPORTIONS[proportions_id],
        n_obs=900,
        n_outliers=100,
        means=means,
        covariances=covs,
        outlier_mode=RejectEllipsoids(0.99),
        seed=seed,
    )


def illustrative_scenario(size, seed):
    if size not in ILLUSTRATIVE_SIZES:
        raise UnknownScenario(f"illustrative size must be 'small' or 'large', got {size!r}")
    n_obs, n_out = ILLUSTRATIVE_SIZES[size]
    return ScenarioSpec(
        name=f"illustrative-{size}",
        p=2,
        proportions=ILLUSTRATIVE_PROPORTIONS,
        n_obs=n_obs,
        n_outliers=n_out,
        means=ILLUSTRATIVE_MEANS,
        covariances=ILLUSTRATIVE_COVS,
        outlier_mode=RejectEllipsoids(0.99),
        seed=seed,
    )


def sample_mixture(spec):
    """Gaussian rows, component by component, labelled 1..G."""
    rng = rng_for(spec.name, spec.seed, 0)
    rows, labels = [], []
    for g, count in enumerate(spec.component_counts()):
        L, _ = cholesky(spec.covariances[g])
        z = rng.standard_normal((count, spec.p))
        rows.append(z @ L.T + spec.means[g])
        labels.append(np.full(count, g + 1, dtype=np.intp))
    return LabeledData(np.vstack(rows), np.concatenate(labels))


def sample_outliers_reject(spec, mixture, batch=4096):
    """Uniform proposals over the mixture's bounding box, kept only outside all ellipsoids.

    A proposal is accepted when its squared Mahalanobis distance to every
    true component exceeds the chi-square ``level`` quantile.
    """
    mode = spec.outlier_mode
    if not isinstance(mode, RejectEllipsoids):
        raise DomainError("scenario does not use ellipsoid rejection")
    mixture = np.asarray(mixture, dtype=np.float64)
    lo, hi = mixture.min(axis=0), mixture.max(axis=0)
    cutoff = chisq_quantile(mode.level, spec.p)
    factors = [cholesky(c)[0] for c in spec.covariances]
    rng = rng_for(spec.name, spec.seed, 1)
    accepted, n_acc, proposed = [], 0, 0
    while n_acc < spec.n_outliers:
        if proposed >= PROPOSAL_CAP:
            raise RejectionStall(f"only {n_acc} of {spec.n_outliers} outliers after {proposed} proposals")
        size = min(batch, PROPOSAL_CAP - proposed)
        prop = lo + (hi - lo) * rng.random((size, spec.p))
        proposed += size
        ok = np.ones(size, dtype=bool)
        for mu, L in zip(spec.means, factors):
            ok &= mahalanobis_sq_chol(prop, mu, L) > cutoff
        good = prop[ok][: spec.n_outliers - n_acc]
        accepted.append(good)
        n_acc += good.shape[0]
    return np.vstack(accepted) if accepted else np.empty((0, spec.p))


def box_bounds(data, expand_factor):
    data = np.asarray(data, dtype=np.float64)
    centre = data.mean(axis=0)
    half = expand_factor * (data.max(axis=0) - data.min(axis=0)) / 2.0
    return centre - half, centre + half


def sample_outliers_box(n_outliers, data, expand_factor=2.0, seed=1, name="box"):
    """Uniform draws on the box centred at the data mean with expand_factor x the range."""
    if expand_factor < 0:
        raise DomainError("expand_factor must be non-negative")
    lo, hi = box_bounds(data, expand_factor)
    rng = rng_for(name, seed, 1)
    return lo + (hi - lo) * rng.random((int(n_outliers), lo.shape[0]))


def generate(spec):
    """Mixture rows followed by outlier rows (label 0)."""
    mix = sample_mixture(spec)
    mode = spec.outlier_mode
    if isinstance(mode, RejectEllipsoids):
        out = sample_outliers_reject(spec, mix.data)
    else:
        out = sample_outliers_box(spec.n_outliers, mix.data, mode.expand_factor, spec.seed, spec.name)
    return LabeledData(
        np.vstack([mix.data, out]),
        np.concatenate([mix.labels, np.full(out.shape[0], OUTLIER_LABEL, dtype=np.intp)]),
    )


def illustrative_dataset(size, seed):
    return generate(illustrative_scenario(size, seed))


def inject_box_outliers(data, labels, n_outliers, expand_factor=2.0, seed=1):
    """Append box outliers to user data; labels may be None (then all rows get 1)."""
    data = np.asarray(data, dtype=np.float64)
    if labels is None:
        labels = np.ones(data.shape[0], dtype=np.intp)
    out = sample_outliers_box(n_outliers, data, expand_factor, seed)
    return LabeledData(
        np.vstack([data, out]),
        np.concatenate([np.asarray(labels, dtype=np.intp), np.full(out.shape[0], OUTLIER_LABEL, dtype=np.intp)]),
    )


def single_gaussian(n, p, seed, name="single-gaussian"):
    """Standard normal rows, one component, no outliers."""
    if n < 1 or p < 1:
        raise DomainError("n and p must be positive")
    rng = rng_for(f"{name}-p{p}", seed, 0)
    return LabeledData(rng.standard_normal((n, p)), np.ones(n, dtype=np.intp))
