"""Per-cluster statistics and geometry.

Centroids, per-dimension spreads, shrinkage-regularized covariance,
Mahalanobis boundary tests, and centroid-distance neighbor ranking.

Standard deviations are population statistics (divide by N): they describe
the cluster as it stands rather than estimate a generating process.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

from .dataset import Cluster, _readonly

EIGENVALUE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Fitted single-Gaussian summary of one cluster.

    ``boundary_radius`` is a quantile of the members' Mahalanobis distances;
    with quantile 1.0 it is the largest member distance, so every member lies
    inside its own boundary.
    """

    label: str
    centroid: np.ndarray
    per_dim_std: np.ndarray
    avg_std: float
    covariance: np.ndarray
    boundary_radius: float
    sample_count: int

    def __post_init__(self):
        object.__setattr__(self, "centroid", _readonly(self.centroid))
        object.__setattr__(self, "per_dim_std", _readonly(self.per_dim_std))
        object.__setattr__(self, "covariance", _readonly(self.covariance))

    @property
    def dim(self) -> int:
        return int(self.centroid.size)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "centroid": [float(v) for v in self.centroid],
            "per_dim_std": [float(v) for v in self.per_dim_std],
            "avg_std": float(self.avg_std),
            "boundary_radius": float(self.boundary_radius),
            "covariance": [float(v) for v in self.covariance.ravel()],
            "sample_count": self.sample_count,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClusterModel":
        centroid = np.asarray(doc["centroid"], dtype=np.float64)
        d = centroid.size
        return cls(
            label=str(doc["label"]),
            centroid=centroid,
            per_dim_std=np.asarray(doc["per_dim_std"], dtype=np.float64),
            avg_std=float(doc["avg_std"]),
            covariance=np.asarray(doc["covariance"], dtype=np.float64).reshape(d, d),
            boundary_radius=float(doc["boundary_radius"]),
            sample_count=int(doc["sample_count"]),
        )


def centroid(cluster: Cluster) -> np.ndarray:
    """Arithmetic mean of the members, per dimension."""
    return cluster.members.mean(axis=0)


def per_dim_std(cluster: Cluster) -> np.ndarray:
    """Population standard deviation of each dimension."""
    return cluster.members.std(axis=0)


def avg_std(cluster: Cluster) -> float:
    """Mean of the per-dimension standard deviations."""
    return float(per_dim_std(cluster).mean())


def fit_model(
    cluster: Cluster,
    shrinkage: float = 0.1,
    boundary_quantile: float = 1.0,
) -> ClusterModel:
    """Fit centroid, spreads, regularized covariance, and boundary radius.

    The covariance is ``(1-shrinkage) * population covariance + shrinkage *
    mean(diag) * I``, with eigenvalues floored at ``EIGENVALUE_FLOOR`` so the
    result stays positive-definite even when count < dim.  A singleton
    cluster degenerates to ``floor * I`` with boundary radius 0.
    """
    if not 0.0 <= shrinkage <= 1.0:
        raise ValueError(f"shrinkage must be in [0, 1], got {shrinkage}")
    if not 0.0 < boundary_quantile <= 1.0:
        raise ValueError(f"boundary_quantile must be in (0, 1], got {boundary_quantile}")
    members = cluster.members
    n, d = members.shape
    center = members.mean(axis=0)
    spreads = members.std(axis=0)
    if n == 1:
        covariance = EIGENVALUE_FLOOR * np.eye(d)
        radius = 0.0
    else:
        centered = members - center
        covariance = centered.T @ centered / n
        covariance = (1.0 - shrinkage) * covariance + shrinkage * float(
            np.mean(np.diag(covariance))
        ) * np.eye(d)
        eigvals, eigvecs = np.linalg.eigh((covariance + covariance.T) / 2.0)
        eigvals = np.maximum(eigvals, EIGENVALUE_FLOOR)
        covariance = (eigvecs * eigvals) @ eigvecs.T
        covariance = (covariance + covariance.T) / 2.0
        radius = None  # computed below, once the model exists
    model = ClusterModel(
        label=cluster.label,
        centroid=center,
        per_dim_std=spreads,
        avg_std=float(spreads.mean()),
        covariance=covariance,
        boundary_radius=0.0,
        sample_count=n,
    )
    if n > 1:
        distances = mahalanobis_batch(members, model)
        radius = float(np.quantile(distances, boundary_quantile))
        model = ClusterModel(
            label=model.label,
            centroid=model.centroid,
            per_dim_std=model.per_dim_std,
            avg_std=model.avg_std,
            covariance=model.covariance,
            boundary_radius=radius,
            sample_count=n,
        )
    return model


def mahalanobis_batch(points: np.ndarray, model: ClusterModel) -> np.ndarray:
    """Mahalanobis distance of each row of ``points`` to the model centroid."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != model.dim:
        raise ValueError(f"dimension mismatch: points have {points.shape[1]}, model {model.dim}")
    chol = np.linalg.cholesky(model.covariance)
    z = solve_triangular(chol, (points - model.centroid).T, lower=True)
    return np.sqrt(np.sum(z * z, axis=0))


def mahalanobis(point: np.ndarray, model: ClusterModel) -> float:
    """Mahalanobis distance of a single point to the model centroid."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1:
        raise ValueError("mahalanobis expects a single vector; use mahalanobis_batch")
    return float(mahalanobis_batch(point[None, :], model)[0])


def inside_boundary(point: np.ndarray, model: ClusterModel, slack: float = 0.05) -> bool:
    """Whether ``point`` lies within the slack-inflated boundary radius."""
    if slack < 0.0:
        raise ValueError(f"slack must be >= 0, got {slack}")
    return mahalanobis(point, model) <= model.boundary_radius * (1.0 + slack)


def mean_distance(point: np.ndarray, cluster: Cluster) -> float:
    """Mean Euclidean distance from ``point`` to every cluster member."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1 or point.size != cluster.dim:
        raise ValueError(
            f"dimension mismatch: point has shape {point.shape}, cluster dim {cluster.dim}"
        )
    return float(cdist(point[None, :], cluster.members).mean())


def rank_by_centroid(
    point: np.ndarray, models: list[ClusterModel]
) -> tuple[str, str]:
    """Closest and farthest model labels by centroid Euclidean distance.

    Ties break toward the lexicographically smaller label.
    """
    if len(models) < 2:
        raise ValueError(f"need at least 2 candidate categories, got {len(models)}")
    point = np.asarray(point, dtype=np.float64)
    ranked = sorted(
        (float(np.linalg.norm(m.centroid - point)), m.label) for m in models
    )
    closest = ranked[0][1]
    max_dist = ranked[-1][0]
    farthest = min(lbl for dist, lbl in ranked if dist == max_dist)
    return closest, farthest


def rank_neighbors(target: str, models: list[ClusterModel]) -> tuple[str, str]:
    """Closest and farthest non-target categories, by centroid distance."""
    target_models = [m for m in models if m.label == target]
    if not target_models:
        raise ValueError(f"target category {target!r} not among models")
    others = [m for m in models if m.label != target]
    if len(others) < 2:
        raise ValueError(
            f"need at least 2 non-target categories to rank, got {len(others)}"
        )
    return rank_by_centroid(target_models[0].centroid, others)
