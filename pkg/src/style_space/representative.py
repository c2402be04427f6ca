"""Representative vector selection per category.

Two strategies:

* ``mean_representative`` -- the cluster centroid.
* inter-to-intra (I2I) ratio maximization -- pick the vector that maximizes
  mean distance to the farthest and closest rival categories relative to mean
  distance within the target category.  The maximizer is found by scanning
  the target's own members, optionally followed by a derivative-free simplex
  ascent constrained to the cluster boundary via a quadratic penalty.

The candidate scan may evaluate candidates in parallel threads
(``STYLE_SPACE_THREADS`` caps the pool; 0 or unset means auto).  Results are
reduced into a single array indexed by candidate position before the argmax,
so the selected vector never depends on evaluation order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from .cluster_stats import (
    ClusterModel,
    fit_model,
    inside_boundary,
    mahalanobis,
    mean_distance,
    rank_neighbors,
)
from .dataset import Cluster, LabeledEmbeddingSet, _readonly, partition

SINGULARITY_EPS = 1e-12
_PARALLEL_MIN_CANDIDATES = 512


class SingularObjectiveError(ValueError):
    """The intra-category mean distance vanished; the ratio is undefined."""


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the I2I pipeline.

    ``split_mode`` switches to maximizing the two rival-distance ratios
    separately and averaging the two maximizers, instead of maximizing their
    joint half-sum; it exists for comparison and its result may fall outside
    the cluster boundary.
    """

    refine: bool = True
    tol: float = 1e-6
    max_iters: int = 2000
    penalty: float = 1e3
    slack: float = 0.05
    split_mode: bool = False
    shrinkage: float = 0.1
    boundary_quantile: float = 1.0

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.penalty < 0.0:
            raise ValueError(f"penalty must be >= 0, got {self.penalty}")
        if self.slack < 0.0:
            raise ValueError(f"slack must be >= 0, got {self.slack}")


@dataclass(frozen=True, eq=False)
class I2IContext:
    """Target cluster plus its farthest and closest rival clusters."""

    target: Cluster
    closest: Cluster
    farthest: Cluster

    def __post_init__(self):
        if not (self.target.dim == self.closest.dim == self.farthest.dim):
            raise ValueError("context clusters must share one dimension")
        if self.target.label in (self.closest.label, self.farthest.label):
            raise ValueError(
                f"target {self.target.label!r} cannot serve as its own rival"
            )


@dataclass(frozen=True, eq=False)
class Representative:
    """A chosen vector for one category, with provenance.

    ``boundary_margin`` is boundary radius minus the vector's Mahalanobis
    distance (positive means strictly inside).  ``objective_value`` is absent
    for the mean method and for the degenerate singleton-cluster scan, where
    the intra-category distance is zero.
    """

    label: str
    vector: np.ndarray
    method: str
    objective_value: float | None = None
    boundary_margin: float | None = None
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vector", _readonly(self.vector))
        if self.vector.ndim != 1:
            raise ValueError("representative vector must be 1-D")
        if self.method not in ("mean", "i2i_scan", "i2i_refined", "sa_i2i"):
            raise ValueError(f"unknown representative method {self.method!r}")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "method": self.method,
            "vector": [float(v) for v in self.vector],
            "objective": None if self.objective_value is None else float(self.objective_value),
            "boundary_margin": None if self.boundary_margin is None else float(self.boundary_margin),
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Representative":
        return cls(
            label=str(doc["label"]),
            vector=np.asarray(doc["vector"], dtype=np.float64),
            method=str(doc["method"]),
            objective_value=doc.get("objective"),
            boundary_margin=doc.get("boundary_margin"),
            degenerate=bool(doc.get("degenerate", False)),
        )


def configured_threads() -> int:
    """Thread cap from STYLE_SPACE_THREADS (0 or unset = auto)."""
    raw = os.environ.get("STYLE_SPACE_THREADS", "0").strip()
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"STYLE_SPACE_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"STYLE_SPACE_THREADS must be >= 0, got {value}")
    if value == 0:
        return min(os.cpu_count() or 1, 8)
    return value


def mean_representative(cluster: Cluster, model: ClusterModel | None = None) -> Representative:
    """Centroid of the cluster; boundary margin filled in when a model is given."""
    vector = cluster.members.mean(axis=0)
    margin = None
    if model is not None:
        margin = model.boundary_radius - mahalanobis(vector, model)
    return Representative(cluster.label, vector, "mean", boundary_margin=margin)


def _ratio_objective(vector: np.ndarray, target: Cluster, rivals, weights) -> float:
    d_within = mean_distance(vector, target)
    if d_within < SINGULARITY_EPS:
        raise SingularObjectiveError(
            f"mean intra-category distance {d_within!r} below {SINGULARITY_EPS}"
        )
    value = 0.0
    for rival, weight in zip(rivals, weights):
        value += weight * mean_distance(vector, rival) / d_within
    return value


def i2i_objective(vector: np.ndarray, ctx: I2IContext) -> float:
    """Half-sum of the farthest- and closest-rival distance ratios.

    Raises:
        SingularObjectiveError: the vector is at zero mean distance to the
            target cluster (only possible when all members coincide with it).
    """
    vector = np.asarray(vector, dtype=np.float64)
    return _ratio_objective(
        vector, ctx.target, (ctx.farthest, ctx.closest), (0.5, 0.5)
    )


def _chunked_mean_distances(candidates: np.ndarray, members: np.ndarray) -> np.ndarray:
    """Row-wise mean distance from each candidate to all members.

    Chunk boundaries never change per-pair arithmetic, so the result is
    bit-identical for any thread count.
    """
    threads = configured_threads()
    n = candidates.shape[0]
    if threads <= 1 or n < _PARALLEL_MIN_CANDIDATES:
        return cdist(candidates, members).mean(axis=1)
    chunk = -(-n // threads)  # ceil division
    spans = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    out = np.empty(n, dtype=np.float64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for (lo, hi), result in zip(
            spans,
            pool.map(lambda s: cdist(candidates[s[0] : s[1]], members).mean(axis=1), spans),
        ):
            out[lo:hi] = result
    return out


def _scan_members(target: Cluster, rivals, weights) -> tuple[int, float]:
    """Index and objective of the best member candidate; first index wins ties."""
    candidates = target.members
    d_within = _chunked_mean_distances(candidates, target.members)
    values = np.zeros(candidates.shape[0], dtype=np.float64)
    for rival, weight in zip(rivals, weights):
        rival_d = _chunked_mean_distances(candidates, rival.members)
        values += (weight * rival_d) / d_within
    valid = d_within >= SINGULARITY_EPS
    if not np.any(valid):
        raise SingularObjectiveError(
            "every candidate coincides with the whole target cluster"
        )
    values = np.where(valid, values, -np.inf)
    best = int(np.argmax(values))
    return best, float(values[best])


def i2i_candidate_scan(ctx: I2IContext) -> Representative:
    """Evaluate the objective at every target member and keep the best.

    A singleton target cluster short-circuits to its sole member with an
    absent objective (the intra-category distance there is zero by
    construction, so the ratio is undefined).
    """
    if ctx.target.count == 1:
        return Representative(ctx.target.label, ctx.target.members[0], "i2i_scan")
    best, value = _scan_members(ctx.target, (ctx.farthest, ctx.closest), (0.5, 0.5))
    return Representative(
        ctx.target.label,
        ctx.target.members[best],
        "i2i_scan",
        objective_value=value,
    )


def _simplex_maximize(fn, start: np.ndarray, steps: np.ndarray, tol: float, max_iters: int):
    """Nelder-Mead ascent from ``start`` with per-coordinate initial steps.

    Stops when the simplex diameter (largest vertex distance from the best
    vertex) drops below ``tol`` or after ``max_iters`` iterations.  Fully
    deterministic: vertex ordering uses a stable sort.
    """
    dim = start.size
    vertices = np.tile(start, (dim + 1, 1))
    for i in range(dim):
        vertices[i + 1, i] += steps[i]
    values = np.array([fn(v) for v in vertices])

    for _ in range(max_iters):
        order = np.argsort(-values, kind="stable")
        vertices = vertices[order]
        values = values[order]
        diameter = float(np.max(np.linalg.norm(vertices[1:] - vertices[0], axis=1)))
        if diameter < tol:
            break
        mid = vertices[:-1].mean(axis=0)
        worst = vertices[-1]
        reflected = mid + (mid - worst)
        f_reflected = fn(reflected)
        if f_reflected > values[0]:
            expanded = mid + 2.0 * (mid - worst)
            f_expanded = fn(expanded)
            if f_expanded > f_reflected:
                vertices[-1], values[-1] = expanded, f_expanded
            else:
                vertices[-1], values[-1] = reflected, f_reflected
        elif f_reflected > values[-2]:
            vertices[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected > values[-1]:
                contracted = mid + 0.5 * (mid - worst)
            else:
                contracted = mid - 0.5 * (mid - worst)
            f_contracted = fn(contracted)
            if f_contracted > max(f_reflected, values[-1]):
                vertices[-1], values[-1] = contracted, f_contracted
            else:
                vertices[1:] = vertices[0] + 0.5 * (vertices[1:] - vertices[0])
                values[1:] = [fn(v) for v in vertices[1:]]

    best = int(np.argmax(values))  # first max wins ties
    return vertices[best], float(values[best])


def _initial_steps(model: ClusterModel) -> np.ndarray:
    # Spread-proportional steps keep the search translation-equivariant and
    # scale-covariant; flat dimensions get a small absolute step.
    base = model.avg_std if model.avg_std > 0.0 else 1.0
    return np.where(model.per_dim_std > 0.0, 0.25 * model.per_dim_std, 0.05 * base)


def _refine_vector(
    start_vector: np.ndarray,
    start_value: float,
    target: Cluster,
    rivals,
    weights,
    model: ClusterModel,
    cfg: SolverConfig,
) -> tuple[np.ndarray, float]:
    """Penalized simplex ascent; falls back to the start when not improving."""
    radius = model.boundary_radius

    def penalized(vector: np.ndarray) -> float:
        try:
            value = _ratio_objective(vector, target, rivals, weights)
        except SingularObjectiveError:
            return -math.inf
        excess = mahalanobis(vector, model) - radius
        if excess > 0.0:
            value -= cfg.penalty * excess * excess
        return value

    candidate, _ = _simplex_maximize(
        penalized, np.array(start_vector), _initial_steps(model), cfg.tol, cfg.max_iters
    )
    try:
        candidate_value = _ratio_objective(candidate, target, rivals, weights)
    except SingularObjectiveError:
        return np.array(start_vector), start_value
    if candidate_value >= start_value and inside_boundary(candidate, model, cfg.slack):
        return candidate, candidate_value
    return np.array(start_vector), start_value


def i2i_refine(
    start: Representative,
    ctx: I2IContext,
    model: ClusterModel,
    cfg: SolverConfig = SolverConfig(),
) -> Representative:
    """Continue the ascent from a scan result inside the cluster boundary.

    The result never scores below the start and always satisfies the boundary
    predicate at ``cfg.slack``; non-improving searches return the start
    vector unchanged.
    """
    if start.vector.size != ctx.target.dim:
        raise ValueError("start vector dimension does not match context")
    if not inside_boundary(start.vector, model, cfg.slack):
        raise ValueError("refinement start must satisfy the boundary predicate")
    if start.objective_value is None:
        # Singleton-cluster scan result: no finite objective to ascend.
        return replace(start, method="i2i_refined")
    vector, value = _refine_vector(
        start.vector,
        start.objective_value,
        ctx.target,
        (ctx.farthest, ctx.closest),
        (0.5, 0.5),
        model,
        cfg,
    )
    margin = model.boundary_radius - mahalanobis(vector, model)
    return Representative(
        start.label,
        vector,
        "i2i_refined",
        objective_value=value,
        boundary_margin=margin,
        degenerate=start.degenerate,
    )


def _split_representative(
    ctx: I2IContext, model: ClusterModel, cfg: SolverConfig, degenerate: bool
) -> Representative:
    # Literal two-argmax reading: maximize each rival ratio separately and
    # average the maximizers.  The midpoint is not boundary-constrained.
    halves = []
    for rival in (ctx.farthest, ctx.closest):
        best, value = _scan_members(ctx.target, (rival,), (1.0,))
        vector = ctx.target.members[best]
        if cfg.refine:
            vector, value = _refine_vector(
                vector, value, ctx.target, (rival,), (1.0,), model, cfg
            )
        halves.append(vector)
    combined = (halves[0] + halves[1]) / 2.0
    try:
        objective = i2i_objective(combined, ctx)
    except SingularObjectiveError:
        objective = None
    return Representative(
        ctx.target.label,
        combined,
        "i2i_refined" if cfg.refine else "i2i_scan",
        objective_value=objective,
        boundary_margin=model.boundary_radius - mahalanobis(combined, model),
        degenerate=degenerate,
    )


def build_context(
    dataset: LabeledEmbeddingSet, target: str, cfg: SolverConfig = SolverConfig()
) -> tuple[I2IContext, dict[str, ClusterModel], bool]:
    """Partition, fit models, and pick rival clusters for ``target``.

    With exactly two categories the single rival stands in as both the
    closest and the farthest cluster (degenerate mode).
    """
    clusters = partition(dataset)
    if target not in clusters:
        raise ValueError(f"category {target!r} not present in dataset")
    others = [label for label in clusters if label != target]
    if not others:
        raise ValueError("I2I needs at least 2 categories")
    models = {
        label: fit_model(cluster, cfg.shrinkage, cfg.boundary_quantile)
        for label, cluster in clusters.items()
    }
    degenerate = len(others) == 1
    if degenerate:
        closest = farthest = others[0]
    else:
        closest, farthest = rank_neighbors(target, list(models.values()))
    ctx = I2IContext(clusters[target], clusters[closest], clusters[farthest])
    return ctx, models, degenerate


def i2i_representative(
    dataset: LabeledEmbeddingSet, target: str, cfg: SolverConfig = SolverConfig()
) -> Representative:
    """End-to-end I2I pipeline: rank rivals, scan candidates, refine.

    Deterministic for fixed inputs and config.
    """
    ctx, models, degenerate = build_context(dataset, target, cfg)
    model = models[target]
    if cfg.split_mode:
        return _split_representative(ctx, model, cfg, degenerate)
    rep = i2i_candidate_scan(ctx)
    rep = replace(rep, degenerate=degenerate)
    if cfg.refine and rep.objective_value is not None:
        rep = i2i_refine(rep, ctx, model, cfg)
    margin = model.boundary_radius - mahalanobis(rep.vector, model)
    return replace(rep, boundary_margin=margin)
