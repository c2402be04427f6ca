"""Emotion-intensity schedules between the neutral category and a target.

Two schedule builders:

* ``linear_schedule`` -- straight-line blends between the two representative
  vectors at caller-supplied intensities.
* ``sa_i2i_schedule`` -- spread-aware schedule: intensities start at an
  anchor ratio derived from the two clusters' average spreads, advance on an
  exponential-scale grid, and each intermediate vector is the I2I
  representative of an artificially generated cluster blended from both
  categories at that intensity.

Intensity convention throughout: t=0 is fully neutral, t=1 is the full
target emotion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cluster_stats import avg_std, fit_model, rank_by_centroid
from .dataset import Cluster, LabeledEmbeddingSet, _readonly, partition
from .representative import (
    I2IContext,
    SolverConfig,
    i2i_candidate_scan,
    i2i_refine,
    i2i_representative,
)

F_KINDS = ("identity", "square", "cube")


def _spread_weight(spread: float, f_kind: str) -> float:
    if f_kind == "identity":
        return spread
    if f_kind == "square":
        return spread * spread
    if f_kind == "cube":
        return spread * spread * spread
    raise ValueError(f"unknown f_kind {f_kind!r}; expected one of {F_KINDS}")


@dataclass(frozen=True)
class InterpolationConfig:
    """Schedule-generation settings.

    ``granularity`` is the number of discrete intensity levels; ``pair_cap``
    caps the generated cluster's size via seeded subsampling of the member
    cross-product; ``slack`` is the boundary slack used when refining
    per-level representatives inside generated clusters.
    """

    f_kind: str = "square"
    granularity: int = 4
    pair_cap: int = 10000
    seed: int = 0
    slack: float = 0.05
    neutral_label: str = "neutral"

    def __post_init__(self):
        if self.f_kind not in F_KINDS:
            raise ValueError(f"unknown f_kind {self.f_kind!r}; expected one of {F_KINDS}")
        if self.granularity < 2:
            raise ValueError(f"granularity must be >= 2, got {self.granularity}")
        if self.pair_cap < 1:
            raise ValueError(f"pair_cap must be >= 1, got {self.pair_cap}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.slack < 0.0:
            raise ValueError(f"slack must be >= 0, got {self.slack}")


@dataclass(frozen=True, eq=False)
class ScheduleLevel:
    """One intensity step: position t, its ratio, and the vector to use."""

    t: float
    alpha: float
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", _readonly(self.vector))


@dataclass(frozen=True, eq=False)
class IntensitySchedule:
    """Ordered intensity levels from the neutral end to the full emotion."""

    neutral_label: str
    emotion_label: str
    method: str
    levels: tuple[ScheduleLevel, ...]
    anchor: float | None
    granularity: int

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if self.method not in ("linear", "sa_i2i"):
            raise ValueError(f"unknown schedule method {self.method!r}")
        if len(self.levels) != self.granularity or self.granularity < 2:
            raise ValueError(
                f"expected {self.granularity} levels (>= 2), got {len(self.levels)}"
            )
        ts = [lvl.t for lvl in self.levels]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"level intensities must be strictly increasing, got {ts}")
        if not all(0.0 <= t <= 1.0 for t in ts):
            raise ValueError(f"level intensities must lie in [0, 1], got {ts}")
        if ts[-1] != 1.0:
            raise ValueError(f"last level must sit at t = 1, got {ts[-1]}")
        dims = {lvl.vector.size for lvl in self.levels}
        if len(dims) != 1:
            raise ValueError(f"level vectors disagree on dimension: {sorted(dims)}")

    def to_dict(self) -> dict:
        return {
            "neutral": self.neutral_label,
            "emotion": self.emotion_label,
            "method": self.method,
            "anchor": None if self.anchor is None else float(self.anchor),
            "granularity": self.granularity,
            "levels": [
                {
                    "t": float(lvl.t),
                    "alpha": float(lvl.alpha),
                    "vector": [float(v) for v in lvl.vector],
                }
                for lvl in self.levels
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "IntensitySchedule":
        levels = tuple(
            ScheduleLevel(
                t=float(lvl["t"]),
                alpha=float(lvl["alpha"]),
                vector=np.asarray(lvl["vector"], dtype=np.float64),
            )
            for lvl in doc["levels"]
        )
        anchor = doc.get("anchor")
        return cls(
            neutral_label=str(doc["neutral"]),
            emotion_label=str(doc["emotion"]),
            method=str(doc["method"]),
            levels=levels,
            anchor=None if anchor is None else float(anchor),
            granularity=int(doc.get("granularity", len(levels))),
        )


def linear_path(first: np.ndarray, second: np.ndarray, ts) -> list[np.ndarray]:
    """Convex blends ``t * first + (1 - t) * second`` for each t in [0, 1]."""
    first = np.asarray(first, dtype=np.float64)
    second = np.asarray(second, dtype=np.float64)
    if first.shape != second.shape or first.ndim != 1:
        raise ValueError("endpoints must be vectors of equal dimension")
    out = []
    for t in ts:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"interpolation ratio must lie in [0, 1], got {t}")
        out.append(t * first + (1.0 - t) * second)
    return out


def anchor_point(neutral: Cluster, emotion: Cluster, f_kind: str = "square") -> float:
    """Ratio marking the neutral cluster's edge on the intensity axis.

    Computed from the two clusters' average per-dimension spreads passed
    through ``f_kind``; equal spreads give exactly 0.5, and two fully
    degenerate (zero-spread) clusters fall back to 0.5.
    """
    w_neutral = _spread_weight(avg_std(neutral), f_kind)
    w_emotion = _spread_weight(avg_std(emotion), f_kind)
    total = w_neutral + w_emotion
    if total == 0.0:
        return 0.5
    return w_neutral / total


def nonlinear_ratios(anchor: float, levels: int) -> list[float]:
    """Intensity ratios from the anchor to 1 on an exponential-scale grid.

    The step is uniform in the exponential domain, so the ratios rise fast
    near the anchor and flatten toward 1 (strictly increasing, strictly
    decreasing increments).  The first ratio is exactly ``anchor`` and the
    last is exactly 1.0.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    if not 0.0 <= anchor < 1.0:
        raise ValueError(f"anchor must lie in [0, 1), got {anchor}")
    lifted = math.exp(anchor)
    step = (math.e - lifted) / (levels - 1)
    ratios = [math.log(lifted + step * i) for i in range(levels)]
    ratios[0] = anchor
    ratios[-1] = 1.0
    return ratios


def generate_interpolated_cluster(
    neutral: Cluster,
    emotion: Cluster,
    neutral_rep: np.ndarray,
    emotion_rep: np.ndarray,
    t: float,
    cfg: InterpolationConfig = InterpolationConfig(),
) -> Cluster:
    """Synthesize a cluster carrying intensity ``t`` between two categories.

    Neutral members are pulled toward the emotion representative, emotion
    members toward the neutral representative, and the output is the set of
    midpoints over the member cross-product, subsampled without replacement
    to ``cfg.pair_cap`` pairs under ``cfg.seed``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"intensity must lie in [0, 1], got {t}")
    neutral_rep = np.asarray(neutral_rep, dtype=np.float64)
    emotion_rep = np.asarray(emotion_rep, dtype=np.float64)
    if not (neutral.dim == emotion.dim == neutral_rep.size == emotion_rep.size):
        raise ValueError("clusters and representatives must share one dimension")
    toward_emotion = (1.0 - t) * neutral.members + t * emotion_rep
    toward_neutral = t * emotion.members + (1.0 - t) * neutral_rep
    n_pairs = toward_emotion.shape[0] * toward_neutral.shape[0]
    if n_pairs > cfg.pair_cap:
        rng = np.random.default_rng(cfg.seed)
        flat = np.sort(rng.choice(n_pairs, size=cfg.pair_cap, replace=False))
    else:
        flat = np.arange(n_pairs)
    rows = flat // toward_neutral.shape[0]
    cols = flat % toward_neutral.shape[0]
    members = (toward_emotion[rows] + toward_neutral[cols]) / 2.0
    label = f"{neutral.label}~{emotion.label}@{t:.12g}"
    return Cluster(label, members)


def _level_seed(seed: int, level_index: int) -> int:
    # Independent per-level stream so levels can be computed in any order.
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(level_index,)).generate_state(1)[0])


def _require_labels(dataset: LabeledEmbeddingSet, neutral_label: str, emotion: str):
    labels = dataset.labels()
    if neutral_label not in labels:
        raise ValueError(f"neutral category {neutral_label!r} not present in dataset")
    if emotion not in labels:
        raise ValueError(f"emotion category {emotion!r} not present in dataset")
    if neutral_label == emotion:
        raise ValueError("emotion category must differ from the neutral category")


def sa_i2i_schedule(
    dataset: LabeledEmbeddingSet,
    emotion: str,
    cfg: InterpolationConfig = InterpolationConfig(),
    solver_cfg: SolverConfig = SolverConfig(),
) -> IntensitySchedule:
    """Spread-aware schedule from the neutral category to ``emotion``.

    Endpoint representatives come from the I2I pipeline; each intermediate
    level generates an interpolated cluster and takes its I2I representative,
    ranking rival clusters among all original categories against the
    generated cluster's centroid.  The final level carries ratio 1 and the
    target emotion's own representative.  Pure function of its arguments,
    seeds included.
    """
    _require_labels(dataset, cfg.neutral_label, emotion)
    clusters = partition(dataset)
    neutral_cluster = clusters[cfg.neutral_label]
    emotion_cluster = clusters[emotion]
    neutral_rep = i2i_representative(dataset, cfg.neutral_label, solver_cfg)
    emotion_rep = i2i_representative(dataset, emotion, solver_cfg)
    anchor = anchor_point(neutral_cluster, emotion_cluster, cfg.f_kind)
    ratios = nonlinear_ratios(anchor, cfg.granularity)
    base_models = {
        label: fit_model(cluster, solver_cfg.shrinkage, solver_cfg.boundary_quantile)
        for label, cluster in clusters.items()
    }
    level_cfg = replace(solver_cfg, slack=cfg.slack)

    levels: list[ScheduleLevel] = []
    for index, ratio in enumerate(ratios[:-1], start=1):
        generated = generate_interpolated_cluster(
            neutral_cluster,
            emotion_cluster,
            neutral_rep.vector,
            emotion_rep.vector,
            ratio,
            replace(cfg, seed=_level_seed(cfg.seed, index)),
        )
        closest, farthest = rank_by_centroid(
            generated.members.mean(axis=0), list(base_models.values())
        )
        ctx = I2IContext(generated, clusters[closest], clusters[farthest])
        rep = i2i_candidate_scan(ctx)
        if level_cfg.refine and rep.objective_value is not None:
            generated_model = fit_model(
                generated, level_cfg.shrinkage, level_cfg.boundary_quantile
            )
            rep = i2i_refine(rep, ctx, generated_model, level_cfg)
        levels.append(ScheduleLevel(t=ratio, alpha=ratio, vector=rep.vector))
    levels.append(ScheduleLevel(t=1.0, alpha=1.0, vector=emotion_rep.vector))
    return IntensitySchedule(
        neutral_label=cfg.neutral_label,
        emotion_label=emotion,
        method="sa_i2i",
        levels=tuple(levels),
        anchor=anchor,
        granularity=cfg.granularity,
    )


def linear_schedule(
    dataset: LabeledEmbeddingSet,
    emotion: str,
    ts,
    solver_cfg: SolverConfig = SolverConfig(),
    neutral_label: str = "neutral",
) -> IntensitySchedule:
    """Straight-line schedule between the two I2I representatives.

    ``ts`` must be strictly increasing within [0, 1] and end at exactly 1
    (the full target emotion); t=0 is the neutral representative.
    """
    _require_labels(dataset, neutral_label, emotion)
    ts = [float(t) for t in ts]
    if len(ts) < 2:
        raise ValueError(f"need at least 2 intensities, got {len(ts)}")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"intensities must be strictly increasing, got {ts}")
    if ts[-1] != 1.0:
        raise ValueError(f"last intensity must be exactly 1, got {ts[-1]}")
    neutral_rep = i2i_representative(dataset, neutral_label, solver_cfg)
    emotion_rep = i2i_representative(dataset, emotion, solver_cfg)
    vectors = linear_path(emotion_rep.vector, neutral_rep.vector, ts)
    levels = tuple(
        ScheduleLevel(t=t, alpha=t, vector=vec) for t, vec in zip(ts, vectors)
    )
    return IntensitySchedule(
        neutral_label=neutral_label,
        emotion_label=emotion,
        method="linear",
        levels=levels,
        anchor=None,
        granularity=len(levels),
    )
