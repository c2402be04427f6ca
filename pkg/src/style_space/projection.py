"""Deterministic 2-D views of clusters, representatives, and schedules.

A principal-axes projection (top-2 eigenvectors of the data covariance,
fixed sign convention, no randomness) plus two byte-deterministic emitters:
a self-contained SVG scatter plot and a CSV point table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledEmbeddingSet, _readonly

SVG_WIDTH = 800
SVG_HEIGHT = 600
MARGIN_FRACTION = 0.05

# tab10-style palette, cycled over categories in sorted label order
_PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)


@dataclass(frozen=True, eq=False)
class Projection2D:
    """Affine map onto the top two principal axes."""

    mean: np.ndarray
    basis: np.ndarray  # shape (2, dim), orthonormal rows
    explained_variance: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "mean", _readonly(self.mean))
        object.__setattr__(self, "basis", _readonly(self.basis))
        if self.basis.shape != (2, self.mean.size):
            raise ValueError(f"basis must be 2 x {self.mean.size}, got {self.basis.shape}")


def pca_fit(dataset: LabeledEmbeddingSet) -> Projection2D:
    """Top-2 principal axes of the mean-centered records.

    Sign convention: each axis is flipped so its first nonzero component is
    positive, making the fit fully deterministic.  Zero-variance data falls
    back to the first two canonical directions.
    """
    if len(dataset) < 3:
        raise ValueError(f"projection needs at least 3 records, got {len(dataset)}")
    if dataset.dim < 2:
        raise ValueError(f"projection needs dimension >= 2, got {dataset.dim}")
    data = np.array([rec.weights for rec in dataset.records])
    mean = data.mean(axis=0)
    centered = data - mean
    covariance = centered.T @ centered / data.shape[0]
    if not np.any(np.abs(covariance) > 0.0):
        basis = np.zeros((2, dataset.dim))
        basis[0, 0] = 1.0
        basis[1, 1] = 1.0
        return Projection2D(mean, basis, (0.0, 0.0))
    eigvals, eigvecs = np.linalg.eigh(covariance)
    basis = np.stack([eigvecs[:, -1], eigvecs[:, -2]])
    for row in basis:
        nonzero = np.nonzero(row)[0]
        if nonzero.size and row[nonzero[0]] < 0.0:
            row *= -1.0
    explained = (float(max(eigvals[-1], 0.0)), float(max(eigvals[-2], 0.0)))
    return Projection2D(mean, basis, explained)


def project(proj: Projection2D, points) -> np.ndarray:
    """Map points into the 2-D view: ``(p - mean) @ basis.T``."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != proj.mean.size:
        raise ValueError(
            f"dimension mismatch: points have {points.shape[1]}, projection {proj.mean.size}"
        )
    return (points - proj.mean) @ proj.basis.T


@dataclass(frozen=True, eq=False)
class PlotScene:
    """Projected content of one plot: sample groups, markers, and a path."""

    groups: tuple[tuple[str, np.ndarray], ...]  # (category label, (n, 2) points)
    markers: tuple[tuple[str, str, np.ndarray], ...] = ()  # (label, kind, (2,) point)
    path: tuple[tuple[str, np.ndarray], ...] = ()  # ordered (label, (2,) point)

    def __post_init__(self):
        if not self.groups and not self.markers and not self.path:
            raise ValueError("plot scene is empty")

    def point_count(self) -> int:
        return (
            sum(int(pts.shape[0]) for _, pts in self.groups)
            + len(self.markers)
            + len(self.path)
        )


def build_scene(
    proj: Projection2D,
    dataset: LabeledEmbeddingSet,
    representatives=None,
    schedule=None,
) -> PlotScene:
    """Project a dataset plus optional representatives and schedule levels."""
    groups = []
    by_label: dict[str, list[np.ndarray]] = {}
    for rec in dataset.records:
        by_label.setdefault(rec.label, []).append(rec.weights)
    for label in sorted(by_label):
        groups.append((label, project(proj, np.array(by_label[label]))))
    markers = []
    for rep in representatives or ():
        markers.append((rep.label, rep.method, project(proj, rep.vector[None, :])[0]))
    path = []
    if schedule is not None:
        for level in schedule.levels:
            path.append(
                (schedule.emotion_label, project(proj, level.vector[None, :])[0])
            )
    return PlotScene(tuple(groups), tuple(markers), tuple(path))


def _scene_bounds(scene: PlotScene) -> tuple[float, float, float, float]:
    stacks = [pts for _, pts in scene.groups]
    stacks += [xy[None, :] for _, _, xy in scene.markers]
    stacks += [xy[None, :] for _, xy in scene.path]
    allpts = np.vstack(stacks)
    return (
        float(allpts[:, 0].min()),
        float(allpts[:, 0].max()),
        float(allpts[:, 1].min()),
        float(allpts[:, 1].max()),
    )


def _color_map(scene: PlotScene) -> dict[str, str]:
    labels = sorted(
        {label for label, _ in scene.groups}
        | {label for label, _, _ in scene.markers}
        | {label for label, _ in scene.path}
    )
    return {label: _PALETTE[i % len(_PALETTE)] for i, label in enumerate(labels)}


def _emit_svg(scene: PlotScene) -> bytes:
    xmin, xmax, ymin, ymax = _scene_bounds(scene)
    xspan = max(xmax - xmin, 1e-12)
    yspan = max(ymax - ymin, 1e-12)
    mx = SVG_WIDTH * MARGIN_FRACTION
    my = SVG_HEIGHT * MARGIN_FRACTION
    inner_w = SVG_WIDTH - 2 * mx
    inner_h = SVG_HEIGHT - 2 * my

    def sx(x: float) -> float:
        return mx + (x - xmin) / xspan * inner_w

    def sy(y: float) -> float:
        return SVG_HEIGHT - my - (y - ymin) / yspan * inner_h

    colors = _color_map(scene)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="#ffffff"/>',
    ]
    for label, pts in scene.groups:
        out.append(f'<g fill="{colors[label]}" fill-opacity="0.55">')
        for x, y in pts:
            out.append(f'<circle cx="{sx(x):.3f}" cy="{sy(y):.3f}" r="3"/>')
        out.append("</g>")
    if scene.path:
        coords = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for _, (x, y) in scene.path)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="#333333" '
            f'stroke-width="1.5" stroke-dasharray="6,3"/>'
        )
        for label, (x, y) in scene.path:
            px, py = sx(x), sy(y)
            out.append(
                f'<path d="M {px - 5:.3f} {py:.3f} L {px + 5:.3f} {py:.3f} '
                f'M {px:.3f} {py - 5:.3f} L {px:.3f} {py + 5:.3f}" '
                f'stroke="{colors[label]}" stroke-width="2"/>'
            )
    for label, kind, (x, y) in scene.markers:
        px, py = sx(x), sy(y)
        color = colors.get(label, "#444444")
        if kind == "mean":
            out.append(
                f'<rect x="{px - 5:.3f}" y="{py - 5:.3f}" width="10" height="10" '
                f'fill="{color}" stroke="#000000" stroke-width="1"/>'
            )
        else:  # i2i family: diamond
            out.append(
                f'<polygon points="{px:.3f},{py - 6:.3f} {px + 6:.3f},{py:.3f} '
                f'{px:.3f},{py + 6:.3f} {px - 6:.3f},{py:.3f}" '
                f'fill="{color}" stroke="#000000" stroke-width="1"/>'
            )
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _emit_csv(scene: PlotScene) -> bytes:
    rows = ["x,y,label,kind"]
    for label, pts in scene.groups:
        for x, y in pts:
            rows.append(f"{x:.17g},{y:.17g},{label},sample")
    for label, kind, (x, y) in scene.markers:
        rows.append(f"{x:.17g},{y:.17g},{label},{kind}")
    for label, (x, y) in scene.path:
        rows.append(f"{x:.17g},{y:.17g},{label},level")
    return ("\n".join(rows) + "\n").encode("utf-8")


def emit_plot(scene: PlotScene, fmt: str) -> bytes:
    """Render the scene as ``svg`` or ``csv`` bytes; identical scenes give
    identical bytes."""
    if fmt == "svg":
        return _emit_svg(scene)
    if fmt == "csv":
        return _emit_csv(scene)
    raise ValueError(f"unknown plot format {fmt!r}; expected svg or csv")
