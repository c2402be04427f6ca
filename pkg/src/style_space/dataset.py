"""Labeled embedding datasets: loading, validation, synthesis, and partitioning.

A dataset is an immutable collection of D-dimensional weight vectors, each
tagged with a record id and a category label.  Two on-disk encodings are
supported:

* JSONL -- one record per line: ``{"id": "...", "label": "...", "weights": [...]}``
* CSV   -- header ``id,label,w0,...,w{D-1}``, UTF-8, ``.`` decimal separator

Weight vectors are treated as generic real vectors; no non-negativity or
simplex constraint is imposed (the validator only warns on negative entries).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Malformed, inconsistent, or empty dataset input."""


def _readonly(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EmbeddingRecord:
    """One labeled weight vector."""

    id: str
    label: str
    weights: np.ndarray

    def __post_init__(self):
        if not self.id:
            raise DatasetError("record id must be a non-empty string")
        if not self.label:
            raise DatasetError(f"record {self.id!r}: label must be a non-empty string")
        object.__setattr__(self, "weights", _readonly(self.weights))
        if self.weights.ndim != 1 or self.weights.size == 0:
            raise DatasetError(f"record {self.id!r}: weights must be a non-empty vector")

    def __eq__(self, other):
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and np.array_equal(self.weights, other.weights, equal_nan=True)
        )


@dataclass(frozen=True, eq=False)
class LabeledEmbeddingSet:
    """Immutable set of labeled weight vectors sharing one dimension."""

    records: tuple[EmbeddingRecord, ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.dim < 1:
            raise DatasetError(f"dimension must be >= 1, got {self.dim}")
        seen: set[str] = set()
        for rec in self.records:
            if rec.weights.size != self.dim:
                raise DatasetError(
                    f"record {rec.id!r}: expected {self.dim} weights, got {rec.weights.size}"
                )
            if rec.id in seen:
                raise DatasetError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)

    def __eq__(self, other):
        if not isinstance(other, LabeledEmbeddingSet):
            return NotImplemented
        return self.dim == other.dim and self.records == other.records

    def __len__(self) -> int:
        return len(self.records)

    def labels(self) -> list[str]:
        """Distinct category labels, lexicographically sorted."""
        return sorted({rec.label for rec in self.records})

    @classmethod
    def from_records(cls, records) -> "LabeledEmbeddingSet":
        records = tuple(records)
        if not records:
            raise DatasetError("empty dataset: no records")
        return cls(records, int(records[0].weights.size))


@dataclass(frozen=True, eq=False)
class Cluster:
    """All member vectors of one category, in dataset order."""

    label: str
    members: np.ndarray  # shape (count, dim)

    def __post_init__(self):
        if not self.label:
            raise DatasetError("cluster label must be a non-empty string")
        members = np.array(self.members, dtype=np.float64)
        if members.ndim != 2 or members.shape[0] < 1 or members.shape[1] < 1:
            raise DatasetError(
                f"cluster {self.label!r}: members must be a non-empty (count, dim) matrix"
            )
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def count(self) -> int:
        return int(self.members.shape[0])

    @property
    def dim(self) -> int:
        return int(self.members.shape[1])


@dataclass(frozen=True)
class SyntheticCategory:
    """Axis-aligned Gaussian blob specification for one category."""

    label: str
    mean: np.ndarray
    std: np.ndarray
    count: int

    def __post_init__(self):
        if not self.label:
            raise DatasetError("synthetic category label must be non-empty")
        object.__setattr__(self, "mean", _readonly(self.mean))
        object.__setattr__(self, "std", _readonly(self.std))
        if self.mean.ndim != 1 or self.std.ndim != 1:
            raise DatasetError(f"category {self.label!r}: mean/std must be vectors")
        if self.mean.size != self.std.size:
            raise DatasetError(f"category {self.label!r}: mean and std length differ")
        if not np.all(self.std > 0.0):
            raise DatasetError(f"category {self.label!r}: std entries must be strictly positive")
        if self.count < 1:
            raise DatasetError(f"category {self.label!r}: count must be >= 1")


@dataclass(frozen=True)
class SyntheticSpec:
    """Deterministic recipe for a synthetic labeled dataset."""

    categories: tuple[SyntheticCategory, ...]
    dim: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        if not self.categories:
            raise DatasetError("synthetic spec needs at least one category")
        if self.dim < 1:
            raise DatasetError(f"dimension must be >= 1, got {self.dim}")
        if self.seed < 0:
            raise DatasetError(f"seed must be non-negative, got {self.seed}")
        labels = [c.label for c in self.categories]
        if len(set(labels)) != len(labels):
            raise DatasetError("synthetic category labels must be unique")
        for cat in self.categories:
            if cat.mean.size != self.dim:
                raise DatasetError(
                    f"category {cat.label!r}: mean/std length {cat.mean.size} != dim {self.dim}"
                )

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticSpec":
        try:
            cats = tuple(
                SyntheticCategory(
                    label=str(c["label"]),
                    mean=c["mean"],
                    std=c["std"],
                    count=int(c["count"]),
                )
                for c in doc["categories"]
            )
            return cls(categories=cats, dim=int(doc["dim"]), seed=int(doc["seed"]))
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"invalid synthetic spec document: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "seed": self.seed,
            "categories": [
                {
                    "label": c.label,
                    "mean": [float(v) for v in c.mean],
                    "std": [float(v) for v in c.std],
                    "count": c.count,
                }
                for c in self.categories
            ],
        }


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of dataset validation; carries failures instead of raising."""

    record_count: int
    dim: int
    category_counts: dict[str, int]
    invalid_ids: tuple[str, ...]
    below_min: tuple[str, ...]
    min_per_category: int
    neutral_label: str
    neutral_present: bool
    schedulable: bool
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "dim": self.dim,
            "category_counts": dict(sorted(self.category_counts.items())),
            "invalid_ids": list(self.invalid_ids),
            "below_min": list(self.below_min),
            "min_per_category": self.min_per_category,
            "neutral_label": self.neutral_label,
            "neutral_present": self.neutral_present,
            "schedulable": self.schedulable,
            "warnings": list(self.warnings),
        }


def load_jsonl(path) -> LabeledEmbeddingSet:
    """Load a JSONL dataset; blank lines are ignored.

    Raises:
        DatasetError: malformed line (with line number), dimension mismatch,
            duplicate id, or empty file.
    """
    path = Path(path)
    records: list[EmbeddingRecord] = []
    ids: set[str] = set()
    dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or not {"id", "label", "weights"} <= obj.keys():
                raise DatasetError(
                    f"{path}: line {lineno}: expected object with id, label, weights"
                )
            weights = obj["weights"]
            if not isinstance(weights, list) or not all(
                isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights
            ):
                raise DatasetError(f"{path}: line {lineno}: weights must be an array of numbers")
            if dim is None:
                dim = len(weights)
            elif len(weights) != dim:
                raise DatasetError(
                    f"{path}: line {lineno}: expected {dim} weights, got {len(weights)}"
                )
            rec_id = str(obj["id"])
            if rec_id in ids:
                raise DatasetError(f"{path}: line {lineno}: duplicate record id {rec_id!r}")
            ids.add(rec_id)
            try:
                records.append(EmbeddingRecord(rec_id, str(obj["label"]), weights))
            except DatasetError as exc:
                raise DatasetError(f"{path}: line {lineno}: {exc}") from exc
    if not records:
        raise DatasetError(f"{path}: empty dataset")
    return LabeledEmbeddingSet(tuple(records), int(dim))


def save_jsonl(dataset: LabeledEmbeddingSet, path) -> None:
    """Write one JSON object per record, preserving record order."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(serialize_jsonl(dataset))


def serialize_jsonl(dataset: LabeledEmbeddingSet) -> str:
    lines = []
    for rec in dataset.records:
        doc = {"id": rec.id, "label": rec.label, "weights": [float(w) for w in rec.weights]}
        lines.append(json.dumps(doc, separators=(",", ":")))
    return "\n".join(lines) + "\n"


_CSV_FIXED_HEADER = ("id", "label")


def load_csv(path) -> LabeledEmbeddingSet:
    """Load a CSV dataset with header ``id,label,w0,...,w{D-1}``."""
    path = Path(path)
    records: list[EmbeddingRecord] = []
    ids: set[str] = set()
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: missing header row") from None
        expected = list(_CSV_FIXED_HEADER) + [f"w{i}" for i in range(len(header) - 2)]
        if len(header) < 3 or header != expected:
            raise DatasetError(
                f"{path}: malformed header; expected id,label,w0,...,w{{D-1}}, got {header!r}"
            )
        dim = len(header) - 2
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 2:
                raise DatasetError(
                    f"{path}: row {rowno}: expected {dim + 2} cells, got {len(row)}"
                )
            weights = []
            for col, cell in enumerate(row[2:]):
                try:
                    weights.append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {rowno}, column w{col}: non-numeric weight {cell!r}"
                    ) from None
            rec_id = row[0]
            if rec_id in ids:
                raise DatasetError(f"{path}: row {rowno}: duplicate record id {rec_id!r}")
            ids.add(rec_id)
            try:
                records.append(EmbeddingRecord(rec_id, row[1], weights))
            except DatasetError as exc:
                raise DatasetError(f"{path}: row {rowno}: {exc}") from exc
    if not records:
        raise DatasetError(f"{path}: empty dataset")
    return LabeledEmbeddingSet(tuple(records), dim)


def save_csv(dataset: LabeledEmbeddingSet, path) -> None:
    """Write the CSV encoding; floats use shortest round-trip formatting."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(_CSV_FIXED_HEADER) + [f"w{i}" for i in range(dataset.dim)])
        for rec in dataset.records:
            writer.writerow([rec.id, rec.label] + [repr(float(w)) for w in rec.weights])


def validate(
    dataset: LabeledEmbeddingSet,
    min_per_category: int = 1,
    neutral_label: str = "neutral",
) -> ValidationReport:
    """Check category coverage and numeric sanity.

    A set is schedulable only if the neutral category is present, no record
    carries NaN/Inf weights, and at least two categories reach
    ``min_per_category`` members.
    """
    counts: dict[str, int] = {}
    invalid: list[str] = []
    negative = 0
    for rec in dataset.records:
        counts[rec.label] = counts.get(rec.label, 0) + 1
        if not np.all(np.isfinite(rec.weights)):
            invalid.append(rec.id)
        elif np.any(rec.weights < 0.0):
            negative += 1
    below = tuple(sorted(lbl for lbl, n in counts.items() if n < min_per_category))
    passing = [lbl for lbl, n in counts.items() if n >= min_per_category]
    neutral_present = neutral_label in counts
    schedulable = neutral_present and len(passing) >= 2 and not invalid
    warnings: list[str] = []
    if negative:
        warnings.append(f"{negative} record(s) contain negative weight entries")
    return ValidationReport(
        record_count=len(dataset),
        dim=dataset.dim,
        category_counts=dict(sorted(counts.items())),
        invalid_ids=tuple(invalid),
        below_min=below,
        min_per_category=min_per_category,
        neutral_label=neutral_label,
        neutral_present=neutral_present,
        schedulable=schedulable,
        warnings=tuple(warnings),
    )


def generate_synthetic(spec: SyntheticSpec) -> LabeledEmbeddingSet:
    """Draw the dataset described by ``spec``; same spec (incl. seed) gives
    bit-identical output."""
    rng = np.random.default_rng(spec.seed)
    records: list[EmbeddingRecord] = []
    for cat in spec.categories:
        draws = rng.normal(loc=cat.mean, scale=cat.std, size=(cat.count, spec.dim))
        for i in range(cat.count):
            records.append(EmbeddingRecord(f"{cat.label}-{i:05d}", cat.label, draws[i]))
    return LabeledEmbeddingSet(tuple(records), spec.dim)


def partition(dataset: LabeledEmbeddingSet) -> dict[str, Cluster]:
    """Split records into per-category clusters, keyed lexicographically.

    Member order within a cluster follows dataset record order, which fixes
    tie-breaking downstream.
    """
    groups: dict[str, list[np.ndarray]] = {}
    for rec in dataset.records:
        groups.setdefault(rec.label, []).append(rec.weights)
    return {
        label: Cluster(label, np.array(groups[label], dtype=np.float64))
        for label in sorted(groups)
    }
