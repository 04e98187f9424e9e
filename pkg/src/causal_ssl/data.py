"""Datasets with a known cause/effect feature partition.

A :class:`Dataset` keeps causes and effects as two row-aligned matrices so
that every method downstream can treat the two blocks differently. Labels
are stored as ints with ``-1`` marking an unlabelled row.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    EmptyFile,
    MissingColumn,
    NonNumericCell,
    SingleClassAfterRetries,
    TargetNotBinary,
    TooFewRows,
)

UNLABELLED = -1
STD_FLOOR = 1e-12
MAX_SPLIT_ATTEMPTS = 1000


def _frozen(a, dtype=float, ndim=2):
    a = np.array(a, dtype=dtype, copy=True)
    if ndim == 2 and a.ndim == 1:
        a = a.reshape(-1, 1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    causes: np.ndarray
    effects: np.ndarray
    labels: Optional[np.ndarray] = None
    cause_names: tuple = ()
    effect_names: tuple = ()

    def __post_init__(self):
        causes = np.asarray(self.causes, dtype=float)
        effects = np.asarray(self.effects, dtype=float)
        if effects.ndim == 1:
            effects = effects.reshape(-1, 1)
        if causes.ndim == 1:
            # a flat cause vector is one column, unless it is empty
            causes = causes.reshape(effects.shape[0], -1) if causes.size == 0 else causes.reshape(-1, 1)
        if causes.ndim != 2 or effects.ndim != 2:
            raise DataError("causes and effects must be matrices")
        if causes.shape[0] != effects.shape[0]:
            raise DataError(f"row mismatch: {causes.shape[0]} cause rows vs {effects.shape[0]} effect rows")
        if effects.shape[1] < 1:
            raise DataError("at least one effect feature is required")
        if not (np.all(np.isfinite(causes)) and np.all(np.isfinite(effects))):
            raise DataError("non-finite feature values")
        object.__setattr__(self, "causes", _frozen(causes))
        object.__setattr__(self, "effects", _frozen(effects))
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (causes.shape[0],):
                raise DataError(f"labels must have length {causes.shape[0]}")
            if not np.all(np.isin(labels, (0, 1, UNLABELLED))):
                raise DataError("labels must be 0, 1 or -1 (unlabelled)")
            object.__setattr__(self, "labels", _frozen(labels, dtype=int, ndim=1))
        cn = tuple(self.cause_names) or tuple(f"xc_{j}" for j in range(causes.shape[1]))
        en = tuple(self.effect_names) or tuple(f"xe_{j}" for j in range(effects.shape[1]))
        if len(cn) != causes.shape[1] or len(en) != effects.shape[1]:
            raise DataError("feature_names do not match matrix widths")
        object.__setattr__(self, "cause_names", cn)
        object.__setattr__(self, "effect_names", en)

    @property
    def n(self) -> int:
        return self.effects.shape[0]

    @property
    def d_causes(self) -> int:
        return self.causes.shape[1]

    @property
    def d_effects(self) -> int:
        return self.effects.shape[1]

    @property
    def joint(self) -> np.ndarray:
        return np.hstack([self.causes, self.effects])

    @property
    def fully_labelled(self) -> bool:
        return self.labels is not None and bool(np.all(self.labels != UNLABELLED))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(
            self.causes[idx],
            self.effects[idx],
            None if self.labels is None else self.labels[idx],
            self.cause_names,
            self.effect_names,
        )

    def equals(self, other: "Dataset") -> bool:
        """Bit-exact comparison of matrices, labels and names."""
        if self.labels is None or other.labels is None:
            same_labels = self.labels is None and other.labels is None
        else:
            same_labels = np.array_equal(self.labels, other.labels)
        return (
            self.causes.shape == other.causes.shape
            and self.effects.shape == other.effects.shape
            and np.array_equal(self.causes, other.causes)
            and np.array_equal(self.effects, other.effects)
            and same_labels
            and self.cause_names == other.cause_names
            and self.effect_names == other.effect_names
        )


@dataclass(frozen=True)
class PartitionConfig:
    cause_columns: tuple
    effect_columns: tuple
    target_column: str
    positive_label: str

    def __post_init__(self):
        object.__setattr__(self, "cause_columns", tuple(self.cause_columns))
        object.__setattr__(self, "effect_columns", tuple(self.effect_columns))
        if not self.effect_columns:
            raise ConfigError("effect_columns must not be empty")
        cols = list(self.cause_columns) + list(self.effect_columns) + [self.target_column]
        if len(set(cols)) != len(cols):
            raise ConfigError("cause, effect and target columns must be pairwise disjoint")

    @classmethod
    def from_json(cls, path) -> "PartitionConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read partition config {path}: {exc}") from exc
        try:
            return cls(
                cause_columns=[str(c) for c in raw["cause_columns"]],
                effect_columns=[str(c) for c in raw["effect_columns"]],
                target_column=str(raw["target_column"]),
                positive_label=str(raw["positive_label"]),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed partition config {path}: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(
            {
                "cause_columns": list(self.cause_columns),
                "effect_columns": list(self.effect_columns),
                "target_column": self.target_column,
                "positive_label": self.positive_label,
            },
            indent=2,
        )


@dataclass(frozen=True, eq=False)
class Split:
    labelled_idx: np.ndarray
    unlabelled_idx: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labelled_idx", _frozen(self.labelled_idx, dtype=int, ndim=1))
        object.__setattr__(self, "unlabelled_idx", _frozen(self.unlabelled_idx, dtype=int, ndim=1))

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.labelled_idx, dtype=np.int64).tobytes())
        h.update(b"|")
        h.update(np.ascontiguousarray(self.unlabelled_idx, dtype=np.int64).tobytes())
        return h.hexdigest()


def standardize_columns(a: np.ndarray) -> np.ndarray:
    """Population z-score per column; constant columns become zeros."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return a.copy()
    mean = a.mean(axis=0)
    std = a.std(axis=0)
    out = (a - mean) / np.maximum(std, STD_FLOOR)
    out[:, std < STD_FLOOR] = 0.0
    return out


def standardized(ds: Dataset) -> Dataset:
    return Dataset(
        standardize_columns(ds.causes),
        standardize_columns(ds.effects),
        ds.labels,
        ds.cause_names,
        ds.effect_names,
    )


def _parse_real(text, row, col):
    try:
        v = float(text)
    except ValueError:
        raise NonNumericCell(row, col, text) from None
    if not np.isfinite(v):
        raise NonNumericCell(row, col, text)
    return v


def load_csv(path, config: PartitionConfig, standardize: bool = False) -> Dataset:
    """Read a headed CSV and pick out cause, effect and target columns.

    Rows are numbered from 1 (first data row) in error messages. Empty cells
    count as non-numeric: missing values are rejected, never imputed.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        rows = [r for r in reader if any(cell.strip() for cell in r)]
    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")

    pos = {name: j for j, name in enumerate(header)}
    for name in (*config.cause_columns, *config.effect_columns, config.target_column):
        if name not in pos:
            raise MissingColumn(name)

    def matrix(names):
        out = np.empty((len(rows), len(names)))
        for i, r in enumerate(rows):
            for k, name in enumerate(names):
                j = pos[name]
                cell = r[j].strip() if j < len(r) else ""
                out[i, k] = _parse_real(cell, i + 1, name)
        return out

    causes = matrix(config.cause_columns)
    effects = matrix(config.effect_columns)

    jt = pos[config.target_column]
    raw_target = [r[jt].strip() if jt < len(r) else "" for r in rows]
    distinct = sorted(set(raw_target))
    if len(distinct) > 2 or "" in distinct:
        raise TargetNotBinary(
            f"target column {config.target_column!r} has values {distinct[:5]}; expected two classes"
        )
    positive = config.positive_label.strip()
    if positive not in distinct:
        # allow "1" to match "1.0" and the like
        matches = [v for v in distinct if _same_number(v, positive)]
        if len(matches) == 1:
            positive = matches[0]
        elif len(distinct) == 2:
            raise TargetNotBinary(f"positive label {positive!r} not among target values {distinct}")
    labels = np.array([1 if v == positive else 0 for v in raw_target], dtype=int)

    ds = Dataset(causes, effects, labels, config.cause_columns, config.effect_columns)
    if standardize:
        ds = standardized(ds)
    return ds



def _same_number(a, b):
    try:
        return float(a) == float(b)
    except ValueError:
        return False


def write_csv(ds: Dataset, path, target_column: str = "y") -> None:
    """Write causes, effects and labels; floats use repr so reloading is bit-exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*ds.cause_names, *ds.effect_names, *([target_column] if ds.labels is not None else [])])
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.causes[i]] + [repr(float(v)) for v in ds.effects[i]]
            if ds.labels is not None:
                row.append(str(int(ds.labels[i])))
            w.writerow(row)


def partition_for(ds: Dataset, target_column: str = "y") -> PartitionConfig:
    """The PartitionConfig that reloads a file written by :func:`write_csv`."""
    return PartitionConfig(ds.cause_names, ds.effect_names, target_column, "1")


def sample_split(ds: Dataset, n_labelled: int, n_unlabelled: int, rng: np.random.Generator) -> Split:
    """Draw disjoint labelled/unlabelled index sets uniformly without replacement.

    The labelled part is redrawn until it holds both classes.
    """
    if not ds.fully_labelled:
        raise DataError("sample_split needs ground-truth labels for every row")
    if n_labelled < 2:
        raise ConfigError("n_labelled must be at least 2")
    if n_unlabelled < 0:
        raise ConfigError("n_unlabelled must be non-negative")
    if n_labelled + n_unlabelled > ds.n:
        raise TooFewRows(f"need {n_labelled + n_unlabelled} rows, dataset has {ds.n}")
    for _ in range(MAX_SPLIT_ATTEMPTS):
        perm = rng.permutation(ds.n)[: n_labelled + n_unlabelled]
        lab = np.sort(perm[:n_labelled])
        classes = np.unique(ds.labels[lab])
        if classes.size == 2:
            return Split(lab, np.sort(perm[n_labelled:]))
    raise SingleClassAfterRetries(
        f"no labelled draw with both classes after {MAX_SPLIT_ATTEMPTS} attempts"
    )


def swap_roles(ds: Dataset) -> Dataset:
    """Exchange the cause and effect blocks (labels untouched)."""
    if ds.d_causes == 0:
        raise DataError("cannot swap roles without cause features: effects would be empty")
    return Dataset(ds.effects, ds.causes, ds.labels, ds.effect_names, ds.cause_names)
