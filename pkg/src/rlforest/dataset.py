"""Tabular regression data: CSV loading, one-hot encoding, folds and subsamples."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for unreadable, malformed or unsuitable input data."""


_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_NON_FINITE = {"nan", "+nan", "-nan", "inf", "+inf", "-inf", "infinity",
               "+infinity", "-infinity"}


@dataclass(frozen=True)
class Column:
    """One source column and the encoded feature columns it became."""

    name: str
    kind: str  # "numeric" or "categorical"
    encoded: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense feature matrix, response vector and column schema.

    Arrays are copied and frozen on construction.
    """

    features: np.ndarray
    target: np.ndarray
    schema: tuple[Column, ...] = field(default=())

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, order="C")
        y = np.array(self.target, dtype=np.float64).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DataError(f"features must be 2-d, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise DataError(
                f"features have {X.shape[0]} rows but target has {y.shape[0]}")
        if y.shape[0] < 1:
            raise DataError("dataset is empty")
        if X.shape[1] < 1:
            raise DataError("dataset has no feature columns")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise DataError("features and target must be finite")
        X.flags.writeable = False
        y.flags.writeable = False
        schema = tuple(self.schema) or tuple(
            Column(f"x{j + 1}", "numeric", (f"x{j + 1}",)) for j in range(X.shape[1]))
        if sum(len(c.encoded) for c in schema) != X.shape[1]:
            raise DataError("schema does not match the number of feature columns")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "schema", schema)

    @property
    def n(self) -> int:
        return self.target.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def feature_names(self) -> list[str]:
        return [name for col in self.schema for name in col.encoded]

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.target[rows], self.schema)

    def to_csv(self, path, target_name: str = "y") -> None:
        """Write the encoded features and the target, header first."""
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.feature_names + [target_name]) + "\n")
            for row, t in zip(self.features.tolist(), self.target.tolist()):
                fh.write(",".join(repr(v) for v in row) + "," + repr(t) + "\n")


def _parse_number(cell: str) -> float | None:
    if _NUMBER.match(cell):
        return float(cell)
    return None


def load_csv(path, target_column: str, log_transform: bool = False,
             categorical: Sequence[str] = ()) -> Dataset:
    """Load a comma-separated file with a header row.

    A column whose cells all parse as finite numbers is numeric. A column
    none of whose cells parse as numbers, or one listed in ``categorical``,
    is one-hot encoded with one indicator per level (levels sorted). Missing
    cells, non-finite numbers and columns mixing numbers with text are
    errors. With ``log_transform`` the target is replaced by its natural log.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if target_column not in header:
        raise DataError(f"{path}: unknown target column {target_column!r}")
    if not body:
        raise DataError(f"{path}: no data rows")
    width = len(header)
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {width}")
    forced = set(categorical)
    unknown = forced - set(header)
    if unknown:
        raise DataError(f"{path}: unknown categorical columns {sorted(unknown)}")

    def cell_error(i, j, what):
        return DataError(f"{path}: row {i + 2}, column {header[j]!r}: {what}")

    blocks = []
    schema = []
    target = None
    for j, name in enumerate(header):
        cells = [row[j].strip() for row in body]
        for i, cell in enumerate(cells):
            if cell == "":
                raise cell_error(i, j, "missing value")
            if cell.lower() in _NON_FINITE:
                raise cell_error(i, j, f"non-finite value {cell!r}")
        values = [_parse_number(c) for c in cells]
        if name == target_column:
            for i, v in enumerate(values):
                if v is None or not math.isfinite(v):
                    raise cell_error(i, j, f"cannot parse {cells[i]!r} as a number")
            target = np.array(values, dtype=np.float64)
            continue
        numeric_count = sum(v is not None for v in values)
        if name not in forced and numeric_count == len(values):
            col = np.array(values, dtype=np.float64)
            if not np.all(np.isfinite(col)):
                bad = int(np.flatnonzero(~np.isfinite(col))[0])
                raise cell_error(bad, j, f"non-finite value {cells[bad]!r}")
            blocks.append(col[:, None])
            schema.append(Column(name, "numeric", (name,)))
        elif name in forced or numeric_count == 0:
            levels = sorted(set(cells))
            codes = {lvl: k for k, lvl in enumerate(levels)}
            onehot = np.zeros((len(cells), len(levels)))
            onehot[np.arange(len(cells)), [codes[c] for c in cells]] = 1.0
            blocks.append(onehot)
            schema.append(Column(name, "categorical",
                                 tuple(f"{name}={lvl}" for lvl in levels)))
        else:
            bad = next(i for i, v in enumerate(values) if v is None)
            raise cell_error(bad, j, f"cannot parse {cells[bad]!r} as a number")

    if not blocks:
        raise DataError(f"{path}: no feature columns besides the target")
    if log_transform:
        if np.any(target <= 0):
            bad = int(np.flatnonzero(target <= 0)[0])
            raise DataError(
                f"{path}: row {bad + 2}: log transform needs a positive target, "
                f"got {target[bad]!r}")
        target = np.log(target)
    return Dataset(np.hstack(blocks), target, tuple(schema))


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """Fold index in ``[0, V)`` for every row."""

    fold_of: np.ndarray
    V: int

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)

    def splits(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        for f in range(self.V):
            yield self.train_rows(f), self.test_rows(f)

    def mean_sizes(self) -> tuple[Fraction, Fraction]:
        """Average (train, test) sizes over folds, as exact fractions."""
        n = len(self.fold_of)
        return Fraction(n * (self.V - 1), self.V), Fraction(n, self.V)

    def to_json(self) -> str:
        return json.dumps({"V": self.V, "fold_of": self.fold_of.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "FoldAssignment":
        doc = json.loads(text)
        return cls(np.asarray(doc["fold_of"], dtype=np.int64), int(doc["V"]))


def stratified_folds(ds: Dataset, V: int, seed: int) -> FoldAssignment:
    """Assign rows to ``V`` folds balancing the response distribution.

    Responses are ranked (ties by row order) and cut into
    ``max(2, min(10, n // V))`` equal-frequency bins. Each bin is shuffled
    and dealt to the folds round-robin, the dealing position carrying over
    from one bin to the next so that fold sizes stay within one of each other.
    """
    n = ds.n
    if V < 2:
        raise DataError(f"need at least 2 folds, got {V}")
    if V > n:
        raise DataError(f"cannot make {V} folds from {n} rows")
    n_bins = max(2, min(10, n // V))
    order = np.argsort(ds.target, kind="stable")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    pos = 0
    for members in np.array_split(order, n_bins):
        members = members.copy()
        rng.shuffle(members)
        fold_of[members] = (pos + np.arange(len(members))) % V
        pos = (pos + len(members)) % V
    return FoldAssignment(fold_of, V)


def subsample_without_replacement(n: int, k: int,
                                  rng: np.random.Generator) -> np.ndarray:
    """``k`` distinct indices out of ``range(n)``, sorted, uniform over subsets."""
    if k < 1:
        raise ValueError(f"draw size must be at least 1, got {k}")
    if k > n:
        raise ValueError(f"cannot draw {k} distinct indices from {n}")
    return np.sort(rng.choice(n, size=k, replace=False))
