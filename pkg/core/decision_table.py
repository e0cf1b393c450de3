"""
Decision-table data structures.

A gene-expression dataset is held first as a RawMatrix (real expression
levels, one row per sample) and, after discretization, as a DecisionTable
whose condition attributes are small integer codes and whose decision
attribute is the class label.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from core.errors import DataError


def _is_contiguous(codes: np.ndarray) -> bool:
    """True when the distinct values of ``codes`` are exactly 0..k-1."""
    if codes.size == 0:
        return True
    present = np.unique(codes)
    return bool(present[0] == 0 and present[-1] == len(present) - 1)


@dataclass
class RawMatrix:
    """Real-valued samples x genes matrix with one class label per sample."""
    values: np.ndarray
    attribute_names: List[str]
    class_labels: np.ndarray
    class_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.class_labels = np.asarray(self.class_labels, dtype=int)
        self.attribute_names = [str(name) for name in self.attribute_names]

        if self.values.ndim != 2:
            raise DataError(f"expression values must be a 2-D grid, got {self.values.ndim}-D")
        if self.values.shape[1] != len(self.attribute_names):
            raise DataError(
                f"{self.values.shape[1]} columns but {len(self.attribute_names)} attribute names"
            )
        if self.class_labels.shape != (self.values.shape[0],):
            raise DataError(
                f"{self.values.shape[0]} rows but {self.class_labels.size} class labels"
            )
        if not np.all(np.isfinite(self.values)):
            row, col = np.argwhere(~np.isfinite(self.values))[0]
            raise DataError(f"non-finite value at row {row + 1}, column '{self.attribute_names[col]}'")
        if not self.class_names:
            n_classes = int(self.class_labels.max()) + 1 if self.class_labels.size else 0
            self.class_names = [str(c) for c in range(n_classes)]

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def select(self, attrs: Iterable[int]) -> "RawMatrix":
        """Keep only the given columns, in the given order."""
        indices = _check_indices(attrs, self.n_attributes)
        return RawMatrix(
            values=self.values[:, indices],
            attribute_names=[self.attribute_names[i] for i in indices],
            class_labels=self.class_labels.copy(),
            class_names=list(self.class_names),
        )


@dataclass
class DecisionTable:
    """
    Discrete decision table S = (U, C ∪ D).

    ``condition`` holds one column of codes per condition attribute and
    ``decision`` the class code of every sample.
    """
    condition: np.ndarray
    decision: np.ndarray
    attribute_names: List[str]
    class_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.decision = np.asarray(self.decision, dtype=int)
        condition = np.asarray(self.condition, dtype=int)
        if condition.ndim == 1 and condition.size == 0:
            condition = condition.reshape(self.decision.size, 0)
        self.condition = condition
        self.attribute_names = [str(name) for name in self.attribute_names]

        if self.condition.ndim != 2:
            raise DataError("condition attributes must be a 2-D grid of codes")
        if self.decision.ndim != 1 or self.decision.size < 1:
            raise DataError("a decision table needs at least one sample")
        if self.condition.shape[0] != self.decision.size:
            raise DataError(
                f"{self.condition.shape[0]} condition rows but {self.decision.size} decisions"
            )
        if self.condition.shape[1] != len(self.attribute_names):
            raise DataError(
                f"{self.condition.shape[1]} condition columns but "
                f"{len(self.attribute_names)} attribute names"
            )
        if self.condition.size and self.condition.min() < 0:
            raise DataError("condition codes must be non-negative")
        for col in range(self.condition.shape[1]):
            if not _is_contiguous(self.condition[:, col]):
                raise DataError(
                    f"codes of attribute '{self.attribute_names[col]}' are not a contiguous 0..k-1 range"
                )
        if not _is_contiguous(self.decision):
            raise DataError("decision codes are not a contiguous 0..c-1 range")
        if not self.class_names:
            self.class_names = [str(c) for c in range(int(self.decision.max()) + 1)]

    @property
    def universe_size(self) -> int:
        return int(self.decision.size)

    @property
    def n_attributes(self) -> int:
        return self.condition.shape[1]

    def column_bins(self) -> List[int]:
        """Number of distinct codes per condition attribute."""
        return [int(self.condition[:, col].max()) + 1 for col in range(self.n_attributes)]

    def index_of(self, name: str) -> int:
        """Column index of an attribute name."""
        try:
            return self.attribute_names.index(name)
        except ValueError:
            raise DataError(f"unknown attribute '{name}'") from None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "attribute_names": self.attribute_names,
            "class_names": self.class_names,
            "condition": self.condition.tolist(),
            "decision": self.decision.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecisionTable":
        names = data["attribute_names"]
        condition = np.asarray(data["condition"], dtype=int).reshape(len(data["decision"]), len(names))
        return cls(
            condition=condition,
            decision=data["decision"],
            attribute_names=names,
            class_names=data.get("class_names", []),
        )


def _check_indices(attrs: Iterable[int], n_columns: int) -> List[int]:
    indices = [int(a) for a in attrs]
    for index in indices:
        if index < 0 or index >= n_columns:
            raise DataError(f"attribute index {index} out of range 0..{n_columns - 1}")
    return indices


def project(table: DecisionTable, attrs: Iterable[int]) -> DecisionTable:
    """
    Restrict a decision table to a subset of its condition attributes.

    Args:
        table: Source decision table
        attrs: Attribute indices to keep; kept in ascending column order

    Returns:
        New DecisionTable with the same samples and decision column
    """
    indices = sorted(set(_check_indices(attrs, table.n_attributes)))
    return DecisionTable(
        condition=table.condition[:, indices].reshape(table.universe_size, len(indices)),
        decision=table.decision.copy(),
        attribute_names=[table.attribute_names[i] for i in indices],
        class_names=list(table.class_names),
    )


def rescale_codes(table: DecisionTable, bins: Optional[List[int]] = None) -> np.ndarray:
    """
    Map condition codes into [0, 1] by dividing by (bins - 1).

    Columns with a single bin map to 0.

    Args:
        table: Decision table
        bins: Bin count per column; defaults to the observed code count

    Returns:
        Float grid of the same shape as ``table.condition``
    """
    bins = bins if bins is not None else table.column_bins()
    scale = np.array([max(b - 1, 1) for b in bins], dtype=float)
    if table.n_attributes == 0:
        return np.zeros((table.universe_size, 0))
    return table.condition.astype(float) / scale


def from_coded_matrix(matrix: RawMatrix) -> DecisionTable:
    """
    Treat an already-discretized matrix (integer cells) as a decision table.

    Codes of each column are compacted to 0..k-1 in ascending order of value.
    """
    values = matrix.values
    if not np.all(values == np.round(values)):
        row, col = np.argwhere(values != np.round(values))[0]
        raise DataError(
            f"expected integer codes, found {values[row, col]} at row {row + 1}, "
            f"column '{matrix.attribute_names[col]}'"
        )
    codes = np.zeros(values.shape, dtype=int)
    for col in range(values.shape[1]):
        _, codes[:, col] = np.unique(values[:, col], return_inverse=True)
    return DecisionTable(
        condition=codes,
        decision=matrix.class_labels.copy(),
        attribute_names=list(matrix.attribute_names),
        class_names=list(matrix.class_names),
    )


def save_codes_csv(table: DecisionTable, path: str, label_column: str = "class") -> None:
    """Write a decision table as CSV: one code column per attribute, class names last."""
    frame = pd.DataFrame(table.condition, columns=table.attribute_names)
    frame[label_column] = [table.class_names[c] for c in table.decision]
    frame.to_csv(path, index=False)
