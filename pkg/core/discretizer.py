"""
K-Means discretization of expression levels.

Each gene (condition attribute) is clustered on its own with 1-D K-Means;
a value's code is the index of the nearest of the sorted centroids.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from core.clustering import kmeans
from core.decision_table import DecisionTable, RawMatrix
from core.errors import DataError
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)

DEFAULT_BINS = 3
DISCRETIZER_RESTARTS = 5


@dataclass
class Discretizer:
    """Per-attribute sorted centroids produced by fit_discretizer."""
    bins_per_attribute: int
    centroids: List[np.ndarray]
    seed: int
    attribute_names: List[str] = field(default_factory=list)
    clamped: Dict[str, int] = field(default_factory=dict)

    @property
    def n_attributes(self) -> int:
        return len(self.centroids)

    def encode_column(self, column: int, values: np.ndarray) -> np.ndarray:
        """Nearest-centroid codes; an exact tie goes to the lower centroid."""
        centers = self.centroids[column]
        distance = np.abs(np.asarray(values, dtype=float)[:, np.newaxis] - centers[np.newaxis, :])
        return np.argmin(distance, axis=1)

    def select(self, attrs) -> "Discretizer":
        """Discretizer restricted to the given columns, in ascending order."""
        indices = sorted({int(a) for a in attrs})
        names = [self._names()[i] for i in indices]
        return Discretizer(
            bins_per_attribute=self.bins_per_attribute,
            centroids=[self.centroids[i] for i in indices],
            seed=self.seed,
            attribute_names=names,
            clamped={name: bins for name, bins in self.clamped.items() if name in names},
        )

    def to_dict(self) -> Dict[str, Any]:
        """Sidecar report: centroids and bin count per column."""
        return {
            "bins": self.bins_per_attribute,
            "seed": self.seed,
            "columns": [
                {
                    "attribute": name,
                    "bins": int(len(centers)),
                    "centroids": [float(c) for c in centers],
                    "clamped": name in self.clamped,
                }
                for name, centers in zip(self._names(), self.centroids)
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Discretizer":
        columns = data["columns"]
        return cls(
            bins_per_attribute=int(data["bins"]),
            centroids=[np.asarray(c["centroids"], dtype=float) for c in columns],
            seed=int(data["seed"]),
            attribute_names=[c["attribute"] for c in columns],
            clamped={c["attribute"]: int(c["bins"]) for c in columns if c.get("clamped")},
        )

    def _names(self) -> List[str]:
        if self.attribute_names:
            return self.attribute_names
        return [str(i) for i in range(self.n_attributes)]


def _fit_column(values: np.ndarray, bins: int, seed: int) -> np.ndarray:
    distinct = np.unique(values)
    k = min(bins, distinct.size)
    if k == distinct.size:
        # every distinct value is its own cluster
        return distinct.astype(float)
    model = kmeans(values, k, seed=seed, n_init=DISCRETIZER_RESTARTS)
    return np.unique(model.centroids.reshape(-1))


def fit_discretizer(matrix: RawMatrix, bins: int = DEFAULT_BINS, seed: int = 0,
                    workers: int = 1) -> Discretizer:
    """
    Fit one 1-D K-Means per attribute.

    Columns with fewer distinct values than ``bins`` are clamped to their
    distinct count. Each column gets its own seed derived from ``seed`` and
    the column index, so the result does not depend on ``workers``.

    Args:
        matrix: Expression matrix
        bins: Requested bins per attribute (>= 1)
        seed: Master seed
        workers: Threads used to fit columns concurrently

    Returns:
        Fitted Discretizer
    """
    if bins < 1:
        raise DataError(f"bins must be >= 1, got {bins}")
    if matrix.n_samples == 0 or matrix.n_attributes == 0:
        raise DataError("cannot fit a discretizer on an empty matrix")

    columns = range(matrix.n_attributes)

    def fit(column: int) -> np.ndarray:
        return _fit_column(matrix.values[:, column], bins, derive_seed(seed, f"column-{column}"))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            centroids = list(pool.map(fit, columns))
    else:
        centroids = [fit(column) for column in columns]

    clamped = {
        matrix.attribute_names[i]: int(len(c))
        for i, c in enumerate(centroids) if len(c) < bins
    }
    if clamped:
        logger.info("Clamped %d column(s) to fewer than %d bins", len(clamped), bins)

    return Discretizer(
        bins_per_attribute=bins,
        centroids=centroids,
        seed=seed,
        attribute_names=list(matrix.attribute_names),
        clamped=clamped,
    )


def discretize(matrix: RawMatrix, disc: Discretizer) -> DecisionTable:
    """
    Replace every expression value by its nearest-centroid code.

    Args:
        matrix: Expression matrix with the same columns the discretizer was fitted on
        disc: Fitted discretizer

    Returns:
        DecisionTable with the matrix's class labels as decision attribute
    """
    if matrix.n_attributes != disc.n_attributes:
        raise DataError(
            f"matrix has {matrix.n_attributes} columns, discretizer was fitted on {disc.n_attributes}"
        )

    codes = np.zeros(matrix.values.shape, dtype=int)
    for column in range(matrix.n_attributes):
        column_codes = disc.encode_column(column, matrix.values[:, column])
        present = np.unique(column_codes)
        if present[-1] != len(present) - 1:
            # unused bins on unseen data; compact to keep codes contiguous
            logger.warning("Column '%s' leaves bins empty, compacting codes", matrix.attribute_names[column])
            column_codes = np.searchsorted(present, column_codes)
        codes[:, column] = column_codes

    return DecisionTable(
        condition=codes,
        decision=matrix.class_labels.copy(),
        attribute_names=list(matrix.attribute_names),
        class_names=list(matrix.class_names),
    )
