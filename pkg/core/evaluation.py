"""
Classification metrics.

Confusion counts against a designated positive class, the four
sensitivity/specificity rates, accuracy and error, cluster-to-class
alignment for unsupervised results, and the per-dataset report tables.
"""

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from itertools import permutations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import confusion_matrix

from core.errors import DataError

logger = logging.getLogger(__name__)

MAX_PERMUTATION_CLUSTERS = 8
REPORT_PLACES = Decimal("0.0001")
UNDEFINED = "undefined"


@dataclass(frozen=True)
class ConfusionReport:
    """Binary confusion counts and the rates derived from them."""
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @staticmethod
    def _ratio(num: int, den: int) -> Optional[float]:
        return num / den if den else None

    @property
    def tp_rate(self) -> Optional[float]:
        return self._ratio(self.tp, self.tp + self.fn)

    @property
    def fn_rate(self) -> Optional[float]:
        return self._ratio(self.fn, self.tp + self.fn)

    @property
    def tn_rate(self) -> Optional[float]:
        return self._ratio(self.tn, self.tn + self.fp)

    @property
    def fp_rate(self) -> Optional[float]:
        return self._ratio(self.fp, self.tn + self.fp)

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n

    @property
    def error(self) -> float:
        return 1.0 - self.accuracy

    @property
    def counts(self) -> List[List[int]]:
        """2 x 2 grid [[TP, FP], [FN, TN]]."""
        return [[self.tp, self.fp], [self.fn, self.tn]]

    def rates(self) -> Dict[str, Optional[float]]:
        return {
            "tp_rate": self.tp_rate,
            "fp_rate": self.fp_rate,
            "tn_rate": self.tn_rate,
            "fn_rate": self.fn_rate,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "n": self.n,
            "rates": {name: _format_rate(value) for name, value in self.rates().items()},
            "accuracy": round_metric(self.accuracy),
            "error": complement_error(self.accuracy),
        }


@dataclass(frozen=True)
class ClusterMapping:
    """Cluster index -> class index assignment and the agreement it yields."""
    cluster_to_class: Tuple[int, ...]
    mapped_accuracy: float
    method: str = "permutation"

    def apply(self, cluster_ids) -> np.ndarray:
        return np.asarray(self.cluster_to_class, dtype=int)[np.asarray(cluster_ids, dtype=int)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cluster_to_class": list(self.cluster_to_class),
            "mapped_accuracy": self.mapped_accuracy,
            "method": self.method,
        }


def round_metric(value: float) -> float:
    """Round half-up to the 4 places used in every report."""
    return float(Decimal(repr(value)).quantize(REPORT_PLACES, rounding=ROUND_HALF_UP))


def complement_error(accuracy: float) -> float:
    """Error printed next to ``accuracy``: exactly 1 - the rounded accuracy."""
    rounded = Decimal(repr(accuracy)).quantize(REPORT_PLACES, rounding=ROUND_HALF_UP)
    return float(Decimal(1) - rounded)


def _format_rate(value: Optional[float]):
    return UNDEFINED if value is None else round_metric(value)


def _labels(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=int)
    if array.ndim != 1:
        raise DataError(f"{name} must be a flat list of class indices")
    return array


def confusion(predicted, truth, positive_class: int = 1) -> ConfusionReport:
    """
    Tally a binary confusion matrix, treating every label other than
    ``positive_class`` as negative.

    Args:
        predicted: Predicted class per sample
        truth: True class per sample
        positive_class: Class counted as positive

    Returns:
        ConfusionReport
    """
    predicted = _labels(predicted, "predicted")
    truth = _labels(truth, "truth")
    if predicted.size != truth.size:
        raise DataError(f"length mismatch: {predicted.size} predictions vs {truth.size} labels")
    if truth.size == 0:
        raise DataError("confusion matrix of an empty prediction set")

    # 1 = positive class, 0 = every other label
    tn, fp, fn, tp = confusion_matrix(
        (truth == positive_class).astype(int),
        (predicted == positive_class).astype(int),
        labels=[0, 1],
    ).ravel()
    return ConfusionReport(tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn))


def _contingency(cluster_ids: np.ndarray, truth: np.ndarray, n_clusters: int, n_classes: int) -> np.ndarray:
    table = np.zeros((n_clusters, n_classes), dtype=int)
    np.add.at(table, (cluster_ids, truth), 1)
    return table


def map_clusters_to_classes(cluster_ids, true_classes, n_clusters: Optional[int] = None,
                            n_classes: Optional[int] = None) -> ClusterMapping:
    """
    Align cluster indices with class labels.

    With as many clusters as classes, the label permutation with the most
    agreements wins (exhaustively up to 8 clusters, first permutation in
    lexicographic order on ties, so the identity is preferred; by linear
    assignment above that). Otherwise each cluster takes its majority class,
    ties to the lower class index.

    Args:
        cluster_ids: Cluster index per sample
        true_classes: Class index per sample
        n_clusters: Cluster count (default: max id + 1)
        n_classes: Class count (default: max class + 1)

    Returns:
        ClusterMapping
    """
    clusters = _labels(cluster_ids, "cluster_ids")
    truth = _labels(true_classes, "true_classes")
    if clusters.size != truth.size:
        raise DataError(f"length mismatch: {clusters.size} cluster ids vs {truth.size} labels")
    if truth.size == 0:
        raise DataError("cannot map clusters on an empty sample set")

    k = n_clusters if n_clusters is not None else int(clusters.max()) + 1
    c = n_classes if n_classes is not None else int(truth.max()) + 1
    table = _contingency(clusters, truth, k, c)
    n = truth.size

    if k == c and k <= MAX_PERMUTATION_CLUSTERS:
        best_perm, best_hits = None, -1
        for perm in permutations(range(c)):
            hits = int(sum(table[cluster, cls] for cluster, cls in enumerate(perm)))
            if hits > best_hits:
                best_perm, best_hits = perm, hits
        logger.debug("Cluster mapping %s: %d/%d agreements", best_perm, best_hits, n)
        return ClusterMapping(tuple(best_perm), best_hits / n, "permutation")

    if k == c:
        rows, cols = linear_sum_assignment(table, maximize=True)
        mapping = [0] * k
        for row, col in zip(rows, cols):
            mapping[row] = int(col)
        hits = int(table[rows, cols].sum())
        return ClusterMapping(tuple(mapping), hits / n, "assignment")

    return majority_mapping(clusters, truth, k, c)


def majority_mapping(cluster_ids, true_classes, n_clusters: int, n_classes: int) -> ClusterMapping:
    """Each cluster maps to its most frequent class; empty clusters map to class 0."""
    clusters = _labels(cluster_ids, "cluster_ids")
    truth = _labels(true_classes, "true_classes")
    table = _contingency(clusters, truth, n_clusters, n_classes)
    mapping = tuple(int(np.argmax(row)) for row in table)
    hits = int(sum(table[cluster, cls] for cluster, cls in enumerate(mapping)))
    return ClusterMapping(mapping, hits / truth.size, "majority")


@dataclass
class MetricsTable:
    """Accuracy, error and rate tables over (dataset, method) rows."""
    accuracy: pd.DataFrame
    error: pd.DataFrame
    rates: pd.DataFrame
    counts: pd.DataFrame

    def render(self) -> str:
        """Aligned plain-text tables."""
        sections = [
            ("Classification Performance Rate", self.rates),
            ("Classification Accuracy", self.accuracy),
            ("Classification Error", self.error),
            ("Confusion Counts", self.counts),
        ]
        parts = []
        for title, frame in sections:
            parts.append(title)
            parts.append("=" * len(title))
            parts.append(frame.to_string(float_format=lambda v: f"{v:.4f}"))
            parts.append("")
        return "\n".join(parts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accuracy": _frame_to_dict(self.accuracy),
            "error": _frame_to_dict(self.error),
            "rates": self.rates.reset_index().to_dict(orient="records"),
            "counts": self.counts.reset_index().to_dict(orient="records"),
        }

    def to_csv(self, path: str) -> None:
        """Long-format dataset,method,accuracy,error rows for plotting."""
        long = self.accuracy.stack().dropna().rename("accuracy").to_frame()
        long["error"] = self.error.stack()
        long.index.names = ["dataset", "method"]
        long.reset_index().to_csv(path, index=False, float_format="%.4f")


def _frame_to_dict(frame: pd.DataFrame) -> Dict[str, Dict[str, float]]:
    return {str(dataset): {str(k): float(v) for k, v in row.items() if pd.notna(v)}
            for dataset, row in frame.iterrows()}


def metrics_table(rows: Sequence[Tuple[str, str, ConfusionReport]]) -> MetricsTable:
    """
    Build the accuracy/error/rate tables, one row per dataset and one
    column per method. Every error cell is the exact complement of the
    rounded accuracy cell beside it.
    """
    if not rows:
        raise DataError("metrics table needs at least one row")

    datasets = list(dict.fromkeys(r[0] for r in rows))
    methods = list(dict.fromkeys(r[1] for r in rows))
    accuracy = pd.DataFrame(index=pd.Index(datasets, name="dataset"), columns=methods, dtype=float)
    error = accuracy.copy()
    rate_rows = []
    count_rows = []

    for dataset, method, report in rows:
        accuracy.loc[dataset, method] = round_metric(report.accuracy)
        error.loc[dataset, method] = complement_error(report.accuracy)
        rate_rows.append({
            "dataset": dataset, "method": method,
            "TP": _format_rate(report.tp_rate), "FP": _format_rate(report.fp_rate),
            "TN": _format_rate(report.tn_rate), "FN": _format_rate(report.fn_rate),
        })
        count_rows.append({
            "dataset": dataset, "method": method,
            "TP": report.tp, "FP": report.fp, "FN": report.fn, "TN": report.tn, "n": report.n,
        })

    return MetricsTable(
        accuracy=accuracy,
        error=error,
        rates=pd.DataFrame(rate_rows).set_index(["dataset", "method"]),
        counts=pd.DataFrame(count_rows).set_index(["dataset", "method"]),
    )


def rows_from_counts(records: Sequence[Dict[str, Any]]) -> List[Tuple[str, str, ConfusionReport]]:
    """Rebuild (dataset, method, report) rows from the ``counts`` records of ``MetricsTable.to_dict``."""
    try:
        return [
            (str(r["dataset"]), str(r["method"]),
             ConfusionReport(tp=int(r["TP"]), fp=int(r["FP"]), fn=int(r["FN"]), tn=int(r["TN"])))
            for r in records
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed confusion counts: {e}") from None


def selected_features_table(rows: Sequence[Tuple[str, Sequence[str]]]) -> pd.DataFrame:
    """Dataset -> attributes chosen by the reduct search."""
    return pd.DataFrame(
        [{"dataset": name, "selected": ", ".join(attrs) if attrs else "(none)"} for name, attrs in rows]
    ).set_index("dataset")
