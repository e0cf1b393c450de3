"""
End-to-end gene selection pipeline.

load -> discretize -> reduct -> project -> cluster (K-Means, FCM) ->
classify (BPN) -> evaluate, writing every intermediate artifact and a
manifest with seeds, parameters and content hashes.
"""

import logging
import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split

from core.clustering import DEFAULT_FUZZINESS, DEFAULT_MAX_ITER, DEFAULT_TOL, FUZZINESS_RANGE, fcm, kmeans, predict_hard
from core.decision_table import DecisionTable, RawMatrix, project, rescale_codes, save_codes_csv
from core.discretizer import DEFAULT_BINS, discretize, fit_discretizer
from core.errors import DataError, StageError
from core.evaluation import (
    ConfusionReport,
    MetricsTable,
    confusion,
    map_clusters_to_classes,
    metrics_table,
    rows_from_counts,
    selected_features_table,
)
from core.matrix_loader import MatrixLoader, save_csv
from core.network import NetworkConfig, init_network, predict, train
from core.roughset import ReductResult, exhaustive_reduct_result, quick_reduct
from utils.artifact_writer import ArtifactWriter, dump_json, load_json
from utils.run_manifest import RunManifest
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)

REDUCT_METHODS = ("quick", "exhaustive")
CLUSTER_ALGORITHMS = ("kmeans", "fcm")
METHOD_LABELS = {"kmeans": "K-Means", "fcm": "FCM", "bpn": "BPN"}


@dataclass
class PipelineConfig:
    """Everything a pipeline run needs; the seed is recorded in every artifact."""
    input_path: str = ""
    class_column: Union[int, str] = "last"
    has_header: bool = True
    delimiter: str = ","
    bins: int = DEFAULT_BINS
    method: str = "quick"
    clusterers: List[str] = field(default_factory=lambda: list(CLUSTER_ALGORITHMS))
    fcm_m: float = DEFAULT_FUZZINESS
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    epochs: int = 500
    hidden: Optional[List[int]] = None
    learning_rate: float = 0.5
    train_fraction: float = 0.7
    positive_class: Optional[int] = None
    seed: int = 0
    workers: int = 1
    output_dir: str = "run"
    dataset_name: str = ""

    def validate(self) -> None:
        if not self.input_path:
            raise DataError("no input file given")
        if not os.path.exists(self.input_path):
            raise FileNotFoundError(f"input file not found: {self.input_path}")
        if self.bins < 1:
            raise DataError(f"bins must be >= 1, got {self.bins}")
        if self.method not in REDUCT_METHODS:
            raise DataError(f"reduct method must be one of {REDUCT_METHODS}, got '{self.method}'")
        unknown = [c for c in self.clusterers if c not in CLUSTER_ALGORITHMS]
        if unknown:
            raise DataError(f"unknown cluster algorithm(s): {', '.join(unknown)}")
        low, high = FUZZINESS_RANGE
        if not low <= self.fcm_m <= high:
            raise DataError(f"fcm m must be in [{low}, {high}], got {self.fcm_m}")
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError(f"train fraction must be in (0, 1), got {self.train_fraction}")
        if self.epochs < 0:
            raise DataError(f"epochs must be >= 0, got {self.epochs}")

    @property
    def name(self) -> str:
        return self.dataset_name or Path(self.input_path).stem

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PipelineConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


def stratified_split(labels: np.ndarray, train_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded stratified split into train and test indices.

    Uses scikit-learn's stratified ``train_test_split``. Classes too small
    for it (a single member, or fewer test slots than classes) fall back to
    a per-class split: round(train_fraction * size) samples to training, at
    least one, leaving at least one for testing when the class has two or
    more samples.

    Returns:
        (sorted train indices, sorted test indices)
    """
    labels = np.asarray(labels, dtype=int)
    indices = np.arange(labels.size)
    try:
        train_idx, test_idx = train_test_split(
            indices, train_size=train_fraction, stratify=labels, random_state=seed
        )
    except ValueError as e:
        logger.debug("Stratified split fell back to per-class rounding: %s", e)
        train_idx, test_idx = _per_class_split(labels, train_fraction, seed)
    return np.sort(np.asarray(train_idx, dtype=int)), np.sort(np.asarray(test_idx, dtype=int))


def _per_class_split(labels: np.ndarray, train_fraction: float, seed: int) -> Tuple[List[int], List[int]]:
    rng = np.random.default_rng(seed)
    train_idx: List[int] = []
    test_idx: List[int] = []
    for cls in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == cls))
        take = int(round(train_fraction * members.size))
        take = max(1, min(take, members.size - 1)) if members.size > 1 else members.size
        train_idx.extend(members[:take].tolist())
        test_idx.extend(members[take:].tolist())
    return train_idx, test_idx


class PipelineRunner:
    """Runs every stage of the gene selection pipeline for one configuration."""

    def __init__(self, config: PipelineConfig):
        """
        Initialize the runner.

        Args:
            config: Validated pipeline configuration
        """
        self.config = config
        parameters = config.to_dict()
        parameters.pop("output_dir", None)
        parameters.pop("workers", None)
        self.manifest = RunManifest(config.seed, parameters)
        self.writer = ArtifactWriter(config.output_dir, self.manifest)
        self.reports: List[Tuple[str, str, ConfusionReport]] = []

    @contextmanager
    def _stage(self, name: str) -> Iterator[None]:
        logger.info("Stage '%s' started", name)
        try:
            yield
        except StageError:
            raise
        except Exception as e:
            self.manifest.stage_failed(name, e)
            self._write_manifest()
            raise StageError(name, e) from e
        logger.info("Stage '%s' finished", name)

    def _seed(self, stage: str) -> int:
        seed = derive_seed(self.config.seed, stage)
        self.manifest.record_seed(stage, seed)
        return seed

    def _write_manifest(self) -> Path:
        path = self.writer.path_for("manifest.json")
        dump_json(self.manifest.to_dict(), str(path))
        return path

    def run(self) -> Dict[str, Any]:
        """
        Execute the pipeline.

        Returns:
            Run report: dataset name, selected genes, metrics and manifest path
        """
        cfg = self.config
        self.manifest.record_decision("clustering_input", "raw expression values of the selected genes")
        self.manifest.record_decision("bpn_input", "discretized codes of the selected genes rescaled by (bins - 1)")
        self.manifest.record_decision("cluster_count", "number of decision classes")

        with self._stage("load"):
            cfg.validate()
            matrix = MatrixLoader(cfg.delimiter, cfg.has_header).load_csv(cfg.input_path, cfg.class_column)
            self.manifest.stage_done("load", samples=matrix.n_samples, attributes=matrix.n_attributes,
                                     classes=matrix.n_classes)

        with self._stage("discretize"):
            disc = fit_discretizer(matrix, cfg.bins, self._seed("discretize"), workers=cfg.workers)
            table = discretize(matrix, disc)
            self.writer.save_json("discretization.json", disc.to_dict(), "discretize")
            self.writer.save_with("discretized.csv", lambda p: save_codes_csv(table, p), "discretize")
            self.manifest.stage_done("discretize", clamped_columns=sorted(disc.clamped))

        with self._stage("reduct"):
            result = self._reduct(table)
            self.writer.save_json("reduct.json", result.to_dict(), "reduct")
            self.manifest.stage_done("reduct", selected=result.selected_names, reached_full=result.reached_full)

        with self._stage("project"):
            reduced_table = project(table, result.selected)
            reduced_matrix = matrix.select(sorted(result.selected))
            self.writer.save_with("reduced.csv", lambda p: save_csv(reduced_matrix, p), "project")
            self.writer.save_with("reduced_discretized.csv", lambda p: save_codes_csv(reduced_table, p), "project")
            self.manifest.stage_done("project", attributes=reduced_matrix.attribute_names)

        positive = self._positive_class(matrix)
        for algorithm in cfg.clusterers:
            with self._stage(algorithm):
                self._cluster(algorithm, reduced_matrix, positive)

        with self._stage("bpn"):
            self._classify(reduced_table, positive)

        with self._stage("evaluate"):
            table_report = metrics_table(self.reports)
            features = selected_features_table([(cfg.name, result.selected_names)])
            metrics = table_report.to_dict()
            metrics["positive_class"] = matrix.class_names[positive]
            metrics["selected_features"] = features.reset_index().to_dict(orient="records")
            self.writer.save_json("metrics.json", metrics, "evaluate")
            text = features.to_string() + "\n\n" + table_report.render()
            self.writer.save_text("metrics.txt", text, "evaluate")
            self.writer.save_with("metrics.csv", table_report.to_csv, "evaluate")
            self.manifest.stage_done("evaluate")

        self.manifest.complete = True
        manifest_path = self._write_manifest()
        return {
            "dataset": cfg.name,
            "selected": result.selected_names,
            "reached_full": result.reached_full,
            "gamma_full": result.gamma_full,
            "accuracy": {method: report.accuracy for _, method, report in self.reports},
            "metrics": table_report,
            "manifest": str(manifest_path),
        }

    def _reduct(self, table: DecisionTable) -> ReductResult:
        if self.config.method == "exhaustive":
            result = exhaustive_reduct_result(table)
        else:
            result = quick_reduct(table, workers=self.config.workers)
        constant_decision = len(set(table.decision.tolist())) == 1
        if not result.selected:
            if result.gamma_full == 0.0 and not constant_decision:
                raise DataError("γ_C(D) = 0: the condition attributes do not determine any decision; "
                                "nothing to select (try more bins)")
            raise DataError("no attributes selected; nothing to cluster or classify")
        return result

    def _positive_class(self, matrix: RawMatrix) -> int:
        if self.config.positive_class is not None:
            if not 0 <= self.config.positive_class < matrix.n_classes:
                raise DataError(f"positive class {self.config.positive_class} out of range")
            return self.config.positive_class
        return 1 if matrix.n_classes > 1 else 0

    def _cluster(self, algorithm: str, reduced: RawMatrix, positive: int) -> None:
        cfg = self.config
        k = reduced.n_classes
        seed = self._seed(algorithm)
        if algorithm == "kmeans":
            model = kmeans(reduced.values, k, seed=seed, max_iter=cfg.max_iter, tol=cfg.tol)
        else:
            model = fcm(reduced.values, k, m=cfg.fcm_m, seed=seed, max_iter=cfg.max_iter, tol=cfg.tol)
        clusters = predict_hard(model, reduced.values)
        mapping = map_clusters_to_classes(clusters, reduced.class_labels, n_clusters=k, n_classes=k)
        report = confusion(mapping.apply(clusters), reduced.class_labels, positive)
        self.reports.append((cfg.name, METHOD_LABELS[algorithm], report))

        self.writer.save_json(f"{algorithm}.json", {
            "model": model.to_dict(),
            "mapping": mapping.to_dict(),
            "confusion": report.to_dict(),
        }, algorithm)
        self.manifest.stage_done(algorithm, iterations=model.iterations, mapped_accuracy=mapping.mapped_accuracy)

    def _classify(self, reduced: DecisionTable, positive: int) -> None:
        cfg = self.config
        # on the fitted matrix the observed code count per column equals its bin count
        inputs = rescale_codes(reduced)
        labels = reduced.decision
        train_idx, test_idx = stratified_split(labels, cfg.train_fraction, self._seed("split"))
        if test_idx.size == 0:
            self.manifest.record_decision("bpn_evaluation", "training set (too few samples for a test split)")
            test_idx = train_idx

        net_config = NetworkConfig(
            input_dim=inputs.shape[1],
            output_dim=len(reduced.class_names),
            hidden_sizes=cfg.hidden,
            learning_rate=cfg.learning_rate,
            epochs=cfg.epochs,
            seed=self._seed("bpn"),
        )
        net = init_network(net_config)
        train_report = train(net, inputs[train_idx], labels[train_idx], net_config)
        predicted = predict(net, inputs[test_idx])
        report = confusion(predicted, labels[test_idx], positive)
        self.reports.append((cfg.name, METHOD_LABELS["bpn"], report))

        self.writer.save_json("bpn_network.json", net.to_dict(net_config), "bpn")
        self.writer.save_with("bpn_loss.csv", train_report.to_csv, "bpn")
        self.writer.save_json("bpn.json", {
            "train": train_idx.tolist(),
            "test": test_idx.tolist(),
            "predicted": predicted.tolist(),
            "training": train_report.to_dict(),
            "confusion": report.to_dict(),
        }, "bpn")
        self.manifest.stage_done("bpn", train_accuracy=train_report.final_train_accuracy,
                                 test_samples=int(test_idx.size))


def run_pipeline(config: PipelineConfig) -> Dict[str, Any]:
    """Run the full pipeline for ``config``."""
    return PipelineRunner(config).run()


def aggregate_runs(run_dirs: Sequence[str]) -> Tuple[MetricsTable, pd.DataFrame]:
    """
    Combine finished pipeline runs into one multi-dataset report.

    Each run directory must hold the ``metrics.json`` a pipeline run writes.
    A (dataset, method) pair may appear only once across all runs.

    Args:
        run_dirs: Output directories of earlier pipeline runs

    Returns:
        (metrics table over every dataset, dataset -> selected genes table)
    """
    rows: List[Tuple[str, str, ConfusionReport]] = []
    features: List[Dict[str, Any]] = []
    seen = set()
    for run_dir in run_dirs:
        path = Path(run_dir) / "metrics.json"
        if not path.exists():
            raise FileNotFoundError(f"no metrics.json in {run_dir} (did the pipeline finish?)")
        metrics = load_json(str(path))
        for dataset, method, report in rows_from_counts(metrics.get("counts", [])):
            if (dataset, method) in seen:
                raise DataError(f"{run_dir}: {method} on '{dataset}' is already reported by another run; "
                                f"give the runs distinct dataset names")
            seen.add((dataset, method))
            rows.append((dataset, method, report))
        features.extend(metrics.get("selected_features", []))
        logger.info("Collected %s", path)

    if not rows:
        raise DataError("no metrics found in the given runs")
    selected = pd.DataFrame(features, columns=["dataset", "selected"]).set_index("dataset")
    return metrics_table(rows), selected
