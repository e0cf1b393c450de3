"""
Synthetic gene-expression generator.

Stands in for real microarray datasets: a few informative genes whose
class-conditional means are ``separation`` standard deviations apart, and
class-independent noise genes, shuffled together.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np

from core.decision_table import RawMatrix
from core.errors import DataError
from core.matrix_loader import save_csv

logger = logging.getLogger(__name__)


@dataclass
class SyntheticConfig:
    """Shape and difficulty of a synthetic dataset."""
    samples: int = 60
    informative: int = 2
    noise: int = 48
    classes: int = 2
    separation: float = 4.0
    seed: int = 0

    def validate(self) -> None:
        if self.classes < 1:
            raise DataError(f"class count must be >= 1, got {self.classes}")
        if self.samples < self.classes:
            raise DataError(f"{self.samples} samples cannot cover {self.classes} classes")
        if self.informative < 1:
            raise DataError("need at least one informative gene")
        if self.noise < 0:
            raise DataError("noise gene count must be >= 0")
        if self.separation < 0:
            raise DataError("class separation must be >= 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SyntheticConfig":
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


def generate_synthetic(config: SyntheticConfig) -> Tuple[RawMatrix, List[str]]:
    """
    Draw a dataset according to ``config``.

    Every class gets at least floor(n / classes) samples. Informative gene
    values for class c are N(c * separation, 1); noise genes are N(0, 1)
    for every class.

    Args:
        config: Dataset description

    Returns:
        (matrix, names of the informative genes)
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n_genes = config.informative + config.noise

    labels = rng.permutation(np.arange(config.samples) % config.classes)
    informative_cols = np.sort(rng.choice(n_genes, size=config.informative, replace=False))

    values = rng.standard_normal((config.samples, n_genes))
    values[:, informative_cols] += (labels * config.separation)[:, np.newaxis]

    names = [f"gene_{i + 1:03d}" for i in range(n_genes)]
    # relabel classes so codes follow first appearance, like a loaded file would
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    recode = np.empty(config.classes, dtype=int)
    recode[order] = np.arange(config.classes)
    class_names = [f"class_{c}" for c in order]

    matrix = RawMatrix(
        values=values,
        attribute_names=names,
        class_labels=recode[labels],
        class_names=class_names,
    )
    informative = [names[i] for i in informative_cols]
    logger.info("Generated %d samples, informative genes: %s", config.samples, informative)
    return matrix, informative


def write_synthetic(config: SyntheticConfig, csv_path: str) -> Dict[str, Any]:
    """
    Generate a dataset and write it as CSV plus a ``.truth.json`` sidecar.

    Args:
        config: Dataset description
        csv_path: Destination CSV path

    Returns:
        Ground-truth record written to the sidecar
    """
    matrix, informative = generate_synthetic(config)
    path = Path(csv_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_csv(matrix, str(path))

    truth = {
        "config": config.to_dict(),
        "informative": informative,
        "class_column": "class",
        "classes": matrix.class_names,
    }
    truth_path = path.with_suffix(".truth.json")
    with open(truth_path, "w", encoding="utf-8") as f:
        json.dump(truth, f, indent=2)
    truth["truth_path"] = str(truth_path)
    return truth
