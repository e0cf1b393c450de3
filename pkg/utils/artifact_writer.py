"""
Artifact writer for pipeline outputs.

Handles saving JSON/CSV/text artifacts into a run directory, registering
each one with the run manifest, and printing short previews.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np

from core.roughset import ReductResult
from utils.run_manifest import RunManifest


def to_jsonable(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dump_json(data: Any, path: str) -> None:
    """Write ``data`` as indented, key-sorted JSON."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False, default=to_jsonable)
        f.write("\n")


def load_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


class ArtifactWriter:
    """Writes artifacts under one output directory and records them in a manifest."""

    def __init__(self, output_dir: str, manifest: RunManifest):
        """
        Initialize the writer.

        Args:
            output_dir: Directory receiving every artifact
            manifest: Manifest that lists written files with their hashes
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest

    def path_for(self, name: str) -> Path:
        return self.output_dir / name

    def save_json(self, name: str, data: Dict[str, Any], stage: str) -> Path:
        path = self.path_for(name)
        dump_json(data, str(path))
        self.manifest.add_artifact(name, path, stage)
        return path

    def save_text(self, name: str, text: str, stage: str) -> Path:
        path = self.path_for(name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        self.manifest.add_artifact(name, path, stage)
        return path

    def save_with(self, name: str, writer: Callable[[str], None], stage: str) -> Path:
        """Let ``writer`` produce the file (e.g. a DataFrame's to_csv), then register it."""
        path = self.path_for(name)
        writer(str(path))
        self.manifest.add_artifact(name, path, stage)
        return path


def preview_reduct(result: ReductResult, max_items: int = 10) -> None:
    """
    Print the reduct search in the order attributes were added.

    Args:
        result: Reduct search result
        max_items: Maximum trace entries to show
    """
    print(f"\n🧬 Selected attributes ({len(result.selected)}): {', '.join(result.selected_names) or '(none)'}")
    print(f"   γ_C(D) = {result.gamma_full:.4f}  reached: {'yes' if result.reached_full else 'no'}")
    names = result.attribute_names
    for attr, value in result.gamma_trace[:max_items]:
        label = names[attr] if names else str(attr)
        print(f"    + {label:<20} γ = {value:.4f}")
    if len(result.gamma_trace) > max_items:
        print(f"    ... and {len(result.gamma_trace) - max_items} more")
