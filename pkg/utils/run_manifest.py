"""
Run manifest for pipeline executions.

Tracks stage status, seeds, parameters and every artifact written (with a
content hash) so a run can be audited and compared byte for byte.
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, List, Optional


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunManifest:
    """Collects what a pipeline run did."""

    def __init__(self, master_seed: int, parameters: Optional[Dict[str, Any]] = None):
        """
        Initialize the manifest.

        Args:
            master_seed: Seed every stage seed derives from
            parameters: Resolved run configuration
        """
        self.master_seed = master_seed
        self.parameters = dict(parameters or {})
        self.seeds: Dict[str, int] = {}
        self.stages: List[Dict[str, Any]] = []
        self.artifacts: List[Dict[str, str]] = []
        self.decisions: Dict[str, str] = {}
        self.complete = False

    def record_seed(self, stage: str, seed: int) -> None:
        self.seeds[stage] = seed

    def stage_done(self, stage: str, **details: Any) -> None:
        self.stages.append({"stage": stage, "status": "ok", **details})

    def stage_failed(self, stage: str, cause: BaseException) -> None:
        self.stages.append({"stage": stage, "status": "failed", "error": str(cause)})
        self.complete = False

    def add_artifact(self, name: str, path: Path, stage: str) -> None:
        self.artifacts = [a for a in self.artifacts if a["name"] != name]
        self.artifacts.append({"name": name, "stage": stage, "sha256": file_sha256(path)})

    def record_decision(self, key: str, value: str) -> None:
        self.decisions[key] = value

    def failed_stage(self) -> Optional[str]:
        for stage in self.stages:
            if stage["status"] == "failed":
                return stage["stage"]
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "complete": self.complete,
            "master_seed": self.master_seed,
            "seeds": self.seeds,
            "parameters": self.parameters,
            "decisions": self.decisions,
            "stages": self.stages,
            "artifacts": self.artifacts,
        }
