"""
Artifact Store
Content-addressed JSON artifacts under <workspace>/<kind>/<sha256>.json
"""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.utils.exceptions import ArtifactMiss

logger = logging.getLogger(__name__)

# workspace subdirectories that hold run records and reports, not artifacts
NON_ARTIFACT_DIRS = ("runs", "out", "dse")


def canonical_json(obj: Any) -> str:
    """Sorted-key rendering; identical objects give identical bytes"""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def content_key(kind: str, inputs: Any) -> str:
    """Hex digest of an artifact kind and the canonical form of its inputs"""
    payload = canonical_json({"kind": kind, "inputs": inputs}).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def write_atomic(path: Path, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over the target"""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


class ArtifactStore:
    """
    Append-only artifact cache

    An artifact is stored once per key; storing the same inputs again is a
    no-op, so concurrent readers never observe a partial file.
    """

    def __init__(self, root: str):
        self.root = Path(root)

    def path(self, kind: str, key: str) -> Path:
        return self.root / kind / f"{key}.json"

    def exists(self, kind: str, key: str) -> bool:
        return self.path(kind, key).is_file()

    def store(self, kind: str, inputs: Any, artifact: Any) -> str:
        """
        Store an artifact under the key derived from its inputs.

        Args:
            kind: Artifact kind (directory name)
            inputs: JSON-serialisable description of everything the artifact depends on
            artifact: JSON-serialisable artifact

        Returns:
            Hex key
        """
        key = content_key(kind, inputs)
        return self.put(kind, key, artifact)

    def put(self, kind: str, key: str, artifact: Any) -> str:
        """Store an artifact under a precomputed key"""
        target = self.path(kind, key)
        if target.is_file():
            logger.debug(f"{kind}/{key[:12]} already stored")
            return key
        write_atomic(target, canonical_json(artifact))
        logger.debug(f"Stored {kind}/{key[:12]}")
        return key

    def load(self, kind: str, key: str) -> Any:
        """
        Load an artifact by key.

        Raises:
            ArtifactMiss: nothing stored under (kind, key)
        """
        target = self.path(kind, key)
        if not target.is_file():
            raise ArtifactMiss(f"no {kind} artifact with key {key}")
        with open(target, "r", encoding="utf-8") as f:
            return json.load(f)

    def get(self, kind: str, key: str) -> Optional[Any]:
        try:
            return self.load(kind, key)
        except ArtifactMiss:
            return None

    def keys(self, kind: str) -> List[str]:
        directory = self.root / kind
        if not directory.is_dir():
            return []
        return sorted(p.stem for p in directory.glob("*.json"))

    def inventory(self) -> Dict[str, List[str]]:
        """Stored keys per kind"""
        if not self.root.is_dir():
            return {}
        kinds = sorted(p.name for p in self.root.iterdir() if p.is_dir() and p.name not in NON_ARTIFACT_DIRS)
        return {kind: self.keys(kind) for kind in kinds}
