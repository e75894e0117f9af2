import logging
import os
from pathlib import Path
from typing import Union

WORKDIR = os.getenv("ZKC_WORKDIR", ".zkc")

logger = logging.getLogger(__name__)


class ArtifactStore:
    """Stage files under a working directory (created on first write)."""

    def __init__(self, root: Union[str, Path, None] = None) -> None:
        self._root = Path(root or WORKDIR)
        self._ready = False

    def connect(self) -> None:
        if not self._ready:
            self._root.mkdir(parents=True, exist_ok=True)
            self._ready = True

    def path(self, name: Union[str, Path]) -> Path:
        name = Path(name)
        return name if name.is_absolute() else self._root / name

    def write_text(self, name: Union[str, Path], text: str) -> Path:
        self.connect()
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        logger.debug("wrote %s (%d bytes)", target, len(text))
        return target


artifact_store = ArtifactStore()
