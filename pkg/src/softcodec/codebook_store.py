"""Named codebook storage.

Codebooks live under $XDG_DATA_HOME/softcodec/codebooks as `<name>.scbk`
next to a `<name>.sha256` checksum written at save time.
"""

import hashlib
import logging
import re
from pathlib import Path
from typing import Iterator

from .config import get_xdg_data_home
from .errors import FormatError, UsageError
from .shapes import Codebook, deserialize_codebook, serialize_codebook

LOG = logging.getLogger(__name__)

CODEBOOK_SUFFIX = ".scbk"
CHECKSUM_SUFFIX = ".sha256"

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class CodebookStore:
    """Saves, lists and verifies trained codebooks."""

    def __init__(self, root: Path | None = None) -> None:
        """Initialize the store.

        Args:
            root: Storage directory. Defaults to XDG_DATA_HOME/softcodec/codebooks.
        """
        self._root = root or (get_xdg_data_home() / "softcodec" / "codebooks")

    @property
    def root(self) -> Path:
        """Get the storage directory."""
        return self._root

    def _path(self, name: str) -> Path:
        if not _NAME_RE.match(name):
            raise UsageError(f"Invalid codebook name: {name!r}")
        return self._root / f"{name}{CODEBOOK_SUFFIX}"

    def save(self, name: str, codebook: Codebook) -> Path:
        """Write a codebook and its checksum.

        Returns:
            Path of the codebook file.
        """
        path = self._path(name)
        data = serialize_codebook(codebook)
        self._root.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        path.with_suffix(CHECKSUM_SUFFIX).write_text(hashlib.sha256(data).hexdigest() + "\n")
        LOG.info("Saved codebook %s -> %s", name, path)
        return path

    def load(self, name: str) -> Codebook:
        """Load a stored codebook, verifying its checksum.

        Raises:
            UsageError: If no codebook of that name exists.
            FormatError: On a checksum mismatch or a malformed file.
        """
        path = self._path(name)
        if not path.exists():
            raise UsageError(f"No stored codebook named {name!r}")
        data = path.read_bytes()
        if not self._verify_sha256(path, data):
            raise FormatError(f"SHA256 verification failed for codebook {name!r}")
        return deserialize_codebook(data)

    def _verify_sha256(self, path: Path, data: bytes) -> bool:
        checksum = path.with_suffix(CHECKSUM_SUFFIX)
        if not checksum.exists():
            LOG.warning("No checksum for codebook %s, integrity not verified", path.name)
            return True
        expected = checksum.read_text().strip()
        return hashlib.sha256(data).hexdigest() == expected

    def list(self) -> Iterator[tuple[str, Path]]:
        """List stored codebooks.

        Yields:
            Tuples of (name, path), sorted by name.
        """
        if not self._root.exists():
            return
        for item in sorted(self._root.glob(f"*{CODEBOOK_SUFFIX}")):
            yield item.stem, item

    def remove(self, name: str) -> bool:
        """Delete a stored codebook.

        Returns:
            True if something was removed.
        """
        path = self._path(name)
        removed = False
        for item in (path, path.with_suffix(CHECKSUM_SUFFIX)):
            if item.exists():
                item.unlink()
                removed = True
        if removed:
            LOG.info("Removed codebook %s", name)
        return removed

    def resolve(self, ref: str | Path) -> Codebook:
        """Load a codebook from a file path or, failing that, by stored name."""
        path = Path(ref)
        if path.is_file():
            try:
                data = path.read_bytes()
            except OSError as e:
                raise UsageError(f"Cannot read codebook {path}: {e}") from e
            return deserialize_codebook(data)
        return self.load(str(ref))
