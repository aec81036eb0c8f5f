"""Repository-wide function index with an on-demand parse cache."""

from __future__ import annotations

import logging
import threading
from pathlib import Path

from .model import Cpg, CpgError
from .parser import parse_translation_unit

log = logging.getLogger(__name__)

SOURCE_SUFFIXES = (".c", ".h")


class IoError(CpgError):
    """Repository root missing or unreadable."""


class FunctionIndex:
    """Maps function name -> [(relative file path, FunctionDef node id)].

    Parsed graphs are cached so demand-driven expansion re-uses them; the
    cache is guarded for concurrent slicing runs.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.definitions: dict[str, list[tuple[str, int]]] = {}
        self.skipped: list[tuple[str, str]] = []  # (file, reason)
        self._cpgs: dict[str, Cpg] = {}
        self._lock = threading.Lock()

    def lookup(self, name: str) -> list[tuple[str, int]]:
        return list(self.definitions.get(name, []))

    def load_cpg(self, rel_path: str) -> Cpg:
        with self._lock:
            if rel_path in self._cpgs:
                return self._cpgs[rel_path]
        text = (self.root / rel_path).read_text()
        cpg = parse_translation_unit(text, rel_path)
        with self._lock:
            self._cpgs[rel_path] = cpg
        return cpg

    def _register(self, rel_path: str, cpg: Cpg):
        self._cpgs[rel_path] = cpg
        for name, node_id in cpg.functions.items():
            self.definitions.setdefault(name, []).append((rel_path, node_id))


def build_function_index(repository_root: str | Path) -> FunctionIndex:
    """Parse every supported source file under the root and index functions.

    Files that fail to parse are recorded in ``index.skipped`` rather than
    aborting the scan.
    """
    root = Path(repository_root)
    if not root.is_dir():
        raise IoError(f"repository root {root} does not exist or is not a directory")
    index = FunctionIndex(root)
    files = sorted(
        p for p in root.rglob("*") if p.is_file() and p.suffix in SOURCE_SUFFIXES
    )
    for path in files:
        rel = path.relative_to(root).as_posix()
        try:
            cpg = parse_translation_unit(path.read_text(errors="replace"), rel)
        except CpgError as exc:
            log.warning("skipping %s: %s", rel, exc)
            index.skipped.append((rel, str(exc)))
            continue
        index._register(rel, cpg)
    return index
