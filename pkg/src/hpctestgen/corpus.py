"""Loader for the sample-corpus manifest (paths plus expectations)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class MissingFile(Exception):
    pass


@dataclass
class CorpusEntry:
    id: str
    family: str
    variant: str  # buggy | fixed | base
    path: Path  # resolved source path
    rel_path: str  # manifest-relative label, embedded in goldens
    golden: Path
    parallel_model: str  # openmp | mpi
    expected_patterns: list[str] = field(default_factory=list)
    expected_verdicts: dict[str, str] = field(default_factory=dict)


@dataclass
class Corpus:
    root: Path
    entries: list[CorpusEntry]
    pattern_pairs: list[dict]

    def entry(self, entry_id):
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise KeyError(entry_id)


def load_corpus(root):
    """Load ``manifest.json`` under ``root``; verify referenced files exist."""
    root = Path(root)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise MissingFile(str(manifest_path))
    doc = json.loads(manifest_path.read_text())
    entries = []
    for raw in doc["entries"]:
        src = root / raw["path"]
        if not src.exists():
            raise MissingFile(str(src))
        entries.append(
            CorpusEntry(
                id=raw["id"],
                family=raw["family"],
                variant=raw["variant"],
                path=src,
                rel_path=raw["path"],
                golden=root / raw["golden"],
                parallel_model=raw["parallel_model"],
                expected_patterns=list(raw["expected_patterns"]),
                expected_verdicts=dict(raw["expected_verdicts"]),
            )
        )
    return Corpus(root=root, entries=entries, pattern_pairs=list(doc.get("pattern_pairs", [])))
