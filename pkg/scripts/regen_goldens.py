#!/usr/bin/env python3
"""Regenerate the corpus golden analysis files from the current analyzer.

Goldens embed manifest-relative path labels, so output is machine
independent. Run from the repository root:

    python scripts/regen_goldens.py [--check]

--check verifies the goldens instead of rewriting them (exit 1 on drift).
"""

import argparse
import sys
from pathlib import Path

from hpctestgen import kg
from hpctestgen.analyzer import analyze_source
from hpctestgen.corpus import load_corpus
from hpctestgen.sketch import SourceUnit


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--corpus", default="corpus")
    parser.add_argument("--check", action="store_true")
    args = parser.parse_args()

    corpus = load_corpus(args.corpus)
    graph = kg.load_seed_kg()
    drift = []
    for entry in corpus.entries:
        unit = SourceUnit.from_file(entry.path, path_label=entry.rel_path)
        metadata = analyze_source(unit, graph)
        text = metadata.to_json()
        if args.check:
            if not entry.golden.exists() or entry.golden.read_text() != text:
                drift.append(entry.id)
        else:
            entry.golden.parent.mkdir(parents=True, exist_ok=True)
            entry.golden.write_text(text)
            print(f"wrote {entry.golden}")
    if args.check:
        if drift:
            print(f"goldens out of date: {drift}", file=sys.stderr)
            return 1
        print(f"all {len(corpus.entries)} goldens up to date")
    return 0


if __name__ == "__main__":
    sys.exit(main())
