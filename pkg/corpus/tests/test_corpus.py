"""Corpus integrity: manifest, pairing, goldens, discrimination, and builds.

These tests treat the analysis tool as an external dependency and exercise
it only through its public interfaces (corpus loader, analyzer API, CLI).
"""

import json
import shutil
import subprocess
from pathlib import Path

import pytest

from hpctestgen import kg as kgmod
from hpctestgen.analyzer import analyze_source
from hpctestgen.corpus import MissingFile, load_corpus
from hpctestgen.sketch import SourceUnit

CORPUS_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="module")
def corpus():
    return load_corpus(CORPUS_ROOT)


@pytest.fixture(scope="module")
def graph():
    return kgmod.load_seed_kg()


def _analyze(entry, graph):
    unit = SourceUnit.from_file(entry.path, path_label=entry.rel_path)
    return analyze_source(unit, graph)


def test_manifest_has_enough_entries(corpus):
    assert len(corpus.entries) >= 14


def test_all_referenced_files_exist(corpus):
    for entry in corpus.entries:
        assert entry.path.exists(), entry.id
        assert entry.golden.exists(), entry.id


def test_missing_file_raises(tmp_path):
    manifest = {
        "schema_version": "1",
        "entries": [
            {
                "id": "x", "family": "x", "variant": "buggy", "path": "src/nope.cpp",
                "golden": "golden/nope.json", "parallel_model": "openmp",
                "expected_patterns": [], "expected_verdicts": {},
            }
        ],
        "pattern_pairs": [],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(MissingFile):
        load_corpus(tmp_path)


def test_every_buggy_entry_has_fixed_sibling(corpus):
    by_family = {}
    for entry in corpus.entries:
        by_family.setdefault(entry.family, set()).add(entry.variant)
    for entry in corpus.entries:
        if entry.variant == "buggy":
            assert "fixed" in by_family[entry.family], entry.family


def test_race_entry_expectations(corpus):
    entry = corpus.entry("omp_race_sum_buggy")
    assert entry.expected_patterns == ["KGP_OMP_RACE_SHARED_ACCUM"]
    fixed = corpus.entry("mpi_exchange_fixed")
    assert "KGP_MPI_015" not in fixed.expected_patterns
    assert fixed.expected_verdicts.get("MPI_P2P_Ordered_Exchange") == "pass"


def test_expected_patterns_exact(corpus, graph):
    """Analysis reproduces each entry's expected pattern multiset exactly."""
    for entry in corpus.entries:
        metadata = _analyze(entry, graph)
        got = sorted(a.pattern_id for a in metadata.testing_areas)
        assert got == sorted(entry.expected_patterns), entry.id


def test_pattern_pairs_cover_every_seed_pattern(corpus, graph):
    paired = {p["pattern"] for p in corpus.pattern_pairs}
    assert paired == {p.id for p in graph.patterns}


def test_pattern_pairs_discriminate(corpus, graph):
    """Each pattern matches its positive entry and rejects its negative."""
    for pair in corpus.pattern_pairs:
        positive = corpus.entry(pair["positive"])
        negative = corpus.entry(pair["negative"])
        pos_ids = {a.pattern_id for a in _analyze(positive, graph).testing_areas}
        neg_ids = {a.pattern_id for a in _analyze(negative, graph).testing_areas}
        assert pair["pattern"] in pos_ids, pair
        assert pair["pattern"] not in neg_ids, pair


def test_goldens_byte_exact(corpus, graph):
    for entry in corpus.entries:
        metadata = _analyze(entry, graph)
        assert metadata.to_json() == entry.golden.read_text(), entry.id


def test_goldens_regenerate_deterministically(corpus, graph):
    entry = corpus.entries[0]
    first = _analyze(entry, graph).to_json()
    second = _analyze(entry, graph).to_json()
    assert first == second


def test_unique_basenames(corpus):
    names = [entry.path.name for entry in corpus.entries]
    assert len(names) == len(set(names))


@pytest.mark.skipif(shutil.which("g++") is None, reason="no C++ compiler")
def test_openmp_entries_compile(corpus):
    for entry in corpus.entries:
        if entry.parallel_model != "openmp":
            continue
        cmd = ["g++", "-fsyntax-only", "-fopenmp", "-x", "c++", str(entry.path)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, f"{entry.id}: {proc.stderr}"


@pytest.mark.skipif(shutil.which("mpicxx") is None, reason="no MPI compiler")
def test_mpi_entries_compile(corpus):
    # Corpus sources omit the mpi.h include to keep reference line numbers;
    # the compiler injects it.
    for entry in corpus.entries:
        if entry.parallel_model != "mpi":
            continue
        cmd = ["mpicxx", "-fsyntax-only", "-include", "mpi.h", "-x", "c++", str(entry.path)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, f"{entry.id}: {proc.stderr}"


def test_reference_listing_lines_preserved(corpus):
    """The two reference fixtures keep their canonical construct lines."""
    race = corpus.entry("omp_race_sum_buggy").path.read_text().splitlines()
    assert race[3].strip() == "#pragma omp parallel for"
    exchange = corpus.entry("mpi_exchange_buggy").path.read_text().splitlines()
    assert exchange[5].lstrip().startswith("MPI_Send(")
    assert exchange[6].lstrip().startswith("MPI_Recv(")
