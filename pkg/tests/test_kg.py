"""Knowledge graph loading, querying, and predicate matching."""

import json

import pytest

from hpctestgen import kg as kgmod
from hpctestgen.analyzer import ConstructKind, analyze_source
from hpctestgen.sketch import SourceUnit


def test_seed_kg_loads_with_enough_patterns(seed_kg):
    assert len(seed_kg.patterns) >= 12
    ids = [p.id for p in seed_kg.patterns]
    assert len(ids) == len(set(ids))
    assert "KGP_OMP_RACE_SHARED_ACCUM" in ids
    assert "KGP_MPI_015" in ids
    assert "KGP_MPI_BARRIER_COND" in ids


def test_empty_pattern_list_valid():
    graph = kgmod.load_kg_dict({"version": "1", "patterns": []})
    assert kgmod.query(graph, ConstructKind.OmpParallelFor) == []


def test_duplicate_pattern_id_rejected():
    doc = {
        "version": "1",
        "patterns": [
            {"id": "KGP_X", "construct_kinds": ["OmpParallel"], "description": "d", "test_type": "T", "severity": "info"},
            {"id": "KGP_X", "construct_kinds": ["OmpFor"], "description": "d", "test_type": "T", "severity": "info"},
        ],
    }
    with pytest.raises(kgmod.DuplicatePatternId):
        kgmod.load_kg_dict(doc)


def test_schema_violation_bad_severity():
    doc = {
        "version": "1",
        "patterns": [
            {"id": "KGP_X", "construct_kinds": ["OmpParallel"], "description": "d", "test_type": "T", "severity": "catastrophic"},
        ],
    }
    with pytest.raises(kgmod.SchemaViolation):
        kgmod.load_kg_dict(doc)


def test_schema_violation_unknown_kind():
    doc = {
        "version": "1",
        "patterns": [
            {"id": "KGP_X", "construct_kinds": ["OmpWat"], "description": "d", "test_type": "T", "severity": "info"},
        ],
    }
    with pytest.raises(kgmod.SchemaViolation):
        kgmod.load_kg_dict(doc)


def test_load_kg_from_file(tmp_path, seed_kg):
    from importlib import resources

    text = resources.files("hpctestgen.data").joinpath("seed_kg.json").read_text()
    path = tmp_path / "kg.json"
    path.write_text(text)
    graph = kgmod.load_kg(path)
    assert len(graph.patterns) == len(seed_kg.patterns)


def test_query_parallel_for_includes_race(seed_kg):
    ids = [p.id for p in kgmod.query(seed_kg, ConstructKind.OmpParallelFor)]
    assert "KGP_OMP_RACE_SHARED_ACCUM" in ids
    assert ids == sorted(ids)


def test_query_other_empty(seed_kg):
    assert kgmod.query(seed_kg, ConstructKind.Other) == []


def test_query_mpi_send_includes_deadlock(seed_kg):
    ids = [p.id for p in kgmod.query(seed_kg, ConstructKind.MpiSend)]
    assert "KGP_MPI_015" in ids


def test_match_race_binds_variable(seed_kg, parallel_sum_unit):
    metadata = analyze_source(parallel_sum_unit, seed_kg)
    pattern = seed_kg.pattern_by_id("KGP_OMP_RACE_SHARED_ACCUM")
    construct = metadata.constructs[0]
    evidence = kgmod.match(pattern, construct, metadata)
    assert evidence is not None
    assert evidence.bound_variables["variable"] == "total"
    assert evidence.construct_id == construct.id


def test_match_reduction_variant_none(seed_kg, parallel_sum_unit):
    fixed = SourceUnit(
        path="fixed.cpp",
        text=parallel_sum_unit.text.replace(
            "#pragma omp parallel for", "#pragma omp parallel for reduction(+:total)"
        ),
    )
    metadata = analyze_source(fixed, seed_kg)
    pattern = seed_kg.pattern_by_id("KGP_OMP_RACE_SHARED_ACCUM")
    assert kgmod.match(pattern, metadata.constructs[0], metadata) is None


def test_match_rank_guarded_barrier(seed_kg):
    text = (
        "void f() {\n"
        "    int rank = -1;\n"
        "    MPI_Comm_rank(MPI_COMM_WORLD, &rank);\n"
        "    if (rank == 0) {\n"
        "        MPI_Barrier(MPI_COMM_WORLD);\n"
        "    }\n"
        "}\n"
    )
    metadata = analyze_source(SourceUnit(path="b.cpp", text=text), seed_kg)
    pattern = seed_kg.pattern_by_id("KGP_MPI_BARRIER_COND")
    barrier = next(c for c in metadata.constructs if c.kind == ConstructKind.MpiBarrier)
    evidence = kgmod.match(pattern, barrier, metadata)
    assert evidence is not None
    assert any("inside_conditional" in c for c in evidence.satisfied_conditions)


def test_match_purity(seed_kg, exchange_data_unit):
    metadata = analyze_source(exchange_data_unit, seed_kg)
    pattern = seed_kg.pattern_by_id("KGP_MPI_015")
    send = next(c for c in metadata.constructs if c.kind == ConstructKind.MpiSend)
    first = kgmod.match(pattern, send, metadata)
    second = kgmod.match(pattern, send, metadata)
    assert first.to_dict() == second.to_dict()


def test_evidence_soundness_reevaluates(seed_kg, exchange_data_unit):
    """Every listed condition must hold when re-checked independently."""
    metadata = analyze_source(exchange_data_unit, seed_kg)
    pattern = seed_kg.pattern_by_id("KGP_MPI_015")
    send = next(c for c in metadata.constructs if c.kind == ConstructKind.MpiSend)
    evidence = kgmod.match(pattern, send, metadata)
    assert len(evidence.satisfied_conditions) == len(pattern.predicate)
    # Independent re-check of each atom family.
    recv = next(c for c in metadata.constructs if c.kind == ConstructKind.MpiRecv)
    assert recv.location.line > send.location.line  # sibling after
    assert "rank_dependent_branch" not in send.context_flags  # context lacks
    assert evidence.bound_variables["partner_construct"] == recv.id


def test_kg_index_consistent(seed_kg):
    for kind, ids in seed_kg.index.items():
        for pid in ids:
            pattern = seed_kg.pattern_by_id(pid)
            assert kind in pattern.construct_kinds
    for pattern in seed_kg.patterns:
        for kind in pattern.construct_kinds:
            assert pattern.id in seed_kg.index[kind]
