"""Recipe generation, validation, and critique-driven refinement."""

import json

import pytest

from hpctestgen import kg as kgmod
from hpctestgen.analyzer import analyze_source
from hpctestgen.recipes import (
    CONDITION_REGISTRY,
    BareTarget,
    TestRecipe,
    generate_bare_targets,
    generate_recipes,
    refine_recipe,
    validate_recipe,
)
from hpctestgen.sketch import SourceUnit


class FakeCritique:
    def __init__(self, refinement):
        self.refinement = refinement


def test_deadlock_recipe_matches_reference_shape(exchange_data_unit, seed_kg):
    metadata = analyze_source(exchange_data_unit, seed_kg)
    recipes, warnings = generate_recipes(metadata, seed_kg)
    assert warnings == []
    assert len(recipes) == 1
    r = recipes[0]
    assert r.test_id == "RECIPE_MPI_DEADLOCK_001"
    assert r.test_type == "MPI_Potential_Deadlock_Order_Mismatch"
    assert r.conditions["num_processes"] == 2
    assert r.conditions["rank0_send_first"] is True
    assert r.conditions["rank1_recv_first"] is True
    assert r.expected_behavior_under_test.startswith("Test may hang")
    assert r.suggested_assertion_method.startswith("Verify completion")
    assert "MPI_Send_line_6" in r.target_construct
    assert "MPI_Recv_line_7" in r.target_construct
    sources = {n.source for n in r.justification_notes}
    assert {"Analyzer", "KG_Pattern", "Constraint_DB"} <= sources
    kg_note = next(n for n in r.justification_notes if n.source == "KG_Pattern")
    assert kg_note.id == "KGP_MPI_015"
    assert validate_recipe(r) == []


def test_race_recipe_conditions(parallel_sum_unit, seed_kg):
    metadata = analyze_source(parallel_sum_unit, seed_kg)
    recipes, _ = generate_recipes(metadata, seed_kg)
    (r,) = recipes
    assert r.conditions["num_threads"] == 4
    assert r.conditions["repetitions"] == 100
    assert r.conditions["input_size"] == 1000000
    assert "consistency" in r.suggested_assertion_method.lower()


def test_empty_testing_areas_yield_no_recipes(seed_kg):
    unit = SourceUnit(path="plain.cpp", text="int add(int a, int b) {\n    return a + b;\n}\n")
    metadata = analyze_source(unit, seed_kg)
    recipes, warnings = generate_recipes(metadata, seed_kg)
    assert recipes == [] and warnings == []


def test_unknown_test_type_skipped_with_warning(parallel_sum_unit, seed_kg):
    metadata = analyze_source(parallel_sum_unit, seed_kg)
    metadata.testing_areas[0].test_type = "No_Such_Type"
    recipes, warnings = generate_recipes(metadata, seed_kg)
    assert recipes == []
    assert len(warnings) == 1 and "No_Such_Type" in warnings[0]


def test_ordering_severity_then_line(corpus_dir, seed_kg):
    unit = SourceUnit.from_file(
        corpus_dir / "src/mpi_bcast_config_buggy.cpp", path_label="src/mpi_bcast_config_buggy.cpp"
    )
    metadata = analyze_source(unit, seed_kg)
    recipes, _ = generate_recipes(metadata, seed_kg)
    priorities = [r.priority for r in recipes]
    assert priorities == sorted(priorities, key={"high": 0, "medium": 1, "low": 2}.get)


def test_numbering_dense_within_test_type(corpus_dir, seed_kg):
    unit = SourceUnit.from_file(
        corpus_dir / "src/mpi_exchange_fixed.cpp", path_label="src/mpi_exchange_fixed.cpp"
    )
    metadata = analyze_source(unit, seed_kg)
    recipes, _ = generate_recipes(metadata, seed_kg)
    ids = [r.test_id for r in recipes]
    assert ids == ["RECIPE_MPI_P2P_001", "RECIPE_MPI_P2P_002"]


def test_generation_deterministic(parallel_sum_unit, seed_kg):
    metadata = analyze_source(parallel_sum_unit, seed_kg)
    first, _ = generate_recipes(metadata, seed_kg)
    second, _ = generate_recipes(metadata, seed_kg)
    assert [r.to_dict() for r in first] == [r.to_dict() for r in second]


def test_recipe_roundtrip(parallel_sum_unit, seed_kg):
    metadata = analyze_source(parallel_sum_unit, seed_kg)
    (r,) = generate_recipes(metadata, seed_kg)[0]
    again = TestRecipe.from_dict(json.loads(r.to_json()))
    assert again.to_json() == r.to_json()


def test_reference_recipe_shape_validates():
    r = TestRecipe.from_dict(
        {
            "test_id": "RECIPE_MPI_DEADLOCK_001",
            "target_construct": "MPI_Send_line_55_MPI_Recv_line_72",
            "test_type": "MPI_Potential_Deadlock_Order_Mismatch",
            "conditions": {"num_processes": 2, "rank0_send_first": True, "rank1_recv_first": True},
            "expected_behavior_under_test": "Test may hang...",
            "justification_notes": [
                {"source": "Analyzer", "detail": "Identified MPI_Send..."},
                {"source": "KG_Pattern", "id": "KGP_MPI_015", "detail": "symmetric blocking exchange"},
                {"source": "Constraint_DB", "id": "CDR_MPI_SYNC_003", "detail": "ordering rule"},
            ],
            "suggested_assertion_method": "Verify completion...",
            "priority": "high",
        }
    )
    assert validate_recipe(r) == []


def test_validate_rejects_zero_processes():
    r = _minimal_recipe(conditions={"num_processes": 0})
    violations = validate_recipe(r)
    assert any("num_processes" in v and "minimum" in v for v in violations)


def test_validate_rejects_unknown_key():
    r = _minimal_recipe(conditions={"frobnicate": 3})
    violations = validate_recipe(r)
    assert any("frobnicate" in v for v in violations)


def test_validate_rejects_bad_types():
    r = _minimal_recipe(conditions={"num_threads": "four"})
    assert any("num_threads" in v for v in validate_recipe(r))
    r2 = _minimal_recipe(conditions={"rank0_send_first": 1})
    assert any("rank0_send_first" in v for v in validate_recipe(r2))


def _minimal_recipe(conditions=None):
    return TestRecipe(
        test_id="RECIPE_X_001",
        target_construct="f_line_1",
        test_type="T",
        conditions=conditions or {},
        expected_behavior_under_test="x",
        justification_notes=[],
        suggested_assertion_method="x",
        priority="low",
    )


def test_validation_requires_justification():
    r = _minimal_recipe()
    assert any("justification" in v for v in validate_recipe(r))


def test_refine_sets_condition_and_revision(exchange_data_unit, seed_kg):
    metadata = analyze_source(exchange_data_unit, seed_kg)
    (r,) = generate_recipes(metadata, seed_kg)[0]
    critique = FakeCritique([{"op": "set_condition", "key": "assert_on_all_ranks", "value": True}])
    result = refine_recipe(r, critique)
    assert result.changed
    assert result.recipe.test_id == "RECIPE_MPI_DEADLOCK_001.r1"
    assert result.recipe.conditions["assert_on_all_ranks"] is True
    # The original is untouched.
    assert "assert_on_all_ranks" not in r.conditions
    # A second refinement bumps the revision.
    second = refine_recipe(result.recipe, critique)
    assert second.recipe.test_id == "RECIPE_MPI_DEADLOCK_001.r2"


def test_refine_empty_directives_is_identity(exchange_data_unit, seed_kg):
    metadata = analyze_source(exchange_data_unit, seed_kg)
    (r,) = generate_recipes(metadata, seed_kg)[0]
    result = refine_recipe(r, FakeCritique([]))
    assert not result.changed
    assert result.recipe is r


def test_refine_below_minimum_unresolvable(exchange_data_unit, seed_kg):
    metadata = analyze_source(exchange_data_unit, seed_kg)
    (r,) = generate_recipes(metadata, seed_kg)[0]
    minimum = CONDITION_REGISTRY["num_processes"].minimum
    critique = FakeCritique([{"op": "set_condition", "key": "num_processes", "value": minimum - 1}])
    result = refine_recipe(r, critique)
    assert result.unresolvable
    assert result.recipe is r


def test_bare_targets_passthrough(parallel_sum_unit, seed_kg):
    metadata = analyze_source(parallel_sum_unit, seed_kg)
    targets = generate_bare_targets(metadata)
    assert len(targets) == 1
    t = targets[0]
    assert isinstance(t, BareTarget)
    assert t.test_type == "OMP_Race_Shared_Accumulation"
    assert t.target_function == "parallel_sum"
    assert set(t.to_dict()) == {"target_construct", "test_type", "construct_id", "target_function"}


def test_revision_suffix_validates():
    r = _minimal_recipe()
    r.test_id = "RECIPE_X_001.r2"
    r.justification_notes = [type("N", (), {"source": "Analyzer"})()]
    assert not any("test_id" in v for v in validate_recipe(r))
