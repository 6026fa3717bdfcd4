"""CLI surface: subcommands, exit codes, artifact writing."""

import json

import pytest
from click.testing import CliRunner

from hpctestgen.cli import EXIT_KG, EXIT_NOT_FOUND, EXIT_RECIPES, main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def race_file(tmp_path, parallel_sum_unit):
    path = tmp_path / "parallel_sum.cpp"
    path.write_text(parallel_sum_unit.text)
    return path


def test_analyze_stdout(runner, race_file):
    result = runner.invoke(main, ["analyze", str(race_file)])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["schema_version"] == "1"
    assert len(doc["constructs"]) == 1


def test_analyze_missing_file(runner):
    result = runner.invoke(main, ["analyze", "nope/missing.cpp"])
    assert result.exit_code == EXIT_NOT_FOUND


def test_analyze_source_label_reproducible(runner, race_file, tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    for out in (out1, out2):
        result = runner.invoke(
            main, ["analyze", str(race_file), "--source-label", "src/x.cpp", "--out", str(out)]
        )
        assert result.exit_code == 0
    assert out1.read_text() == out2.read_text()
    assert '"file": "src/x.cpp"' in out1.read_text()


def test_kg_validate_seed_roundtrip(runner, tmp_path):
    from importlib import resources

    kg_file = tmp_path / "kg.json"
    kg_file.write_text(resources.files("hpctestgen.data").joinpath("seed_kg.json").read_text())
    result = runner.invoke(main, ["kg", "validate", str(kg_file)])
    assert result.exit_code == 0
    assert "valid" in result.output


def test_kg_validate_rejects_duplicates(runner, tmp_path):
    doc = {
        "version": "1",
        "patterns": [
            {"id": "KGP_A", "construct_kinds": ["OmpParallel"], "description": "d", "test_type": "T", "severity": "info"},
            {"id": "KGP_A", "construct_kinds": ["OmpFor"], "description": "d", "test_type": "T", "severity": "info"},
        ],
    }
    kg_file = tmp_path / "dup.json"
    kg_file.write_text(json.dumps(doc))
    result = runner.invoke(main, ["kg", "validate", str(kg_file)])
    assert result.exit_code == EXIT_KG


def test_recipe_generate_and_validate(runner, race_file, tmp_path):
    out = tmp_path / "recipes.json"
    result = runner.invoke(main, ["recipe", "generate", str(race_file), "--out", str(out)])
    assert result.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc[0]["test_id"] == "RECIPE_OMP_RACE_001"
    result = runner.invoke(main, ["recipe", "validate", str(out)])
    assert result.exit_code == 0


def test_recipe_validate_rejects_bad(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "test_id": "nope",
                "target_construct": "",
                "test_type": "",
                "conditions": {"num_processes": 0},
                "expected_behavior_under_test": "",
                "justification_notes": [],
                "suggested_assertion_method": "",
                "priority": "low",
            }
        )
    )
    result = runner.invoke(main, ["recipe", "validate", str(bad)])
    assert result.exit_code == EXIT_RECIPES


def test_test_generate_template(runner, race_file, tmp_path):
    run_dir = tmp_path / "run"
    result = runner.invoke(
        main, ["test", "generate", str(race_file), "--backend", "template", "--run-dir", str(run_dir)]
    )
    assert result.exit_code == 0, result.output
    tests_doc = json.loads((run_dir / "tests.json").read_text())
    assert tests_doc["tests"][0]["status"] == "accepted"
    test_file = run_dir / tests_doc["tests"][0]["test_file"]
    assert test_file.exists()
    assert "parallel_sum" in test_file.read_text()


def test_pipeline_requires_inputs(runner):
    result = runner.invoke(main, ["pipeline"])
    assert result.exit_code == 2


def test_config_file_overridden_by_flags(runner, race_file, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"backend": "llm", "temperature": 0.5}))
    run_dir = tmp_path / "run"
    result = runner.invoke(
        main,
        [
            "test", "generate", str(race_file),
            "--config", str(config),
            "--backend", "template",  # flag wins over file
            "--run-dir", str(run_dir),
        ],
    )
    assert result.exit_code == 0, result.output


def test_bad_config_rejected(runner, race_file, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"temperature": 0.9}))
    result = runner.invoke(main, ["test", "generate", str(race_file), "--config", str(config)])
    assert result.exit_code == 2
