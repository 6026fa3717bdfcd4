"""Pipeline stages, artifact composability, and ablation behavior."""

import json
from pathlib import Path

import pytest

from hpctestgen.config import PipelineConfig, apply_preset
from hpctestgen.pipeline import (
    run_pipeline,
    stage_analyze,
    stage_recipes,
    stage_report,
    stage_run,
    stage_tests,
)

from conftest import needs_cxx

MOCK_BLOCK = "```cpp\nint main() { minicheck; return 0; }\n```"


def _config(tmp_path, sources, **kw):
    return PipelineConfig(inputs=[str(s) for s in sources], output_dir=str(tmp_path / "run"), **kw)


@pytest.fixture()
def race_file(tmp_path, parallel_sum_unit):
    path = tmp_path / "parallel_sum.cpp"
    path.write_text(parallel_sum_unit.text)
    return path


def test_stage_artifacts_written(tmp_path, race_file):
    cfg = _config(tmp_path, [race_file])
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    stage_analyze(cfg, run_dir)
    stage_recipes(cfg, run_dir)
    stage_tests(cfg, run_dir)
    for name in ("metadata.json", "recipes.json", "tests.json"):
        assert (run_dir / name).exists()


@needs_cxx
def test_pipeline_equals_staged_execution(tmp_path, race_file):
    """Composability: one-shot pipeline output matches stage-by-stage runs."""
    cfg_a = _config(tmp_path, [race_file])
    dir_a = tmp_path / "a"
    run_pipeline(cfg_a, dir_a)

    cfg_b = _config(tmp_path, [race_file])
    dir_b = tmp_path / "b"
    dir_b.mkdir()
    stage_analyze(cfg_b, dir_b)
    stage_recipes(cfg_b, dir_b)
    stage_tests(cfg_b, dir_b)
    stage_run(cfg_b, dir_b)
    stage_report(cfg_b, dir_b)

    report_a = json.loads((dir_a / "report.json").read_text())
    report_b = json.loads((dir_b / "report.json").read_text())
    report_a.pop("generated_at")
    report_b.pop("generated_at")
    assert report_a == report_b


def test_report_embeds_config_echo(tmp_path, race_file):
    cfg = _config(tmp_path, [race_file])
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    stage_analyze(cfg, run_dir)
    stage_recipes(cfg, run_dir)
    stage_tests(cfg, run_dir)
    (run_dir / "results.json").write_text('{"schema_version": "1", "results": []}\n')
    payload = stage_report(cfg, run_dir)
    assert payload["config"]["backend"] == "template"
    assert payload["config"]["max_iterations"] == 5
    assert payload["config"]["candidates"] == 5
    assert payload["config"]["timeout_seconds"] == 5.0
    assert payload["config"]["output_dir"] == "<run-dir>"


def test_defaults_match_reference_values():
    cfg = PipelineConfig()
    assert cfg.max_iterations == 5
    assert cfg.candidates == 5
    assert cfg.temperature == 0.2
    assert cfg.timeout_seconds == 5.0
    assert cfg.no_recipe is False and cfg.no_critique is False


def test_presets():
    cfg = apply_preset(PipelineConfig(), "standalone")
    assert cfg.no_recipe and cfg.no_critique
    cfg = apply_preset(PipelineConfig(), "no-critique")
    assert not cfg.no_recipe and cfg.no_critique
    cfg = apply_preset(PipelineConfig(), "no-recipe")
    assert cfg.no_recipe and not cfg.no_critique
    cfg = apply_preset(PipelineConfig(), "full")
    assert not cfg.no_recipe and not cfg.no_critique
    with pytest.raises(ValueError):
        apply_preset(PipelineConfig(), "bogus")


def test_no_recipe_mode_emits_bare_targets(tmp_path, race_file):
    cfg = _config(tmp_path, [race_file], no_recipe=True)
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    stage_analyze(cfg, run_dir)
    stage_recipes(cfg, run_dir)
    doc = json.loads((run_dir / "recipes.json").read_text())
    entry = doc["per_source"][0]
    assert entry["mode"] == "bare_targets"
    raw = entry["recipes"][0]
    assert set(raw) == {"target_construct", "test_type", "construct_id", "target_function"}


def test_no_critique_single_synthesis_per_recipe(tmp_path, race_file):
    cfg = _config(tmp_path, [race_file], no_critique=True)
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    stage_analyze(cfg, run_dir)
    stage_recipes(cfg, run_dir)
    index = stage_tests(cfg, run_dir)
    assert all(r["iterations_used"] == 1 for r in index)
    assert all(r["status"] == "accepted" for r in index)


def test_mock_llm_ablation_runs(tmp_path, race_file):
    script = tmp_path / "script.json"
    script.write_text(json.dumps([MOCK_BLOCK] * 40))
    cfg = _config(tmp_path, [race_file], backend="llm", llm_script=str(script), no_recipe=True, no_critique=True)
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    stage_analyze(cfg, run_dir)
    stage_recipes(cfg, run_dir)
    index = stage_tests(cfg, run_dir)
    assert len(index) == 1
    assert index[0]["status"] == "accepted"  # critique disabled ships as-is
    test_rel = index[0]["test_file"]
    assert (run_dir / test_rel).exists()


def test_mock_llm_full_preset_escalates_flawed_candidates(tmp_path, race_file):
    script = tmp_path / "script.json"
    script.write_text(json.dumps([MOCK_BLOCK] * 40))
    cfg = _config(tmp_path, [race_file], backend="llm", llm_script=str(script))
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    stage_analyze(cfg, run_dir)
    stage_recipes(cfg, run_dir)
    index = stage_tests(cfg, run_dir)
    assert index[0]["status"] == "escalated_for_human_review"
    assert index[0]["iterations_used"] == 5
    assert (run_dir / index[0]["review_bundle"]).exists()


def test_identical_mock_scripts_identical_outcomes(tmp_path, race_file):
    """Mock determinism end to end."""
    outcomes = []
    for name in ("r1", "r2"):
        script = tmp_path / f"{name}.json"
        script.write_text(json.dumps([MOCK_BLOCK] * 40))
        cfg = _config(tmp_path, [race_file], backend="llm", llm_script=str(script))
        run_dir = tmp_path / name
        run_dir.mkdir()
        stage_analyze(cfg, run_dir)
        stage_recipes(cfg, run_dir)
        stage_tests(cfg, run_dir)
        outcomes.append((run_dir / "tests.json").read_text())
    assert outcomes[0] == outcomes[1]
