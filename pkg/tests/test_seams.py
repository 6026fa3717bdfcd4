"""Cross-module seam invariants and defined fallback paths."""

import re
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parent.parent / "src" / "hpctestgen"


def test_all_network_traffic_through_llm_module():
    """Only the completion client may build network calls."""
    offenders = []
    for path in SRC.rglob("*.py"):
        if path.name == "llm.py":
            continue
        text = path.read_text()
        if re.search(r"^\s*(import requests|from requests|import httpx|from httpx|import urllib|from urllib)", text, re.M):
            offenders.append(path.name)
    assert offenders == []


def test_empty_string_candidate_unparseable(exchange_data_unit, seed_kg):
    from hpctestgen.analyzer import analyze_source
    from hpctestgen.llm import scripted_mock
    from hpctestgen.recipes import generate_recipes
    from hpctestgen.synth import LlmOutputUnparseable, synthesize

    metadata = analyze_source(exchange_data_unit, seed_kg)
    (recipe,) = generate_recipes(metadata, seed_kg)[0]
    with pytest.raises(LlmOutputUnparseable):
        synthesize(recipe, exchange_data_unit, "llm", {"n": 1}, client=scripted_mock([""]))


def test_llm_timeout_consumes_loop_iteration(exchange_data_unit, seed_kg):
    from hpctestgen.analyzer import analyze_source
    from hpctestgen.critique import run_loop
    from hpctestgen.llm import Timeout
    from hpctestgen.recipes import generate_recipes

    metadata = analyze_source(exchange_data_unit, seed_kg)
    (recipe,) = generate_recipes(metadata, seed_kg)[0]

    def timing_out(recipe_arg, feedback):
        raise Timeout("deadline exceeded")

    outcome = run_loop(recipe, exchange_data_unit, metadata, timing_out, max_iterations=2)
    assert outcome.status == "escalated_for_human_review"
    assert outcome.iterations_used == 2
    assert all(r.findings[0].code == "ERR_BACKEND_FAILURE" for _t, r in outcome.history)


def test_lint_crash_returns_empty_with_warning(tmp_path, parallel_sum_unit):
    from hpctestgen.analyzer import run_lint

    crasher = tmp_path / "crashy-linter"
    crasher.write_text("#!/bin/sh\nexit 9\n")
    crasher.chmod(0o755)
    issues, flags = run_lint(parallel_sum_unit, {"enabled": True, "binary": str(crasher), "args": []})
    assert issues == []
    assert any(f.startswith("lint_warning:linter_crashed") for f in flags)


def test_lint_missing_binary_skips(parallel_sum_unit):
    from hpctestgen.analyzer import run_lint

    issues, flags = run_lint(parallel_sum_unit, {"enabled": True, "binary": "no-such-linter-xyz"})
    assert issues == [] and "lint_skipped" in flags


def test_harness_never_modifies_test_sources(tmp_path, parallel_sum_unit, seed_kg):
    from conftest import has_cxx

    if not has_cxx():
        pytest.skip("no C++ compiler")
    from hpctestgen.analyzer import analyze_source
    from hpctestgen.harness import compile_test, run_test
    from hpctestgen.recipes import generate_recipes
    from hpctestgen.synth import synthesize

    metadata = analyze_source(parallel_sum_unit, seed_kg)
    (recipe,) = generate_recipes(metadata, seed_kg)[0]
    recipe.conditions["input_size"] = 100
    recipe.conditions["repetitions"] = 2
    (test,), _ = synthesize(recipe, parallel_sum_unit, "template")
    before = test.source_text
    result = compile_test(test, None, tmp_path)
    written = (tmp_path / test.filename).read_text()
    run_test(result.binary, test.launch_spec)
    assert test.source_text == before
    assert (tmp_path / test.filename).read_text() == written
