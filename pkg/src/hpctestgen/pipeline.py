"""End-to-end orchestration: analyze -> recipes -> loop -> harness -> report.

Every stage writes its artifact JSON into the run directory, so stages can
be re-run independently on each other's outputs:

    <run-dir>/metadata.json   per-source analysis metadata
    <run-dir>/recipes.json    recipes (or bare targets) per source
    <run-dir>/tests.json      loop outcomes; test sources under tests/<stem>/
    <run-dir>/review/         escalation bundles for human review
    <run-dir>/results.json    compile + run results (wall times live here)
    <run-dir>/report.json     metrics report + config echo (deterministic)
"""

from __future__ import annotations

import datetime as _dt
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import critique as critmod
from . import harness as harnessmod
from . import kg as kgmod
from . import metrics as metricsmod
from . import synth as synthmod
from .analyzer import AnalysisMetadata, analyze_source
from .config import PipelineConfig
from .llm import EndpointConfig, HttpClient, ScriptedMockClient
from .recipes import (
    BareTarget,
    JustificationNote,
    TestRecipe,
    generate_bare_targets,
    generate_recipes,
    recipe_rules,
)
from .sketch import SourceUnit


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _stem(label):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", Path(label).stem)


def load_kg(config):
    return kgmod.load_kg(config.kg_path) if config.kg_path else kgmod.load_seed_kg()


def make_client(config):
    """LLM client per config: scripted mock file wins over HTTP endpoint."""
    if config.backend != "llm":
        return None
    if config.llm_script:
        script = json.loads(Path(config.llm_script).read_text())
        return ScriptedMockClient(script)
    return HttpClient(
        EndpointConfig(
            endpoint=config.llm_endpoint,
            model=config.llm_model,
            token_env_var=config.llm_token_env_var,
        )
    )


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def stage_analyze(config, run_dir, kg=None, units=None):
    kg = kg or load_kg(config)
    if units is None:
        units = [SourceUnit.from_file(p) for p in config.inputs]
    by_source = []
    for unit in units:
        metadata = analyze_source(unit, kg)
        by_source.append({"source": unit.path, "metadata": metadata.to_dict()})
    write_json(Path(run_dir) / "metadata.json", {"schema_version": "1", "analyses": by_source})
    return by_source


def _load_metadata(run_dir):
    doc = json.loads((Path(run_dir) / "metadata.json").read_text())
    return [(e["source"], AnalysisMetadata.from_dict(e["metadata"])) for e in doc["analyses"]]


def stage_recipes(config, run_dir, kg=None):
    kg = kg or load_kg(config)
    analyses = _load_metadata(run_dir)
    out = []
    for source, metadata in analyses:
        if config.no_recipe:
            targets = generate_bare_targets(metadata)
            out.append(
                {
                    "source": source,
                    "mode": "bare_targets",
                    "recipes": [t.to_dict() for t in targets],
                    "warnings": [],
                }
            )
        else:
            recipes, warnings = generate_recipes(metadata, kg, {"default_timeout": config.timeout_seconds})
            out.append(
                {
                    "source": source,
                    "mode": "recipes",
                    "recipes": [r.to_dict() for r in recipes],
                    "warnings": warnings,
                }
            )
    write_json(Path(run_dir) / "recipes.json", {"schema_version": "1", "per_source": out})
    return out


def _default_recipe_for_bare(target, counter):
    """Template backend in no-recipe mode: registry defaults fill the plan."""
    rule = recipe_rules().get(target.test_type)
    if rule is None:
        return None
    return TestRecipe(
        test_id=f"RECIPE_{rule.tag}_{counter:03d}",
        target_construct=target.target_construct,
        test_type=target.test_type,
        conditions=dict(rule.conditions),
        expected_behavior_under_test=rule.expected_behavior,
        justification_notes=[JustificationNote(source="Analyzer", detail="bare-target mode: registry defaults")],
        suggested_assertion_method=rule.assertion_method,
        priority="low",
        construct_id=target.construct_id,
        target_function=target.target_function,
    )


def _recipe_objects(entry):
    """Recipes (or bare targets upgraded for the template backend) per source."""
    if entry["mode"] == "bare_targets":
        counters: dict[str, int] = {}
        out = []
        for raw in entry["recipes"]:
            target = BareTarget(
                target_construct=raw["target_construct"],
                test_type=raw["test_type"],
                construct_id=raw.get("construct_id", ""),
                target_function=raw.get("target_function", ""),
            )
            counters[target.test_type] = counters.get(target.test_type, 0) + 1
            out.append((target, counters[target.test_type]))
        return out
    return [(TestRecipe.from_dict(raw), i + 1) for i, raw in enumerate(entry["recipes"])]


def stage_tests(config, run_dir, kg=None, client=None):
    """Per-recipe synthesis through the critique loop; writes tests.json."""
    run_dir = Path(run_dir)
    kg = kg or load_kg(config)
    client = client if client is not None else make_client(config)
    analyses = dict(_load_metadata(run_dir))
    recipes_doc = json.loads((run_dir / "recipes.json").read_text())

    params = {
        "temperature": config.temperature,
        "n": config.candidates,
        "max_tokens": config.max_tokens,
        "full_file": config.full_file,
        "model": config.llm_model,
    }

    index = []
    for entry in recipes_doc["per_source"]:
        source_label = entry["source"]
        metadata = analyses[source_label]
        unit = _unit_for(config, source_label, metadata)
        stem = _stem(source_label)
        tests_dir = run_dir / "tests" / stem

        for recipe_like, counter in _recipe_objects(entry):
            synth_target = recipe_like
            if isinstance(recipe_like, BareTarget) and config.backend == "template":
                synth_target = _default_recipe_for_bare(recipe_like, counter)
                if synth_target is None:
                    index.append(
                        {
                            "source": source_label,
                            "recipe_id": recipe_like.target_construct,
                            "status": "skipped",
                            "reason": f"no template rule for {recipe_like.test_type}",
                        }
                    )
                    continue

            def synthesize_fn(recipe_arg, feedback, _unit=unit, _params=params):
                p = dict(_params)
                if feedback:
                    p["feedback"] = feedback
                return synthmod.synthesize(recipe_arg, _unit, config.backend, p, client)

            outcome = critmod.run_loop(
                synth_target,
                unit,
                metadata,
                synthesize_fn,
                max_iterations=config.max_iterations,
                critique_enabled=not config.no_critique,
            )
            record = {
                "source": source_label,
                "recipe_id": outcome.recipe_id or getattr(synth_target, "test_id", ""),
                "status": outcome.status,
                "iterations_used": outcome.iterations_used,
                "recipe": synth_target.to_dict() if hasattr(synth_target, "to_dict") else None,
            }
            if outcome.status == "accepted":
                test = outcome.final_test
                tests_dir.mkdir(parents=True, exist_ok=True)
                (tests_dir / test.filename).write_text(test.source_text)
                record["test_file"] = str(Path("tests") / stem / test.filename)
                record["test"] = test.to_dict()
            else:
                bundle = critmod.write_review_bundle(outcome, synth_target, run_dir / "review")
                record["review_bundle"] = str(bundle.relative_to(run_dir))
            index.append(record)

    write_json(run_dir / "tests.json", {"schema_version": "1", "tests": index})
    return index


def _unit_for(config, source_label, metadata):
    """Rehydrate the source unit for a metadata record."""
    for candidate in [source_label] + [str(Path(p)) for p in config.inputs if Path(p).name == Path(source_label).name]:
        path = Path(candidate)
        if path.exists():
            return SourceUnit.from_file(path, path_label=source_label)
    raise FileNotFoundError(f"source for metadata label {source_label!r} not found")


def stage_run(config, run_dir):
    """Compile and execute every accepted test; writes results.json."""
    run_dir = Path(run_dir)
    toolchain = harnessmod.ToolchainConfig(cxx=config.cxx, mpicxx=config.mpicxx, mpirun=config.mpirun)
    tests_doc = json.loads((run_dir / "tests.json").read_text())

    results = []
    for record in tests_doc["tests"]:
        if record.get("status") != "accepted":
            continue
        test = synthmod.GeneratedTest.from_dict(record["test"])
        work_dir = run_dir / "build" / _stem(record["source"]) / _stem(test.recipe_id)
        compile_result = harnessmod.compile_test(test, toolchain, work_dir, coverage=config.coverage)
        entry = {
            "source": record["source"],
            "recipe_id": record["recipe_id"],
            "test_type": (record.get("recipe") or {}).get("test_type", ""),
            "compile": compile_result.to_dict(),
        }
        if compile_result.success:
            run_result = harnessmod.run_test(
                compile_result.binary, test.launch_spec, toolchain, test_id=test.recipe_id
            )
            entry["run"] = run_result.to_dict()
            if config.coverage:
                try:
                    cov = harnessmod.collect_coverage(compile_result.binary, toolchain)
                    entry["coverage"] = cov.to_dict()
                except harnessmod.CoverageToolMissing as exc:
                    entry["coverage_skipped"] = str(exc)
        results.append(entry)
    write_json(run_dir / "results.json", {"schema_version": "1", "results": results})
    return results


def stage_report(config, run_dir):
    """Metrics over the run artifacts. Wall-clock values stay in
    results.json; the report itself is deterministic modulo generated_at."""
    run_dir = Path(run_dir)
    tests_doc = json.loads((run_dir / "tests.json").read_text())
    results_doc = json.loads((run_dir / "results.json").read_text())

    @dataclass
    class _Compile:
        success: bool

    @dataclass
    class _Run:
        verdict: str

    compile_results = []
    run_verdicts = {}
    error_messages = []
    for entry in results_doc["results"]:
        comp = entry["compile"]
        compile_results.append(_Compile(success=comp["success"]))
        error_messages.extend(msg for _f, _l, msg in comp["parsed_errors"])
        if "run" in entry:
            run_verdicts[(entry["source"], entry["recipe_id"])] = entry["run"]["verdict"]

    rubric_by_test = {}
    recipes_for_targeting = []
    scores_by_id = {}
    run_results = []
    for record in tests_doc["tests"]:
        if record.get("status") == "skipped":
            continue
        recipe_dict = record.get("recipe")
        if not recipe_dict:
            continue
        if "test_id" in recipe_dict:
            recipe = TestRecipe.from_dict(recipe_dict)
        else:  # bare target (no-recipe ablation): minimal stand-in plan
            recipe = TestRecipe(
                test_id=record.get("recipe_id") or recipe_dict["target_construct"],
                target_construct=recipe_dict["target_construct"],
                test_type=recipe_dict["test_type"],
                conditions={},
                expected_behavior_under_test="",
                justification_notes=[],
                suggested_assertion_method="",
                priority="low",
                construct_id=recipe_dict.get("construct_id", ""),
                target_function=recipe_dict.get("target_function", ""),
            )
        key = f"{_stem(record['source'])}/{recipe.test_id}"
        # Distinct targets may repeat across sources; namespace them.
        recipe.construct_id = f"{record['source']}::{recipe.construct_id or recipe.target_construct}"
        namespaced = recipe
        namespaced.test_id = key
        recipes_for_targeting.append(namespaced)
        if record.get("status") != "accepted":
            continue
        test = synthmod.GeneratedTest.from_dict(record["test"])
        verdict = run_verdicts.get((record["source"], record["recipe_id"]))
        run_result = harnessmod.RunResult(record["recipe_id"], verdict, {}, 0.0, "") if verdict else None
        if run_result:
            run_results.append(run_result)
        score = metricsmod.score_rubric(test, recipe, run_result)
        rubric_by_test[key] = score
        scores_by_id[key] = score

    targeting = metricsmod.targeting_rate(recipes_for_targeting, scores_by_id)
    clusters = metricsmod.cluster_errors(error_messages) if len(error_messages) >= 2 else None
    report = metricsmod.build_report(
        compile_results or None,
        run_results or None,
        rubric_by_test,
        targeting,
        coverage=None,
        clusters=clusters,
    )

    payload = {
        "schema_version": "1",
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": config.echo_dict(),
        "ablation": {
            "no_recipe": config.no_recipe,
            "no_critique": config.no_critique,
            "preset": _preset_name(config),
        },
        "verdicts": {
            f"{_stem(s)}/{rid}": v for (s, rid), v in sorted(run_verdicts.items())
        },
        "metrics": report.to_dict(),
        "escalations": [
            r["recipe_id"] for r in tests_doc["tests"] if r.get("status") == "escalated_for_human_review"
        ],
    }
    write_json(run_dir / "report.json", payload)
    (run_dir / "summary.txt").write_text(metricsmod.render_summary(report) + "\n")
    return payload


def _preset_name(config):
    if config.no_recipe and config.no_critique:
        return "standalone"
    if config.no_recipe:
        return "no-recipe"
    if config.no_critique:
        return "no-critique"
    return "full"


def run_pipeline(config, run_dir=None, client=None, units=None):
    """All stages in order; returns the report payload."""
    run_dir = Path(run_dir or config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    kg = load_kg(config)
    stage_analyze(config, run_dir, kg, units=units)
    stage_recipes(config, run_dir, kg)
    stage_tests(config, run_dir, kg, client=client)
    stage_run(config, run_dir)
    return stage_report(config, run_dir)


def default_run_dir(base="runs"):
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    return Path(base) / stamp
