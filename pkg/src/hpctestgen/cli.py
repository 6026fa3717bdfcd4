"""Command-line interface: stage commands plus the end-to-end pipeline.

Exit codes: 0 success, 2 usage/config error, 3 input not found, then one
code per stage failure class: 10 analyze, 11 kg, 12 recipes, 13 synthesis,
14 compile toolchain, 15 run launcher, 16 report.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import harness as harnessmod
from . import kg as kgmod
from . import pipeline as pipelinemod
from .analyzer import analyze_source
from .config import PRESETS, PipelineConfig, apply_preset
from .recipes import TestRecipe, generate_recipes, validate_recipe
from .sketch import SourceUnit

EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_ANALYZE = 10
EXIT_KG = 11
EXIT_RECIPES = 12
EXIT_SYNTH = 13
EXIT_COMPILE = 14
EXIT_RUN = 15
EXIT_REPORT = 16


@click.group()
def main():
    """Static analysis and unit-test generation for OpenMP/MPI C/C++ code."""


def _load_config(config_file, **overrides):
    try:
        if config_file:
            cfg = PipelineConfig.from_file(config_file, overrides)
        else:
            cfg = PipelineConfig.from_dict({}, overrides)
    except (ValueError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    problems = cfg.validate()
    if problems:
        for p in problems:
            click.echo(f"config error: {p}", err=True)
        sys.exit(EXIT_USAGE)
    return cfg


def _load_graph(kg_path):
    try:
        return kgmod.load_kg(kg_path) if kg_path else kgmod.load_seed_kg()
    except FileNotFoundError as exc:
        click.echo(f"kg file not found: {exc}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    except (kgmod.SchemaViolation, kgmod.DuplicatePatternId, json.JSONDecodeError) as exc:
        click.echo(f"kg error: {exc}", err=True)
        sys.exit(EXIT_KG)


@main.command()
@click.argument("sources", nargs=-1, required=True, type=click.Path())
@click.option("--kg", "kg_path", type=click.Path(), help="Knowledge-graph JSON (default: shipped seed).")
@click.option("--out", type=click.Path(), help="Write metadata JSON here instead of stdout.")
@click.option("--source-label", help="Path label to embed (single source only).")
def analyze(sources, kg_path, out, source_label):
    """Analyze C/C++ sources and print their analysis metadata."""
    graph = _load_graph(kg_path)
    if source_label and len(sources) != 1:
        click.echo("--source-label requires exactly one source", err=True)
        sys.exit(EXIT_USAGE)
    payloads = []
    for src in sources:
        path = Path(src)
        if not path.exists():
            click.echo(f"input not found: {src}", err=True)
            sys.exit(EXIT_NOT_FOUND)
        try:
            unit = SourceUnit.from_file(path, path_label=source_label or str(path))
            metadata = analyze_source(unit, graph)
        except Exception as exc:
            click.echo(f"analysis failed for {src}: {exc}", err=True)
            sys.exit(EXIT_ANALYZE)
        payloads.append(metadata)
    text = payloads[0].to_json() if len(payloads) == 1 else (
        json.dumps([m.to_dict() for m in payloads], indent=2, sort_keys=True) + "\n"
    )
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.group()
def kg():
    """Knowledge-graph commands."""


@kg.command("validate")
@click.argument("kg_file", type=click.Path())
def kg_validate(kg_file):
    """Validate a knowledge-graph JSON file."""
    if not Path(kg_file).exists():
        click.echo(f"input not found: {kg_file}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    try:
        graph = kgmod.load_kg(kg_file)
    except (kgmod.SchemaViolation, kgmod.DuplicatePatternId, json.JSONDecodeError) as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(EXIT_KG)
    click.echo(f"valid: {len(graph.patterns)} patterns, version {graph.version}")


@main.group()
def recipe():
    """Recipe commands."""


@recipe.command("generate")
@click.argument("source", type=click.Path())
@click.option("--kg", "kg_path", type=click.Path())
@click.option("--out", type=click.Path())
def recipe_generate(source, kg_path, out):
    """Generate test recipes for one source file."""
    if not Path(source).exists():
        click.echo(f"input not found: {source}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    graph = _load_graph(kg_path)
    try:
        unit = SourceUnit.from_file(source)
        metadata = analyze_source(unit, graph)
        recipes, warnings = generate_recipes(metadata, graph)
    except Exception as exc:
        click.echo(f"recipe generation failed: {exc}", err=True)
        sys.exit(EXIT_RECIPES)
    for w in warnings:
        click.echo(f"warning: {w}", err=True)
    text = json.dumps([r.to_dict() for r in recipes], indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out} ({len(recipes)} recipes)")
    else:
        click.echo(text, nl=False)


@recipe.command("validate")
@click.argument("recipe_file", type=click.Path())
def recipe_validate(recipe_file):
    """Validate a recipe JSON file (single recipe or a list)."""
    path = Path(recipe_file)
    if not path.exists():
        click.echo(f"input not found: {recipe_file}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    doc = json.loads(path.read_text())
    docs = doc if isinstance(doc, list) else [doc]
    all_violations = []
    for entry in docs:
        r = TestRecipe.from_dict(entry)
        for v in validate_recipe(r):
            all_violations.append(f"{r.test_id}: {v}")
    if all_violations:
        for v in all_violations:
            click.echo(f"violation: {v}", err=True)
        sys.exit(EXIT_RECIPES)
    click.echo(f"valid: {len(docs)} recipe(s)")


@main.group()
def test():
    """Test-synthesis commands."""


@test.command("generate")
@click.argument("source", type=click.Path())
@click.option("--config", "config_file", type=click.Path())
@click.option("--kg", "kg_path", type=click.Path())
@click.option("--backend", type=click.Choice(["template", "llm"]))
@click.option("--llm-script", type=click.Path(), help="Scripted mock responses (JSON list).")
@click.option("--run-dir", type=click.Path(), default=None)
@click.option("--no-recipe", is_flag=True, default=None)
@click.option("--no-critique", is_flag=True, default=None)
def test_generate(source, config_file, kg_path, backend, llm_script, run_dir, no_recipe, no_critique):
    """Synthesize tests for one source through the critique loop."""
    if not Path(source).exists():
        click.echo(f"input not found: {source}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    cfg = _load_config(
        config_file,
        inputs=[source],
        kg_path=kg_path,
        backend=backend,
        llm_script=llm_script,
        no_recipe=no_recipe,
        no_critique=no_critique,
    )
    out = Path(run_dir or pipelinemod.default_run_dir())
    out.mkdir(parents=True, exist_ok=True)
    try:
        graph = pipelinemod.load_kg(cfg)
        pipelinemod.stage_analyze(cfg, out, graph)
        pipelinemod.stage_recipes(cfg, out, graph)
        index = pipelinemod.stage_tests(cfg, out, graph)
    except Exception as exc:
        click.echo(f"synthesis failed: {exc}", err=True)
        sys.exit(EXIT_SYNTH)
    accepted = sum(1 for r in index if r.get("status") == "accepted")
    click.echo(f"{accepted}/{len(index)} tests accepted under {out}")


@main.command()
@click.option("--run-dir", type=click.Path(), required=True)
@click.option("--config", "config_file", type=click.Path())
@click.option("--coverage", is_flag=True, default=None)
@click.option("--cxx")
@click.option("--mpicxx")
@click.option("--mpirun")
def run(run_dir, config_file, coverage, cxx, mpicxx, mpirun):
    """Compile and execute the generated tests of a run directory."""
    if not (Path(run_dir) / "tests.json").exists():
        click.echo(f"no tests.json under {run_dir}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    cfg = _load_config(config_file, coverage=coverage, cxx=cxx, mpicxx=mpicxx, mpirun=mpirun)
    try:
        results = pipelinemod.stage_run(cfg, run_dir)
    except harnessmod.ToolchainMissing as exc:
        click.echo(f"toolchain missing: {exc}", err=True)
        sys.exit(EXIT_COMPILE)
    except harnessmod.LauncherMissing as exc:
        click.echo(f"launcher missing: {exc}", err=True)
        sys.exit(EXIT_RUN)
    compiled = sum(1 for r in results if r["compile"]["success"])
    click.echo(f"compiled {compiled}/{len(results)}; results in {run_dir}/results.json")


@main.command()
@click.option("--run-dir", type=click.Path(), required=True)
@click.option("--config", "config_file", type=click.Path())
def report(run_dir, config_file):
    """Compute the metrics report for a run directory."""
    if not (Path(run_dir) / "results.json").exists():
        click.echo(f"no results.json under {run_dir}", err=True)
        sys.exit(EXIT_NOT_FOUND)
    cfg = _load_config(config_file)
    try:
        payload = pipelinemod.stage_report(cfg, run_dir)
    except Exception as exc:
        click.echo(f"report failed: {exc}", err=True)
        sys.exit(EXIT_REPORT)
    click.echo((Path(run_dir) / "summary.txt").read_text(), nl=False)
    click.echo(f"report written to {run_dir}/report.json")
    return payload


@main.command()
@click.argument("sources", nargs=-1, type=click.Path())
@click.option("--config", "config_file", type=click.Path())
@click.option("--corpus", "corpus_dir", type=click.Path(), help="Run over a corpus manifest directory.")
@click.option("--kg", "kg_path", type=click.Path())
@click.option("--backend", type=click.Choice(["template", "llm"]))
@click.option("--llm-script", type=click.Path())
@click.option("--preset", type=click.Choice(sorted(PRESETS)))
@click.option("--no-recipe", is_flag=True, default=None)
@click.option("--no-critique", is_flag=True, default=None)
@click.option("--coverage", is_flag=True, default=None)
@click.option("--max-iterations", type=int)
@click.option("--candidates", type=int)
@click.option("--temperature", type=float)
@click.option("--run-dir", type=click.Path())
def pipeline(sources, config_file, corpus_dir, kg_path, backend, llm_script, preset,
             no_recipe, no_critique, coverage, max_iterations, candidates, temperature, run_dir):
    """Full pipeline: analyze, plan, synthesize, execute, report."""
    units = None
    inputs = [str(s) for s in sources]
    if corpus_dir:
        from .corpus import load_corpus

        try:
            corpus = load_corpus(corpus_dir)
        except Exception as exc:
            click.echo(f"corpus error: {exc}", err=True)
            sys.exit(EXIT_NOT_FOUND)
        units = [SourceUnit.from_file(e.path, path_label=e.rel_path) for e in corpus.entries]
        inputs = [str(e.path) for e in corpus.entries]
    elif not inputs:
        click.echo("provide source files or --corpus", err=True)
        sys.exit(EXIT_USAGE)
    for src in inputs:
        if not Path(src).exists():
            click.echo(f"input not found: {src}", err=True)
            sys.exit(EXIT_NOT_FOUND)

    cfg = _load_config(
        config_file,
        inputs=inputs,
        kg_path=kg_path,
        backend=backend,
        llm_script=llm_script,
        no_recipe=no_recipe,
        no_critique=no_critique,
        coverage=coverage,
        max_iterations=max_iterations,
        candidates=candidates,
        temperature=temperature,
    )
    if preset:
        apply_preset(cfg, preset)

    out = Path(run_dir or pipelinemod.default_run_dir())
    try:
        pipelinemod.run_pipeline(cfg, out, units=units)
    except harnessmod.ToolchainMissing as exc:
        click.echo(f"toolchain missing: {exc}", err=True)
        sys.exit(EXIT_COMPILE)
    except harnessmod.LauncherMissing as exc:
        click.echo(f"launcher missing: {exc}", err=True)
        sys.exit(EXIT_RUN)
    except Exception as exc:
        click.echo(f"pipeline failed: {exc}", err=True)
        sys.exit(1)
    click.echo((out / "summary.txt").read_text(), nl=False)
    click.echo(f"run artifacts under {out}")


if __name__ == "__main__":
    main()
