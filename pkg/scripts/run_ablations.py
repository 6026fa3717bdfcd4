#!/usr/bin/env python3
"""Run the four ablation presets over the corpus and tabulate the metrics.

By default the LLM-backed presets use a scripted mock (one trivial
compilable candidate per request) so the experiment is hermetic; point
--llm-endpoint at a real server to measure an actual model. The template
backend is also run as a reference row.

    python scripts/run_ablations.py --corpus corpus --out runs/ablations
"""

import argparse
import json
import sys
from pathlib import Path

from hpctestgen.config import PRESETS, PipelineConfig, apply_preset
from hpctestgen.corpus import load_corpus
from hpctestgen.pipeline import run_pipeline
from hpctestgen.sketch import SourceUnit

MOCK_CANDIDATE = "```cpp\nint main() { return 0; }\n```"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--corpus", default="corpus")
    parser.add_argument("--out", default="runs/ablations")
    parser.add_argument("--llm-endpoint", default=None, help="Real endpoint instead of the scripted mock.")
    parser.add_argument("--llm-model", default="default")
    args = parser.parse_args()

    corpus = load_corpus(args.corpus)
    units = [SourceUnit.from_file(e.path, path_label=e.rel_path) for e in corpus.entries]
    inputs = [str(e.path) for e in corpus.entries]
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)

    script_path = None
    if not args.llm_endpoint:
        script_path = out_root / "mock_script.json"
        script_path.write_text(json.dumps([MOCK_CANDIDATE] * 600))

    rows = []
    runs = [("template-full", "template", "full")] + [
        (f"llm-{preset}", "llm", preset) for preset in sorted(PRESETS)
    ]
    for name, backend, preset in runs:
        run_dir = out_root / name
        cfg = PipelineConfig(
            inputs=inputs,
            backend=backend,
            llm_script=str(script_path) if (backend == "llm" and script_path) else None,
            llm_endpoint=args.llm_endpoint or PipelineConfig.llm_endpoint,
            llm_model=args.llm_model,
            output_dir=str(run_dir),
        )
        apply_preset(cfg, preset)
        print(f"== {name} -> {run_dir}")
        report = run_pipeline(cfg, run_dir, units=units)
        metrics = report["metrics"]
        rows.append(
            (
                name,
                metrics["compilation_rate_pct"],
                metrics["fully_correct_pct"],
                metrics["targeting"]["rate_pct"],
                len(report["escalations"]),
            )
        )

    print(f"\n{'configuration':<18} {'compile%':>9} {'correct%':>9} {'target%':>8} {'escalated':>9}")
    for name, comp, correct, target, escalated in rows:
        fmt = lambda v: "-" if v is None else v
        print(f"{name:<18} {fmt(comp):>9} {fmt(correct):>9} {fmt(target):>8} {escalated:>9}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
