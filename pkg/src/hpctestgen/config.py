"""Pipeline configuration: file values overridden by CLI flags."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

PRESETS = {
    "full": {"no_recipe": False, "no_critique": False},
    "no-critique": {"no_recipe": False, "no_critique": True},
    "no-recipe": {"no_recipe": True, "no_critique": False},
    "standalone": {"no_recipe": True, "no_critique": True},
}

ALLOWED_TEMPERATURES = (0.2, 0.5, 0.7)


@dataclass
class PipelineConfig:
    inputs: list[str] = field(default_factory=list)
    kg_path: str | None = None  # None -> shipped seed graph
    backend: str = "template"  # template | llm
    llm_endpoint: str = "http://localhost:8000/v1"
    llm_model: str = "default"
    llm_token_env_var: str = "HPCTESTGEN_LLM_TOKEN"
    llm_script: str | None = None  # scripted mock responses (JSON list)
    max_iterations: int = 5
    candidates: int = 5
    temperature: float = 0.2
    max_tokens: int = 4096
    timeout_seconds: float = 5.0
    no_recipe: bool = False
    no_critique: bool = False
    full_file: bool = False
    coverage: bool = False
    output_dir: str = "runs/latest"
    cxx: str | None = None
    mpicxx: str | None = None
    mpirun: str | None = None

    def validate(self):
        problems = []
        if self.backend not in ("template", "llm"):
            problems.append(f"backend must be template or llm, got {self.backend!r}")
        if self.max_iterations < 1:
            problems.append("max_iterations must be >= 1")
        if self.candidates < 1:
            problems.append("candidates must be >= 1")
        if self.temperature not in ALLOWED_TEMPERATURES:
            problems.append(f"temperature must be one of {ALLOWED_TEMPERATURES}")
        if self.timeout_seconds <= 0:
            problems.append("timeout_seconds must be positive")
        return problems

    def echo_dict(self):
        """Config as embedded in reports: volatile paths are normalized so
        two otherwise-identical runs produce identical report bytes."""
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["output_dir"] = "<run-dir>"
        return d

    @classmethod
    def from_file(cls, path, overrides=None):
        doc = json.loads(Path(path).read_text())
        return cls.from_dict(doc, overrides)

    @classmethod
    def from_dict(cls, doc, overrides=None):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(doc)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        return cls(**merged)


def apply_preset(config, preset):
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    for key, value in PRESETS[preset].items():
        setattr(config, key, value)
    return config
