"""Test synthesis: recipe + source in, compilable standalone C++ program out.

Two backends: the deterministic template backend (one test per recipe) and
an LLM backend (up to N candidates per request). Every generated program
embeds the minicheck assertion/watchdog header inline, so it compiles with
nothing beyond the system compiler, the OpenMP flag, and the MPI wrapper.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .recipes import BareTarget, TestRecipe, recipe_rules
from .sketch import SourceUnit, parse_source

HEADER_VERSION = "1"

EXCERPT_BEGIN = "// --- begin code under test ---"
EXCERPT_END = "// --- end code under test ---"


class NoTemplateForTestType(Exception):
    def __init__(self, test_type, detail=""):
        msg = f"no template for test type {test_type!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.test_type = test_type


class MissingCondition(Exception):
    def __init__(self, key):
        super().__init__(f"template placeholder left unsubstituted: {key}")
        self.key = key


class LlmUnavailable(Exception):
    pass


class LlmOutputUnparseable(Exception):
    def __init__(self, candidate_index, detail="no fenced code block found"):
        super().__init__(f"candidate {candidate_index}: {detail}")
        self.candidate_index = candidate_index


@dataclass
class AssertionDescriptor:
    kind: str  # completion | value | count
    rank_scope: str  # all_ranks | rank0 | local
    expression: str

    def to_dict(self):
        return {"kind": self.kind, "rank_scope": self.rank_scope, "expression": self.expression}

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d["rank_scope"], d["expression"])


@dataclass
class LaunchSpec:
    model: str  # serial | openmp | mpi
    timeout_seconds: float
    num_processes: int | None = None
    num_threads: int | None = None

    def to_dict(self):
        return {
            "model": self.model,
            "timeout_seconds": self.timeout_seconds,
            "num_processes": self.num_processes,
            "num_threads": self.num_threads,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["model"], d["timeout_seconds"], d.get("num_processes"), d.get("num_threads"))


@dataclass
class GeneratedTest:
    recipe_id: str
    backend: str  # template | llm
    revision: int
    source_text: str
    launch_spec: LaunchSpec
    declared_assertions: list[AssertionDescriptor] = field(default_factory=list)
    candidate_index: int = 0

    @property
    def filename(self):
        safe = re.sub(r"[^A-Za-z0-9_.]+", "_", self.recipe_id)
        return f"test_{safe}.cpp"

    def to_dict(self):
        return {
            "recipe_id": self.recipe_id,
            "backend": self.backend,
            "revision": self.revision,
            "source_text": self.source_text,
            "launch_spec": self.launch_spec.to_dict(),
            "declared_assertions": [a.to_dict() for a in self.declared_assertions],
            "candidate_index": self.candidate_index,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            recipe_id=d["recipe_id"],
            backend=d["backend"],
            revision=d["revision"],
            source_text=d["source_text"],
            launch_spec=LaunchSpec.from_dict(d["launch_spec"]),
            declared_assertions=[AssertionDescriptor.from_dict(a) for a in d["declared_assertions"]],
            candidate_index=d.get("candidate_index", 0),
        )


@dataclass
class PromptBundle:
    system_preamble: str
    recipe_json: str
    source_excerpt: str
    output_instructions: str
    temperature: float
    max_candidates: int

    def user_message(self):
        return (
            f"{self.recipe_json}\n\nTarget source:\n```cpp\n{self.source_excerpt}\n```\n\n"
            f"{self.output_instructions}"
        )


def minicheck_header():
    return resources.files("hpctestgen.data").joinpath("minicheck.hpp").read_text()


def _template_text(test_type):
    path = resources.files("hpctestgen.data.templates").joinpath(f"{test_type}.cpp")
    try:
        return path.read_text()
    except FileNotFoundError:
        raise NoTemplateForTestType(test_type) from None


# Signature contracts: what the template invokes the target function as.
# (param type list, return type). None means the template calls no target.
_SIGNATURE_CONTRACTS: dict[str, tuple[list[str], str] | None] = {
    "MPI_Potential_Deadlock_Order_Mismatch": (["int", "int"], "void"),
    "MPI_P2P_Ordered_Exchange": (["int"], "int"),
    "MPI_Deadlock_Conditional_Barrier": ([], "void"),
    "MPI_Env_Lifecycle": None,
    "MPI_Collective_Reach_All_Ranks": (["int"], "int"),
    "MPI_Collective_Degenerate_Comm": (["double"], "double"),
    "OMP_Race_Shared_Accumulation": (["double*", "int"], "double"),
    "OMP_Reduction_Consistency": (["double*", "int"], "double"),
    "OMP_Missing_Privatization": (["const double*", "double*", "int"], "void"),
    "OMP_Schedule_Policy_Sweep": (["const double*", "double*", "int"], "void"),
    "OMP_Firstprivate_Initialization": (["const double*", "double*", "int", "double"], "void"),
    "OMP_Mutual_Exclusion": (["int"], "long"),
    "OMP_Sections_Full_Coverage": (["int*"], "void"),
    "OMP_Task_Missing_Taskwait": (["const int*", "long long*", "int", "int"], "long long"),
    "OMP_Barrier_All_Threads": (["double*", "int"], "void"),
}


def _param_type(param_text):
    """Strip the identifier (and array suffix) off a parameter declaration."""
    text = param_text.strip()
    text = re.sub(r"\[\s*\d*\s*\]$", "", text).strip()
    m = re.match(r"^(.*?)([A-Za-z_][A-Za-z0-9_]*)$", text)
    base = m.group(1).strip() if m else text
    base = re.sub(r"\s+", " ", base)
    base = re.sub(r"\s*\*\s*", "*", base)
    return base.strip()


def _signature_matches(fn, contract):
    want_params, want_ret = contract
    got_params = [_param_type(p) for p in fn.parameter_texts]
    if got_params != want_params:
        return False
    got_ret = re.sub(r"\s+", " ", fn.return_type_text).strip()
    return got_ret == want_ret


def extract_excerpt(source, target_function, context_lines=2, full_file=False):
    """The enclosing function's text (with a small context window), marked."""
    sketch = parse_source(source)
    lines = source.text.splitlines()
    if full_file or not target_function:
        body = source.text.rstrip("\n")
    else:
        fn = next((f for f in sketch.functions if f.name == target_function), None)
        if fn is None:
            body = source.text.rstrip("\n")
        else:
            # Include any comment/signature lines directly above the name line.
            start = max(0, fn.line - 1 - context_lines)
            end = min(len(lines), fn.body.close_line)
            body = "\n".join(lines[start:end])
    return f"{EXCERPT_BEGIN}\n{body}\n{EXCERPT_END}"


def _lookup_function(source, name):
    sketch = parse_source(source)
    for fn in sketch.functions:
        if fn.name == name:
            return fn
    return None


_LAUNCH_MODEL_BY_PREFIX = {"MPI": "mpi", "OMP": "openmp"}


def launch_model_for(test_type):
    return _LAUNCH_MODEL_BY_PREFIX.get(test_type.split("_")[0], "serial")


def render_template(test_type, recipe, source_excerpt):
    """Deterministic template rendering; no placeholder survives."""
    text = _template_text(test_type)
    conditions = recipe.conditions

    values = {
        "TEST_ID": recipe.test_id,
        "MINICHECK": minicheck_header().rstrip("\n"),
        "EXCERPT": source_excerpt,
        "TARGET_FUNCTION": recipe.target_function,
    }
    for key, value in conditions.items():
        if isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        values[key.upper()] = rendered

    if "input_size" in conditions and "{{EXPECTED_SUM}}" in text:
        n = conditions["input_size"]
        values["EXPECTED_SUM"] = repr(float(n) * (n + 1) / 2.0)
    if "{{EXPECTED_TOTAL}}" in text:
        n = conditions.get("num_blocks", 0) * conditions.get("block_len", 0)
        values["EXPECTED_TOTAL"] = f"{n * (n + 1) // 2}LL"
    if "{{PER_RANK_ASSERTIONS}}" in text:
        ranks = range(conditions.get("num_processes", 1)) if conditions.get("assert_on_all_ranks") else [0]
        lines = [
            f'        if (rank == {r}) {{\n'
            f'            MC_CHECK_EQ_INT(got, expected, "collective result observed on rank {r}");\n'
            f"        }}"
            for r in ranks
        ]
        values["PER_RANK_ASSERTIONS"] = "\n".join(lines)

    for key, rendered in values.items():
        text = text.replace("{{" + key + "}}", rendered)

    leftover = re.search(r"\{\{([A-Z_]+)\}\}", text)
    if leftover:
        raise MissingCondition(leftover.group(1).lower())
    return text


_TEMPLATE_ASSERTIONS: dict[str, list[AssertionDescriptor]] = {
    "MPI_Potential_Deadlock_Order_Mismatch": [
        AssertionDescriptor("completion", "all_ranks", "exchange completes within timeout"),
    ],
    "MPI_P2P_Ordered_Exchange": [
        AssertionDescriptor("completion", "all_ranks", "exchange completes within timeout"),
        AssertionDescriptor("value", "all_ranks", "received == partner rank"),
    ],
    "MPI_Deadlock_Conditional_Barrier": [
        AssertionDescriptor("completion", "all_ranks", "synchronization completes within timeout"),
    ],
    "MPI_Env_Lifecycle": [
        AssertionDescriptor("value", "all_ranks", "rank in [0, size) and rank sum matches"),
    ],
    "MPI_Collective_Reach_All_Ranks": [
        AssertionDescriptor("value", "all_ranks", "collective result == expected on every rank"),
    ],
    "MPI_Collective_Degenerate_Comm": [
        AssertionDescriptor("value", "rank0", "result == local value under one process"),
    ],
    "OMP_Race_Shared_Accumulation": [
        AssertionDescriptor("value", "local", "sum == closed-form reference, all repetitions"),
    ],
    "OMP_Reduction_Consistency": [
        AssertionDescriptor("value", "local", "sum == closed-form reference, all repetitions"),
    ],
    "OMP_Missing_Privatization": [
        AssertionDescriptor("value", "local", "outputs == single-thread reference, all repetitions"),
    ],
    "OMP_Schedule_Policy_Sweep": [
        AssertionDescriptor("value", "local", "outputs == single-thread reference, all repetitions"),
    ],
    "OMP_Firstprivate_Initialization": [
        AssertionDescriptor("value", "local", "outputs == single-thread reference, all repetitions"),
    ],
    "OMP_Mutual_Exclusion": [
        AssertionDescriptor("value", "local", "counter == threads * increments"),
    ],
    "OMP_Sections_Full_Coverage": [
        AssertionDescriptor("count", "local", "each section ran once per encounter"),
    ],
    "OMP_Task_Missing_Taskwait": [
        AssertionDescriptor("value", "local", "total == closed-form reference, all repetitions"),
    ],
    "OMP_Barrier_All_Threads": [
        AssertionDescriptor("completion", "local", "two-phase update completes within timeout"),
        AssertionDescriptor("value", "local", "outputs == single-thread reference"),
    ],
}


def _launch_spec_for(recipe_like, conditions):
    test_type = recipe_like.test_type
    model = launch_model_for(test_type)
    return LaunchSpec(
        model=model,
        timeout_seconds=float(conditions.get("timeout_seconds", 5.0)),
        num_processes=conditions.get("num_processes"),
        num_threads=conditions.get("num_threads"),
    )


def synthesize_template(recipe, source, full_file=False):
    """Template backend: exactly one test per recipe."""
    contract = _SIGNATURE_CONTRACTS.get(recipe.test_type)
    if recipe.test_type not in _SIGNATURE_CONTRACTS:
        raise NoTemplateForTestType(recipe.test_type)
    if contract is not None:
        fn = _lookup_function(source, recipe.target_function)
        if fn is None:
            raise NoTemplateForTestType(
                recipe.test_type, f"target function {recipe.target_function!r} not found"
            )
        if not _signature_matches(fn, contract):
            raise NoTemplateForTestType(
                recipe.test_type,
                f"target {recipe.target_function!r} signature {fn.parameter_texts} does not fit "
                f"the template contract {contract[0]}",
            )
        excerpt = extract_excerpt(source, recipe.target_function, full_file=full_file)
    else:
        excerpt = ""
    text = render_template(recipe.test_type, recipe, excerpt)
    return GeneratedTest(
        recipe_id=recipe.test_id,
        backend="template",
        revision=0,
        source_text=text,
        launch_spec=_launch_spec_for(recipe, recipe.conditions),
        declared_assertions=list(_TEMPLATE_ASSERTIONS.get(recipe.test_type, [])),
    )


# ---------------------------------------------------------------------------
# LLM backend
# ---------------------------------------------------------------------------

SYSTEM_PREAMBLE = (
    "You write unit tests for C/C++ code that uses OpenMP and MPI. Produce a single, "
    "complete, self-contained C++ program (with main) that follows the given test recipe "
    "exactly: honor its process/thread counts, repetitions, and assertion strategy. Use the "
    "provided minicheck macros for assertions and install its watchdog around code that may "
    "hang. Reply with exactly one fenced C++ code block."
)

OUTPUT_INSTRUCTIONS = (
    "Reply with one fenced code block containing the full test program. The program must "
    "include MPI_Init/MPI_Finalize for MPI tests, set the thread count for OpenMP tests, "
    "and exit via the minicheck codes (0 pass, 2 assertion failure, 3 timeout, 4 setup error)."
)


def build_prompt(recipe, source, params=None):
    """Prompt bundle embedding the recipe JSON verbatim plus a source excerpt."""
    params = params or {}
    if isinstance(recipe, BareTarget):
        recipe_json = json.dumps(recipe.to_dict(), indent=2, sort_keys=True)
        target_function = recipe.target_function
    else:
        recipe_json = recipe.to_json().rstrip("\n")
        target_function = recipe.target_function
    excerpt = extract_excerpt(
        source, target_function, full_file=bool(params.get("full_file", False))
    )
    return PromptBundle(
        system_preamble=SYSTEM_PREAMBLE,
        recipe_json=recipe_json,
        source_excerpt=excerpt,
        output_instructions=OUTPUT_INSTRUCTIONS,
        temperature=float(params.get("temperature", 0.2)),
        max_candidates=int(params.get("n", 5)),
    )


_FENCE_RE = re.compile(r"```(?:[a-zA-Z+]*)\n(.*?)```", re.DOTALL)


def parse_llm_output(text, candidate_index=0):
    """First fenced code block, with the minicheck header injected if absent.

    Returns (source_text, warnings).
    """
    warnings = []
    blocks = _FENCE_RE.findall(text or "")
    if not blocks:
        raise LlmOutputUnparseable(candidate_index)
    if len(blocks) > 1:
        warnings.append(f"candidate {candidate_index}: {len(blocks)} code blocks, using the first")
    code = blocks[0].strip("\n")
    if not code.strip():
        raise LlmOutputUnparseable(candidate_index, "empty code block")
    if "minicheck" not in code:
        code = minicheck_header() + "\n" + code
        warnings.append(f"candidate {candidate_index}: minicheck header injected")
    if not re.search(r"\bint\s+main\s*\(", code):
        code = code + "\n\nint main() { return minicheck::finish(); }\n"
        warnings.append(f"candidate {candidate_index}: missing entry point, appended a stub main")
    return code + ("\n" if not code.endswith("\n") else ""), warnings


def synthesize_llm(recipe, source, client, params=None):
    """LLM backend: up to N candidates; unparseable candidates are dropped
    with a warning unless none parse at all."""
    from .llm import CompletionRequest

    params = params or {}
    bundle = build_prompt(recipe, source, params)
    extra = params.get("feedback")
    prompt = bundle.user_message()
    if extra:
        prompt = f"{prompt}\n\nPrevious attempt and critique:\n{extra}"
    request = CompletionRequest(
        prompt=prompt,
        system=bundle.system_preamble,
        temperature=bundle.temperature,
        max_tokens=int(params.get("max_tokens", 4096)),
        n=bundle.max_candidates,
        model=str(params.get("model", "")),
    )
    response = client.complete(request)
    conditions = getattr(recipe, "conditions", {}) or {}
    tests = []
    warnings = []
    errors = []
    for idx, candidate in enumerate(response.candidates):
        try:
            code, parse_warnings = parse_llm_output(candidate, idx)
        except LlmOutputUnparseable as exc:
            errors.append(str(exc))
            continue
        warnings.extend(parse_warnings)
        tests.append(
            GeneratedTest(
                recipe_id=getattr(recipe, "test_id", getattr(recipe, "target_construct", "bare")),
                backend="llm",
                revision=0,
                source_text=code,
                launch_spec=_launch_spec_for(recipe, conditions),
                declared_assertions=[],
                candidate_index=idx,
            )
        )
    if not tests:
        raise LlmOutputUnparseable(0, "; ".join(errors) or "no parseable candidates")
    return tests, warnings


def synthesize(recipe, source, backend, params=None, client=None):
    """Dispatch to the requested backend.

    Template: exactly one test. LLM: up to N candidates (requires a client).
    """
    if backend == "template":
        return [synthesize_template(recipe, source, full_file=bool((params or {}).get("full_file")))], []
    if backend == "llm":
        if client is None:
            raise LlmUnavailable("no LLM client configured")
        return synthesize_llm(recipe, source, client, params)
    raise ValueError(f"unknown backend {backend!r}")
