"""Test recipe generation: structured test plans derived from testing areas.

A recipe names the construct under test, the scenario conditions to create
(process/thread counts, repetitions, payload sizes), the expected behavior,
and justification notes tracing back to the analyzer finding, the matched
knowledge-graph pattern, and the condition registry rules. Generation is
a deterministic rule table keyed by the pattern's test type.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from .analyzer import AnalysisMetadata
from . import kg as kgmod

RECIPE_SCHEMA_VERSION = "1"


class UnknownTestType(Exception):
    def __init__(self, test_type):
        super().__init__(f"no recipe rule for test type {test_type!r}")
        self.test_type = test_type


@dataclass(frozen=True)
class ConditionSpec:
    key: str
    type: type
    rule_id: str
    minimum: float | None = None
    maximum: float | None = None
    choices: tuple[str, ...] | None = None


# The condition registry: every key a recipe may carry, with type, range,
# and the constraint rule id cited in justification notes.
CONDITION_REGISTRY: dict[str, ConditionSpec] = {
    spec.key: spec
    for spec in [
        ConditionSpec("num_processes", int, "CDR_PROC_COUNT_RANGE", minimum=1, maximum=64),
        ConditionSpec("num_threads", int, "CDR_THREAD_COUNT_RANGE", minimum=1, maximum=256),
        ConditionSpec("repetitions", int, "CDR_REPETITION_RANGE", minimum=1, maximum=100000),
        ConditionSpec("input_size", int, "CDR_INPUT_SIZE_RANGE", minimum=1, maximum=100000000),
        ConditionSpec("num_blocks", int, "CDR_BLOCK_COUNT_RANGE", minimum=1, maximum=4096),
        ConditionSpec("block_len", int, "CDR_BLOCK_LEN_RANGE", minimum=1, maximum=10000000),
        ConditionSpec("increments_per_thread", int, "CDR_INCREMENT_RANGE", minimum=1, maximum=10000000),
        ConditionSpec("num_sections", int, "CDR_SECTION_COUNT_RANGE", minimum=1, maximum=64),
        ConditionSpec("rank0_send_first", bool, "CDR_MPI_SYNC_ORDER"),
        ConditionSpec("rank1_recv_first", bool, "CDR_MPI_SYNC_ORDER"),
        ConditionSpec("assert_on_all_ranks", bool, "CDR_MPI_ASSERT_SCOPE"),
        ConditionSpec("schedule", str, "CDR_SCHEDULE_POLICY"),
        ConditionSpec("timeout_seconds", float, "CDR_TIMEOUT_RANGE", minimum=0.1, maximum=300.0),
        ConditionSpec("offset", float, "CDR_OFFSET_VALUE"),
        ConditionSpec("runtime_version_hint", str, "CDR_RUNTIME_VERSION_HINT"),
    ]
}


@dataclass
class JustificationNote:
    source: str  # Analyzer | KG_Pattern | Constraint_DB
    detail: str
    id: str | None = None

    def to_dict(self):
        d = {"source": self.source, "detail": self.detail}
        if self.id is not None:
            d["id"] = self.id
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(source=d["source"], detail=d["detail"], id=d.get("id"))


@dataclass
class TestRecipe:
    __test__ = False  # keep pytest collection away from the domain type

    test_id: str
    target_construct: str
    test_type: str
    conditions: dict
    expected_behavior_under_test: str
    justification_notes: list[JustificationNote]
    suggested_assertion_method: str
    priority: str  # high | medium | low
    construct_id: str = ""  # analyzer construct id backing target_construct
    target_function: str = ""  # enclosing function name, for relevance checks

    def to_dict(self):
        return {
            "schema_version": RECIPE_SCHEMA_VERSION,
            "test_id": self.test_id,
            "target_construct": self.target_construct,
            "test_type": self.test_type,
            "conditions": dict(self.conditions),
            "expected_behavior_under_test": self.expected_behavior_under_test,
            "justification_notes": [n.to_dict() for n in self.justification_notes],
            "suggested_assertion_method": self.suggested_assertion_method,
            "priority": self.priority,
            "construct_id": self.construct_id,
            "target_function": self.target_function,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            test_id=d["test_id"],
            target_construct=d["target_construct"],
            test_type=d["test_type"],
            conditions=dict(d["conditions"]),
            expected_behavior_under_test=d["expected_behavior_under_test"],
            justification_notes=[JustificationNote.from_dict(n) for n in d["justification_notes"]],
            suggested_assertion_method=d["suggested_assertion_method"],
            priority=d["priority"],
            construct_id=d.get("construct_id", ""),
            target_function=d.get("target_function", ""),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass
class BareTarget:
    """No-recipe ablation output: just the construct and the test type."""

    target_construct: str
    test_type: str
    construct_id: str = ""
    target_function: str = ""

    def to_dict(self):
        return {
            "target_construct": self.target_construct,
            "test_type": self.test_type,
            "construct_id": self.construct_id,
            "target_function": self.target_function,
        }


@dataclass(frozen=True)
class RecipeRule:
    """Rule-table entry mapping a pattern test type onto a recipe template."""

    test_type: str
    tag: str  # short tag used in RECIPE_<TAG>_<NNN>
    conditions: dict
    expected_behavior: str
    assertion_method: str


_RULES: dict[str, RecipeRule] = {
    r.test_type: r
    for r in [
        RecipeRule(
            "MPI_Potential_Deadlock_Order_Mismatch",
            "MPI_DEADLOCK",
            {
                "num_processes": 2,
                "rank0_send_first": True,
                "rank1_recv_first": True,
                "timeout_seconds": 5.0,
            },
            "Test may hang: both ranks enter a blocking send and neither posts the matching "
            "receive, so the watchdog converts the stall into a timeout verdict.",
            "Verify completion of the exchange on every rank within the timeout.",
        ),
        RecipeRule(
            "MPI_P2P_Ordered_Exchange",
            "MPI_P2P",
            {"num_processes": 2, "rank0_send_first": True, "rank1_recv_first": True, "timeout_seconds": 5.0},
            "The rank-ordered protocol completes and each rank receives its partner's payload.",
            "Verify completion on both ranks within the timeout and check the received payload per rank.",
        ),
        RecipeRule(
            "MPI_Deadlock_Conditional_Barrier",
            "MPI_BARRIER",
            {"num_processes": 2, "timeout_seconds": 5.0},
            "Test may hang: only a subset of ranks reaches the barrier, so the arriving ranks "
            "block until the watchdog fires.",
            "Verify completion on every rank within the timeout.",
        ),
        RecipeRule(
            "MPI_Env_Lifecycle",
            "MPI_LIFECYCLE",
            {"num_processes": 2, "timeout_seconds": 5.0},
            "A canonical init/query/finalize probe completes cleanly on every rank.",
            "Verify rank and size queries succeed between MPI_Init and MPI_Finalize on every rank.",
        ),
        RecipeRule(
            "MPI_Collective_Reach_All_Ranks",
            "MPI_COLLECTIVE",
            {"num_processes": 2, "assert_on_all_ranks": True, "timeout_seconds": 5.0},
            "Ranks outside the guarded branch never join the collective; their copy of the "
            "value stays unset, which per-rank assertions expose.",
            "Assert the collective's result on every rank, not just the root.",
        ),
        RecipeRule(
            "MPI_Collective_Degenerate_Comm",
            "MPI_DEGENERATE",
            {"num_processes": 1, "timeout_seconds": 5.0},
            "With a single-process communicator the collective degenerates to an identity "
            "and must return the local contribution unchanged.",
            "Verify the collective's result equals the local value under one process.",
        ),
        RecipeRule(
            "OMP_Race_Shared_Accumulation",
            "OMP_RACE",
            {"num_threads": 4, "repetitions": 100, "input_size": 1000000, "timeout_seconds": 10.0},
            "Unsynchronized concurrent updates lose additions, so repeated runs produce "
            "inconsistent sums; a consistent correct sum indicates the accumulation is safe.",
            "Execute the function repeatedly and verify consistency of the result across repetitions "
            "against a sequentially computed reference.",
        ),
        RecipeRule(
            "OMP_Reduction_Consistency",
            "OMP_REDUCTION",
            {"num_threads": 4, "repetitions": 100, "input_size": 1000000, "timeout_seconds": 10.0},
            "The reduction clause combines per-thread partials safely; every repetition must "
            "reproduce the sequential reference exactly.",
            "Execute the function repeatedly and verify consistency of the result across repetitions "
            "against a sequentially computed reference.",
        ),
        RecipeRule(
            "OMP_Missing_Privatization",
            "OMP_PRIVATE",
            {"num_threads": 4, "repetitions": 100, "input_size": 100000, "timeout_seconds": 10.0},
            "The shared staging temporary is overwritten by concurrent iterations, so outputs "
            "mix values across threads; privatizing it restores per-element results.",
            "Verify every output element against the sequential reference across repetitions.",
        ),
        RecipeRule(
            "OMP_Mutual_Exclusion",
            "OMP_MUTEX",
            {"num_threads": 8, "repetitions": 20, "increments_per_thread": 10000, "timeout_seconds": 10.0},
            "The guarded update must be exact under maximal contention: the counter equals "
            "threads times increments on every repetition.",
            "Verify the counter equals num_threads * increments_per_thread exactly.",
        ),
        RecipeRule(
            "OMP_Schedule_Policy_Sweep",
            "OMP_SCHEDULE",
            {"num_threads": 4, "repetitions": 20, "input_size": 100000, "schedule": "static", "timeout_seconds": 10.0},
            "Results must not depend on how iterations map to threads under the declared "
            "schedule policy.",
            "Verify every output element against the sequential reference across repetitions.",
        ),
        RecipeRule(
            "OMP_Sections_Full_Coverage",
            "OMP_SECTIONS",
            {"num_threads": 4, "repetitions": 50, "num_sections": 3, "timeout_seconds": 10.0},
            "Every section must execute exactly once per encounter of the sections construct.",
            "Count executions per section and verify each equals the number of encounters.",
        ),
        RecipeRule(
            "OMP_Firstprivate_Initialization",
            "OMP_FIRSTPRIVATE",
            {"num_threads": 4, "repetitions": 20, "input_size": 10000, "offset": 2.5, "timeout_seconds": 10.0},
            "Each thread must observe the captured initial value of the firstprivate variable, "
            "not a stale or shared copy.",
            "Verify every output element reflects the captured value against the sequential reference.",
        ),
        RecipeRule(
            "OMP_Task_Missing_Taskwait",
            "OMP_TASKS",
            {"num_threads": 4, "repetitions": 100, "num_blocks": 64, "block_len": 32768, "timeout_seconds": 30.0},
            "Without a taskwait the combining loop can read block results before their tasks "
            "finish, so repeated runs disagree with the sequential reference.",
            "Execute the function repeatedly and verify consistency of the result across repetitions "
            "against a sequentially computed reference.",
        ),
        RecipeRule(
            "OMP_Barrier_All_Threads",
            "OMP_BARRIER",
            {"num_threads": 4, "input_size": 4096, "timeout_seconds": 5.0},
            "Test may hang: threads that skip the conditional barrier never arrive, so the "
            "waiting thread blocks until the watchdog fires.",
            "Verify the two-phase update completes within the timeout and the output matches the "
            "sequential reference.",
        ),
    ]
}


def recipe_rules():
    """The rule table, keyed by test type (read-only view)."""
    return dict(_RULES)


_SEVERITY_PRIORITY = {"high": "high", "warn": "medium", "info": "low"}
_SEVERITY_ORDER = {"high": 0, "warn": 1, "info": 2}


def _construct_label(construct, metadata, evidence=None):
    """Human-oriented construct naming: callee/directive names plus lines."""
    parts = []

    def one(c):
        if c.raw_text.startswith("#"):
            words = re.sub(r"^#\s*pragma\s+omp\s*", "", c.raw_text).split("(")[0].split()
            head = "_".join(["omp"] + words[:2]) if words else "omp"
            return f"{head}_line_{c.location.line}"
        return f"{c.raw_text or c.kind.value}_line_{c.location.line}"

    parts.append(one(construct))
    if evidence:
        partner_id = evidence.bound_variables.get("partner_construct")
        if partner_id:
            partner = metadata.construct_by_id(partner_id)
            if partner is not None:
                parts.append(one(partner))
    return "_".join(parts)


def generate_recipes(metadata, kg, config=None):
    """One recipe per testing area, via the deterministic rule table.

    Ordered by (severity desc, source line asc) and numbered sequentially
    within each test type. Areas whose test type has no rule are skipped and
    reported in the returned warnings list, never silently dropped.
    """
    config = config or {}
    areas = list(metadata.testing_areas)

    def sort_key(area):
        construct = metadata.construct_by_id(area.construct_id)
        line = construct.location.line if construct else 0
        return (_SEVERITY_ORDER.get(area.severity, 3), line, area.pattern_id)

    areas.sort(key=sort_key)

    recipes: list[TestRecipe] = []
    warnings: list[str] = []
    counters: dict[str, int] = {}
    for area in areas:
        rule = _RULES.get(area.test_type)
        if rule is None:
            warnings.append(f"skipped area {area.pattern_id} on {area.construct_id}: no rule for test type {area.test_type!r}")
            continue
        construct = metadata.construct_by_id(area.construct_id)
        pattern = kg.pattern_by_id(area.pattern_id)
        evidence = kgmod.match(pattern, construct, metadata) if pattern else None
        counters[rule.tag] = counters.get(rule.tag, 0) + 1
        test_id = f"RECIPE_{rule.tag}_{counters[rule.tag]:03d}"

        conditions = dict(rule.conditions)
        if area.test_type == "OMP_Schedule_Policy_Sweep":
            args = construct.clause_named("schedule")
            if args and args[0]:
                conditions["schedule"] = args[0]

        notes = [
            JustificationNote(
                source="Analyzer",
                detail=f"Identified {construct.raw_text or construct.kind.value} at "
                f"{construct.location.file}:{construct.location.line}"
                + (f" ({'; '.join(evidence.satisfied_conditions)})" if evidence else ""),
            ),
            JustificationNote(source="KG_Pattern", id=area.pattern_id, detail=area.description),
        ]
        for key in sorted(conditions):
            spec = CONDITION_REGISTRY.get(key)
            if spec is not None:
                notes.append(
                    JustificationNote(
                        source="Constraint_DB",
                        id=spec.rule_id,
                        detail=f"condition {key} constrained by registry rule {spec.rule_id}",
                    )
                )
                break  # one representative registry citation keeps notes short

        recipes.append(
            TestRecipe(
                test_id=test_id,
                target_construct=_construct_label(construct, metadata, evidence),
                test_type=area.test_type,
                conditions=conditions,
                expected_behavior_under_test=rule.expected_behavior,
                justification_notes=notes,
                suggested_assertion_method=rule.assertion_method,
                priority=_SEVERITY_PRIORITY.get(area.severity, "low"),
                construct_id=area.construct_id,
                target_function=construct.enclosing_function,
            )
        )
    return recipes, warnings


def generate_bare_targets(metadata):
    """No-recipe ablation: pass-through targets with no planned conditions."""
    targets = []
    for area in metadata.testing_areas:
        construct = metadata.construct_by_id(area.construct_id)
        targets.append(
            BareTarget(
                target_construct=_construct_label(construct, metadata),
                test_type=area.test_type,
                construct_id=area.construct_id,
                target_function=construct.enclosing_function,
            )
        )
    return targets


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_TEST_ID_RE = re.compile(r"^RECIPE_[A-Z0-9_]+_\d{3}(\.r\d+)*$")


def validate_recipe(recipe, registry=None):
    """Violation list (empty means valid); never raises."""
    registry = registry or CONDITION_REGISTRY
    violations = []
    if not _TEST_ID_RE.match(recipe.test_id):
        violations.append(f"test_id {recipe.test_id!r} does not match RECIPE_<TAG>_<NNN>[.r<k>]")
    if not recipe.target_construct:
        violations.append("target_construct is empty")
    if not recipe.test_type:
        violations.append("test_type is empty")
    for key, value in sorted(recipe.conditions.items()):
        spec = registry.get(key)
        if spec is None:
            violations.append(f"unknown condition key {key!r}")
            continue
        if spec.type is float:
            ok_type = isinstance(value, (int, float)) and not isinstance(value, bool)
        elif spec.type is int:
            ok_type = isinstance(value, int) and not isinstance(value, bool)
        else:
            ok_type = isinstance(value, spec.type)
        if not ok_type:
            violations.append(f"condition {key}={value!r} is not of type {spec.type.__name__}")
            continue
        if spec.minimum is not None and value < spec.minimum:
            violations.append(f"condition {key}={value} below minimum {spec.minimum}")
        if spec.maximum is not None and value > spec.maximum:
            violations.append(f"condition {key}={value} above maximum {spec.maximum}")
    sources = {n.source for n in recipe.justification_notes}
    if not sources & {"KG_Pattern", "Analyzer"}:
        violations.append("justification_notes must cite the Analyzer or a KG pattern")
    return violations


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------


@dataclass
class RefineResult:
    recipe: TestRecipe
    changed: bool
    unresolved: list[str] = field(default_factory=list)

    @property
    def unresolvable(self):
        return bool(self.unresolved)


def refine_recipe(recipe, critique):
    """Apply a critique's refinement directives to produce a revised recipe.

    Directives: ``{"op": "set_condition", "key": K, "value": V}`` and
    ``{"op": "set_assertion", "text": T}``. An empty directive list returns
    the recipe unchanged; directives that would violate the condition
    registry leave the recipe unchanged and flag escalation.
    """
    directives = list(getattr(critique, "refinement", None) or [])
    if not directives:
        return RefineResult(recipe=recipe, changed=False)

    conditions = dict(recipe.conditions)
    assertion = recipe.suggested_assertion_method
    unresolved = []
    for directive in directives:
        op = directive.get("op")
        if op == "set_condition":
            key, value = directive["key"], directive["value"]
            candidate = replace(recipe, conditions={**conditions, key: value})
            bad = [v for v in validate_recipe(candidate) if key in v]
            if bad:
                unresolved.extend(bad)
            else:
                conditions[key] = value
        elif op == "set_assertion":
            assertion = directive["text"]
        else:
            unresolved.append(f"unknown refinement op {op!r}")

    if unresolved:
        return RefineResult(recipe=recipe, changed=False, unresolved=unresolved)

    m = re.search(r"\.r(\d+)$", recipe.test_id)
    revision = int(m.group(1)) + 1 if m else 1
    base_id = re.sub(r"\.r\d+$", "", recipe.test_id)
    revised = replace(
        recipe,
        test_id=f"{base_id}.r{revision}",
        conditions=conditions,
        suggested_assertion_method=assertion,
    )
    return RefineResult(recipe=revised, changed=True)
