"""Critic and bounded refine-regenerate loop for generated tests.

The critic re-analyzes the generated test's own source with the sketch
parser and runs three check families against the recipe: adherence (every
recipe condition has a syntactic realization), correctness (parallel setup,
lifecycle pairing, entry point, watchdog), and relevance (the target is
actually exercised). Findings carry standardized codes from a closed
registry and fixed confidence values.

Lines between the excerpt markers are the code under test, not test logic;
findings are never raised against them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .recipes import refine_recipe
from .sketch import SourceUnit, parse_source
from .synth import EXCERPT_BEGIN, EXCERPT_END, GeneratedTest, LaunchSpec

# ---------------------------------------------------------------------------
# Error-code registry
# ---------------------------------------------------------------------------

# code -> (severity, confidence). ERR_RECIPE_CONSTRAINT_VIOLATED carries a
# ":<KEY>" suffix naming the violated condition.
ERROR_CODE_REGISTRY: dict[str, tuple[str, float]] = {
    "ERR_MISSING_PARALLEL_SETUP": ("error", 1.0),
    "ERR_ENTRYPOINT_MALFORMED": ("error", 1.0),
    "ERR_MPI_LIFECYCLE_MALFORMED": ("error", 1.0),
    "ERR_MISSING_WATCHDOG": ("error", 1.0),
    "ERR_BACKEND_FAILURE": ("error", 1.0),
    "ERR_RECIPE_CONSTRAINT_VIOLATED": ("error", 0.9),
    "ERR_STALE_RESUBMISSION": ("error", 0.9),
    "WARN_ASSERTION_TARGET_MISMATCH": ("warning", 0.6),
    "WARN_RELEVANCE_TARGET_NOT_EXERCISED": ("warning", 0.3),
    "SUGGEST_RETRY_WITH_NON_BLOCKING_MPI": ("suggestion", 0.3),
}


def registry_entry(code):
    base = code.split(":", 1)[0]
    try:
        return ERROR_CODE_REGISTRY[base]
    except KeyError:
        raise KeyError(f"finding code {code!r} is not in the registry") from None


def compute_confidence(finding_kind, evidence=None):
    """Deterministic confidence per code family (registry table)."""
    return registry_entry(finding_kind)[1]


@dataclass
class CritiqueFinding:
    code: str
    severity: str  # error | warning | suggestion
    message: str
    confidence: float
    evidence: list[str] = field(default_factory=list)  # locations / snippets

    def to_dict(self):
        return {
            "code": self.code,
            "severity": self.severity,
            "message": self.message,
            "confidence": self.confidence,
            "evidence": list(self.evidence),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["code"], d["severity"], d["message"], d["confidence"], list(d.get("evidence", [])))


def make_finding(code, message, evidence=None):
    severity, confidence = registry_entry(code)
    return CritiqueFinding(code=code, severity=severity, message=message,
                           confidence=confidence, evidence=list(evidence or []))


@dataclass
class CritiqueReport:
    recipe_id: str
    candidate_index: int
    findings: list[CritiqueFinding]
    verdict: str  # accept | revise | reject
    refinement: list[dict] = field(default_factory=list)

    @property
    def error_findings(self):
        return [f for f in self.findings if f.severity == "error"]

    def to_dict(self):
        return {
            "recipe_id": self.recipe_id,
            "candidate_index": self.candidate_index,
            "findings": [f.to_dict() for f in self.findings],
            "verdict": self.verdict,
            "refinement": list(self.refinement),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            recipe_id=d["recipe_id"],
            candidate_index=d["candidate_index"],
            findings=[CritiqueFinding.from_dict(f) for f in d["findings"]],
            verdict=d["verdict"],
            refinement=list(d.get("refinement", [])),
        )


@dataclass
class LoopOutcome:
    recipe_id: str
    final_test: GeneratedTest | None
    iterations_used: int
    status: str  # accepted | escalated_for_human_review
    history: list[tuple[GeneratedTest | None, CritiqueReport]] = field(default_factory=list)
    final_recipe: object = None

    def to_dict(self):
        return {
            "recipe_id": self.recipe_id,
            "final_test": self.final_test.to_dict() if self.final_test else None,
            "iterations_used": self.iterations_used,
            "status": self.status,
            "history": [
                {"test": t.to_dict() if t else None, "report": r.to_dict()} for t, r in self.history
            ],
        }


# ---------------------------------------------------------------------------
# The critic
# ---------------------------------------------------------------------------


def split_excerpt(source_text):
    """(logic_text, excerpt_text): excerpt lines blanked out of the logic so
    line numbers stay aligned with the original."""
    lines = source_text.splitlines()
    logic, excerpt = [], []
    inside = False
    for line in lines:
        if line.strip() == EXCERPT_BEGIN:
            inside = True
            logic.append("")
            excerpt.append("")
            continue
        if line.strip() == EXCERPT_END:
            inside = False
            logic.append("")
            excerpt.append("")
            continue
        if inside:
            excerpt.append(line)
            logic.append("")
        else:
            logic.append(line)
            excerpt.append("")
    return "\n".join(logic), "\n".join(excerpt)


def _int_literals(pattern, text):
    return {int(m) for m in re.findall(pattern, text)}


def _target_callee(recipe):
    """Leading callee/directive name from the target_construct label."""
    m = re.match(r"^([A-Za-z_][A-Za-z0-9_]*?)_line_\d+", recipe.target_construct or "")
    return m.group(1) if m else ""


def _check_adherence(recipe, logic, findings):
    conditions = getattr(recipe, "conditions", {}) or {}

    num_processes = conditions.get("num_processes")
    if num_processes is not None:
        guards = _int_literals(r"size\s*(?:!=|==)\s*(\d+)", logic)
        if not guards:
            findings.append(
                make_finding(
                    "ERR_RECIPE_CONSTRAINT_VIOLATED:NUM_PROCESSES",
                    f"the recipe fixes num_processes={num_processes} but the test has no "
                    f"process-count guard; add a size check against {num_processes}.",
                )
            )
        elif num_processes not in guards:
            findings.append(
                make_finding(
                    "ERR_RECIPE_CONSTRAINT_VIOLATED:NUM_PROCESSES",
                    f"the test guards for {sorted(guards)} processes but the recipe requires "
                    f"exactly {num_processes}.",
                    evidence=[f"size guard literals: {sorted(guards)}"],
                )
            )

    num_threads = conditions.get("num_threads")
    if num_threads is not None:
        set_calls = _int_literals(r"omp_set_num_threads\s*\(\s*(\d+)\s*\)", logic)
        if num_threads not in set_calls:
            findings.append(
                make_finding(
                    "ERR_RECIPE_CONSTRAINT_VIOLATED:NUM_THREADS",
                    f"the recipe fixes num_threads={num_threads} but the test never sets that "
                    f"thread count (found {sorted(set_calls) or 'none'}).",
                )
            )

    repetitions = conditions.get("repetitions")
    if repetitions is not None and repetitions > 1:
        bounds = _int_literals(r"<\s*(\d+)\b", logic)
        if repetitions not in bounds:
            findings.append(
                make_finding(
                    "ERR_RECIPE_CONSTRAINT_VIOLATED:REPETITIONS",
                    f"the recipe calls for {repetitions} repetitions but no loop bound in the "
                    f"test matches it.",
                )
            )

    if conditions.get("assert_on_all_ranks"):
        _check_assertion_scope(logic, findings)


_ASSERT_RE = re.compile(r"\b(MC_CHECK(?:_EQ_INT|_EQ_DOUBLE)?|ASSERT_[A-Z_]+|EXPECT_[A-Z_]+)\s*\(")


def _check_assertion_scope(logic, findings):
    """Flag tests whose every assertion is gated on rank 0 only."""
    try:
        sketch = parse_source(SourceUnit(path="<generated>", text=logic or " "))
    except ValueError:
        return
    assert_lines = [
        i + 1
        for i, line in enumerate(logic.splitlines())
        if _ASSERT_RE.search(line) and not line.lstrip().startswith("#define")
    ]
    if not assert_lines:
        return
    gated = []
    for line in assert_lines:
        blocks = sketch.enclosing_blocks(line, 1)
        is_gated = False
        for blk in blocks:
            cond = " ".join(t.text for t in blk.condition_tokens())
            if blk.kind == "if" and re.search(r"\brank\s*==\s*0|\b0\s*==\s*rank", cond) and "||" not in cond:
                is_gated = True
        gated.append(is_gated)
    if all(gated):
        findings.append(
            make_finding(
                "WARN_ASSERTION_TARGET_MISMATCH",
                "every assertion is gated on rank 0; the recipe requires assertions on every "
                "rank, not just rank 0.",
                evidence=[f"assertion lines: {assert_lines}"],
            )
        )


def _check_correctness(recipe, test, logic, full_text, findings):
    model = test.launch_spec.model

    if not re.search(r"\bint\s+main\s*\(", full_text):
        findings.append(make_finding("ERR_ENTRYPOINT_MALFORMED", "the test has no main entry point."))

    if model == "mpi":
        inits = [m.start() for m in re.finditer(r"\bMPI_Init\s*\(", logic)]
        finals = [m.start() for m in re.finditer(r"\bMPI_Finalize\s*\(", logic)]
        if not inits:
            findings.append(
                make_finding(
                    "ERR_MISSING_PARALLEL_SETUP",
                    "an MPI test must call MPI_Init before using the communicator; none found.",
                )
            )
        elif len(inits) != 1 or len(finals) != 1 or inits[0] > finals[0]:
            findings.append(
                make_finding(
                    "ERR_MPI_LIFECYCLE_MALFORMED",
                    f"MPI_Init/MPI_Finalize must each appear exactly once and in order "
                    f"(found {len(inits)} init(s), {len(finals)} finalize(s)).",
                )
            )
    elif model == "openmp":
        threads = (getattr(recipe, "conditions", {}) or {}).get("num_threads", 1)
        has_omp = bool(re.search(r"#\s*pragma\s+omp|\bomp_[a-z_]+\s*\(", full_text))
        if threads and threads > 1 and not has_omp:
            findings.append(
                make_finding(
                    "ERR_MISSING_PARALLEL_SETUP",
                    "the recipe requests a multi-threaded scenario but the test contains no "
                    "OpenMP construct or runtime call.",
                )
            )

    # The header *defines* install_watchdog; what matters is a call site.
    if not re.search(r"minicheck::install_watchdog\s*\(", logic):
        findings.append(
            make_finding(
                "ERR_MISSING_WATCHDOG",
                "the test never arms the watchdog (no minicheck::install_watchdog call), "
                "so a hang would block the harness instead of producing a timeout verdict.",
            )
        )

    if "Deadlock" in getattr(recipe, "test_type", ""):
        send = re.search(r"\bMPI_Send\s*\(", logic)
        recv = re.search(r"\bMPI_Recv\s*\(", logic)
        nonblocking = re.search(r"\bMPI_I(send|recv)\s*\(", logic)
        if send and recv and send.start() < recv.start() and not nonblocking:
            findings.append(
                make_finding(
                    "SUGGEST_RETRY_WITH_NON_BLOCKING_MPI",
                    "the test logic itself performs a blocking send-before-receive; consider "
                    "MPI_Isend/MPI_Irecv so the test cannot self-deadlock.",
                )
            )


def _check_relevance(recipe, logic, findings):
    target = getattr(recipe, "target_function", "") or ""
    callee = _target_callee(recipe)
    if target and target != "main":
        if re.search(rf"\b{re.escape(target)}\s*\(", logic):
            return
        findings.append(
            make_finding(
                "WARN_RELEVANCE_TARGET_NOT_EXERCISED",
                f"the test never invokes the target function {target!r}.",
            )
        )
        return
    # Lifecycle-style targets (main) can't be invoked; the probe must at
    # least exercise the same construct.
    if callee and callee not in logic:
        findings.append(
            make_finding(
                "WARN_RELEVANCE_TARGET_NOT_EXERCISED",
                f"the test does not exercise the target construct {callee!r}.",
            )
        )


def _refinement_for(findings):
    directives = []
    for finding in findings:
        if finding.code == "WARN_ASSERTION_TARGET_MISMATCH":
            directives.append({"op": "set_condition", "key": "assert_on_all_ranks", "value": True})
    return directives


def critique(recipe, test, metadata=None):
    """Structured report for one candidate against its recipe."""
    full_text = test.source_text
    try:
        sketch = parse_source(SourceUnit(path="<generated>", text=full_text or " "))
        parse_failed = sketch.degraded
    except ValueError:
        parse_failed = True

    findings: list[CritiqueFinding] = []
    if parse_failed:
        findings.append(
            make_finding(
                "ERR_ENTRYPOINT_MALFORMED",
                "the generated source does not parse (unbalanced braces); it cannot be analyzed.",
            )
        )
        return CritiqueReport(
            recipe_id=_recipe_label(recipe),
            candidate_index=test.candidate_index,
            findings=findings,
            verdict="reject",
        )

    logic, _excerpt = split_excerpt(full_text)
    _check_adherence(recipe, logic, findings)
    _check_correctness(recipe, test, logic, full_text, findings)
    _check_relevance(recipe, logic, findings)

    errors = [f for f in findings if f.severity == "error"]
    if not errors:
        verdict = "accept"
    elif any(f.code == "ERR_ENTRYPOINT_MALFORMED" for f in errors):
        verdict = "reject"
    else:
        verdict = "revise"
    return CritiqueReport(
        recipe_id=_recipe_label(recipe),
        candidate_index=test.candidate_index,
        findings=findings,
        verdict=verdict,
        refinement=_refinement_for(findings),
    )


# ---------------------------------------------------------------------------
# The loop
# ---------------------------------------------------------------------------

LOW_CONFIDENCE_THRESHOLD = 0.5
LOW_CONFIDENCE_STREAK_LIMIT = 3


def _recipe_label(recipe):
    """Recipes are labeled by test_id; bare targets by their construct."""
    return getattr(recipe, "test_id", "") or getattr(recipe, "target_construct", "")


def render_feedback(test, report, recipe):
    """Feedback for the next synthesis attempt: prior candidate + findings +
    the (possibly refined) recipe."""
    parts = ["Previous candidate:\n```cpp\n" + (test.source_text if test else "<none>") + "\n```"]
    if report.findings:
        lines = [f"- {f.code} (confidence {f.confidence:.1f}): {f.message}" for f in report.findings]
        parts.append("Critique findings:\n" + "\n".join(lines))
    to_json = getattr(recipe, "to_json", None)
    if to_json:
        parts.append("Updated recipe:\n" + to_json().rstrip("\n"))
    return "\n\n".join(parts)


def run_loop(recipe, source, metadata, synthesizer, max_iterations=5, critique_enabled=True):
    """Bounded synthesize -> critique -> refine cycle.

    ``synthesizer`` is a callable ``(recipe, feedback_text | None) ->
    (list[GeneratedTest], warnings)``. Backend failures consume an iteration
    and are recorded as synthetic rejection findings. With the critique
    disabled (ablation), a single synthesis is recorded and shipped as-is.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")

    history: list[tuple[GeneratedTest | None, CritiqueReport]] = []
    current = recipe
    feedback = None
    low_conf_streak = 0
    prev_test: GeneratedTest | None = None
    prev_had_errors = False

    if not critique_enabled:
        candidates, _warnings = synthesizer(current, None)
        test = candidates[0]
        report = CritiqueReport(
            recipe_id=_recipe_label(recipe),
            candidate_index=test.candidate_index,
            findings=[],
            verdict="accept",
        )
        history.append((test, report))
        return LoopOutcome(
            recipe_id=_recipe_label(recipe),
            final_test=test,
            iterations_used=1,
            status="accepted",
            history=history,
            final_recipe=current,
        )

    for iteration in range(1, max_iterations + 1):
        try:
            candidates, _warnings = synthesizer(current, feedback)
        except Exception as exc:  # backend failure: consumed iteration
            report = CritiqueReport(
                recipe_id=_recipe_label(recipe),
                candidate_index=0,
                findings=[make_finding("ERR_BACKEND_FAILURE", f"synthesis backend failed: {exc}")],
                verdict="reject",
            )
            history.append((None, report))
            feedback = f"The previous attempt failed to produce code: {exc}"
            low_conf_streak = 0
            prev_test, prev_had_errors = None, True
            continue

        reports = [critique(current, t, metadata) for t in candidates]

        accepted_idx = next((i for i, r in enumerate(reports) if r.verdict == "accept"), None)
        if accepted_idx is not None:
            test, report = candidates[accepted_idx], reports[accepted_idx]
            history.append((test, report))
            return LoopOutcome(
                recipe_id=_recipe_label(recipe),
                final_test=test,
                iterations_used=iteration,
                status="accepted",
                history=history,
                final_recipe=current,
            )

        # Best candidate: fewest errors, then lowest candidate index.
        best_idx = min(range(len(reports)), key=lambda i: (len(reports[i].error_findings), i))
        test, report = candidates[best_idx], reports[best_idx]

        if (
            prev_test is not None
            and prev_had_errors
            and test.source_text == prev_test.source_text
        ):
            report.findings.append(
                make_finding(
                    "ERR_STALE_RESUBMISSION",
                    "the candidate is byte-identical to the previous one despite error "
                    "findings; the feedback was not consumed.",
                )
            )
        history.append((test, report))

        confidences = [f.confidence for f in report.findings]
        if confidences and max(confidences) < LOW_CONFIDENCE_THRESHOLD:
            low_conf_streak += 1
            if low_conf_streak >= LOW_CONFIDENCE_STREAK_LIMIT:
                return LoopOutcome(
                    recipe_id=_recipe_label(recipe),
                    final_test=None,
                    iterations_used=iteration,
                    status="escalated_for_human_review",
                    history=history,
                    final_recipe=current,
                )
        else:
            low_conf_streak = 0

        if report.refinement:
            result = refine_recipe(current, report)
            if result.changed:
                current = result.recipe
        feedback = render_feedback(test, report, current)
        prev_test, prev_had_errors = test, bool(report.error_findings)

    return LoopOutcome(
        recipe_id=_recipe_label(recipe),
        final_test=None,
        iterations_used=max_iterations,
        status="escalated_for_human_review",
        history=history,
        final_recipe=current,
    )


def write_review_bundle(outcome, recipe, out_dir):
    """Escalation artifact: recipe + all candidates + all reports, one file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = {
        "schema_version": "1",
        "status": outcome.status,
        "iterations_used": outcome.iterations_used,
        "recipe": recipe.to_dict() if hasattr(recipe, "to_dict") else str(recipe),
        "history": [
            {"test": t.to_dict() if t else None, "report": r.to_dict()} for t, r in outcome.history
        ],
    }
    safe = re.sub(r"[^A-Za-z0-9_.]+", "_", outcome.recipe_id or "recipe")
    path = out_dir / f"review_{safe}.json"
    path.write_text(json.dumps(bundle, indent=2, sort_keys=True) + "\n")
    return path
