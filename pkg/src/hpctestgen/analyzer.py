"""Static analysis of OpenMP/MPI C and C++ sources.

Extracts parallel constructs, function signatures, lexical data-sharing
facts, and control-flow context from a syntax sketch, then matches the
loaded bug knowledge graph to flag testing areas. Output is a deterministic,
JSON-serializable metadata document.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
import shutil
import subprocess
from dataclasses import dataclass, field

from . import sketch as sk
from .sketch import Language, SourceUnit, SyntaxSketch, parse_source

SCHEMA_VERSION = "1"


class ConstructKind(enum.Enum):
    OmpParallel = "OmpParallel"
    OmpFor = "OmpFor"
    OmpParallelFor = "OmpParallelFor"
    OmpSections = "OmpSections"
    OmpSection = "OmpSection"
    OmpCritical = "OmpCritical"
    OmpAtomic = "OmpAtomic"
    OmpBarrier = "OmpBarrier"
    OmpTask = "OmpTask"
    OmpTaskwait = "OmpTaskwait"
    MpiInit = "MpiInit"
    MpiFinalize = "MpiFinalize"
    MpiSend = "MpiSend"
    MpiRecv = "MpiRecv"
    MpiIsend = "MpiIsend"
    MpiIrecv = "MpiIrecv"
    MpiBcast = "MpiBcast"
    MpiScatter = "MpiScatter"
    MpiGather = "MpiGather"
    MpiReduce = "MpiReduce"
    MpiBarrier = "MpiBarrier"
    MpiCommRank = "MpiCommRank"
    MpiCommSize = "MpiCommSize"
    Other = "Other"


OMP_KINDS = {k for k in ConstructKind if k.name.startswith("Omp")}
MPI_KINDS = {k for k in ConstructKind if k.name.startswith("Mpi")}

# Kinds whose directive opens a parallel region for data-sharing purposes.
REGION_KINDS = {ConstructKind.OmpParallel, ConstructKind.OmpParallelFor, ConstructKind.OmpSections}

CONTEXT_FLAGS = ("inside_conditional", "inside_loop", "inside_parallel_region", "rank_dependent_branch")


@dataclass(frozen=True)
class Location:
    file: str
    line: int
    column: int

    def to_dict(self):
        return {"file": self.file, "line": self.line, "column": self.column}

    @classmethod
    def from_dict(cls, d):
        return cls(d["file"], d["line"], d["column"])


@dataclass
class ParallelConstruct:
    id: str
    kind: ConstructKind
    location: Location
    clauses: list[tuple[str, str | None]] = field(default_factory=list)
    call_args: list[str] = field(default_factory=list)
    enclosing_function: str = ""
    context_flags: set[str] = field(default_factory=set)
    raw_text: str = ""  # directive text (OpenMP) or callee name (MPI)
    body_span: tuple[int, int] | None = None  # associated statement/block

    def to_dict(self):
        return {
            "id": self.id,
            "kind": self.kind.value,
            "location": self.location.to_dict(),
            "clauses": [[n, a] for n, a in self.clauses],
            "call_args": list(self.call_args),
            "enclosing_function": self.enclosing_function,
            "context_flags": sorted(self.context_flags),
            "raw_text": self.raw_text,
            "body_span": list(self.body_span) if self.body_span else None,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            id=d["id"],
            kind=ConstructKind(d["kind"]),
            location=Location.from_dict(d["location"]),
            clauses=[(n, a) for n, a in d["clauses"]],
            call_args=list(d["call_args"]),
            enclosing_function=d["enclosing_function"],
            context_flags=set(d["context_flags"]),
            raw_text=d["raw_text"],
            body_span=tuple(d["body_span"]) if d["body_span"] else None,
        )

    def clause_named(self, name):
        return [a for (n, a) in self.clauses if n == name]


@dataclass
class FunctionInfo:
    id: str
    name: str
    return_type_text: str
    parameter_texts: list[str]
    location: Location
    body_span: tuple[int, int]

    def to_dict(self):
        return {
            "id": self.id,
            "name": self.name,
            "return_type_text": self.return_type_text,
            "parameter_texts": list(self.parameter_texts),
            "location": self.location.to_dict(),
            "body_span": list(self.body_span),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            id=d["id"],
            name=d["name"],
            return_type_text=d["return_type_text"],
            parameter_texts=list(d["parameter_texts"]),
            location=Location.from_dict(d["location"]),
            body_span=tuple(d["body_span"]),
        )


@dataclass
class DataFlowFact:
    variable: str
    declared_scope: str  # "outside_parallel" | "inside_parallel"
    accesses: list[tuple[Location, str]]  # mode: read | write | read_write
    sharing: str  # shared_implicit|shared_explicit|private|firstprivate|reduction|unknown
    guarded_by: set[str]  # subset of {critical, atomic, none}
    region_construct_id: str = ""  # parallel construct owning the region

    def to_dict(self):
        return {
            "variable": self.variable,
            "declared_scope": self.declared_scope,
            "accesses": [{"location": loc.to_dict(), "mode": m} for loc, m in self.accesses],
            "sharing": self.sharing,
            "guarded_by": sorted(self.guarded_by),
            "region_construct_id": self.region_construct_id,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            variable=d["variable"],
            declared_scope=d["declared_scope"],
            accesses=[(Location.from_dict(a["location"]), a["mode"]) for a in d["accesses"]],
            sharing=d["sharing"],
            guarded_by=set(d["guarded_by"]),
            region_construct_id=d["region_construct_id"],
        )


@dataclass
class TestingArea:
    construct_id: str
    pattern_id: str
    description: str
    test_type: str
    severity: str  # info | warn | high

    def to_dict(self):
        return {
            "construct_id": self.construct_id,
            "pattern_id": self.pattern_id,
            "description": self.description,
            "test_type": self.test_type,
            "severity": self.severity,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["construct_id"], d["pattern_id"], d["description"], d["test_type"], d["severity"])


@dataclass
class LintIssue:
    location: Location
    code: str
    message: str

    def to_dict(self):
        return {"location": self.location.to_dict(), "code": self.code, "message": self.message}

    @classmethod
    def from_dict(cls, d):
        return cls(Location.from_dict(d["location"]), d["code"], d["message"])


@dataclass(frozen=True)
class SourceRef:
    path: str
    language: str
    text_sha256: str

    def to_dict(self):
        return {"path": self.path, "language": self.language, "text_sha256": self.text_sha256}

    @classmethod
    def from_dict(cls, d):
        return cls(d["path"], d["language"], d["text_sha256"])

    @classmethod
    def of(cls, unit):
        digest = hashlib.sha256(unit.text.encode("utf-8")).hexdigest()
        return cls(path=unit.path, language=unit.language.value, text_sha256=digest)


@dataclass
class AnalysisMetadata:
    source: SourceRef
    constructs: list[ParallelConstruct]
    functions: list[FunctionInfo]
    data_flow: list[DataFlowFact]
    control_flow: list[tuple[str, list[str]]]  # (construct_id, sorted flags)
    testing_areas: list[TestingArea]
    lint_issues: list[LintIssue]
    flags: list[str] = field(default_factory=list)

    def construct_by_id(self, cid):
        for c in self.constructs:
            if c.id == cid:
                return c
        return None

    def function_by_id(self, fid):
        for f in self.functions:
            if f.id == fid:
                return f
        return None

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "source": self.source.to_dict(),
            "constructs": [c.to_dict() for c in self.constructs],
            "functions": [f.to_dict() for f in self.functions],
            "data_flow": [f.to_dict() for f in self.data_flow],
            "control_flow": [{"construct_id": cid, "context_flags": flags} for cid, flags in self.control_flow],
            "testing_areas": [a.to_dict() for a in self.testing_areas],
            "lint_issues": [i.to_dict() for i in self.lint_issues],
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported metadata schema_version: {d.get('schema_version')!r}")
        return cls(
            source=SourceRef.from_dict(d["source"]),
            constructs=[ParallelConstruct.from_dict(c) for c in d["constructs"]],
            functions=[FunctionInfo.from_dict(f) for f in d["functions"]],
            data_flow=[DataFlowFact.from_dict(f) for f in d["data_flow"]],
            control_flow=[(e["construct_id"], list(e["context_flags"])) for e in d["control_flow"]],
            testing_areas=[TestingArea.from_dict(a) for a in d["testing_areas"]],
            lint_issues=[LintIssue.from_dict(i) for i in d["lint_issues"]],
            flags=list(d["flags"]),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# OpenMP directive extraction
# ---------------------------------------------------------------------------

_OMP_DIRECTIVE_KINDS = [
    (("parallel", "for"), ConstructKind.OmpParallelFor),
    (("parallel", "sections"), ConstructKind.OmpSections),
    (("parallel",), ConstructKind.OmpParallel),
    (("for",), ConstructKind.OmpFor),
    (("sections",), ConstructKind.OmpSections),
    (("section",), ConstructKind.OmpSection),
    (("critical",), ConstructKind.OmpCritical),
    (("atomic",), ConstructKind.OmpAtomic),
    (("barrier",), ConstructKind.OmpBarrier),
    (("task",), ConstructKind.OmpTask),
    (("taskwait",), ConstructKind.OmpTaskwait),
]


def _classify_directive(words):
    for prefix, kind in _OMP_DIRECTIVE_KINDS:
        if tuple(words[: len(prefix)]) == prefix:
            return kind, len(prefix)
    return ConstructKind.Other, 0


def _tokenize_clauses(text):
    """Split ``reduction(+:total) schedule(static, 16) nowait`` into pairs."""
    clauses: list[tuple[str, str | None]] = []
    i = 0
    n = len(text)
    while i < n:
        m = _CLAUSE_NAME_RE.match(text, i)
        if not m:
            i += 1
            continue
        name = m.group(0)
        j = m.end()
        while j < n and text[j] in " \t":
            j += 1
        if j < n and text[j] == "(":
            depth = 0
            k = j
            while k < n:
                if text[k] == "(":
                    depth += 1
                elif text[k] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                k += 1
            arg = re.sub(r"\s+", "", text[j + 1:k])
            clauses.append((name, arg))
            i = k + 1
        else:
            clauses.append((name, None))
            i = j
    return clauses


_CLAUSE_NAME_RE = re.compile(r"[a-z_]+")


def extract_openmp_directives(sketch):
    """One ParallelConstruct per ``#pragma omp`` line."""
    constructs = []
    path = sketch.unit.path
    for pragma in sketch.pragmas:
        directive = re.sub(r"^#\s*pragma\s+omp\s*", "", pragma.text)
        words = directive.split()
        kind, consumed = _classify_directive(words)
        clause_text = directive
        if consumed:
            # Drop the directive-name words; what's left is the clause list.
            pattern = r"^\s*" + r"\s+".join(re.escape(w) for w in words[:consumed])
            clause_text = re.sub(pattern, "", directive, count=1)
        clauses = _tokenize_clauses(clause_text) if consumed else []
        col = 1
        fn = sketch.enclosing_function(pragma.line)
        construct = ParallelConstruct(
            id="",
            kind=kind,
            location=Location(path, pragma.line, col),
            clauses=clauses,
            call_args=[],
            enclosing_function=fn.name if fn else "",
            raw_text=pragma.text,
            body_span=sk.pragma_association_span(sketch, pragma),
        )
        constructs.append(construct)
    return constructs


# ---------------------------------------------------------------------------
# MPI call extraction
# ---------------------------------------------------------------------------

_MPI_NAME_RE = re.compile(r"MPI_[A-Z][A-Za-z_]*")

_MPI_KIND_BY_NAME = {
    "MPI_Init": ConstructKind.MpiInit,
    "MPI_Finalize": ConstructKind.MpiFinalize,
    "MPI_Send": ConstructKind.MpiSend,
    "MPI_Recv": ConstructKind.MpiRecv,
    "MPI_Isend": ConstructKind.MpiIsend,
    "MPI_Irecv": ConstructKind.MpiIrecv,
    "MPI_Bcast": ConstructKind.MpiBcast,
    "MPI_Scatter": ConstructKind.MpiScatter,
    "MPI_Gather": ConstructKind.MpiGather,
    "MPI_Reduce": ConstructKind.MpiReduce,
    "MPI_Barrier": ConstructKind.MpiBarrier,
    "MPI_Comm_rank": ConstructKind.MpiCommRank,
    "MPI_Comm_size": ConstructKind.MpiCommSize,
}


def extract_mpi_calls(sketch):
    """One ParallelConstruct per ``MPI_Xxx(...)`` call expression."""
    constructs = []
    tokens = sketch.tokens
    path = sketch.unit.path
    for idx, tok in enumerate(tokens):
        if tok.kind != "ident" or not _MPI_NAME_RE.fullmatch(tok.text):
            continue
        if idx + 1 >= len(tokens) or tokens[idx + 1].text != "(":
            continue  # bare identifier (e.g. MPI_COMM_WORLD as an argument)
        close = sk._match_paren(tokens, idx + 1)
        if close < 0:
            continue
        args = sk.split_top_level_commas(tokens[idx + 2:close])
        kind = _MPI_KIND_BY_NAME.get(tok.text, ConstructKind.Other)
        fn = sketch.enclosing_function(tok.line)
        constructs.append(
            ParallelConstruct(
                id="",
                kind=kind,
                location=Location(path, tok.line, tok.col),
                clauses=[],
                call_args=[sk.render_tokens(g) for g in args],
                enclosing_function=fn.name if fn else "",
                raw_text=tok.text,
            )
        )
    return constructs


def _assign_ids(constructs, path):
    seen = set()
    for c in sorted(constructs, key=lambda c: (c.location.line, c.location.column)):
        base = f"{c.kind.value}@{path}:{c.location.line}"
        cid = base if base not in seen else f"{base}:{c.location.column}"
        n = 2
        while cid in seen:
            cid = f"{base}:{c.location.column}#{n}"
            n += 1
        seen.add(cid)
        c.id = cid


# ---------------------------------------------------------------------------
# Control flow
# ---------------------------------------------------------------------------


def _rank_variables(sketch):
    """Variables written through an MPI_Comm_rank output argument, per function."""
    by_function: dict[str, set[str]] = {}
    tokens = sketch.tokens
    for idx, tok in enumerate(tokens):
        if tok.kind != "ident" or tok.text != "MPI_Comm_rank":
            continue
        if idx + 1 >= len(tokens) or tokens[idx + 1].text != "(":
            continue
        close = sk._match_paren(tokens, idx + 1)
        if close < 0:
            continue
        args = sk.split_top_level_commas(tokens[idx + 2:close])
        if len(args) < 2:
            continue
        names = [t.text for t in args[1] if t.kind == "ident"]
        if not names:
            continue
        fn = sketch.enclosing_function(tok.line)
        key = fn.name if fn else ""
        by_function.setdefault(key, set()).add(names[-1])
    return by_function


def analyze_control_flow(sketch, constructs):
    """Set context flags on each construct; return (id, flags) summaries."""
    rank_vars = _rank_variables(sketch)
    region_spans = [
        (c.body_span, c) for c in constructs if c.kind in REGION_KINDS and c.body_span
    ]
    for c in constructs:
        line, col = c.location.line, c.location.column
        flags = set()
        fn_key = c.enclosing_function
        fn_rank_vars = rank_vars.get(fn_key, set())
        for blk in sketch.enclosing_blocks(line, col):
            kind = blk.kind
            if kind in ("if", "else", "switch"):
                flags.add("inside_conditional")
                cond_idents = {t.text for t in blk.condition_tokens() if t.kind == "ident"}
                if cond_idents & fn_rank_vars:
                    flags.add("rank_dependent_branch")
            elif kind in ("for", "while", "do"):
                flags.add("inside_loop")
        for (span, region) in region_spans:
            if region is c:
                continue
            if span[0] <= line <= span[1]:
                flags.add("inside_parallel_region")
        c.context_flags = flags
    return [(c.id, sorted(c.context_flags)) for c in constructs]


# ---------------------------------------------------------------------------
# Data-flow facts
# ---------------------------------------------------------------------------

_TYPE_KEYWORDS = {
    "void", "int", "long", "short", "char", "float", "double", "bool", "auto",
    "unsigned", "signed", "size_t", "ssize_t", "int8_t", "int16_t", "int32_t",
    "int64_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t", "const", "static",
    "volatile", "register",
}

_COMPOUND_ASSIGN = {"+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}

# Directives whose dynamic extent serializes execution to one thread; writes
# inside them are not concurrent and must not look like races.
_SERIALIZED_DIRECTIVES = ("single", "master", "masked")


def _sharing_from_clauses(region, var):
    for name, arg in region.clauses:
        if arg is None:
            continue
        if name == "reduction":
            vars_part = arg.split(":", 1)[-1]
            if var in [v.strip() for v in vars_part.split(",")]:
                return "reduction"
        elif name in ("private", "firstprivate", "lastprivate"):
            if var in [v.strip() for v in arg.split(",")]:
                return "private" if name != "firstprivate" else "firstprivate"
        elif name == "shared":
            if var in [v.strip() for v in arg.split(",")]:
                return "shared_explicit"
    return None


def _loop_control_var(sketch, region):
    """Loop variable of the `for` statement a worksharing-loop pragma governs."""
    for i, tok in enumerate(sketch.tokens):
        if tok.line <= region.location.line:
            continue
        if tok.kind == "ident" and tok.text == "for":
            if i + 1 < len(sketch.tokens) and sketch.tokens[i + 1].text == "(":
                close = sk._match_paren(sketch.tokens, i + 1)
                init = []
                for t in sketch.tokens[i + 2:close]:
                    if t.text == ";":
                        break
                    init.append(t)
                idents = [t.text for t in init if t.kind == "ident" and t.text not in _TYPE_KEYWORDS]
                return idents[0] if idents else None
        if tok.line > region.location.line + 1 and tok.text in ("{", ";"):
            break
    return None


def _declaration_lines(sketch, var):
    """Lines where ``var`` is declared, per the lexical type-keyword heuristic."""
    lines = []
    tokens = sketch.tokens
    for idx, tok in enumerate(tokens):
        if tok.kind != "ident" or tok.text != var or idx == 0:
            continue
        prev = tokens[idx - 1]
        k = idx - 1
        while k >= 0 and tokens[k].text in ("*", "&", "const"):
            k -= 1
        if k < 0:
            continue
        anchor = tokens[k]
        if anchor.kind == "ident" and (anchor.text in _TYPE_KEYWORDS or anchor.text.endswith("_t")):
            lines.append(tok.line)
        elif prev.text in ("*", "&") and anchor.kind == "ident" and anchor.text[0].isupper():
            lines.append(tok.line)
    return lines


def _address_taken(sketch, var, span):
    tokens = sketch.tokens
    for idx, tok in enumerate(tokens):
        if not (span[0] <= tok.line <= span[1]):
            continue
        if tok.text != "&" or idx + 1 >= len(tokens):
            continue
        nxt = tokens[idx + 1]
        if nxt.kind == "ident" and nxt.text == var:
            prev = tokens[idx - 1] if idx > 0 else None
            if prev is None or prev.kind == "punct" and prev.text not in (")", "]"):
                return True
    return False


def _serialized_spans(sketch):
    """Spans of single/master blocks plus critical/atomic guard spans."""
    serialized = []
    guards = []
    for pragma in sketch.pragmas:
        directive = re.sub(r"^#\s*pragma\s+omp\s*", "", pragma.text)
        head = directive.split("(")[0].split()
        if not head:
            continue
        span = sk.pragma_association_span(sketch, pragma)
        if head[0] in _SERIALIZED_DIRECTIVES:
            serialized.append(span)
        elif head[0] == "critical":
            guards.append((span, "critical"))
        elif head[0] == "atomic":
            guards.append((span, "atomic"))
    return serialized, guards


def analyze_data_dependencies(sketch, constructs):
    """Facts for variables written inside parallel regions.

    Lexical and intraprocedural: subscripted element writes and member writes
    are skipped (per-index writes are the dominant correct idiom), writes in
    single/master blocks are serialized and skipped, and any address-taken
    variable degrades to sharing=unknown.
    """
    facts: list[DataFlowFact] = []
    tokens = sketch.tokens
    path = sketch.unit.path
    serialized, guards = _serialized_spans(sketch)
    regions = [c for c in constructs if c.kind in REGION_KINDS and c.body_span]

    for region in regions:
        span = region.body_span
        fn = sketch.enclosing_function(region.location.line)
        fn_span = fn.body_span if fn else span
        writes: dict[str, list[tuple[Location, str]]] = {}

        for idx, tok in enumerate(tokens):
            if not (span[0] <= tok.line <= span[1]):
                continue
            if any(s[0] <= tok.line <= s[1] for s in serialized):
                continue
            var, mode, loc = None, None, None
            if tok.kind == "ident":
                nxt = tokens[idx + 1] if idx + 1 < len(tokens) else None
                prev = tokens[idx - 1] if idx > 0 else None
                if nxt is None:
                    continue
                if prev is not None and prev.text in (".", "->"):
                    continue
                if nxt.text == "[":  # element write: skipped by design
                    continue
                if nxt.text == "=" and (idx + 2 >= len(tokens) or tokens[idx + 2].text != "="):
                    var, mode = tok.text, "write"
                elif nxt.text in _COMPOUND_ASSIGN:
                    var, mode = tok.text, "read_write"
                elif nxt.text in ("++", "--") or (prev is not None and prev.text in ("++", "--")):
                    var, mode = tok.text, "read_write"
                if var is not None:
                    loc = Location(path, tok.line, tok.col)
            if var is None or var in _TYPE_KEYWORDS:
                continue
            writes.setdefault(var, []).append((loc, mode))

        loop_var = None
        if region.kind in (ConstructKind.OmpParallelFor, ConstructKind.OmpFor):
            loop_var = _loop_control_var(sketch, region)

        reduction_vars = set()
        for name, arg in region.clauses:
            if name == "reduction" and arg:
                reduction_vars.update(v.strip() for v in arg.split(":", 1)[-1].split(","))

        for var in sorted(set(writes) | ({loop_var} if loop_var else set()) | reduction_vars):
            accesses = writes.get(var, [])
            decl_lines = _declaration_lines(sketch, var)
            declared_inside = any(span[0] <= ln <= span[1] for ln in decl_lines)
            declared_outside = any(not (span[0] <= ln <= span[1]) for ln in decl_lines)
            is_loop_var = var == loop_var

            if not accesses and not is_loop_var and var not in reduction_vars:
                continue
            # Main rule: assigned in region and declared outside it. The loop
            # control variable is privatized by the runtime and always reported.
            if not is_loop_var and var not in reduction_vars:
                if declared_inside and not declared_outside:
                    continue
                if not decl_lines and fn and var in _param_names(fn):
                    declared_outside = True
                if not declared_outside and decl_lines:
                    continue

            sharing = _sharing_from_clauses(region, var)
            if sharing is None and is_loop_var:
                sharing = "private"
            if sharing is None:
                sharing = "shared_implicit"
            if _address_taken(sketch, var, fn_span):
                sharing = "unknown"

            guarded = set()
            write_accesses = accesses or ([(Location(path, region.location.line, 1), "read_write")] if is_loop_var or var in reduction_vars else [])
            for loc, _mode in write_accesses:
                guard = None
                for gspan, gkind in guards:
                    if gspan[0] <= loc.line <= gspan[1]:
                        guard = gkind
                        break
                guarded.add(guard or "none")

            scope = "inside_parallel" if (declared_inside and not declared_outside) else "outside_parallel"
            facts.append(
                DataFlowFact(
                    variable=var,
                    declared_scope=scope,
                    accesses=write_accesses,
                    sharing=sharing,
                    guarded_by=guarded,
                    region_construct_id=region.id,
                )
            )
    facts.sort(key=lambda f: (f.region_construct_id, f.variable))
    return facts


def _param_names(fn):
    names = []
    for p in fn.parameter_texts:
        m = re.search(r"([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[\s*\d*\s*\])?$", p)
        if m:
            names.append(m.group(1))
    return names


# ---------------------------------------------------------------------------
# Lint (optional clang-tidy integration)
# ---------------------------------------------------------------------------

_DIAG_RE = re.compile(r"^(?P<file>[^:\n]+):(?P<line>\d+):(?P<col>\d+):\s*(?:warning|error):\s*(?P<msg>.*?)\s*\[(?P<code>[^\]]+)\]\s*$")


class LinterCrashed(Exception):
    def __init__(self, exit_code):
        super().__init__(f"linter crashed with exit code {exit_code}")
        self.exit_code = exit_code


def parse_lint_output(text):
    issues = []
    for line in text.splitlines():
        m = _DIAG_RE.match(line.strip())
        if not m:
            continue
        issues.append(
            LintIssue(
                location=Location(m.group("file"), int(m.group("line")), int(m.group("col"))),
                code=m.group("code"),
                message=m.group("msg"),
            )
        )
    return issues


def run_lint(unit, config):
    """Run the configured linter; always returns a (issues, flags) pair."""
    if not config or not config.get("enabled"):
        return [], ["lint_skipped"]
    binary = config.get("binary", "clang-tidy")
    if shutil.which(binary) is None:
        return [], ["lint_skipped"]
    args = [binary, unit.path] + list(config.get("args", ["--", "-fopenmp"]))
    try:
        proc = subprocess.run(args, capture_output=True, text=True, timeout=config.get("timeout", 60))
    except (OSError, subprocess.TimeoutExpired):
        return [], ["lint_warning:linter_crashed"]
    if proc.returncode not in (0, 1):
        return [], [f"lint_warning:linter_crashed:{proc.returncode}"]
    return parse_lint_output(proc.stdout), []


# ---------------------------------------------------------------------------
# Full analysis
# ---------------------------------------------------------------------------


def analyze_source(unit, kg, config=None):
    """Run the complete analysis sequence over one source unit.

    Parse, extract OpenMP + MPI constructs, derive data/control flow, then
    match every construct against the knowledge graph to collect testing
    areas. Deterministic for fixed inputs.
    """
    from . import kg as kgmod  # local import; kg depends on analyzer types

    config = config or {}
    sketch = parse_source(unit)
    constructs = extract_openmp_directives(sketch) + extract_mpi_calls(sketch)
    _assign_ids(constructs, unit.path)
    constructs.sort(key=lambda c: (c.location.line, c.location.column))
    control_flow = analyze_control_flow(sketch, constructs)
    data_flow = analyze_data_dependencies(sketch, constructs)

    functions = [
        FunctionInfo(
            id=f"{fn.name}@{unit.path}:{fn.line}",
            name=fn.name,
            return_type_text=fn.return_type_text,
            parameter_texts=fn.parameter_texts,
            location=Location(unit.path, fn.line, fn.col),
            body_span=fn.body_span,
        )
        for fn in sorted(sketch.functions, key=lambda f: (f.line, f.col))
    ]

    lint_issues, lint_flags = run_lint(unit, config.get("lint"))

    metadata = AnalysisMetadata(
        source=SourceRef.of(unit),
        constructs=constructs,
        functions=functions,
        data_flow=data_flow,
        control_flow=control_flow,
        testing_areas=[],
        lint_issues=lint_issues,
        flags=sorted(set(lint_flags) | ({"degraded:unbalanced_braces"} if sketch.degraded else set())),
    )

    areas = []
    for construct in metadata.constructs:
        for pattern in kgmod.query(kg, construct.kind):
            evidence = kgmod.match(pattern, construct, metadata)
            if evidence is not None:
                areas.append(
                    TestingArea(
                        construct_id=construct.id,
                        pattern_id=pattern.id,
                        description=pattern.description,
                        test_type=pattern.test_type,
                        severity=pattern.severity,
                    )
                )
    metadata.testing_areas = areas
    return metadata
