"""Bug knowledge graph: curated patterns with declarative match predicates.

The graph is a single JSON document (see ``data/schemas/kg.schema.json``).
Each pattern names the construct kinds it applies to and a conjunction of
atoms evaluated against one construct plus the surrounding analysis
metadata. Matching is pure: no external state, no side effects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .analyzer import AnalysisMetadata, ConstructKind, ParallelConstruct


class SchemaViolation(Exception):
    pass


class DuplicatePatternId(Exception):
    def __init__(self, pattern_id):
        super().__init__(f"duplicate pattern id: {pattern_id}")
        self.pattern_id = pattern_id


@dataclass(frozen=True)
class MatchAtom:
    """One condition in a predicate conjunction."""

    atom: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"atom": self.atom, "params": dict(self.params)}


@dataclass
class BugPattern:
    id: str
    construct_kinds: set[ConstructKind]
    description: str
    test_type: str
    severity: str  # info | warn | high
    predicate: list[MatchAtom]
    references: list[str] = field(default_factory=list)


@dataclass
class KnowledgeGraph:
    patterns: list[BugPattern]
    index: dict[ConstructKind, list[str]]
    version: str

    def pattern_by_id(self, pid):
        for p in self.patterns:
            if p.id == pid:
                return p
        return None


@dataclass
class MatchEvidence:
    pattern_id: str
    construct_id: str
    satisfied_conditions: list[str]
    bound_variables: dict[str, str]

    def to_dict(self):
        return {
            "pattern_id": self.pattern_id,
            "construct_id": self.construct_id,
            "satisfied_conditions": list(self.satisfied_conditions),
            "bound_variables": dict(self.bound_variables),
        }


KNOWN_ATOMS = {
    "has_clause",
    "lacks_clause",
    "context_has",
    "context_lacks",
    "region_write",
    "sibling",
    "no_sibling",
}


def _load_schema():
    text = resources.files("hpctestgen.data.schemas").joinpath("kg.schema.json").read_text()
    return json.loads(text)


def load_kg_dict(doc):
    """Validate and build a KnowledgeGraph from an already-parsed document."""
    try:
        jsonschema.validate(doc, _load_schema())
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(str(exc.message)) from exc

    patterns = []
    seen = set()
    for entry in doc["patterns"]:
        if entry["id"] in seen:
            raise DuplicatePatternId(entry["id"])
        seen.add(entry["id"])
        try:
            kinds = {ConstructKind(k) for k in entry["construct_kinds"]}
        except ValueError as exc:
            raise SchemaViolation(f"unknown construct kind in pattern {entry['id']}: {exc}") from exc
        atoms = [MatchAtom(a["atom"], a.get("params", {})) for a in entry.get("predicate", [])]
        for atom in atoms:
            if atom.atom not in KNOWN_ATOMS:
                raise SchemaViolation(f"unknown predicate atom {atom.atom!r} in pattern {entry['id']}")
        patterns.append(
            BugPattern(
                id=entry["id"],
                construct_kinds=kinds,
                description=entry["description"],
                test_type=entry["test_type"],
                severity=entry["severity"],
                predicate=atoms,
                references=list(entry.get("references", [])),
            )
        )
    patterns.sort(key=lambda p: p.id)
    index: dict[ConstructKind, list[str]] = {}
    for p in patterns:
        for kind in p.construct_kinds:
            index.setdefault(kind, []).append(p.id)
    for ids in index.values():
        ids.sort()
    return KnowledgeGraph(patterns=patterns, index=index, version=doc.get("version", "0"))


def load_kg(path):
    """Load and validate a knowledge-graph JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return load_kg_dict(doc)


def load_seed_kg():
    """The curated seed graph shipped with the package."""
    text = resources.files("hpctestgen.data").joinpath("seed_kg.json").read_text()
    return load_kg_dict(json.loads(text))


def query(kg, kind):
    """All patterns applicable to a construct kind, in stable id order."""
    return [kg.pattern_by_id(pid) for pid in kg.index.get(kind, [])]


# ---------------------------------------------------------------------------
# Predicate evaluation
# ---------------------------------------------------------------------------


def _eval_has_clause(atom, construct, metadata):
    name = atom.params["name"]
    for cname, carg in construct.clauses:
        if cname != name:
            continue
        want = atom.params.get("arg_contains")
        if want is None or (carg is not None and want in carg):
            return f"clause {name} present", {}
    return None


def _eval_lacks_clause(atom, construct, metadata):
    name = atom.params["name"]
    if any(cname == name for cname, _ in construct.clauses):
        return None
    return f"clause {name} absent", {}


def _eval_context_has(atom, construct, metadata):
    flags = set(atom.params["flags"])
    if flags <= construct.context_flags:
        return f"context has {sorted(flags)}", {}
    return None


def _eval_context_lacks(atom, construct, metadata):
    flags = set(atom.params["flags"])
    if flags & construct.context_flags:
        return None
    return f"context lacks {sorted(flags)}", {}


def _eval_region_write(atom, construct, metadata):
    sharing = set(atom.params.get("sharing", []))
    guarded = set(atom.params.get("guarded", []))
    modes = set(atom.params.get("modes", []))
    scope = atom.params.get("declared_scope")
    for fact in metadata.data_flow:
        if fact.region_construct_id != construct.id:
            continue
        if sharing and fact.sharing not in sharing:
            continue
        if guarded and fact.guarded_by != guarded:
            continue
        if modes and not any(m in modes for _loc, m in fact.accesses):
            continue
        if scope and fact.declared_scope != scope:
            continue
        bind = atom.params.get("bind", "variable")
        return (
            f"write to {fact.variable} (sharing={fact.sharing}, guarded_by={sorted(fact.guarded_by)})",
            {bind: fact.variable},
        )
    return None


def _describe(construct):
    return f"{construct.raw_text or construct.kind.value}@{construct.location.line}"


def _eval_sibling(atom, construct, metadata):
    kind = ConstructKind(atom.params["kind"])
    order = atom.params.get("order", "any")
    for other in metadata.constructs:
        if other.id == construct.id or other.kind != kind:
            continue
        if other.enclosing_function != construct.enclosing_function:
            continue
        if order == "after" and other.location.line <= construct.location.line:
            continue
        if order == "before" and other.location.line >= construct.location.line:
            continue
        bound = {}
        bind = atom.params.get("bind")
        if bind:
            bound[bind] = other.id
        return f"sibling {kind.value} at line {other.location.line} ({order})", bound
    return None


def _eval_no_sibling(atom, construct, metadata):
    kind = ConstructKind(atom.params["kind"])
    for other in metadata.constructs:
        if other.id == construct.id or other.kind != kind:
            continue
        if other.enclosing_function != construct.enclosing_function:
            continue
        return None
    return f"no sibling {kind.value} in function", {}


_ATOM_EVAL = {
    "has_clause": _eval_has_clause,
    "lacks_clause": _eval_lacks_clause,
    "context_has": _eval_context_has,
    "context_lacks": _eval_context_lacks,
    "region_write": _eval_region_write,
    "sibling": _eval_sibling,
    "no_sibling": _eval_no_sibling,
}


def match(pattern, construct, metadata):
    """Evidence iff every predicate atom holds for the construct; else None."""
    if construct.kind not in pattern.construct_kinds:
        return None
    satisfied = []
    bound: dict[str, str] = {}
    for atom in pattern.predicate:
        result = _ATOM_EVAL[atom.atom](atom, construct, metadata)
        if result is None:
            return None
        desc, binds = result
        satisfied.append(f"{atom.atom}: {desc}")
        bound.update(binds)
    if not pattern.predicate:
        satisfied.append(f"construct kind {construct.kind.value} applies")
    return MatchEvidence(
        pattern_id=pattern.id,
        construct_id=construct.id,
        satisfied_conditions=satisfied,
        bound_variables=bound,
    )
