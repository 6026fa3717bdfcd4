"""Lightweight concrete-syntax sketch for C/C++ sources.

This is deliberately not a compiler frontend: it tokenizes, matches braces
into a block tree, preserves preprocessor pragma lines verbatim (joining
backslash continuations), and locates function definitions by the
``ident ( params ) {`` shape. That is enough to scope OpenMP pragmas,
extract call expressions, and classify variables lexically.

Limitations (documented, by design): no macro expansion, no template
instantiation, and control bodies without braces are not tracked as blocks.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field


class Language(enum.Enum):
    C = "C"
    CPP = "CPP"


@dataclass(frozen=True)
class SourceUnit:
    """One input source file: path label, UTF-8 text, language."""

    path: str
    text: str
    language: Language = Language.CPP

    @classmethod
    def from_file(cls, filename, path_label=None, language=None):
        with open(filename, "rb") as fh:
            text = fh.read().decode("utf-8")
        if language is None:
            lang = Language.C if str(filename).endswith(".c") else Language.CPP
        else:
            lang = language
        return cls(path=path_label or str(filename), text=text, language=lang)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | "punct" | "string" | "char"
    text: str
    line: int  # 1-based
    col: int  # 1-based

    def __repr__(self):
        return f"Token({self.text!r}@{self.line}:{self.col})"


@dataclass(frozen=True)
class PragmaLine:
    """A preprocessor pragma with backslash continuations joined."""

    line: int  # line of the '#'
    text: str  # normalized single-line text, single-spaced


@dataclass
class Block:
    """A brace-delimited block with its control-flow introducer."""

    open_line: int
    open_col: int
    close_line: int = -1
    close_col: int = -1
    parent: "Block | None" = None
    children: list["Block"] = field(default_factory=list)
    # Tokens between the previous statement boundary and this '{'
    # (e.g. ``if ( rank == 0 )`` or ``for ( int i = 0 ; ... )``).
    introducer: list[Token] = field(default_factory=list)
    # For ``else`` blocks: condition tokens inherited from the paired if.
    paired_condition: list[Token] = field(default_factory=list)

    @property
    def kind(self):
        """Introducer keyword: if/else/for/while/do/switch or ''."""
        for tok in self.introducer:
            if tok.kind == "ident" and tok.text in _CONTROL_KEYWORDS:
                return tok.text
        return ""

    def condition_tokens(self):
        """Tokens inside the introducer's parenthesized condition."""
        if self.kind == "else":
            return list(self.paired_condition)
        out, depth = [], 0
        for tok in self.introducer:
            if tok.text == "(":
                depth += 1
                continue
            if tok.text == ")":
                depth -= 1
                continue
            if depth > 0:
                out.append(tok)
        return out

    def contains_line(self, line):
        return self.open_line <= line <= self.close_line

    def __repr__(self):
        return f"Block({self.open_line}:{self.open_col}..{self.close_line})"


@dataclass
class FunctionNode:
    name: str
    return_type_text: str
    parameter_texts: list[str]
    line: int
    col: int
    body: Block

    @property
    def body_span(self):
        return (self.body.open_line, self.body.close_line)


@dataclass
class SyntaxSketch:
    """parse_source output: tokens + pragma lines + block tree + functions."""

    unit: SourceUnit
    tokens: list[Token]
    pragmas: list[PragmaLine]
    blocks: list[Block]  # top-level blocks, children nested
    all_blocks: list[Block]  # flat, in open order
    functions: list[FunctionNode]
    degraded: bool = False
    errors: list[str] = field(default_factory=list)

    def enclosing_function(self, line):
        """Innermost function whose body span contains the line."""
        best = None
        for fn in self.functions:
            lo, hi = fn.body_span
            if lo <= line <= hi:
                if best is None or fn.body.open_line > best.body.open_line:
                    best = fn
        return best

    def enclosing_blocks(self, line, col):
        """Blocks containing the position, outermost first."""
        out = []
        for blk in self.all_blocks:
            if blk.close_line < 0:
                continue
            if (blk.open_line, blk.open_col) < (line, col) <= (blk.close_line, blk.close_col):
                out.append(blk)
        out.sort(key=lambda b: (b.open_line, b.open_col))
        return out


class UnbalancedBraces(Exception):
    """Raised internally; parse_source degrades instead of propagating."""

    def __init__(self, line):
        super().__init__(f"unbalanced brace at line {line}")
        self.line = line


_CONTROL_KEYWORDS = {"if", "else", "for", "while", "do", "switch", "catch"}
_NOT_FUNCTION_NAMES = _CONTROL_KEYWORDS | {"return", "sizeof", "defined", "alignof", "new", "delete"}

# Multi-char operators, longest first so maximal munch works.
_MULTI_OPS = [
    "<<=", ">>=", "...", "->*", "::", "->", "++", "--", "<<", ">>", "<=", ">=",
    "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"(?:0[xX][0-9a-fA-F']+|[0-9][0-9a-fA-F.eExXpP'+-]*)")
_WS_RE = re.compile(r"[ \t\r]+")


def _join_continuations(text, start):
    """Consume a preprocessor line from ``start``; honor backslash newlines.

    Returns (normalized_text, next_index, lines_consumed).
    """
    parts = []
    i = start
    lines = 1
    buf = []
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text) and text[i + 1] == "\n":
            parts.append("".join(buf))
            buf = []
            lines += 1
            i += 2
            continue
        if ch == "\n":
            break
        buf.append(ch)
        i += 1
    parts.append("".join(buf))
    joined = " ".join(p.strip() for p in parts)
    joined = re.sub(r"\s+", " ", joined).strip()
    return joined, i, lines


def tokenize(text):
    """Lex into tokens, pragma lines, and other preprocessor lines.

    Comments are stripped (line numbers preserved); string/char literals
    become single tokens; preprocessor lines never enter the token stream.
    """
    tokens: list[Token] = []
    pragmas: list[PragmaLine] = []
    other_pp: list[tuple[int, str]] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    at_line_start = True

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch == "\n":
            advance(1)
            at_line_start = True
            continue
        if ch in " \t\r":
            advance(1)
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "*":
            advance(2)
            while i + 1 < n and not (text[i] == "*" and text[i + 1] == "/"):
                advance(1)
            advance(min(2, n - i))
            continue
        if ch == "#" and at_line_start:
            start_line = line
            joined, next_i, consumed = _join_continuations(text, i)
            if re.match(r"#\s*pragma\s+omp\b", joined):
                pragmas.append(PragmaLine(line=start_line, text=joined))
            else:
                other_pp.append((start_line, joined))
            advance(next_i - i)
            continue
        at_line_start = False
        if ch == '"' or ch == "'":
            quote = ch
            start_line, start_col = line, col
            j = i + 1
            while j < n and text[j] != quote:
                if text[j] == "\\":
                    j += 1
                j += 1
            j = min(j + 1, n)
            tokens.append(Token("string" if quote == '"' else "char", text[i:j], start_line, start_col))
            advance(j - i)
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(0), line, col))
            advance(len(m.group(0)))
            continue
        if ch.isdigit():
            m = _NUMBER_RE.match(text, i)
            tokens.append(Token("number", m.group(0), line, col))
            advance(len(m.group(0)))
            continue
        matched = None
        for op in _MULTI_OPS:
            if text.startswith(op, i):
                matched = op
                break
        if matched:
            tokens.append(Token("punct", matched, line, col))
            advance(len(matched))
        else:
            tokens.append(Token("punct", ch, line, col))
            advance(1)
    return tokens, pragmas, other_pp


def _build_block_tree(tokens):
    """Match braces into a tree; collect introducer tokens per block."""
    top: list[Block] = []
    flat: list[Block] = []
    stack: list[Block] = []
    errors: list[str] = []
    # Token index of the last statement boundary at the current level.
    boundary = 0
    boundaries: list[int] = []

    for idx, tok in enumerate(tokens):
        if tok.text == "{" and tok.kind == "punct":
            intro = [t for t in tokens[boundary:idx]]
            blk = Block(open_line=tok.line, open_col=tok.col, introducer=intro)
            if stack:
                blk.parent = stack[-1]
                stack[-1].children.append(blk)
            else:
                top.append(blk)
            flat.append(blk)
            stack.append(blk)
            boundaries.append(boundary)
            boundary = idx + 1
        elif tok.text == "}" and tok.kind == "punct":
            if not stack:
                errors.append(f"unbalanced closing brace at line {tok.line}")
                boundary = idx + 1
                continue
            blk = stack.pop()
            blk.close_line = tok.line
            blk.close_col = tok.col
            boundary = idx + 1
            boundaries.pop()
        elif tok.text == ";" and tok.kind == "punct" and not _inside_parens(tokens, boundary, idx):
            boundary = idx + 1

    for blk in stack:
        errors.append(f"unclosed brace opened at line {blk.open_line}")

    # Pair else-blocks with their if-condition so rank checks propagate.
    for blk in flat:
        if blk.kind != "else":
            continue
        siblings = blk.parent.children if blk.parent else top
        prev_ifs = [
            b for b in siblings
            if b.kind in ("if", "else") and (b.open_line, b.open_col) < (blk.open_line, blk.open_col)
        ]
        for cand in reversed(prev_ifs):
            cond = cand.condition_tokens()
            if cond:
                blk.paired_condition = cond
                break
    return top, flat, errors


def _inside_parens(tokens, start, idx):
    depth = 0
    for t in tokens[start:idx]:
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
    return depth > 0


def _match_paren(tokens, open_idx):
    """Index of the ')' matching tokens[open_idx] == '(', or -1."""
    depth = 0
    for j in range(open_idx, len(tokens)):
        if tokens[j].text == "(":
            depth += 1
        elif tokens[j].text == ")":
            depth -= 1
            if depth == 0:
                return j
    return -1


def split_top_level_commas(tokens):
    """Split a token slice into comma-separated groups (paren/bracket aware)."""
    groups: list[list[Token]] = [[]]
    depth = 0
    for tok in tokens:
        if tok.text in "([":
            depth += 1
        elif tok.text in ")]":
            depth -= 1
        if tok.text == "," and depth == 0:
            groups.append([])
        else:
            groups[-1].append(tok)
    if groups == [[]]:
        return []
    return groups


def render_tokens(tokens):
    """Human-readable rendering of a token slice (single-spaced, tight ops)."""
    out = []
    for tok in tokens:
        out.append(tok.text)
    text = " ".join(out)
    # Tighten the most common cases so arg text looks like source.
    text = re.sub(r"\s*([(\[.])\s*", r"\1", text)
    text = re.sub(r"\s*([)\],])", r"\1", text)
    text = re.sub(r"\s*(::|->|\+\+|--)\s*", r"\1", text)
    text = re.sub(r"([&*!~])\s+(?=[A-Za-z_0-9(])", r"\1", text)
    return text.strip()


def _find_functions(tokens, flat_blocks):
    """Locate ``name ( params ) [qualifiers] {`` definition sites."""
    functions: list[FunctionNode] = []
    block_by_pos = {(b.open_line, b.open_col): b for b in flat_blocks}
    for idx, tok in enumerate(tokens):
        if tok.text != "(" or idx == 0:
            continue
        name_tok = tokens[idx - 1]
        if name_tok.kind != "ident" or name_tok.text in _NOT_FUNCTION_NAMES:
            continue
        close = _match_paren(tokens, idx)
        if close < 0 or close + 1 >= len(tokens):
            continue
        # Skip trailing qualifiers before the body brace.
        j = close + 1
        while j < len(tokens) and tokens[j].kind == "ident" and tokens[j].text in ("const", "noexcept", "override", "final"):
            j += 1
        if j >= len(tokens) or tokens[j].text != "{":
            continue
        # A call like ``foo(x) { ...`` can't appear in C/C++ statements, but a
        # preceding '.'/'->'/operator distinguishes expressions defensively.
        prev = tokens[idx - 2] if idx >= 2 else None
        if prev is not None and prev.text in (".", "->", "::") and prev.text != "::":
            continue
        # Return type: walk back to the previous statement/brace boundary.
        k = idx - 2
        rtype: list[Token] = []
        while k >= 0:
            t = tokens[k]
            if t.text in (";", "{", "}", ")") or t.kind == "string":
                break
            rtype.append(t)
            k -= 1
        rtype.reverse()
        rtype_text = render_tokens(rtype)
        params = split_top_level_commas(tokens[idx + 1:close])
        param_texts = [render_tokens(g) for g in params]
        if param_texts == ["void"]:
            param_texts = []
        body = block_by_pos.get((tokens[j].line, tokens[j].col))
        if body is None or body.close_line < 0:
            continue
        # Control headers (`if (...) {`) were filtered by keyword; methods of
        # classes parse fine too. Require a sane return type or constructor-ish.
        functions.append(
            FunctionNode(
                name=name_tok.text,
                return_type_text=rtype_text,
                parameter_texts=param_texts,
                line=name_tok.line,
                col=name_tok.col,
                body=body,
            )
        )
    return functions


def parse_source(unit):
    """Parse a SourceUnit into a SyntaxSketch.

    Never raises on malformed input: unbalanced braces flip the sketch into
    degraded mode and the error lines are recorded.
    """
    if not unit.text:
        raise ValueError("SourceUnit.text must be non-empty")
    tokens, pragmas, _other = tokenize(unit.text)
    top, flat, errors = _build_block_tree(tokens)
    functions = _find_functions(tokens, flat)
    return SyntaxSketch(
        unit=unit,
        tokens=tokens,
        pragmas=pragmas,
        blocks=top,
        all_blocks=flat,
        functions=functions,
        degraded=bool(errors),
        errors=errors,
    )


def pragma_association_span(sketch, pragma):
    """Source span (start_line, end_line) the pragma applies to.

    The next block after the pragma line when one opens before the statement
    ends; otherwise the single statement through its ';'. Standalone
    directives (barrier, taskwait) get the pragma line itself.
    """
    directive = re.sub(r"^#\s*pragma\s+omp\s*", "", pragma.text)
    head = directive.split("(")[0].split()
    if head and head[0] in ("barrier", "taskwait", "flush", "taskyield"):
        return (pragma.line, pragma.line)
    idx = None
    for i, tok in enumerate(sketch.tokens):
        if tok.line > pragma.line:
            idx = i
            break
    if idx is None:
        return (pragma.line, pragma.line)
    depth = 0
    for j in range(idx, len(sketch.tokens)):
        tok = sketch.tokens[j]
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
        elif tok.text == "{" and depth == 0:
            for blk in sketch.all_blocks:
                if (blk.open_line, blk.open_col) == (tok.line, tok.col):
                    return (pragma.line, blk.close_line)
            return (pragma.line, tok.line)
        elif tok.text == ";" and depth == 0:
            return (pragma.line, tok.line)
    return (pragma.line, pragma.line)
