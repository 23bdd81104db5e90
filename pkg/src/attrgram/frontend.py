"""Reader (and canonical writer) for the grammar file format.

A grammar file has five parts separated by lines holding only ``%%``::

    header            %{ ... }% blocks, kept as opaque text
    %%
    declarations      %token / %attribute / %symbol
    %%
    representation    TERMINAL : "const" slot "const"slot ...
    %%
    expansion         lhs -> a b { action } | c        (and lhs <- a b reductions)
    %%
    translation       lhs <-> rhs { action }           (and reductions)

Lines starting with ``#`` outside action blocks and header blocks are
comments.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from .model import (INTEGER, TEXT, Alternative, AttributeDecl, Constant, Enumeration,
                    ExpansionRule, Grammar, Open, Pattern, ReductionRule, RepresentationRule,
                    Slot, SlotRef, SourceLocation, SymbolDecl, SymbolKind, TranslationRule)

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
BASE_TYPES = {"char*": TEXT, "int": INTEGER}
PART_NAMES = ("header", "declaration", "representation", "expansion", "translation")


@dataclass(frozen=True)
class SyntaxIssue:
    message: str
    loc: SourceLocation

    def __str__(self) -> str:
        return f"{self.loc}: {self.message}"


class GrammarSyntaxError(Exception):
    def __init__(self, issues: List[SyntaxIssue]):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


class _Fail(Exception):
    def __init__(self, message: str, loc: SourceLocation):
        self.issue = SyntaxIssue(message, loc)


def _unquote(body: str) -> str:
    return re.sub(r'\\([\\"])', r"\1", body)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _read_string(line: str, start: int, loc: SourceLocation) -> Tuple[str, int]:
    """Read a double-quoted string at line[start]; return (value, end index)."""
    i = start + 1
    while i < len(line):
        if line[i] == "\\" and i + 1 < len(line):
            i += 2
            continue
        if line[i] == '"':
            return _unquote(line[start + 1:i]), i + 1
        i += 1
    raise _Fail("unterminated string", loc)


class _Reader:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        text = text.replace("\r\n", "\n").replace("\r", "\n")
        if text.startswith("﻿"):
            text = text[1:]
        self.lines = text.split("\n")
        self.issues: List[SyntaxIssue] = []

    def loc(self, lineno: int, col: int) -> SourceLocation:
        return SourceLocation(self.origin, lineno, col)

    # -- parts -------------------------------------------------------------

    def split_parts(self) -> Optional[List[List[Tuple[int, str]]]]:
        parts: List[List[Tuple[int, str]]] = [[]]
        in_block = False
        last_sep = None
        for n, line in enumerate(self.lines, 1):
            stripped = line.strip()
            if len(parts) == 1:
                if not in_block and stripped.startswith("%{"):
                    in_block = "}%" not in stripped[2:]
                elif in_block and "}%" in stripped:
                    in_block = False
                    parts[-1].append((n, line))
                    continue
            if stripped == "%%" and not in_block:
                parts.append([])
                last_sep = n
                continue
            parts[-1].append((n, line))
        if in_block:
            self.issues.append(SyntaxIssue("header block '%{' is never closed with '}%'",
                                           self.loc(len(self.lines), 1)))
        if len(parts) != 5:
            where = self.loc(last_sep or 1, 1)
            self.issues.append(SyntaxIssue(
                f"expected 5 parts separated by '%%', found {len(parts)}", where))
            return None
        return parts

    # -- header ------------------------------------------------------------

    def header(self, lines) -> List[str]:
        blocks: List[str] = []
        current: Optional[List[str]] = None
        for n, line in lines:
            stripped = line.strip()
            if current is not None:
                current.append(line)
                if "}%" in stripped:
                    blocks.append("\n".join(current))
                    current = None
                continue
            if not stripped or stripped.startswith("#"):
                continue
            if stripped.startswith("%{"):
                current = [line]
                if "}%" in stripped[2:]:
                    blocks.append(line)
                    current = None
                continue
            # start-condition declarations and the like: retained, never interpreted
            blocks.append(line)
        return blocks

    # -- declarations ------------------------------------------------------

    def fields(self, n: int, line: str, start: int):
        """Split a comma-separated declaration body into (kind, value, loc)."""
        out = []
        i = start
        expect_field = True
        while True:
            while i < len(line) and line[i] in " \t":
                i += 1
            if i >= len(line):
                if expect_field and out:
                    raise _Fail("missing value after ','", self.loc(n, i + 1))
                return out, None
            loc = self.loc(n, i + 1)
            if not expect_field:
                if line[i] == ",":
                    i += 1
                    expect_field = True
                    continue
                if line[i] == "{":
                    return out, (i, loc)
                raise _Fail(f"expected ',' but found {line[i]!r}", loc)
            ch = line[i]
            if ch == '"':
                value, i = _read_string(line, i, loc)
                out.append(("str", value, loc))
            elif line.startswith("!!", i):
                end = line.find("!!", i + 2)
                if end < 0:
                    raise _Fail("unterminated '!!' regular expression", loc)
                out.append(("regex", line[i + 2:end], loc))
                i = end + 2
            elif ch == "{" and out:
                return out, (i, loc)
            elif ch == ",":
                raise _Fail("empty value before ','", loc)
            else:
                m = re.compile(r"[^,{]+").match(line, i)
                out.append(("word", m.group().strip(), loc))
                i = m.end()
            expect_field = False

    def ident(self, field, what: str) -> str:
        kind, value, loc = field
        if kind != "word" or not IDENT.fullmatch(value):
            raise _Fail(f"expected {what} name, found {value!r}", loc)
        return value

    def declarations(self, lines, g: Grammar) -> None:
        for n, text, col in self._logical_lines(lines):
            try:
                self.declaration(n, text, col, g)
            except _Fail as f:
                self.issues.append(f.issue)

    def _logical_lines(self, lines):
        """Join indented or comma-continued lines onto the preceding '%' line."""
        current = None
        for n, line in lines:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if stripped.startswith("%") or current is None:
                if current:
                    yield current
                col = len(line) - len(line.lstrip()) + 1
                current = [n, stripped, col]
            else:
                current[1] += " " + stripped
        if current:
            yield current

    def declaration(self, n: int, text: str, col: int, g: Grammar) -> None:
        m = re.match(r"%(\w+)", text)
        if not m:
            raise _Fail(f"expected %token, %attribute or %symbol, found {text.split()[0]!r}",
                        self.loc(n, col))
        keyword = m.group(1)
        pad = " " * (col - 1)
        line = pad + text
        fields, code = self.fields(n, line, col - 1 + m.end())
        kw_loc = self.loc(n, col)
        if keyword == "token":
            if not fields:
                raise _Fail("%token needs at least one name", kw_loc)
            for f in fields:
                g.symbols.append(SymbolDecl(self.ident(f, "terminal"), SymbolKind.TERMINAL,
                                            loc=f[2]))
        elif keyword == "attribute":
            if len(fields) < 2:
                raise _Fail("%attribute needs a name and a type", kw_loc)
            name = self.ident(fields[0], "attribute")
            type_spelling = fields[1][1].replace(" ", "")
            base = BASE_TYPES.get(type_spelling) if fields[1][0] == "word" else None
            if base is None:
                raise _Fail(f"unsupported attribute type {fields[1][1]!r} "
                            f"(use char* or int)", fields[1][2])
            domain = self.domain(base, fields[2:])
            lexer_code = None
            if code is not None:
                lexer_code = self.braced_tail(line, *code)
            g.attributes.append(AttributeDecl(name, base, domain, loc=fields[0][2]))
            if lexer_code is not None:
                g.header.append(f"%attribute {name} {lexer_code}")
        elif keyword == "symbol":
            if not fields:
                raise _Fail("%symbol needs a name", kw_loc)
            name = self.ident(fields[0], "symbol")
            rest = fields[1:]
            if len(rest) % 2:
                raise _Fail("%symbol expects attribute/local-name pairs after the name",
                            rest[-1][2])
            slots = tuple(Slot(self.ident(rest[k + 1], "slot"), self.ident(rest[k], "attribute"),
                               loc=rest[k + 1][2]) for k in range(0, len(rest), 2))
            g.symbols.append(SymbolDecl(name, SymbolKind.NONTERMINAL, slots, loc=fields[0][2]))
        else:
            raise _Fail(f"unknown declaration %{keyword}", kw_loc)
        if code is not None and keyword != "attribute":
            raise _Fail("only %attribute may carry a code block", code[1])

    def braced_tail(self, line: str, start: int, loc: SourceLocation) -> str:
        depth = 0
        for i in range(start, len(line)):
            if line[i] == "{":
                depth += 1
            elif line[i] == "}":
                depth -= 1
                if depth == 0:
                    if line[i + 1:].strip():
                        raise _Fail("unexpected text after '}'", loc)
                    return line[start:i + 1]
        raise _Fail("unbalanced '{'", loc)

    def domain(self, base: str, values):
        if not values:
            return Open()
        kinds = {k for k, _, _ in values}
        if kinds == {"regex"}:
            if len(values) != 1:
                raise _Fail("an attribute takes a single !!regex!!", values[1][2])
            return Pattern(values[0][1])
        if "regex" in kinds:
            raise _Fail("cannot mix a !!regex!! with listed values", values[0][2])
        if base == TEXT:
            for k, v, loc in values:
                if k != "str":
                    raise _Fail(f"char* values must be quoted, found {v!r}", loc)
            return Enumeration(tuple(v for _, v, _ in values))
        out = []
        for _, v, loc in values:
            if not re.fullmatch(r"-?[0-9]+", v.strip()):
                raise _Fail(f"int attribute value {v!r} is not an integer", loc)
            out.append(int(v))
        return Enumeration(tuple(out))

    # -- representation ----------------------------------------------------

    def representations(self, lines, g: Grammar) -> None:
        for n, line in lines:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                g.representations.append(self.representation(n, line))
            except _Fail as f:
                self.issues.append(f.issue)

    def representation(self, n: int, line: str) -> RepresentationRule:
        start = len(line) - len(line.lstrip())
        m = IDENT.match(line, start)
        if not m:
            raise _Fail("expected a terminal name", self.loc(n, start + 1))
        name, name_loc = m.group(), self.loc(n, start + 1)
        i = m.end()
        while i < len(line) and line[i] in " \t":
            i += 1
        if i >= len(line) or line[i] != ":":
            raise _Fail("expected ':' after the terminal name", self.loc(n, i + 1))
        i += 1
        items = []
        while True:
            j = i
            while j < len(line) and line[j] in " \t":
                j += 1
            if j >= len(line):
                break
            spaced = j > i and bool(items)
            loc = self.loc(n, j + 1)
            if line[j] == '"':
                text, i = _read_string(line, j, loc)
                items.append(Constant(text, spaced, loc))
                continue
            m = IDENT.match(line, j)
            if not m:
                raise _Fail(f"unexpected {line[j]!r} in representation", loc)
            items.append(SlotRef(m.group(), spaced, loc))
            i = m.end()
        if not items:
            raise _Fail(f"representation of {name!r} is empty", name_loc)
        return RepresentationRule(name, tuple(items), name_loc)

    # -- rules -------------------------------------------------------------

    def rule_tokens(self, lines):
        """Tokens: ('id', text, loc) ('arrow', ...) ('bar', ...) ('action', text, loc)."""
        toks = []
        k = 0
        while k < len(lines):
            n, line = lines[k]
            if line.strip().startswith("#"):
                k += 1
                continue
            i = 0
            while i < len(line):
                ch = line[i]
                loc = self.loc(n, i + 1)
                if ch in " \t":
                    i += 1
                elif line.startswith("<->", i):
                    toks.append(("arrow", "<->", loc))
                    i += 3
                elif line.startswith("->", i) or line.startswith("<-", i):
                    toks.append(("arrow", line[i:i + 2], loc))
                    i += 2
                elif ch == "|":
                    toks.append(("bar", "|", loc))
                    i += 1
                elif ch == "{":
                    text, body_loc, k, i = self.action_body(lines, k, i)
                    toks.append(("action", text, body_loc))
                    n, line = lines[k]
                    continue
                else:
                    m = IDENT.match(line, i)
                    if not m:
                        raise _Fail(f"unexpected {ch!r}", loc)
                    toks.append(("id", m.group(), loc))
                    i = m.end()
            k += 1
        return toks

    def action_body(self, lines, k: int, i: int):
        """Scan a balanced { ... } starting at lines[k][i]; strings and comments may hold braces."""
        open_n, open_line = lines[k]
        open_loc = self.loc(open_n, i + 1)
        body_loc = self.loc(open_n, i + 2)
        depth = 0
        chunks = []
        start = i
        in_comment = False
        while k < len(lines):
            n, line = lines[k]
            while i < len(line):
                ch = line[i]
                if in_comment:
                    if line.startswith("*/", i):
                        in_comment = False
                        i += 2
                    else:
                        i += 1
                    continue
                if ch == '"':
                    _, i = _read_string(line, i, self.loc(n, i + 1))
                    continue
                if line.startswith("//", i):
                    i = len(line)
                    break
                if line.startswith("/*", i):
                    in_comment = True
                    i += 2
                    continue
                if ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        chunks.append(line[start:i])
                        text = "\n".join(chunks)
                        return text[1:], body_loc, k, i + 1
                i += 1
            chunks.append(line[start:])
            start = 0
            i = 0
            k += 1
        raise _Fail("unbalanced '{': action block is never closed", open_loc)

    def rules(self, lines, g: Grammar, part: str, next_id: int) -> int:
        try:
            toks = self.rule_tokens(lines)
        except _Fail as f:
            self.issues.append(f.issue)
            return next_id
        allowed = {"expansion": ("->", "<-"), "translation": ("<->", "<-")}[part]
        p = 0

        def at(kind, q=None):
            q = p if q is None else q
            return q < len(toks) and toks[q][0] == kind

        while p < len(toks):
            try:
                if not at("id") or not at("arrow", p + 1):
                    raise _Fail(f"expected 'name ->', 'name <-' or 'name <->' to start a rule, "
                                f"found {toks[p][1]!r}", toks[p][2])
                lhs, lhs_loc = toks[p][1], toks[p][2]
                arrow, arrow_loc = toks[p + 1][1], toks[p + 1][2]
                p += 2
                if arrow not in allowed:
                    raise _Fail(f"'{arrow}' rules do not belong in the {part} part", arrow_loc)
                alts = []
                while True:
                    rhs = []
                    alt_loc = toks[p][2] if p < len(toks) else arrow_loc
                    while at("id") and not at("arrow", p + 1):
                        rhs.append(toks[p][1])
                        p += 1
                    action, action_loc = None, None
                    if at("action"):
                        action, action_loc = toks[p][1], toks[p][2]
                        p += 1
                    if not rhs:
                        raise _Fail(f"rule for {lhs!r} has an empty right-hand side", alt_loc)
                    alts.append((tuple(rhs), action, alt_loc, action_loc))
                    if at("bar"):
                        if arrow != "->":
                            raise _Fail("'|' alternatives are only allowed in '->' rules",
                                        toks[p][2])
                        p += 1
                        continue
                    break
                if arrow == "->":
                    built = []
                    for rhs, action, loc, aloc in alts:
                        built.append(Alternative(rhs, action, next_id, loc, aloc))
                        next_id += 1
                    g.expansions.append(ExpansionRule(lhs, tuple(built), lhs_loc))
                else:
                    (rhs, action, _, aloc), = alts
                    cls = TranslationRule if arrow == "<->" else ReductionRule
                    getattr(g, "translations" if arrow == "<->" else "reductions").append(
                        cls(lhs, rhs, action, lhs_loc, aloc))
            except _Fail as f:
                self.issues.append(f.issue)
                # resynchronise at the next 'name arrow'
                p += 1
                while p < len(toks) and not (at("id") and at("arrow", p + 1)):
                    p += 1
        return next_id


def parse_grammar(source_text: str, origin: str = "<string>") -> Grammar:
    """Parse grammar text; raise :class:`GrammarSyntaxError` with every issue found."""
    r = _Reader(source_text, origin)
    parts = r.split_parts()
    if parts is None:
        raise GrammarSyntaxError(r.issues)
    g = Grammar(origin=origin)
    g.header.extend(r.header(parts[0]))
    r.declarations(parts[1], g)
    r.representations(parts[2], g)
    next_id = r.rules(parts[3], g, "expansion", 0)
    r.rules(parts[4], g, "translation", next_id)
    if r.issues:
        raise GrammarSyntaxError(r.issues)
    return g


def load_grammar(path, signatures=None) -> Grammar:
    """Read, parse, validate and prepare a grammar file."""
    from .validation import prepare

    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return prepare(parse_grammar(text, str(path)), signatures)


def load_grammar_text(text: str, origin: str = "<string>", signatures=None) -> Grammar:
    from .validation import prepare

    return prepare(parse_grammar(text, origin), signatures)


# -- canonical printer -------------------------------------------------------

def _format_item(item) -> str:
    text = _quote(item.text) if isinstance(item, Constant) else item.name
    return (" " if item.spaced else "") + text


def format_grammar(g: Grammar) -> str:
    """Render *g* in the file format; ``parse_grammar`` reads it back unchanged."""
    out = []
    out.extend(g.header)
    out.append("%%")
    for a in g.attributes:
        type_ = "char*" if a.base_type == TEXT else "int"
        fields = [a.name, type_]
        if isinstance(a.domain, Enumeration):
            fields += [_quote(v) if isinstance(v, str) else str(v) for v in a.domain.values]
        elif isinstance(a.domain, Pattern):
            fields.append(f"!!{a.domain.source}!!")
        out.append("%attribute " + ", ".join(fields))
    for s in g.symbols:
        if s.is_terminal:
            out.append(f"%token {s.name}")
        else:
            pairs = [x for slot in s.slots for x in (slot.attr, slot.local_name)]
            out.append("%symbol " + ", ".join([s.name, *pairs]))
    out.append("%%")
    for rep in g.representations:
        items = "".join(_format_item(i) for i in rep.template)
        out.append(f"{rep.terminal} :{items if items.startswith(' ') else ' ' + items}")
    out.append("%%")

    def act(text: Optional[str]) -> str:
        return "" if text is None else " {" + text + "}"

    for rule in g.expansions:
        alts = [" ".join(a.rhs) + act(a.action_text) for a in rule.alternatives]
        out.append(f"{rule.lhs} -> " + "\n    | ".join(alts))
    out.append("%%")
    for rule in g.translations:
        out.append(f"{rule.lhs} <-> {' '.join(rule.rhs)}{act(rule.action_text)}")
    for rule in g.reductions:
        out.append(f"{rule.lhs} <- {' '.join(rule.rhs)}{act(rule.action_text)}")
    return "\n".join(out) + "\n"
