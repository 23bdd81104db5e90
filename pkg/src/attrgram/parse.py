"""Text -> symbol stream, with incremental reductions.

Matching is template-directed: each terminal's representation rule is
compiled into one anchored regular expression whose slot groups use the
attribute's lexeme class. Terminals are tried in declaration order and the
first one that matches wins, so a constant like ``$zero`` in one template
and an enumerated register ``$zero`` in another never compete.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional

from .actions import ActionEvalError, Environment, Outcome, eval_action
from .model import (Constant, Enumeration, Grammar, SlotRef, SlotValueError,
                    SourceLocation, SymbolInstance)
from .registry import FunctionRegistry, default_registry

MAX_CASCADE = 10_000


class ParseError(Exception):
    def __init__(self, message: str, loc: Optional[SourceLocation] = None):
        super().__init__(f"{loc}: {message}" if loc else message)
        self.loc = loc


class TokenizerError(ValueError):
    pass


class ReductionError(ParseError):
    pass


@dataclass(frozen=True)
class LexemeClass:
    attr: str
    pattern: str
    enumerated: bool
    regex: re.Pattern = field(compare=False, repr=False)


@dataclass(frozen=True)
class TemplateMatcher:
    terminal: str
    regex: re.Pattern = field(repr=False)
    # (group name, slot name) in template order; repeated slots appear once
    groups: tuple


@dataclass(frozen=True)
class TokenizerSpec:
    literals: tuple
    classes: tuple
    templates: tuple

    def tokenize(self, line: str) -> List[tuple]:
        """Split *line* into (kind, text, column) tokens.

        Literals beat lexeme classes; the longest literal wins; among classes
        the longest match wins and ties go to the earlier-declared class.
        """
        out = []
        pos = 0
        while True:
            while pos < len(line) and line[pos].isspace():
                pos += 1
            if pos >= len(line):
                return out
            best_lit = max((lit for lit in self.literals if line.startswith(lit, pos)),
                           key=len, default=None)
            if best_lit is not None:
                out.append(("literal", best_lit, pos + 1))
                pos += len(best_lit)
                continue
            best = None
            for cls in self.classes:
                m = cls.regex.match(line, pos)
                if m and m.end() > pos and (best is None or m.end() > best[1].end()):
                    best = (cls, m)
            if best is None:
                out.append(("unknown", line[pos], pos + 1))
                pos += 1
                continue
            out.append((best[0].attr, best[1].group(), pos + 1))
            pos = best[1].end()


def _constant_regex(text: str) -> str:
    pieces = text.split()
    if not pieces:
        return r"\s+"
    body = r"\s+".join(re.escape(p) for p in pieces)
    lead = r"\s*" if text[0].isspace() else ""
    trail = r"\s*" if text[-1].isspace() else ""
    return lead + body + trail


def _wordy_end(item) -> bool:
    return isinstance(item, SlotRef) or bool(re.search(r"\w$", item.text))


def _wordy_start(item) -> bool:
    return isinstance(item, SlotRef) or bool(re.match(r"\w", item.text))


def _compile_template(grammar: Grammar, rep) -> TemplateMatcher:
    schema = grammar.schema(rep.terminal)
    parts = []
    groups = []
    seen = {}
    prev = None
    for item in rep.template:
        if prev is not None and item.spaced:
            parts.append(r"\s+" if _wordy_end(prev) and _wordy_start(item) else r"\s*")
        if isinstance(item, Constant):
            parts.append(_constant_regex(item.text))
        elif item.name in seen:
            parts.append(f"(?P={seen[item.name]})")
        else:
            group = f"s{len(groups)}"
            seen[item.name] = group
            groups.append((group, item.name))
            parts.append(f"(?P<{group}>{schema[item.name].lexeme_pattern()})")
        prev = item
    return TemplateMatcher(rep.terminal, re.compile("".join(parts)), tuple(groups))


def build_tokenizer(grammar: Grammar) -> TokenizerSpec:
    literals = []
    for t in grammar.terminals():
        for item in grammar.representation(t.name).template:
            if isinstance(item, Constant):
                for piece in item.text.split():
                    if piece not in literals:
                        literals.append(piece)
    enumerated, patterned = [], []
    for attr in grammar.attributes:
        pattern = attr.lexeme_pattern()
        rx = re.compile(pattern)
        if rx.fullmatch(""):
            raise TokenizerError(f"lexeme pattern of attribute {attr.name!r} matches the "
                                 f"empty string: {pattern!r}")
        cls = LexemeClass(attr.name, pattern, isinstance(attr.domain, Enumeration), rx)
        (enumerated if cls.enumerated else patterned).append(cls)
    templates = tuple(_compile_template(grammar, grammar.representation(t.name))
                      for t in grammar.terminals())
    return TokenizerSpec(tuple(literals), tuple(enumerated + patterned), templates)


@dataclass
class SymbolStream:
    symbols: List[SymbolInstance] = field(default_factory=list)
    capacity: int = 1 << 20
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def names(self) -> List[str]:
        return [s.name for s in self.symbols]


def _stands_for(grammar: Grammar, inst: SymbolInstance, name: str) -> bool:
    if inst.name == name:
        return True
    return inst.is_terminal and grammar.owner_of(inst.name) == name


def reduce_check(stream: SymbolStream, grammar: Grammar,
                 registry: Optional[FunctionRegistry] = None, limit: int = MAX_CASCADE) -> int:
    """Collapse matching stream suffixes until no reduction rule applies.

    Rules are tried in declaration order; after every successful reduction
    the scan restarts from the first rule. A parsed terminal also matches
    its owning nonterminal in a rule's RHS. Returns the number of
    reductions performed.
    """
    if not grammar.reductions:
        return 0
    registry = registry if registry is not None else default_registry()
    done = 0
    while True:
        for rule in grammar.reductions:
            k = len(rule.rhs)
            if k > len(stream.symbols):
                continue
            window = stream.symbols[-k:]
            if not all(_stands_for(grammar, inst, name) for inst, name in zip(window, rule.rhs)):
                continue
            lhs = grammar.instance(rule.lhs)
            env = Environment(lhs, [inst.copy() for inst in window], registry)
            try:
                outcome = eval_action(rule.action, env)
            except ActionEvalError as exc:
                raise ReductionError(f"reduction {rule.lhs} <- {' '.join(rule.rhs)}: {exc}",
                                     rule.loc) from exc
            if outcome is Outcome.REVERTED:
                continue
            stream.symbols[-k:] = [lhs]
            done += 1
            if done > limit:
                raise ReductionError(f"more than {limit} reductions without new input; "
                                     f"the reduction rules cycle", rule.loc)
            break
        else:
            return done


class Parser:
    """One parse session over a prepared grammar."""

    def __init__(self, grammar: Grammar, capacity: int = 1 << 20, *,
                 reductions: bool = True, registry: Optional[FunctionRegistry] = None,
                 origin: str = "<input>"):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.grammar = grammar
        self.tokenizer = build_tokenizer(grammar)
        self.reductions = reductions
        self.registry = registry if registry is not None else default_registry()
        self.origin = origin
        self.stream = SymbolStream(capacity=capacity)

    def save_symbol(self, inst: SymbolInstance) -> bool:
        if len(self.stream.symbols) < self.stream.capacity:
            self.stream.symbols.append(inst)
            if self.reductions:
                reduce_check(self.stream, self.grammar, self.registry)
            return True
        self.stream.truncated = True
        return False

    def _instance(self, matcher: TemplateMatcher, m: re.Match, loc) -> SymbolInstance:
        inst = self.grammar.instance(matcher.terminal)
        for group, slot in matcher.groups:
            attr = inst.schema[slot]
            try:
                inst[slot] = attr.convert(m.group(group))
            except (SlotValueError, ValueError) as exc:
                raise ParseError(str(exc), loc) from None
        return inst

    def _segment(self, line: str, pos: int) -> Optional[list]:
        """Match templates covering line[pos:]; full-line matches are preferred."""
        while pos < len(line) and line[pos].isspace():
            pos += 1
        if pos == len(line):
            return []
        for t in self.tokenizer.templates:
            m = t.regex.fullmatch(line, pos)
            if m:
                return [(t, m)]
        for t in self.tokenizer.templates:
            m = t.regex.match(line, pos)
            if m and m.end() < len(line) and line[m.end()].isspace():
                rest = self._segment(line, m.end())
                if rest is not None:
                    return [(t, m)] + rest
        return None

    def feed_line(self, lineno: int, line: str) -> bool:
        """Parse one line; False once the stream is full."""
        text = line.rstrip()
        found = self._segment(text, 0)
        if found is None:
            col = len(text) - len(text.lstrip()) + 1
            toks = " ".join(tok for _, tok, _ in self.tokenizer.tokenize(text))
            raise ParseError(f"no terminal matches {text.strip()!r} (tokens: {toks})",
                             SourceLocation(self.origin, lineno, col))
        for matcher, m in found:
            loc = SourceLocation(self.origin, lineno, m.start() + 1)
            if not self.save_symbol(self._instance(matcher, m, loc)):
                return False
        return True

    def run(self, text: str) -> SymbolStream:
        text = text.replace("\r\n", "\n").replace("\r", "\n")
        for lineno, line in enumerate(text.split("\n"), 1):
            if not line.strip():
                continue
            if not self.feed_line(lineno, line):
                break  # end_parse: capacity reached
        return self.stream


def parse_text(grammar: Grammar, text: str, capacity: int = 1 << 20, *,
               reductions: bool = True, registry: Optional[FunctionRegistry] = None,
               origin: str = "<input>") -> SymbolStream:
    return Parser(grammar, capacity, reductions=reductions, registry=registry,
                  origin=origin).run(text)
