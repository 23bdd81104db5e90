"""Structural checks on a parsed grammar, id assignment and linking.

Error codes:

====== ===========================================================
R1     a nonterminal has more than one single-terminal alternative
R2     a terminal is not the sole RHS of exactly one alternative
R3     a terminal does not have exactly one representation rule
R4     a symbol or attribute name is declared twice
REF    reference to an undeclared symbol or attribute
KIND   symbol of the wrong kind (e.g. terminal on a rule's LHS)
SLOT   unknown or duplicate slot name
DOM    malformed attribute domain
T1     translation RHS is not exactly one symbol
T2     nonterminal is the LHS of more than one translation rule
T3     revert inside a translation action
ACT    syntax or type error in an action block
ID     rule ids are not unique
====== ===========================================================
"""
from __future__ import annotations

import dataclasses
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterator, List, Mapping, Optional

from .actions import ActionContext, ActionError, parse_action
from .model import (ID_BITS, AttributeDecl, Enumeration, Grammar, Pattern, SourceLocation,
                    SymbolKind, _Index)
from .registry import BUILTIN_SIGNATURES, Signature


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str
    loc: Optional[SourceLocation] = None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        return f"{where}{self.code}: {self.message}"


class ValidationReport:
    def __init__(self, issues: Optional[List[ValidationIssue]] = None):
        self.issues: List[ValidationIssue] = list(issues or [])

    def add(self, code: str, message: str, loc: Optional[SourceLocation] = None) -> None:
        self.issues.append(ValidationIssue(code, message, loc))

    @property
    def ok(self) -> bool:
        return not self.issues

    def codes(self) -> List[str]:
        return [i.code for i in self.issues]

    def __iter__(self) -> Iterator[ValidationIssue]:
        return iter(self.issues)

    def __len__(self) -> int:
        return len(self.issues)

    def __repr__(self) -> str:
        return f"ValidationReport({self.issues!r})"


class GrammarError(Exception):
    """Raised when a grammar cannot be loaded; carries every issue found."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


class CapacityError(GrammarError):
    pass


def _owners(grammar: Grammar, kinds: Mapping[str, SymbolKind]) -> dict:
    """terminal -> list of nonterminals that have ``nt -> terminal``."""
    owners = defaultdict(list)
    for rule in grammar.expansions:
        for alt in rule.alternatives:
            if len(alt.rhs) == 1 and kinds.get(alt.rhs[0]) is SymbolKind.TERMINAL:
                owners[alt.rhs[0]].append((rule.lhs, alt))
    return owners


def _schemas(grammar: Grammar, kinds, owners) -> dict:
    attrs = {a.name: a for a in grammar.attributes}
    schemas = {}
    for sym in grammar.symbols:
        if sym.name in schemas:
            continue
        schemas[sym.name] = {s.local_name: attrs[s.attr] for s in sym.slots if s.attr in attrs}
    for term, found in owners.items():
        if len(found) == 1 and term in schemas:
            schemas[term] = dict(schemas.get(found[0][0], {}))
    return schemas


def action_context(grammar_attrs: Mapping[str, AttributeDecl], schemas: Mapping,
                   lhs: str, rhs, *, allow_revert: bool,
                   signatures: Mapping[str, Signature]) -> ActionContext:
    layout = [schemas.get(lhs, {})] + [schemas.get(s, {}) for s in rhs]
    return ActionContext(layout, grammar_attrs, signatures, allow_revert, (lhs, *rhs))


def _rule_actions(grammar: Grammar):
    """(kind, lhs, rhs, text, loc, owner) for every rule that carries an action."""
    for rule in grammar.expansions:
        for alt in rule.alternatives:
            yield "expansion", rule.lhs, alt.rhs, alt.action_text, alt.action_loc, alt
    for rule in grammar.translations:
        yield "translation", rule.lhs, rule.rhs, rule.action_text, rule.action_loc, rule
    for rule in grammar.reductions:
        yield "reduction", rule.lhs, rule.rhs, rule.action_text, rule.action_loc, rule


def validate(grammar: Grammar, signatures: Optional[Mapping[str, Signature]] = None
             ) -> ValidationReport:
    """Check every structural constraint; never stops at the first error."""
    signatures = BUILTIN_SIGNATURES if signatures is None else signatures
    report = ValidationReport()

    # R4: one namespace for symbols and attributes
    seen: dict = {}
    for decl in [*grammar.attributes, *grammar.symbols]:
        if decl.name in seen:
            report.add("R4", f"name {decl.name!r} is already declared at {seen[decl.name]}",
                       decl.loc)
        else:
            seen[decl.name] = decl.loc

    attrs = {}
    for a in grammar.attributes:
        attrs.setdefault(a.name, a)
        _check_domain(a, report)

    kinds = {}
    for sym in grammar.symbols:
        kinds.setdefault(sym.name, sym.kind)
        local = set()
        for slot in sym.slots:
            if slot.attr not in attrs:
                report.add("REF", f"symbol {sym.name!r} uses undeclared attribute {slot.attr!r}",
                           slot.loc)
            if slot.local_name in local:
                report.add("SLOT", f"symbol {sym.name!r} declares slot {slot.local_name!r} twice",
                           slot.loc)
            local.add(slot.local_name)

    def check_ref(name: str, loc, want: Optional[SymbolKind] = None, role: str = "") -> bool:
        if name not in kinds:
            report.add("REF", f"undeclared symbol {name!r}", loc)
            return False
        if want is not None and kinds[name] is not want:
            report.add("KIND", f"{role} {name!r} must be a {want.value}", loc)
            return False
        return True

    owners = _owners(grammar, kinds)
    schemas = _schemas(grammar, kinds, owners)

    # expansions: R1, R2
    ids = Counter()
    for rule in grammar.expansions:
        check_ref(rule.lhs, rule.loc, SymbolKind.NONTERMINAL, "expansion LHS")
        for alt in rule.alternatives:
            ids[alt.rule_id] += 1
            for name in alt.rhs:
                check_ref(name, alt.loc)
    for rule_id, n in ids.items():
        if n > 1:
            report.add("ID", f"rule id {rule_id} is used {n} times")

    single_terminal = defaultdict(list)
    for term, found in owners.items():
        for lhs, alt in found:
            single_terminal[lhs].append(alt)
    for lhs, alts in single_terminal.items():
        for alt in alts[1:]:
            report.add("R1", f"nonterminal {lhs!r} has more than one single-terminal "
                             f"alternative ({' '.join(alts[0].rhs)} and {' '.join(alt.rhs)})",
                       alt.loc)

    for sym in grammar.symbols:
        if not sym.is_terminal:
            continue
        found = owners.get(sym.name, [])
        if not found:
            report.add("R2", f"terminal {sym.name!r} is not the sole RHS of any expansion "
                             f"alternative", sym.loc)
        for lhs, alt in found[1:]:
            report.add("R2", f"terminal {sym.name!r} is the sole RHS of more than one "
                             f"alternative (also under {found[0][0]!r})", alt.loc)

    # representations: R3 and slot references
    reps = defaultdict(list)
    for rep in grammar.representations:
        if check_ref(rep.terminal, rep.loc, SymbolKind.TERMINAL, "representation LHS"):
            reps[rep.terminal].append(rep)
            schema = schemas.get(rep.terminal, {})
            if len(owners.get(rep.terminal, [])) == 1:
                for item in rep.template:
                    name = getattr(item, "name", None)
                    if name is not None and name not in schema:
                        report.add("SLOT", f"{rep.terminal!r} has no slot {name!r} "
                                           f"(slots: {', '.join(schema) or 'none'})", item.loc)
    for sym in grammar.symbols:
        if sym.is_terminal:
            n = len(reps.get(sym.name, []))
            if n == 0:
                report.add("R3", f"terminal {sym.name!r} has no representation rule", sym.loc)
            for rep in reps.get(sym.name, [])[1:]:
                report.add("R3", f"terminal {sym.name!r} has more than one representation rule",
                           rep.loc)

    # translations: T1, T2
    lhs_seen = {}
    for rule in grammar.translations:
        check_ref(rule.lhs, rule.loc, SymbolKind.NONTERMINAL, "translation LHS")
        if len(rule.rhs) != 1:
            report.add("T1", f"translation RHS must be exactly one symbol, got {len(rule.rhs)}",
                       rule.loc)
        for name in rule.rhs:
            check_ref(name, rule.loc, SymbolKind.NONTERMINAL, "translation RHS")
        if rule.lhs in lhs_seen:
            report.add("T2", f"{rule.lhs!r} already has a translation rule at "
                             f"{lhs_seen[rule.lhs]}", rule.loc)
        else:
            lhs_seen[rule.lhs] = rule.loc

    for rule in grammar.reductions:
        check_ref(rule.lhs, rule.loc, SymbolKind.NONTERMINAL, "reduction LHS")
        for name in rule.rhs:
            check_ref(name, rule.loc)

    # actions
    for kind, lhs, rhs, text, loc, _ in _rule_actions(grammar):
        if text is None:
            continue
        ctx = action_context(attrs, schemas, lhs, rhs, allow_revert=True,
                             signatures=signatures)
        try:
            block = parse_action(text, ctx, loc)
        except ActionError as exc:
            for issue in exc.issues:
                report.add("ACT", issue.message, issue.loc)
            continue
        if kind == "translation" and block.has_revert:
            for stmt_loc in _revert_locations(block.statements):
                report.add("T3", "revert is not allowed in translation rules", stmt_loc)

    return report


def _revert_locations(stmts):
    from .actions import If, Revert
    for s in stmts:
        if isinstance(s, Revert):
            yield s.loc
        elif isinstance(s, If):
            yield from _revert_locations(s.then + s.otherwise)


def _check_domain(a: AttributeDecl, report: ValidationReport) -> None:
    d = a.domain
    if isinstance(d, Enumeration):
        if not d.values:
            report.add("DOM", f"attribute {a.name!r} has an empty value list", a.loc)
        dupes = [v for v, n in Counter(d.values).items() if n > 1]
        for v in dupes:
            report.add("DOM", f"attribute {a.name!r} lists {v!r} more than once", a.loc)
    elif isinstance(d, Pattern):
        try:
            rx = re.compile(d.source)
        except re.error as exc:
            report.add("DOM", f"attribute {a.name!r}: bad regular expression: {exc}", a.loc)
            return
        if rx.fullmatch(""):
            report.add("DOM", f"attribute {a.name!r}: pattern {d.source!r} matches the "
                              f"empty string", a.loc)


def check_capacity(count: int, id_bits: int = ID_BITS) -> None:
    # the all-ones numeric id stays free so it can never name a real symbol
    if count >= (1 << id_bits):
        raise CapacityError([ValidationIssue(
            "ID", f"{count} symbols do not fit in {id_bits}-bit ids")])


def assign_ids(grammar: Grammar, id_bits: int = ID_BITS) -> Grammar:
    """Number terminals first, then nonterminals, each in declaration order."""
    check_capacity(len(grammar.symbols), id_bits)
    ordered = [s for s in grammar.symbols if s.is_terminal] + \
              [s for s in grammar.symbols if not s.is_terminal]
    numbering = {s.name: n for n, s in enumerate(ordered)}
    symbols = [dataclasses.replace(s, numeric_id=numbering[s.name]) for s in grammar.symbols]
    return dataclasses.replace(grammar, symbols=symbols, _index=None)


def prepare(grammar: Grammar, signatures: Optional[Mapping[str, Signature]] = None) -> Grammar:
    """validate + assign_ids + compile actions + build lookup tables.

    Raises :class:`GrammarError` listing every problem when validation fails.
    """
    signatures = BUILTIN_SIGNATURES if signatures is None else signatures
    report = validate(grammar, signatures)
    if not report.ok:
        raise GrammarError(report.issues)
    g = assign_ids(grammar)

    attrs = {a.name: a for a in g.attributes}
    kinds = {s.name: s.kind for s in g.symbols}
    owners = _owners(g, kinds)
    schemas = _schemas(g, kinds, owners)

    # terminals take their owner's slots
    symbols = []
    for sym in g.symbols:
        if sym.is_terminal:
            owner = next(s for s in g.symbols if s.name == owners[sym.name][0][0])
            sym = dataclasses.replace(sym, slots=owner.slots)
        symbols.append(sym)

    def compile_(lhs, rhs, text, loc, allow_revert):
        if text is None:
            return None
        ctx = action_context(attrs, schemas, lhs, rhs, allow_revert=allow_revert,
                             signatures=signatures)
        return parse_action(text, ctx, loc)

    expansions = []
    for rule in g.expansions:
        alts = tuple(dataclasses.replace(
            alt, action=compile_(rule.lhs, alt.rhs, alt.action_text, alt.action_loc, True))
            for alt in rule.alternatives)
        expansions.append(dataclasses.replace(rule, alternatives=alts))
    translations = [dataclasses.replace(
        r, action=compile_(r.lhs, r.rhs, r.action_text, r.action_loc, False))
        for r in g.translations]
    reductions = [dataclasses.replace(
        r, action=compile_(r.lhs, r.rhs, r.action_text, r.action_loc, True))
        for r in g.reductions]

    by_name = {s.name: s for s in symbols}
    alternatives = [None] * (1 + max((a.rule_id for r in expansions for a in r.alternatives),
                                     default=-1))
    rules_by_id = defaultdict(list)
    for rule in expansions:
        for alt in rule.alternatives:
            alternatives[alt.rule_id] = (rule.lhs, alt)
            rules_by_id[by_name[rule.lhs].packed_id.raw].append(alt.rule_id)

    g = dataclasses.replace(g, symbols=symbols, expansions=expansions,
                            translations=translations, reductions=reductions)
    g._index = _Index(
        symbols=by_name,
        attributes=attrs,
        schemas=schemas,
        owners={t: found[0][0] for t, found in owners.items()},
        representations={r.terminal: r for r in g.representations},
        translations={r.lhs: r for r in translations},
        alternatives=alternatives,
        rules_by_id={k: tuple(v) for k, v in rules_by_id.items()},
    )
    return g
