"""Source text -> target text: parse, lift, translate, grow."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional

from .actions import ActionEvalError, Environment, Outcome, eval_action
from .grow import GrowConfig, Grower, GrowError, render_terminal
from .model import Grammar, SymbolInstance
from .parse import ParseError, SymbolStream, parse_text
from .registry import FunctionRegistry, default_registry


class MissingRule(enum.Enum):
    ERROR = "error"
    PASSTHROUGH = "passthrough"


class TranslateError(RuntimeError):
    """A pipeline failure; ``stage`` is one of parse, translate, grow."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class TruncatedInput(TranslateError):
    pass


@dataclass(frozen=True)
class TranslateConfig:
    grow: GrowConfig = field(default_factory=GrowConfig)
    on_missing_rule: MissingRule = MissingRule.ERROR
    capacity: int = 1 << 20


def lift(grammar: Grammar, inst: SymbolInstance) -> SymbolInstance:
    """Replace a parsed terminal by an instance of its owning nonterminal."""
    if not inst.is_terminal:
        return inst
    owner = grammar.instance(grammar.owner_of(inst.name))
    for slot in owner.schema:
        if inst.is_set(slot):
            owner[slot] = inst[slot]
    return owner


def translate_stream(grammar: Grammar, source, registry: Optional[FunctionRegistry] = None,
                     policy: MissingRule = MissingRule.ERROR) -> SymbolStream:
    registry = registry if registry is not None else default_registry()
    out = SymbolStream(capacity=max(len(source), 1))
    for i, original in enumerate(source):
        inst = lift(grammar, original)
        rule = grammar.translation_for(inst.name)
        if rule is None:
            if policy is MissingRule.PASSTHROUGH:
                out.symbols.append(original.copy())
                continue
            raise TranslateError("translate", f"symbol #{i + 1}: no translation rule for "
                                              f"{inst.name!r}")
        target = grammar.instance(rule.target)
        try:
            outcome = eval_action(rule.action, Environment(inst, [target], registry))
        except ActionEvalError as exc:
            raise TranslateError("translate", f"symbol #{i + 1} ({inst.name} <-> "
                                              f"{rule.target}): {exc}") from exc
        if outcome is Outcome.REVERTED:  # pragma: no cover - rejected by validate()
            raise TranslateError("translate", f"translation of {inst.name!r} reverted")
        out.symbols.append(target)
    return out


def translate_text(grammar: Grammar, text: str, config: TranslateConfig = TranslateConfig(),
                   registry: Optional[FunctionRegistry] = None, origin: str = "<input>") -> str:
    """Run the whole pipeline with one RNG and one label counter."""
    if not grammar.translations:
        raise TranslateError("translate", "grammar has no translation rules")
    registry = registry if registry is not None else default_registry()
    try:
        # reductions run with their own registry calls against the same session
        source = parse_text(grammar, text, config.capacity, registry=registry, origin=origin)
    except ParseError as exc:
        raise TranslateError("parse", str(exc)) from exc
    if source.truncated:
        raise TruncatedInput("parse", f"input exceeds the stream capacity ({config.capacity})")
    targets = translate_stream(grammar, source, registry, config.on_missing_rule)
    grower = Grower(grammar, config.grow, registry)
    lines: List[str] = []
    for inst in targets:
        try:
            if inst.is_terminal:
                lines.append(render_terminal(inst, grammar.representation(inst.name)))
            else:
                lines.extend(grower.grow(inst).lines)
        except GrowError as exc:
            raise TranslateError("grow", str(exc)) from exc
    return "\n".join(lines)
