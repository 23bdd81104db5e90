"""Stochastic generation: expand a nonterminal instance down to text.

The loop keeps a stack of pending instances. Each pop picks one of the
symbol's expansion alternatives at random (only single-terminal
alternatives once ``level`` reaches ``max_level``), runs its action on fresh
right-hand instances and either renders a terminal or pushes the new
instances. ``level`` counts pops. An alternative whose action reverts is
rolled back and excluded for the rest of that pop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

from .actions import ActionEvalError, Environment, Outcome, eval_action
from .model import Constant, Grammar, PackedId, RepresentationRule, SymbolInstance
from .registry import FunctionRegistry, default_registry
from .rng import Xoshiro256


class GrowError(RuntimeError):
    def __init__(self, message: str, symbol: Optional[str] = None):
        super().__init__(message)
        self.symbol = symbol


class NoApplicableRule(GrowError):
    pass


class RevertLimitExceeded(GrowError):
    pass


class RenderError(GrowError):
    pass


@dataclass(frozen=True)
class GrowConfig:
    seed: int = 0
    max_level: int = 8
    max_reverts_per_pop: int = 64

    def __post_init__(self):
        if self.max_level < 0:
            raise ValueError("max_level must be >= 0")
        if self.max_reverts_per_pop < 1:
            raise ValueError("max_reverts_per_pop must be positive")


class RuleBitmap:
    """One exclusion bit per expansion rule id."""

    def __init__(self, size: int):
        self.size = size
        self._bits = 0

    def clear(self) -> None:
        self._bits = 0

    def set(self, rule_id: int) -> None:
        if not 0 <= rule_id < self.size:
            raise IndexError(rule_id)
        self._bits |= 1 << rule_id

    def check(self, rule_id: int) -> bool:
        return bool(self._bits >> rule_id & 1)

    def __len__(self) -> int:
        return bin(self._bits).count("1")


class UniformSelection:
    """Default policy: uniform choice among the surviving alternatives.

    Subclass and override :meth:`choose` / :meth:`reverted` to bias the
    choice, e.g. across pops.
    """

    def choose(self, candidates: Sequence[int], rng: Xoshiro256) -> int:
        return candidates[rng.randbelow(len(candidates))]

    def reverted(self, rule_id: int) -> None:
        pass


class Exhausted(LookupError):
    pass


def extract_rule(grammar: Grammar, sym_id: PackedId, bitmap: RuleBitmap, rng: Xoshiro256,
                 terminal_only: bool = False, policy: Optional[UniformSelection] = None) -> int:
    """Pick a rule id for *sym_id* among alternatives not excluded by *bitmap*."""
    survivors = []
    for rule_id in grammar.rule_ids_for(sym_id):
        if bitmap.check(rule_id):
            continue
        if terminal_only and not grammar.is_terminal_alternative(grammar.alternatives[rule_id][1]):
            continue
        survivors.append(rule_id)
    if not survivors:
        raise Exhausted(sym_id)
    return (policy or UniformSelection()).choose(survivors, rng)


def render_terminal(instance: SymbolInstance, rule: RepresentationRule) -> str:
    out = []
    for item in rule.template:
        if item.spaced:
            out.append(" ")
        if isinstance(item, Constant):
            out.append(item.text)
        elif not instance.is_set(item.name):
            raise RenderError(f"cannot render {instance.name}: slot {item.name!r} is unset",
                              instance.name)
        else:
            out.append(str(instance[item.name]))
    return "".join(out)


@dataclass
class GrowResult:
    lines: List[str]
    pops: int
    # stack height when level first reached max_level (None if it never did)
    stack_at_threshold: Optional[int] = None
    reverts: int = 0

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass
class GrowEvent:
    kind: str  # "revert" or "apply"
    symbol: str
    rule_id: int
    before: SymbolInstance
    after: SymbolInstance
    stack_before: list = field(default_factory=list)
    stack_after: list = field(default_factory=list)


class Grower:
    """A generation session: one RNG, one registry, one policy.

    ``grow`` may be called repeatedly; the RNG and the registry's label
    counter carry over between calls.
    """

    def __init__(self, grammar: Grammar, config: GrowConfig = GrowConfig(),
                 registry: Optional[FunctionRegistry] = None, *,
                 rng: Optional[Xoshiro256] = None,
                 policy: Optional[UniformSelection] = None,
                 observer: Optional[Callable[[GrowEvent], None]] = None):
        self.grammar = grammar
        self.config = config
        self.registry = registry if registry is not None else default_registry()
        self.rng = rng if rng is not None else Xoshiro256(config.seed)
        self.policy = policy or UniformSelection()
        self.observer = observer
        self.bitmap = RuleBitmap(len(grammar.alternatives))

    def grow(self, start: Union[SymbolInstance, str]) -> GrowResult:
        g = self.grammar
        if isinstance(start, str):
            start = g.instance(start)
        if start.is_terminal:
            raise GrowError(f"start symbol {start.name!r} is a terminal", start.name)
        if not g.rule_ids_for(start.packed_id):
            raise NoApplicableRule(f"{start.name!r} has no expansion rule", start.name)

        stack = [start.copy()]
        lines: List[str] = []
        level = 0
        result = GrowResult(lines, 0)
        while stack:
            if level == self.config.max_level and result.stack_at_threshold is None:
                result.stack_at_threshold = len(stack)
            inst = stack.pop()
            if inst.is_terminal:
                # pushed by a mixed RHS: nothing to choose, just render
                lines.append(render_terminal(inst, g.representation(inst.name)))
            else:
                result.reverts += self._expand(inst, stack, lines, level >= self.config.max_level)
            level += 1
            result.pops = level
        return result

    def _expand(self, inst: SymbolInstance, stack: list, lines: list, terminal_only: bool) -> int:
        g = self.grammar
        self.bitmap.clear()
        reverts = 0
        while True:
            try:
                rule_id = extract_rule(g, inst.packed_id, self.bitmap, self.rng,
                                       terminal_only, self.policy)
            except Exhausted:
                if terminal_only and not any(
                        g.is_terminal_alternative(g.alternatives[r][1])
                        for r in g.rule_ids_for(inst.packed_id)):
                    raise NoApplicableRule(
                        f"no terminal alternative for {inst.name!r} at the level threshold "
                        f"({self.config.max_level})", inst.name) from None
                raise NoApplicableRule(f"no applicable rule for {inst.name!r}: every "
                                       f"alternative reverted", inst.name) from None
            _, alt = g.alternatives[rule_id]
            before = inst.copy()
            stack_before = list(stack)
            rhs = self._fresh(inst, alt)
            env = Environment(inst, rhs, self.registry)
            try:
                outcome = eval_action(alt.action, env)
            except ActionEvalError as exc:
                raise GrowError(f"while expanding {inst.name!r} -> {' '.join(alt.rhs)}: {exc}",
                                inst.name) from exc
            if outcome is Outcome.REVERTED:
                inst.restore(before)
                self.bitmap.set(rule_id)
                self.policy.reverted(rule_id)
                reverts += 1
                if self.observer:
                    self.observer(GrowEvent("revert", inst.name, rule_id, before, inst.copy(),
                                            stack_before, list(stack)))
                if reverts > self.config.max_reverts_per_pop:
                    raise RevertLimitExceeded(
                        f"more than {self.config.max_reverts_per_pop} reverts while expanding "
                        f"{inst.name!r}", inst.name)
                continue
            if g.is_terminal_alternative(alt):
                lines.append(render_terminal(rhs[0], g.representation(rhs[0].name)))
            else:
                stack.extend(reversed(rhs))
            if self.observer:
                self.observer(GrowEvent("apply", inst.name, rule_id, before, inst.copy(),
                                        stack_before, list(stack)))
            return reverts

    def _fresh(self, lhs: SymbolInstance, alt) -> List[SymbolInstance]:
        g = self.grammar
        if g.is_terminal_alternative(alt):
            # a terminal shares its owner's slots and starts out as a copy of it
            term = g.instance(alt.rhs[0])
            term.values = dict(lhs.values)
            return [term]
        return [g.instance(name) for name in alt.rhs]


def grow(grammar: Grammar, start: Union[SymbolInstance, str], config: GrowConfig = GrowConfig(),
         registry: Optional[FunctionRegistry] = None, **kwargs) -> GrowResult:
    return Grower(grammar, config, registry, **kwargs).grow(start)
