"""The attribute-operation language used inside rule actions.

A small C-flavoured language::

    if ($$.color == color_values[0]) {
        $1.color = color_values[1];
    } else {
        revert;
    }
    $2.label = print_as_a_label(create_label());

``$$`` is the rule's left-hand symbol and ``$n`` the n-th right-hand symbol.
``{attr}_values[i]`` indexes an enumerated attribute's value list. Blocks
are parsed and type-checked up front against the rule's slot layout, so
evaluation only fails on data: unset slots, bad indexes, overflow, domain
violations and failing host functions.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, List, Mapping, Optional, Sequence

from .model import (INT64_MAX, INT64_MIN, INTEGER, TEXT, AttributeDecl, Enumeration,
                    SlotValueError, SourceLocation, SymbolInstance, UnsetSlotError)
from .registry import FunctionError, FunctionRegistry, Signature

BOOLEAN = "boolean"


# -- AST ---------------------------------------------------------------------

def _loc() -> Any:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Literal:
    value: Any
    type: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class SlotRead:
    target: int  # 0 is $$
    slot: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class ValuesIndex:
    attr: str
    index: Any
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: Any
    rhs: Any
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Not:
    operand: Any
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Assign:
    target: int
    slot: str
    value: Any
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class If:
    cond: Any
    then: tuple
    otherwise: tuple = ()
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Revert:
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class CallStmt:
    call: Call
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class ActionBlock:
    statements: tuple
    arity: int = 0
    # values of the enumerated attributes the block indexes
    enumerations: Mapping = field(default_factory=dict, compare=False, repr=False)

    @property
    def has_revert(self) -> bool:
        return any(_contains_revert(s) for s in self.statements)

    def __bool__(self) -> bool:
        return bool(self.statements)


def _contains_revert(stmt) -> bool:
    if isinstance(stmt, Revert):
        return True
    if isinstance(stmt, If):
        return any(_contains_revert(s) for s in stmt.then + stmt.otherwise)
    return False


EMPTY_BLOCK = ActionBlock(())


# -- errors ------------------------------------------------------------------

@dataclass(frozen=True)
class ActionIssue:
    message: str
    loc: Optional[SourceLocation] = None

    def __str__(self) -> str:
        return f"{self.loc}: {self.message}" if self.loc else self.message


class ActionError(Exception):
    """Syntax or type errors in an action block."""

    def __init__(self, issues: Sequence[ActionIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


class ActionEvalError(RuntimeError):
    """A type-correct block failed at run time."""

    def __init__(self, message: str, kind: str, loc: Optional[SourceLocation] = None):
        super().__init__(f"{loc}: {message}" if loc else message)
        self.kind = kind
        self.loc = loc


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/)
  | (?P<target>\$\$|\$[0-9]+)
  | (?P<int>[0-9]+)
  | (?P<str>"(?:\\.|[^"\\\n])*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[<>+\-!=;,.(){}\[\]])
""", re.VERBOSE | re.DOTALL)

KEYWORDS = {"if", "else", "revert"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    loc: SourceLocation


def _tokenize(text: str, origin: SourceLocation) -> List[_Tok]:
    toks = []
    pos = 0
    line, line_start = origin.line, 0
    first_col = origin.column

    def where(p: int) -> SourceLocation:
        col = p - line_start + (first_col if line == origin.line else 1)
        return SourceLocation(origin.file, line, col)

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ActionError([ActionIssue(f"unexpected character {text[pos]!r}", where(pos))])
        kind = m.lastgroup
        if kind != "ws":
            if kind == "name" and m.group() in KEYWORDS:
                kind = m.group()
            toks.append(_Tok(kind, m.group(), where(pos)))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", where(pos)))
    return toks


# -- parser ------------------------------------------------------------------

_LEVELS = [("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-")]


class _Parser:
    def __init__(self, toks: List[_Tok]):
        self.toks = toks
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        raise ActionError([ActionIssue(msg, tok.loc)])

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[_Tok]:
        tok = self.tok
        if tok.kind == kind and (text is None or tok.text == text):
            self.i += 1
            return tok
        return None

    def expect(self, kind: str, text: Optional[str] = None) -> _Tok:
        tok = self.accept(kind, text)
        if tok is None:
            want = text or kind
            got = self.tok.text or "end of block"
            self.fail(f"expected {want!r}, found {got!r}")
        return tok

    def block_body(self, closing: Optional[str]) -> tuple:
        stmts = []
        while True:
            if closing and self.accept("op", closing):
                return tuple(stmts)
            if not closing and self.tok.kind == "eof":
                return tuple(stmts)
            if self.tok.kind == "eof":
                self.fail("unterminated '{' block")
            stmts.append(self.statement())

    def statement(self):
        tok = self.tok
        if self.accept("revert"):
            self.expect("op", ";")
            return Revert(tok.loc)
        if self.accept("if"):
            self.expect("op", "(")
            cond = self.expr()
            self.expect("op", ")")
            then = self.braced()
            otherwise: tuple = ()
            if self.accept("else"):
                if self.tok.kind == "if":
                    otherwise = (self.statement(),)
                else:
                    otherwise = self.braced()
            return If(cond, then, otherwise, tok.loc)
        if tok.kind == "target":
            target = self.target()
            self.expect("op", ".")
            slot = self.expect("name").text
            self.expect("op", "=")
            value = self.expr()
            self.expect("op", ";")
            return Assign(target, slot, value, tok.loc)
        if tok.kind == "name" and self.peek().text == "(":
            call = self.call()
            self.expect("op", ";")
            return CallStmt(call, tok.loc)
        self.fail(f"expected a statement, found {tok.text or 'end of block'!r}")

    def braced(self) -> tuple:
        self.expect("op", "{")
        return self.block_body("}")

    def target(self) -> int:
        tok = self.expect("target")
        if tok.text == "$$":
            return 0
        n = int(tok.text[1:])
        if n == 0:
            self.fail("right-hand symbols are numbered from $1", tok)
        return n

    def call(self) -> Call:
        name = self.expect("name")
        self.expect("op", "(")
        args = []
        if not self.accept("op", ")"):
            args.append(self.expr())
            while self.accept("op", ","):
                args.append(self.expr())
            self.expect("op", ")")
        return Call(name.text, tuple(args), name.loc)

    def expr(self, level: int = 0):
        if level == len(_LEVELS):
            return self.unary()
        node = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _LEVELS[level]:
            op = self.tok
            self.i += 1
            node = Binary(op.text, node, self.expr(level + 1), op.loc)
        return node

    def unary(self):
        tok = self.tok
        if self.accept("op", "!"):
            return Not(self.unary(), tok.loc)
        if tok.kind == "op" and tok.text == "-" and self.peek().kind == "int":
            self.i += 1
            return self.int_literal(-int(self.expect("int").text), tok)
        return self.primary()

    def int_literal(self, value: int, tok: _Tok) -> Literal:
        if not INT64_MIN <= value <= INT64_MAX:
            self.fail(f"integer literal {value} does not fit in 64 bits", tok)
        return Literal(value, INTEGER, tok.loc)

    def primary(self):
        tok = self.tok
        if self.accept("int"):
            return self.int_literal(int(tok.text), tok)
        if self.accept("str"):
            return Literal(_unescape(tok.text[1:-1]), TEXT, tok.loc)
        if tok.kind == "target":
            target = self.target()
            self.expect("op", ".")
            return SlotRead(target, self.expect("name").text, tok.loc)
        if tok.kind == "name":
            if self.peek().text == "(":
                return self.call()
            if self.peek().text == "[":
                self.i += 1
                if not tok.text.endswith("_values"):
                    self.fail("only '<attribute>_values' arrays can be indexed", tok)
                self.expect("op", "[")
                index = self.expr()
                self.expect("op", "]")
                return ValuesIndex(tok.text[: -len("_values")], index, tok.loc)
            self.fail(f"unknown name {tok.text!r}", tok)
        if self.accept("op", "("):
            inner = self.expr()
            self.expect("op", ")")
            return inner
        self.fail(f"expected an expression, found {tok.text or 'end of block'!r}")


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), body)


# -- type checking -----------------------------------------------------------

@dataclass
class ActionContext:
    """What a block may refer to: slot layouts for $$, $1.. and the functions."""

    slots: Sequence[Mapping[str, AttributeDecl]]
    attributes: Mapping[str, AttributeDecl]
    signatures: Mapping[str, Signature]
    allow_revert: bool = True
    symbols: Sequence[str] = ()

    @property
    def arity(self) -> int:
        return len(self.slots) - 1

    def describe(self, target: int) -> str:
        label = "$$" if target == 0 else f"${target}"
        if target < len(self.symbols):
            return f"{label} ({self.symbols[target]})"
        return label


class _Checker:
    def __init__(self, ctx: ActionContext):
        self.ctx = ctx
        self.issues: List[ActionIssue] = []
        self.indexed: set = set()

    def error(self, msg: str, loc) -> None:
        self.issues.append(ActionIssue(msg, loc))

    def slot_type(self, target: int, slot: str, loc) -> Optional[str]:
        if target > self.ctx.arity:
            self.error(f"${target} is out of range: the rule has {self.ctx.arity} "
                       f"right-hand symbol(s)", loc)
            return None
        attr = self.ctx.slots[target].get(slot)
        if attr is None:
            self.error(f"{self.ctx.describe(target)} has no slot {slot!r}", loc)
            return None
        return attr.base_type

    def block(self, stmts) -> None:
        for s in stmts:
            self.stmt(s)

    def stmt(self, s) -> None:
        if isinstance(s, Assign):
            want = self.slot_type(s.target, s.slot, s.loc)
            got = self.expr(s.value)
            if want and got and want != got:
                self.error(f"cannot assign {got} to {s.slot!r} of type {want}", s.loc)
        elif isinstance(s, If):
            self.want(s.cond, BOOLEAN, "if condition")
            self.block(s.then)
            self.block(s.otherwise)
        elif isinstance(s, Revert):
            if not self.ctx.allow_revert:
                self.error("revert is not allowed in translation rules", s.loc)
        elif isinstance(s, CallStmt):
            self.expr(s.call)
        else:  # pragma: no cover
            raise TypeError(s)

    def want(self, e, t: str, what: str) -> None:
        got = self.expr(e)
        if got and got != t:
            self.error(f"{what} must be {t}, not {got}", e.loc)

    def expr(self, e) -> Optional[str]:
        if isinstance(e, Literal):
            return e.type
        if isinstance(e, SlotRead):
            return self.slot_type(e.target, e.slot, e.loc)
        if isinstance(e, ValuesIndex):
            self.want(e.index, INTEGER, "array index")
            attr = self.ctx.attributes.get(e.attr)
            if attr is None:
                self.error(f"unknown attribute {e.attr!r}", e.loc)
                return None
            if not isinstance(attr.domain, Enumeration):
                self.error(f"attribute {e.attr!r} is not enumerated; "
                           f"{e.attr}_values does not exist", e.loc)
                return None
            self.indexed.add(e.attr)
            return attr.base_type
        if isinstance(e, Call):
            sig = self.ctx.signatures.get(e.name)
            arg_types = [self.expr(a) for a in e.args]
            if sig is None:
                self.error(f"unknown function {e.name!r}", e.loc)
                return None
            if len(e.args) != len(sig.params):
                self.error(f"{e.name}() takes {len(sig.params)} argument(s), "
                           f"{len(e.args)} given", e.loc)
                return sig.returns
            for k, (got, want, a) in enumerate(zip(arg_types, sig.params, e.args), 1):
                if got and got != want:
                    self.error(f"argument {k} of {e.name}() must be {want}, not {got}", a.loc)
            return sig.returns
        if isinstance(e, Not):
            self.want(e.operand, BOOLEAN, "operand of '!'")
            return BOOLEAN
        if isinstance(e, Binary):
            lt, rt = self.expr(e.lhs), self.expr(e.rhs)
            if lt is None or rt is None:
                return INTEGER if e.op in ("+", "-") else BOOLEAN
            if e.op in ("==", "!="):
                if lt != rt or lt == BOOLEAN:
                    self.error(f"cannot compare {lt} with {rt} using {e.op!r}", e.loc)
                return BOOLEAN
            if e.op in ("&&", "||"):
                operand, result = BOOLEAN, BOOLEAN
            elif e.op in ("+", "-"):
                operand, result = INTEGER, INTEGER
            else:
                operand, result = INTEGER, BOOLEAN
            if lt != operand or rt != operand:
                self.error(f"operator {e.op!r} needs {operand} operands, got {lt} and {rt}", e.loc)
            return result
        raise TypeError(e)  # pragma: no cover


def parse_action(text: str, ctx: ActionContext,
                 origin: Optional[SourceLocation] = None) -> ActionBlock:
    """Parse and type-check one action block (without its outer braces)."""
    origin = origin or SourceLocation("<action>", 1, 1)
    toks = _tokenize(text, origin)
    stmts = _Parser(toks).block_body(None)
    checker = _Checker(ctx)
    checker.block(stmts)
    if checker.issues:
        raise ActionError(checker.issues)
    enums = {name: ctx.attributes[name].domain.values for name in checker.indexed}
    return ActionBlock(stmts, ctx.arity, enums)


# -- evaluation --------------------------------------------------------------

class Outcome(enum.Enum):
    COMPLETED = "completed"
    REVERTED = "reverted"


class _Reverted(Exception):
    pass


@dataclass
class Environment:
    lhs: SymbolInstance
    rhs: Sequence[SymbolInstance]
    registry: FunctionRegistry

    def instance(self, target: int) -> SymbolInstance:
        return self.lhs if target == 0 else self.rhs[target - 1]

    def snapshot(self) -> list:
        return [self.lhs.copy()] + [r.copy() for r in self.rhs]

    def restore(self, snap: list) -> None:
        self.lhs.restore(snap[0])
        for inst, saved in zip(self.rhs, snap[1:]):
            inst.restore(saved)


def _check_int(v: int, loc) -> int:
    if not INT64_MIN <= v <= INT64_MAX:
        raise ActionEvalError(f"integer overflow ({v})", "overflow", loc)
    return v


class _Evaluator:
    def __init__(self, env: Environment, enumerations: Mapping):
        self.env = env
        self.enumerations = enumerations

    def run(self, stmts) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                value = self.eval(s.value)
                try:
                    self.env.instance(s.target)[s.slot] = value
                except SlotValueError as exc:
                    raise ActionEvalError(str(exc), "domain", s.loc) from None
            elif isinstance(s, If):
                self.run(s.then if self.eval(s.cond) else s.otherwise)
            elif isinstance(s, Revert):
                raise _Reverted()
            else:
                self.eval(s.call)

    def eval(self, e) -> Any:
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, SlotRead):
            try:
                return self.env.instance(e.target)[e.slot]
            except UnsetSlotError as exc:
                raise ActionEvalError(str(exc), "unset", e.loc) from None
        if isinstance(e, Binary):
            op = e.op
            if op == "&&":
                return self.eval(e.lhs) and self.eval(e.rhs)
            if op == "||":
                return self.eval(e.lhs) or self.eval(e.rhs)
            a, b = self.eval(e.lhs), self.eval(e.rhs)
            if op == "+":
                return _check_int(a + b, e.loc)
            if op == "-":
                return _check_int(a - b, e.loc)
            if op == "==":
                return a == b
            if op == "!=":
                return a != b
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b
        if isinstance(e, Not):
            return not self.eval(e.operand)
        if isinstance(e, ValuesIndex):
            return self.values_index(e)
        if isinstance(e, Call):
            args = [self.eval(a) for a in e.args]
            try:
                return self.env.registry.call(e.name, args)
            except FunctionError as exc:
                raise ActionEvalError(str(exc), "function", e.loc) from None
        raise TypeError(e)  # pragma: no cover

    def values_index(self, e: ValuesIndex) -> Any:
        k = self.eval(e.index)
        values = self.enumerations[e.attr]
        if not 0 <= k < len(values):
            raise ActionEvalError(
                f"{e.attr}_values[{k}] is out of range (size {len(values)})", "index", e.loc)
        return values[k]


def eval_action(block: Optional[ActionBlock], env: Environment) -> Outcome:
    """Run *block* against *env*.

    On REVERTED the environment may be partially written; rolling it back is
    the caller's job (see :func:`apply_action`).
    """
    if not block:
        return Outcome.COMPLETED
    if len(env.rhs) != block.arity:
        raise ValueError(f"block expects {block.arity} right-hand instance(s), "
                         f"got {len(env.rhs)}")
    try:
        _Evaluator(env, block.enumerations).run(block.statements)
    except _Reverted:
        return Outcome.REVERTED
    return Outcome.COMPLETED


def apply_action(block: Optional[ActionBlock], env: Environment) -> Outcome:
    """Like :func:`eval_action` but all-or-nothing: a revert or an error
    leaves every instance in *env* as it was."""
    if not block:
        return Outcome.COMPLETED
    snap = env.snapshot()
    try:
        outcome = eval_action(block, env)
    except BaseException:
        env.restore(snap)
        raise
    if outcome is Outcome.REVERTED:
        env.restore(snap)
    return outcome
