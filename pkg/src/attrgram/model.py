"""In-memory form of an extended attribute grammar.

Everything here is plain data. Rules refer to symbols and attributes by
name; :func:`attrgram.validation.prepare` checks that every name resolves
and then builds the lookup tables that the engines use.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional, Union

TEXT = "text"
INTEGER = "integer"

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1

# Used when an attribute gives no values and no pattern.
DEFAULT_PATTERNS = {
    TEXT: r"[^\s,()\"]+",
    INTEGER: r"-?[0-9]+",
}


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


def _loc() -> Any:
    return field(default=None, compare=False, repr=False)


# -- attribute domains -------------------------------------------------------

@dataclass(frozen=True)
class Enumeration:
    values: tuple


@dataclass(frozen=True)
class Pattern:
    source: str


@dataclass(frozen=True)
class Open:
    pass


Domain = Union[Enumeration, Pattern, Open]


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    base_type: str
    domain: Domain = Open()
    loc: Optional[SourceLocation] = _loc()

    def lexeme_pattern(self) -> str:
        """Regex source for one lexeme of this attribute."""
        if isinstance(self.domain, Enumeration):
            # longest first so that e.g. %r10 is not cut short by %r1
            spellings = sorted((str(v) for v in self.domain.values), key=len, reverse=True)
            return "|".join(re.escape(s) for s in spellings)
        if isinstance(self.domain, Pattern):
            return self.domain.source
        return DEFAULT_PATTERNS[self.base_type]

    def convert(self, lexeme: str) -> Any:
        if self.base_type == INTEGER:
            return int(lexeme)
        return lexeme

    def check_value(self, value: Any) -> None:
        """Raise SlotValueError unless *value* belongs to this attribute."""
        if self.base_type == INTEGER:
            if not isinstance(value, int) or isinstance(value, bool):
                raise SlotValueError(f"attribute {self.name!r} expects an integer, got {value!r}")
            if not INT64_MIN <= value <= INT64_MAX:
                raise SlotValueError(f"attribute {self.name!r}: {value} is outside 64-bit range")
        elif not isinstance(value, str):
            raise SlotValueError(f"attribute {self.name!r} expects text, got {value!r}")
        if isinstance(self.domain, Enumeration) and value not in self.domain.values:
            raise SlotValueError(
                f"{value!r} is not one of the values of attribute {self.name!r}"
            )


# -- symbols -----------------------------------------------------------------

class SymbolKind(enum.Enum):
    TERMINAL = "terminal"
    NONTERMINAL = "nonterminal"


@dataclass(frozen=True)
class Slot:
    local_name: str
    attr: str
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    kind: SymbolKind
    slots: tuple = ()
    numeric_id: Optional[int] = None
    loc: Optional[SourceLocation] = _loc()

    @property
    def is_terminal(self) -> bool:
        return self.kind is SymbolKind.TERMINAL

    @property
    def packed_id(self) -> "PackedId":
        if self.numeric_id is None:
            raise ValueError(f"symbol {self.name!r} has no id yet")
        return PackedId.encode(self.kind, self.numeric_id)


ID_BITS = 31
TERMINAL_FLAG = 1 << ID_BITS


@dataclass(frozen=True, order=True)
class PackedId:
    """32-bit symbol id; the top bit marks terminals."""

    raw: int

    @classmethod
    def encode(cls, kind: SymbolKind, numeric_id: int) -> "PackedId":
        if not 0 <= numeric_id < TERMINAL_FLAG:
            raise ValueError(f"numeric id {numeric_id} does not fit in {ID_BITS} bits")
        flag = TERMINAL_FLAG if kind is SymbolKind.TERMINAL else 0
        return cls(flag | numeric_id)

    @property
    def is_terminal(self) -> bool:
        return bool(self.raw & TERMINAL_FLAG)

    @property
    def kind(self) -> SymbolKind:
        return SymbolKind.TERMINAL if self.is_terminal else SymbolKind.NONTERMINAL

    @property
    def numeric_id(self) -> int:
        return self.raw & (TERMINAL_FLAG - 1)

    def decode(self) -> tuple:
        return self.kind, self.numeric_id


# -- rules -------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    text: str
    spaced: bool = False
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class SlotRef:
    name: str
    spaced: bool = False
    loc: Optional[SourceLocation] = _loc()


TemplateItem = Union[Constant, SlotRef]


@dataclass(frozen=True)
class RepresentationRule:
    terminal: str
    template: tuple
    loc: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Alternative:
    rhs: tuple
    action_text: Optional[str] = None
    rule_id: int = -1
    loc: Optional[SourceLocation] = _loc()
    action_loc: Optional[SourceLocation] = _loc()
    # compiled ActionBlock, filled in by prepare()
    action: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ExpansionRule:
    lhs: str
    alternatives: tuple
    loc: Optional[SourceLocation] = _loc()

    @property
    def rule_ids(self) -> tuple:
        return tuple(alt.rule_id for alt in self.alternatives)


@dataclass(frozen=True)
class TranslationRule:
    lhs: str
    rhs: tuple
    action_text: Optional[str] = None
    loc: Optional[SourceLocation] = _loc()
    action_loc: Optional[SourceLocation] = _loc()
    action: Any = field(default=None, compare=False, repr=False)

    @property
    def target(self) -> str:
        return self.rhs[0]


@dataclass(frozen=True)
class ReductionRule:
    lhs: str
    rhs: tuple
    action_text: Optional[str] = None
    loc: Optional[SourceLocation] = _loc()
    action_loc: Optional[SourceLocation] = _loc()
    action: Any = field(default=None, compare=False, repr=False)


# -- grammar -----------------------------------------------------------------

@dataclass
class Grammar:
    origin: str = "<string>"
    header: list = field(default_factory=list)
    attributes: list = field(default_factory=list)
    symbols: list = field(default_factory=list)
    representations: list = field(default_factory=list)
    expansions: list = field(default_factory=list)
    translations: list = field(default_factory=list)
    reductions: list = field(default_factory=list)
    # lookup tables; empty until prepare() links the grammar
    _index: Optional["_Index"] = field(default=None, compare=False, repr=False)

    @property
    def prepared(self) -> bool:
        return self._index is not None

    @property
    def index(self) -> "_Index":
        if self._index is None:
            raise GrammarNotPrepared("grammar has not been validated and prepared")
        return self._index

    def symbol(self, name: str) -> SymbolDecl:
        try:
            return self.index.symbols[name]
        except KeyError:
            raise KeyError(f"unknown symbol {name!r}") from None

    def attribute(self, name: str) -> AttributeDecl:
        return self.index.attributes[name]

    def schema(self, name: str) -> Mapping[str, AttributeDecl]:
        """Slot name -> attribute for *name*; terminals use their owner's slots."""
        return self.index.schemas[name]

    def owner_of(self, terminal: str) -> str:
        return self.index.owners[terminal]

    def representation(self, terminal: str) -> RepresentationRule:
        return self.index.representations[terminal]

    def translation_for(self, name: str) -> Optional[TranslationRule]:
        return self.index.translations.get(name)

    @property
    def alternatives(self) -> list:
        """Every expansion alternative, indexed by rule id."""
        return self.index.alternatives

    def rule_ids_for(self, sym: Union[str, PackedId]) -> tuple:
        if isinstance(sym, PackedId):
            return self.index.rules_by_id.get(sym.raw, ())
        return self.index.rules_by_id.get(self.symbol(sym).packed_id.raw, ())

    def is_terminal_alternative(self, alt: Alternative) -> bool:
        return len(alt.rhs) == 1 and self.symbol(alt.rhs[0]).is_terminal

    @property
    def max_reduction_length(self) -> int:
        return max((len(r.rhs) for r in self.reductions), default=0)

    def instance(self, name: str, values: Optional[Mapping[str, Any]] = None) -> "SymbolInstance":
        inst = SymbolInstance(self.symbol(name), self.schema(name))
        for slot, value in (values or {}).items():
            inst[slot] = value
        return inst

    def terminals(self) -> Iterator[SymbolDecl]:
        return (s for s in self.symbols if s.is_terminal)

    def nonterminals(self) -> Iterator[SymbolDecl]:
        return (s for s in self.symbols if not s.is_terminal)


@dataclass
class _Index:
    symbols: dict
    attributes: dict
    schemas: dict
    owners: dict
    representations: dict
    translations: dict
    alternatives: list
    rules_by_id: dict


# -- runtime records ---------------------------------------------------------

class SlotValueError(ValueError):
    pass


class UnsetSlotError(KeyError):
    def __init__(self, symbol: str, slot: str):
        super().__init__(f"slot {slot!r} of {symbol!r} is unset")
        self.symbol = symbol
        self.slot = slot

    def __str__(self) -> str:
        return self.args[0]


class SymbolInstance:
    """One attributed occurrence of a symbol.

    Slots start unset. Writes are checked against the slot's attribute, so an
    instance never holds a value outside its declared domain.
    """

    __slots__ = ("decl", "schema", "values")

    def __init__(self, decl: SymbolDecl, schema: Mapping[str, AttributeDecl],
                 values: Optional[dict] = None):
        self.decl = decl
        self.schema = schema
        self.values = dict(values or {})

    @property
    def name(self) -> str:
        return self.decl.name

    @property
    def packed_id(self) -> PackedId:
        return self.decl.packed_id

    @property
    def is_terminal(self) -> bool:
        return self.decl.is_terminal

    def __getitem__(self, slot: str) -> Any:
        if slot not in self.schema:
            raise KeyError(f"{self.decl.name!r} has no slot {slot!r}")
        try:
            return self.values[slot]
        except KeyError:
            raise UnsetSlotError(self.decl.name, slot) from None

    def __setitem__(self, slot: str, value: Any) -> None:
        try:
            attr = self.schema[slot]
        except KeyError:
            raise KeyError(f"{self.decl.name!r} has no slot {slot!r}") from None
        attr.check_value(value)
        self.values[slot] = value

    def is_set(self, slot: str) -> bool:
        return slot in self.values

    def copy(self) -> "SymbolInstance":
        return SymbolInstance(self.decl, self.schema, self.values)

    def restore(self, snapshot: "SymbolInstance") -> None:
        self.values = dict(snapshot.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymbolInstance):
            return NotImplemented
        return self.decl.name == other.decl.name and self.values == other.values

    def __hash__(self) -> int:  # pragma: no cover - instances are mutable
        raise TypeError("SymbolInstance is unhashable")

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={v!r}" for k, v in self.values.items())
        return f"{self.decl.name}{{{body}}}"


class GrammarNotPrepared(RuntimeError):
    pass
