"""JSON Lines form of a symbol stream: one ``{symbol, terminal, attrs}`` per line."""
from __future__ import annotations

import json
from typing import Iterable, TextIO

from .model import Grammar, SymbolInstance
from .parse import SymbolStream


class StreamFormatError(ValueError):
    pass


def dump_record(inst: SymbolInstance) -> str:
    attrs = {slot: inst.values[slot] for slot in inst.schema if slot in inst.values}
    return json.dumps({"symbol": inst.name, "terminal": inst.is_terminal, "attrs": attrs},
                      ensure_ascii=False)


def dumps(stream: Iterable[SymbolInstance]) -> str:
    return "".join(dump_record(inst) + "\n" for inst in stream)


def dump(stream: Iterable[SymbolInstance], fh: TextIO) -> None:
    fh.write(dumps(stream))


def loads(text: str, grammar: Grammar) -> SymbolStream:
    out = SymbolStream()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            name, terminal, attrs = rec["symbol"], rec["terminal"], rec["attrs"]
            inst = grammar.instance(name, attrs)
        except (ValueError, KeyError, TypeError) as exc:
            raise StreamFormatError(f"line {lineno}: {exc}") from None
        if inst.is_terminal != terminal:
            raise StreamFormatError(f"line {lineno}: terminal flag of {name!r} is wrong")
        out.symbols.append(inst)
    out.capacity = max(out.capacity, len(out.symbols))
    return out
