"""Host functions callable from action blocks."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from .model import INTEGER, TEXT


class FunctionError(RuntimeError):
    """A registry function failed; surfaces as an action evaluation error."""


class RegisterMapError(ValueError):
    def __init__(self, origin: str, line: int, message: str):
        super().__init__(f"{origin}:{line}: {message}")
        self.origin = origin
        self.line = line


@dataclass(frozen=True)
class Signature:
    params: tuple
    returns: str


BUILTIN_SIGNATURES = {
    "map_register": Signature((TEXT,), TEXT),
    "create_label": Signature((), INTEGER),
    "print_as_a_label": Signature((INTEGER,), TEXT),
    "to_str": Signature((INTEGER,), TEXT),
}


class FunctionRegistry:
    def __init__(self) -> None:
        self._functions: dict = {}

    def register(self, name: str, params: Sequence[str], returns: str, fn: Callable) -> None:
        if name in self._functions:
            raise ValueError(f"function {name!r} is already registered")
        for t in (*params, returns):
            if t not in (TEXT, INTEGER):
                raise ValueError(f"unsupported type {t!r} in signature of {name!r}")
        self._functions[name] = (Signature(tuple(params), returns), fn)

    @property
    def signatures(self) -> Mapping[str, Signature]:
        return {name: sig for name, (sig, _) in self._functions.items()}

    def __contains__(self, name: str) -> bool:
        return name in self._functions

    def call(self, name: str, args: Sequence) -> object:
        try:
            _, fn = self._functions[name]
        except KeyError:
            raise FunctionError(f"unknown function {name!r}") from None
        try:
            return fn(*args)
        except FunctionError:
            raise
        except Exception as exc:
            raise FunctionError(f"{name}() failed: {exc}") from exc


class Session:
    """Per-run state behind the built-ins: the label counter and register map."""

    def __init__(self, register_map: Optional[Mapping[str, str]] = None):
        self.register_map = dict(register_map or {})
        self.next_label = 0

    def map_register(self, reg: str) -> str:
        try:
            return self.register_map[reg]
        except KeyError:
            raise FunctionError(f"no mapping for register {reg!r}") from None

    def create_label(self) -> int:
        n = self.next_label
        self.next_label += 1
        return n


def print_as_a_label(n: int) -> str:
    return f".L{n}"


def default_registry(register_map: Optional[Mapping[str, str]] = None) -> FunctionRegistry:
    """A registry with the built-ins bound to a fresh :class:`Session`."""
    session = Session(register_map)
    reg = FunctionRegistry()
    reg.register("map_register", (TEXT,), TEXT, session.map_register)
    reg.register("create_label", (), INTEGER, session.create_label)
    reg.register("print_as_a_label", (INTEGER,), TEXT, print_as_a_label)
    reg.register("to_str", (INTEGER,), TEXT, str)
    reg.session = session  # type: ignore[attr-defined]
    return reg


def parse_register_map(text: str, origin: str = "<regmap>") -> dict:
    """Parse ``source=target`` lines; ``#`` starts a comment."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        src, sep, dst = line.partition("=")
        src, dst = src.strip(), dst.strip()
        if not sep or not src or not dst or any(c.isspace() for c in src + dst):
            raise RegisterMapError(origin, lineno, f"expected 'source=target', got {raw.strip()!r}")
        if src in mapping:
            raise RegisterMapError(origin, lineno, f"register {src!r} mapped twice")
        mapping[src] = dst
    return mapping


def load_register_map(path) -> dict:
    path = Path(path)
    return parse_register_map(path.read_text(encoding="utf-8"), str(path))
