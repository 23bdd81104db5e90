"""``attrgram`` command line: check, parse, generate, translate.

Exit codes: 0 success, 1 domain error (invalid grammar, parse/grow/translate
failure), 2 I/O or configuration error (including usage errors), 3 the
input did not fit in ``--capacity``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .frontend import GrammarSyntaxError, parse_grammar
from .grow import GrowConfig, Grower, GrowError
from .model import SlotValueError
from .parse import ParseError, parse_text
from .registry import RegisterMapError, default_registry, load_register_map
from .streamio import dumps
from .translate import MissingRule, TranslateConfig, TranslateError, TruncatedInput, translate_text
from .validation import GrammarError, prepare, validate

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_TRUNCATED = 0, 1, 2, 3


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _read(path: Optional[str]) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Exit(EXIT_IO, f"cannot read {path}: {exc}") from None


def _grammar(path: str):
    text = _read(path)
    try:
        return prepare(parse_grammar(text, path))
    except (GrammarSyntaxError, GrammarError) as exc:
        raise _Exit(EXIT_DOMAIN, str(exc)) from None


def _registry(regmap: Optional[str]):
    if regmap is None:
        return default_registry()
    try:
        return default_registry(load_register_map(regmap))
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot read {regmap}: {exc}") from None
    except RegisterMapError as exc:
        raise _Exit(EXIT_IO, str(exc)) from None


def cmd_check(args) -> int:
    text = _read(args.grammar)
    try:
        grammar = parse_grammar(text, args.grammar)
    except GrammarSyntaxError as exc:
        for issue in exc.issues:
            print(issue, file=sys.stderr)
        return EXIT_DOMAIN
    report = validate(grammar)
    for issue in report:
        print(issue, file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_parse(args) -> int:
    grammar = _grammar(args.grammar)
    text = _read(args.input)
    try:
        stream = parse_text(grammar, text, args.capacity, origin=args.input or "<stdin>")
    except ParseError as exc:
        raise _Exit(EXIT_DOMAIN, str(exc)) from None
    out = dumps(stream)
    if args.out:
        try:
            Path(args.out).write_text(out, encoding="utf-8")
        except OSError as exc:
            raise _Exit(EXIT_IO, f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(out)
    if stream.truncated:
        print(f"input truncated at {args.capacity} symbols", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def _start_instance(grammar, name: str, settings: List[str], parser):
    try:
        decl = grammar.symbol(name)
    except KeyError:
        parser.error(f"--start: unknown symbol {name!r}")
    if decl.is_terminal:
        parser.error(f"--start: {name!r} is a terminal; generation starts from a nonterminal")
    inst = grammar.instance(name)
    for item in settings:
        slot, sep, value = item.partition("=")
        if not sep or slot not in inst.schema:
            parser.error(f"--set {item!r}: expected slot=value with a slot of {name}")
        try:
            inst[slot] = inst.schema[slot].convert(value)
        except (SlotValueError, ValueError) as exc:
            raise _Exit(EXIT_DOMAIN, f"--set {item!r}: {exc}") from None
    return inst


def cmd_generate(args, parser) -> int:
    grammar = _grammar(args.grammar)
    registry = _registry(args.regmap)
    start = _start_instance(grammar, args.start, args.set, parser)
    try:
        result = Grower(grammar, _grow_config(args), registry).grow(start)
    except GrowError as exc:
        raise _Exit(EXIT_DOMAIN, f"generate: {exc}") from None
    sys.stdout.write(result.text + "\n" if result.lines else "")
    return EXIT_OK


def cmd_translate(args) -> int:
    grammar = _grammar(args.grammar)
    registry = _registry(args.regmap)
    text = _read(args.input)
    config = TranslateConfig(_grow_config(args), MissingRule(args.on_missing))
    try:
        out = translate_text(grammar, text, config, registry, origin=args.input or "<stdin>")
    except TruncatedInput as exc:
        raise _Exit(EXIT_TRUNCATED, str(exc)) from None
    except TranslateError as exc:
        raise _Exit(EXIT_DOMAIN, str(exc)) from None
    sys.stdout.write(out + "\n" if out else "")
    return EXIT_OK


def _grow_config(args) -> GrowConfig:
    return GrowConfig(seed=args.seed, max_level=args.max_level)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="attrgram", description="Attribute-grammar workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="validate a grammar file")
    c.add_argument("grammar")

    c = sub.add_parser("parse", help="parse text into a JSON Lines symbol stream")
    c.add_argument("grammar")
    c.add_argument("--input", help="input text (default: stdin)")
    c.add_argument("--out", help="stream file (default: stdout)")
    c.add_argument("--capacity", type=_positive, default=1 << 20)

    def grow_flags(c):
        c.add_argument("--seed", type=_seed, default=0)
        c.add_argument("--max-level", type=_nonneg, default=8)
        c.add_argument("--regmap", help="register map file, one source=target per line")

    c = sub.add_parser("generate", help="grow text from a start symbol")
    c.add_argument("grammar")
    c.add_argument("--start", required=True)
    c.add_argument("--set", action="append", default=[], metavar="SLOT=VALUE")
    grow_flags(c)

    c = sub.add_parser("translate", help="translate source text to target text")
    c.add_argument("grammar")
    c.add_argument("--input", help="source text (default: stdin)")
    c.add_argument("--on-missing", choices=[m.value for m in MissingRule], default="error")
    grow_flags(c)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args)
        if args.command == "parse":
            return cmd_parse(args)
        if args.command == "generate":
            # usage errors inside need the subparser's prog name
            return cmd_generate(args, parser)
        return cmd_translate(args)
    except _Exit as exc:
        if str(exc):
            print(f"attrgram: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
