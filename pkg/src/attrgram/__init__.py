"""Attribute-grammar workbench: parse, generate and translate text from one grammar file."""
from .actions import (ActionBlock, ActionError, ActionEvalError, Environment, Outcome,
                      apply_action, eval_action, parse_action)
from .frontend import (GrammarSyntaxError, format_grammar, load_grammar, load_grammar_text,
                       parse_grammar)
from .grow import (GrowConfig, GrowError, GrowResult, Grower, NoApplicableRule, RuleBitmap,
                   extract_rule, grow, render_terminal)
from .model import Grammar, PackedId, SymbolInstance, SymbolKind
from .parse import ParseError, SymbolStream, build_tokenizer, parse_text, reduce_check
from .registry import FunctionRegistry, default_registry, load_register_map, parse_register_map
from .rng import Xoshiro256
from .translate import (MissingRule, TranslateConfig, TranslateError, translate_stream,
                        translate_text)
from .validation import GrammarError, ValidationReport, assign_ids, prepare, validate

__all__ = [
    "ActionBlock",
    "ActionError",
    "ActionEvalError",
    "Environment",
    "FunctionRegistry",
    "Grammar",
    "GrammarError",
    "GrammarSyntaxError",
    "GrowConfig",
    "GrowError",
    "GrowResult",
    "Grower",
    "MissingRule",
    "NoApplicableRule",
    "Outcome",
    "PackedId",
    "ParseError",
    "RuleBitmap",
    "SymbolInstance",
    "SymbolKind",
    "SymbolStream",
    "TranslateConfig",
    "TranslateError",
    "ValidationReport",
    "Xoshiro256",
    "apply_action",
    "assign_ids",
    "build_tokenizer",
    "default_registry",
    "eval_action",
    "extract_rule",
    "format_grammar",
    "grow",
    "load_grammar",
    "load_grammar_text",
    "load_register_map",
    "parse_action",
    "parse_grammar",
    "parse_register_map",
    "parse_text",
    "prepare",
    "reduce_check",
    "render_terminal",
    "translate_stream",
    "translate_text",
    "validate",
]
