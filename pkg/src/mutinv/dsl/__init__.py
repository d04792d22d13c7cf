"""Loop-free structured-text control language: parser, printer, checker, interpreter."""

from .ast import (
    ARITH_OPS,
    LOGIC_OPS,
    REL_OPS,
    Abs,
    Assign,
    BinOp,
    Compare,
    If,
    Logic,
    Neg,
    Not,
    Num,
    Program,
    Var,
    if_depth,
    number,
    walk,
)
from .interp import DslDivisionByZero, DslRuntimeError, DslTypeError, evaluate
from .parser import MAX_DEPTH, DslSyntaxError, parse, tokenize
from .printer import format_expr, pretty_print
from .validate import Declarations, Diagnostic, validate

__all__ = [
    "ARITH_OPS",
    "LOGIC_OPS",
    "REL_OPS",
    "MAX_DEPTH",
    "Abs",
    "Assign",
    "BinOp",
    "Compare",
    "If",
    "Logic",
    "Neg",
    "Not",
    "Num",
    "Program",
    "Var",
    "Declarations",
    "Diagnostic",
    "DslSyntaxError",
    "DslRuntimeError",
    "DslDivisionByZero",
    "DslTypeError",
    "evaluate",
    "format_expr",
    "if_depth",
    "number",
    "parse",
    "pretty_print",
    "tokenize",
    "validate",
    "walk",
]
