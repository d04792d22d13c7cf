"""Canonical pretty-printer; output re-parses to a structurally equal AST."""

from __future__ import annotations

import math

from .ast import Abs, Assign, BinOp, Compare, If, Logic, Neg, Not, Num, Program, Var

INDENT = "    "

# precedence levels; a child is parenthesised when its level is below the
# minimum its slot requires
_LEVEL = {"or": 1, "and": 2, "not": 3, "rel": 4, "add": 5, "mul": 6, "neg": 7, "atom": 8}


def format_number(value: float) -> str:
    if not math.isfinite(value) or value < 0 or (value == 0 and math.copysign(1.0, value) < 0):
        raise ValueError(f"literal {value!r} has no source form")
    if value.is_integer() and value < 1e16:
        return str(int(value))
    text = repr(value)
    return text


def _level(e) -> int:
    if isinstance(e, Logic):
        return _LEVEL[e.op]
    if isinstance(e, Not):
        return _LEVEL["not"]
    if isinstance(e, Compare):
        return _LEVEL["rel"]
    if isinstance(e, BinOp):
        return _LEVEL["add"] if e.op in "+-" else _LEVEL["mul"]
    if isinstance(e, Neg):
        return _LEVEL["neg"]
    return _LEVEL["atom"]


def _sub(e, min_level: int) -> str:
    text = format_expr(e)
    return f"({text})" if _level(e) < min_level else text


def format_expr(e) -> str:
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Abs):
        return f"abs({format_expr(e.operand)})"
    if isinstance(e, Neg):
        return "-" + _sub(e.operand, _LEVEL["neg"])
    if isinstance(e, Not):
        return "not " + _sub(e.operand, _LEVEL["not"])
    if isinstance(e, Compare):
        return f"{_sub(e.left, _LEVEL['add'])} {e.op} {_sub(e.right, _LEVEL['add'])}"
    if isinstance(e, (BinOp, Logic)):
        lvl = _level(e)
        return f"{_sub(e.left, lvl)} {e.op} {_sub(e.right, lvl + 1)}"
    raise TypeError(f"not an expression: {e!r}")


def _format_block(stmts, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    for s in stmts:
        if isinstance(s, Assign):
            out.append(f"{pad}{s.target} := {format_expr(s.expr)};")
        elif isinstance(s, If):
            out.append(f"{pad}if {format_expr(s.cond)} then")
            _format_block(s.then, depth + 1, out)
            if s.orelse is not None:
                out.append(f"{pad}else")
                _format_block(s.orelse, depth + 1, out)
            out.append(f"{pad}end")
        else:
            raise TypeError(f"not a statement: {s!r}")


def pretty_print(program: Program) -> str:
    """Render ``program`` in canonical form, one statement per line.

    A single assignment renders without a trailing newline (``"P1 := 1;"``);
    multi-line programs are joined with newlines.
    """
    lines: list[str] = []
    _format_block(program.body, 0, lines)
    return "\n".join(lines)
