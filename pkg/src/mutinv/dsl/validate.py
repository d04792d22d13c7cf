"""Static checks: nesting depth, identifier resolution, definite assignment, types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .ast import Abs, Assign, BinOp, Compare, If, Logic, Neg, Not, Num, Program, Var

NUM, BOOL = "number", "boolean"


@dataclass(frozen=True)
class Declarations:
    """Names visible to a program: read-only sensors and read/write actuators."""

    sensors: frozenset[str] = frozenset()
    actuators: frozenset[str] = frozenset()

    @classmethod
    def of(cls, declared: "Declarations | Iterable[str]") -> "Declarations":
        if isinstance(declared, Declarations):
            return declared
        return cls(actuators=frozenset(declared))

    @classmethod
    def from_plant(cls, config) -> "Declarations":
        return cls(frozenset(config.sensor_names), frozenset(config.actuator_names))

    @property
    def names(self) -> frozenset[str]:
        return self.sensors | self.actuators


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    node_id: int = -1

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.message}"


class _Checker:
    def __init__(self, decl: Declarations, max_depth: int):
        self.decl = decl
        self.max_depth = max_depth
        self.diags: list[Diagnostic] = []
        # internal variables get the type of their first assignment
        self.internal_types: dict[str, str] = {}
        self.assigned: frozenset[str] = frozenset()

    def report(self, node, message: str) -> None:
        self.diags.append(Diagnostic(node.pos[0], node.pos[1], message, node.nid))

    def block(self, stmts, defined: frozenset[str], depth: int) -> frozenset[str]:
        for s in stmts:
            if isinstance(s, Assign):
                self.expr(s.expr, defined)
                if s.target in self.decl.sensors:
                    self.report(s, f"cannot assign to sensor {s.target}")
                elif s.target not in self.decl.actuators:
                    t = self.type_of(s.expr, defined)
                    prev = self.internal_types.setdefault(s.target, t)
                    if t is not None and prev is not None and prev != t:
                        self.report(s, f"type error: {s.target} is {prev}, assigned {t}")
                    defined = defined | {s.target}
            elif isinstance(s, If):
                if depth + 1 > self.max_depth:
                    self.report(s, f"nesting depth exceeds {self.max_depth}")
                self.expr(s.cond, defined)
                if self.type_of(s.cond, defined) == NUM:
                    self.report(s.cond, "type error: condition must be boolean")
                after_then = self.block(s.then, defined, depth + 1)
                after_else = self.block(s.orelse or (), defined, depth + 1)
                defined = after_then & after_else
        return defined

    def expr(self, e, defined: frozenset[str]) -> None:
        # identifier resolution, then one type check per operator node
        if isinstance(e, Var):
            if e.name in self.decl.names:
                return
            if e.name in self.assigned:
                if e.name not in defined:
                    self.report(e, f"variable {e.name} may be used before assignment")
                return
            self.report(e, f"unknown identifier {e.name}")
            return
        if isinstance(e, Num):
            return
        operands = [e.operand] if isinstance(e, (Neg, Abs, Not)) else [e.left, e.right]
        for sub in operands:
            self.expr(sub, defined)
        want = BOOL if isinstance(e, (Not, Logic)) else NUM
        for sub in operands:
            got = self.type_of(sub, defined)
            if got is not None and got != want:
                self.report(sub, f"type error: {got} used as {want}")

    def type_of(self, e, defined) -> str | None:
        if isinstance(e, (Num, Neg, Abs, BinOp)):
            return NUM
        if isinstance(e, (Compare, Logic, Not)):
            return BOOL
        if isinstance(e, Var):
            if e.name in self.decl.names:
                return NUM
            return self.internal_types.get(e.name)
        raise TypeError(f"not an expression: {e!r}")


def validate(program: Program, declared: "Declarations | Iterable[str]", max_depth: int = 3) -> list[Diagnostic]:
    """Return diagnostics for ``program``; an empty list means it is well formed.

    Sensors and actuators read as numbers; actuators are written with any
    value and switch on when it is non-zero.  Any other assigned name is an
    internal variable local to one scan cycle, so it must be definitely
    assigned before it is read.
    """
    checker = _Checker(Declarations.of(declared), max_depth)
    checker.assigned = frozenset(n.target for n in program.nodes() if isinstance(n, Assign))
    checker.block(program.body, frozenset(), 0)
    return checker.diags
