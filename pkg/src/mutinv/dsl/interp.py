"""Scan-cycle interpreter with exact node coverage.

``and``/``or`` short-circuit, so the right operand of a decided connector is
not evaluated and does not appear in the coverage set.
"""

from __future__ import annotations

from typing import Mapping

from .ast import Abs, Assign, BinOp, Compare, If, Logic, Neg, Not, Num, Program, Var


class DslRuntimeError(RuntimeError):
    def __init__(self, node_id: int, message: str):
        super().__init__(f"node {node_id}: {message}")
        self.node_id = node_id
        self.message = message


class DslDivisionByZero(DslRuntimeError, ZeroDivisionError):
    pass


class DslTypeError(DslRuntimeError, TypeError):
    pass


class _Scan:
    __slots__ = ("sensors", "actuators", "local", "covered")

    def __init__(self, sensors, actuators):
        self.sensors = sensors
        self.actuators = actuators
        self.local: dict[str, object] = {}
        self.covered: set[int] = set()

    def num(self, e) -> float:
        v = self.eval(e)
        if type(v) is bool:
            raise DslTypeError(e.nid, "boolean used as number")
        return v

    def boolean(self, e) -> bool:
        v = self.eval(e)
        if type(v) is not bool:
            raise DslTypeError(e.nid, "number used as boolean")
        return v

    def eval(self, e):
        self.covered.add(e.nid)
        t = type(e)
        if t is Num:
            return e.value
        if t is Var:
            name = e.name
            if name in self.local:
                return self.local[name]
            if name in self.actuators:
                return self.actuators[name]
            if name in self.sensors:
                return self.sensors[name]
            raise DslRuntimeError(e.nid, f"unbound identifier {name}")
        if t is BinOp:
            a = self.num(e.left)
            b = self.num(e.right)
            op = e.op
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if b == 0:
                raise DslDivisionByZero(e.nid, "division by zero")
            return a / b
        if t is Compare:
            a = self.num(e.left)
            b = self.num(e.right)
            op = e.op
            if op == ">":
                return a > b
            if op == ">=":
                return a >= b
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == "=":
                return a == b
            return a != b
        if t is Logic:
            a = self.boolean(e.left)
            if e.op == "and":
                return self.boolean(e.right) if a else False
            return True if a else self.boolean(e.right)
        if t is Not:
            return not self.boolean(e.operand)
        if t is Neg:
            return -self.num(e.operand)
        if t is Abs:
            return abs(self.num(e.operand))
        raise TypeError(f"not an expression: {e!r}")

    def run(self, stmts) -> None:
        for s in stmts:
            self.covered.add(s.nid)
            if type(s) is Assign:
                v = self.eval(s.expr)
                if s.target in self.actuators:
                    self.actuators[s.target] = 1.0 if v else 0.0
                else:
                    self.local[s.target] = v
            elif self.boolean(s.cond):
                self.run(s.then)
            elif s.orelse is not None:
                self.run(s.orelse)


def evaluate(
    program: Program, sensors: Mapping[str, float], actuators: Mapping[str, float]
) -> tuple[dict[str, float], frozenset[int]]:
    """Run one scan cycle.

    Returns the updated actuator values (1.0 on, 0.0 off) and the ids of every
    node evaluated.  Neither input mapping is modified.
    """
    scan = _Scan(sensors, dict(actuators))
    scan.run(program.body)
    return scan.actuators, frozenset(scan.covered)
