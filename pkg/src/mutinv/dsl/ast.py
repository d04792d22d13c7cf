"""AST node types for the control language.

Nodes are frozen dataclasses.  ``nid`` (the pre-order node id) and ``pos``
(line, column) are excluded from equality and hashing, so ``==`` on two
programs is structural identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Iterator, Union

ARITH_OPS = ("+", "-", "*", "/")
REL_OPS = (">", ">=", "<", "<=", "=", "<>")
LOGIC_OPS = ("and", "or")


def _meta():
    return field(default=-1, compare=False, repr=False)


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: float
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Abs:
    operand: "Expr"
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class BinOp:
    """Arithmetic operator node (``+ - * /``)."""

    op: str
    left: "Expr"
    right: "Expr"
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Logic:
    op: str
    left: "Expr"
    right: "Expr"
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


Expr = Union[Num, Var, Neg, Abs, Not, BinOp, Compare, Logic]


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] | None = None
    nid: int = _meta()
    pos: tuple[int, int] = _pos()


Stmt = Union[Assign, If]
Node = Union[Expr, Stmt]


@dataclass(frozen=True)
class Program:
    body: tuple[Stmt, ...]

    def nodes(self) -> Iterator[Node]:
        """All statement and expression nodes in pre-order."""
        for stmt in self.body:
            yield from walk(stmt)

    def node_ids(self) -> frozenset[int]:
        return frozenset(n.nid for n in self.nodes())

    def find(self, nid: int) -> Node | None:
        for n in self.nodes():
            if n.nid == nid:
                return n
        return None


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, (Num, Var)):
        return ()
    if isinstance(node, (Neg, Abs, Not)):
        return (node.operand,)
    if isinstance(node, (BinOp, Compare, Logic)):
        return (node.left, node.right)
    if isinstance(node, Assign):
        return (node.expr,)
    if isinstance(node, If):
        return (node.cond,) + node.then + (node.orelse or ())
    raise TypeError(f"not an AST node: {node!r}")


def walk(node: Node) -> Iterator[Node]:
    yield node
    for child in children(node):
        yield from walk(child)


def number(program: Program) -> Program:
    """Return a copy of ``program`` with fresh pre-order node ids from 0."""
    counter = iter(range(1 << 62))

    def renum(node):
        nid = next(counter)
        updates = {"nid": nid}
        for f in fields(node):
            value = getattr(node, f.name)
            if f.name in ("nid", "pos"):
                continue
            if isinstance(value, tuple) and f.name in ("then", "orelse"):
                updates[f.name] = tuple(renum(s) for s in value)
            elif hasattr(value, "nid"):
                updates[f.name] = renum(value)
        return replace(node, **updates)

    return Program(tuple(renum(s) for s in program.body))


def if_depth(stmts: tuple[Stmt, ...] | None) -> int:
    """Maximum nesting depth of conditionals in a block (0 for straight-line code)."""
    best = 0
    for s in stmts or ():
        if isinstance(s, If):
            best = max(best, 1 + if_depth(s.then), 1 + if_depth(s.orelse))
    return best
