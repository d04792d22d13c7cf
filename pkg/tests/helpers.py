"""Shared test utilities: a random program generator and a brute-force mutant enumerator."""

from __future__ import annotations

import dataclasses
import random

from mutinv.dsl import Abs, Assign, BinOp, Compare, If, Logic, Neg, Not, Num, Program, Var, number, pretty_print

SENSORS = ("L1", "L2", "L3", "L4", "L5")
ACTUATORS = ("P1", "V12", "V23", "V34", "V45", "D5")
INTERNALS = ("x", "tmp", "Limit_2", "cap")


# --- random programs -------------------------------------------------------


class ProgramGen:
    """Seeded generator of well-typed, loop-free programs of bounded size."""

    def __init__(self, seed: int, max_if_depth: int = 3, max_expr_depth: int = 3):
        self.rng = random.Random(seed)
        self.max_if_depth = max_if_depth
        self.max_expr_depth = max_expr_depth

    def number_literal(self) -> Num:
        r = self.rng.random()
        if r < 0.3:
            return Num(float(self.rng.randint(0, 20)))
        if r < 0.6:
            return Num(round(self.rng.uniform(0, 1000), self.rng.randint(0, 3)))
        return Num(self.rng.uniform(0, 1e4))

    def num(self, depth: int, readable: tuple[str, ...]):
        rng = self.rng
        if depth <= 0 or rng.random() < 0.35:
            if readable and rng.random() < 0.6:
                return Var(rng.choice(readable))
            return self.number_literal()
        kind = rng.choice(("bin", "bin", "neg", "abs"))
        if kind == "neg":
            return Neg(self.num(depth - 1, readable))
        if kind == "abs":
            return Abs(self.num(depth - 1, readable))
        return BinOp(rng.choice("+-*/"), self.num(depth - 1, readable), self.num(depth - 1, readable))

    def boolean(self, depth: int, readable: tuple[str, ...]):
        rng = self.rng
        if depth <= 1 or rng.random() < 0.5:
            op = rng.choice((">", ">=", "<", "<=", "=", "<>"))
            return Compare(op, self.num(depth - 1, readable), self.num(depth - 1, readable))
        if rng.random() < 0.2:
            return Not(self.boolean(depth - 1, readable))
        return Logic(rng.choice(("and", "or")), self.boolean(depth - 1, readable), self.boolean(depth - 1, readable))

    def block(self, depth_left: int, defined: set[str], n_max: int) -> tuple:
        stmts = []
        for _ in range(self.rng.randint(1, n_max)):
            readable = tuple(SENSORS) + tuple(ACTUATORS) + tuple(sorted(defined))
            if depth_left > 0 and self.rng.random() < 0.3:
                cond = self.boolean(self.max_expr_depth, readable)
                then = self.block(depth_left - 1, set(defined), max(1, n_max - 1))
                orelse = self.block(depth_left - 1, set(defined), max(1, n_max - 1)) if self.rng.random() < 0.5 else None
                stmts.append(If(cond, then, orelse))
            else:
                target = self.rng.choice(ACTUATORS + INTERNALS)
                if target in INTERNALS:
                    expr = self.num(self.max_expr_depth, readable)
                    defined.add(target)
                elif self.rng.random() < 0.5:
                    expr = self.boolean(self.max_expr_depth, readable)
                else:
                    expr = self.num(self.max_expr_depth, readable)
                stmts.append(Assign(target, expr))
        return tuple(stmts)

    def program(self, n_max: int = 4) -> Program:
        return number(Program(self.block(self.max_if_depth, set(), n_max)))


# --- brute-force mutant enumeration ----------------------------------------

_ARITH = ["+", "-", "*", "/"]
_REL = [">", ">=", "<", "<=", "=", "<>"]
_LOGIC = ["and", "or"]


def _child_slots(node):
    """(field name, index or None) for each child, in source order."""
    slots = []
    for f in dataclasses.fields(node):
        if f.name in ("nid", "pos"):
            continue
        v = getattr(node, f.name)
        if isinstance(v, tuple) and f.name in ("then", "orelse"):
            slots.extend((f.name, i) for i in range(len(v)))
        elif dataclasses.is_dataclass(v):
            slots.append((f.name, None))
    return slots


def _get(node, slot):
    name, i = slot
    v = getattr(node, name)
    return v if i is None else v[i]


def _put(node, slot, child):
    name, i = slot
    if i is None:
        return dataclasses.replace(node, **{name: child})
    v = list(getattr(node, name))
    v[i] = child
    return dataclasses.replace(node, **{name: tuple(v)})


def _all_paths(node, prefix=()):
    yield prefix, node
    for slot in _child_slots(node):
        yield from _all_paths(_get(node, slot), prefix + (slot,))


def _replace_path(node, path, new):
    if not path:
        return new
    return _put(node, path[0], _replace_path(_get(node, path[0]), path[1:], new))


def _boolean_internals(program: Program) -> set[str]:
    """Internal names whose first assignment is a boolean expression."""
    seen: dict[str, bool] = {}

    def visit(stmts):
        for s in stmts:
            if isinstance(s, Assign):
                if s.target not in seen:
                    e = s.expr
                    if isinstance(e, Var):
                        seen[s.target] = seen.get(e.name, False)
                    else:
                        seen[s.target] = isinstance(e, (Compare, Logic, Not))
            else:
                visit(s.then)
                visit(s.orelse or ())

    visit(program.body)
    return {k for k, v in seen.items() if v}


def brute_force_mutants(program: Program, ops=("ABS", "AOR", "LCR", "ROR", "UOI")) -> list[str]:
    """Pretty-printed text of every distinct single-edit mutant, by direct tree surgery."""
    booleans = _boolean_internals(program)
    out: list[str] = []
    seen: set[str] = set()
    base_text = pretty_print(program)

    def emit(stmt_index, path, new_node):
        stmt = program.body[stmt_index]
        body = list(program.body)
        body[stmt_index] = _replace_path(stmt, path, new_node)
        text = pretty_print(Program(tuple(body)))
        assert text != base_text
        if text not in seen:
            seen.add(text)
            out.append(text)

    for si, stmt in enumerate(program.body):
        for path, node in _all_paths(stmt):
            t = type(node)
            if t is BinOp and "AOR" in ops:
                for op in _ARITH:
                    if op != node.op:
                        emit(si, path, dataclasses.replace(node, op=op))
            if t is Compare and "ROR" in ops:
                for op in _REL:
                    if op != node.op:
                        emit(si, path, dataclasses.replace(node, op=op))
            if t is Logic and "LCR" in ops:
                for op in _LOGIC:
                    if op != node.op:
                        emit(si, path, dataclasses.replace(node, op=op))
            numeric = t in (Num, Neg, Abs, BinOp) or (t is Var and node.name not in booleans)
            if numeric:
                if "ABS" in ops:
                    emit(si, path, Abs(node))
                if "UOI" in ops:
                    emit(si, path, Neg(node))
    return out


# A fixed corpus of small programs (each at most ten nodes).
SMALL_CORPUS = [
    "P1 := 1;",
    "x := a + b;",
    "x := a - b * c;",
    "P1 := L1 > 800;",
    "P1 := L1 > 800 and L2 < 100;",
    "P1 := not (L1 <= 3);",
    "x := -a;",
    "x := abs(a);",
    "x := --a;",
    "x := abs(-a);",
    "if L1 > 800 then P1 := 0; end",
    "if L1 > 800 then P1 := 0; else P1 := 1; end",
    "x := a / 2; y := x;",
    "b := L1 < 5; P1 := b;",
    "b := L1 < 5; c := b; P1 := c;",
    "P1 := L1 <> L2;",
    "P1 := L1 >= 2 or L2 <= 3;",
    "x := 1 + 1;",
    "x := 0;",
    "if a = b then x := 1; end",
    "x := (a + b) * c;",
    "P1 := 2 * L1 < L2;",
    "x := a; x := a;",
    "if not (a > b) then x := a - b; end",
    "if a > 0 then if b > 0 then x := 1; end end",
]


# --- synthetic learner data ------------------------------------------------


def separable_dataset(seed: int, n: int = 400, dim: int = 10, margin: float = 1.0):
    """Unit-scale Gaussian cloud split by a random hyperplane, with a gap of ``margin`` on each side.

    Returns ``(X, y, w_true, b_true)`` with ``w_true`` of unit length.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    w = rng.normal(size=dim)
    w /= np.linalg.norm(w)
    X = rng.normal(size=(4 * n, dim)) + rng.uniform(-500, 500, size=dim)
    score = X @ w
    b = -float(np.median(score))
    score = score + b
    keep = np.abs(score) >= margin
    return X[keep][:n], np.where(score[keep][:n] > 0, 1, -1), w, b
