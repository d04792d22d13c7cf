"""Single-edit mutation of control programs with the ABS/AOR/LCR/ROR/UOI operators."""

from __future__ import annotations

import difflib
import enum
import hashlib
import json
import random
from dataclasses import dataclass, fields, replace
from typing import Iterable, Iterator, Sequence

from .dsl import ARITH_OPS, LOGIC_OPS, REL_OPS, Abs, Assign, BinOp, Compare, Logic, Neg, Num, Program, Var
from .dsl import format_expr, pretty_print

__all__ = [
    "MutationOperator",
    "MutationSite",
    "Mutant",
    "MutantSet",
    "MutationError",
    "ALL_OPERATORS",
    "enumerate_sites",
    "apply",
    "mutant_universe",
    "generate_mutants",
    "program_hash",
    "write_manifest",
]


class MutationOperator(str, enum.Enum):
    ABS = "ABS"  # wrap a numeric subexpression in abs(.)
    AOR = "AOR"  # arithmetic operator replacement
    LCR = "LCR"  # logical connector replacement
    ROR = "ROR"  # relational operator replacement
    UOI = "UOI"  # wrap a numeric subexpression in unary minus


ALL_OPERATORS = tuple(MutationOperator)


class MutationError(ValueError):
    pass


@dataclass(frozen=True)
class MutationSite:
    node_id: int
    kind: str  # arithmetic | relational | logical | numeric
    original: str
    replacements: tuple[tuple[MutationOperator, str], ...]

    @property
    def operators(self) -> frozenset[MutationOperator]:
        return frozenset(op for op, _ in self.replacements)


@dataclass(frozen=True)
class Mutant:
    id: str
    base_hash: str
    operator: MutationOperator
    node_id: int
    original: str
    replacement: str
    program: Program

    def manifest_entry(self, base: Program) -> dict:
        diff = difflib.unified_diff(
            pretty_print(base).splitlines(),
            pretty_print(self.program).splitlines(),
            "base.ctl",
            f"{self.id}.ctl",
            lineterm="",
        )
        return {
            "id": self.id,
            "operator": self.operator.value,
            "node_id": self.node_id,
            "original": self.original,
            "replacement": self.replacement,
            "base_hash": self.base_hash,
            "diff": "\n".join(diff),
        }


@dataclass
class MutantSet:
    """Sampled mutants; ``exhausted`` is set when the request exceeded the universe."""

    mutants: list[Mutant]
    exhausted: bool = False
    universe_size: int = 0

    def __iter__(self) -> Iterator[Mutant]:
        return iter(self.mutants)

    def __len__(self) -> int:
        return len(self.mutants)

    def __getitem__(self, i):
        return self.mutants[i]


def program_hash(program: Program) -> str:
    return hashlib.sha256(pretty_print(program).encode()).hexdigest()[:16]


def _is_numeric(node) -> bool:
    return isinstance(node, (Num, Var, Neg, Abs, BinOp))


def enumerate_sites(program: Program, internal_types: dict[str, str] | None = None) -> list[MutationSite]:
    """List every mutation site in pre-order.

    Variable reads count as numeric unless ``internal_types`` marks them
    boolean; declared sensors and actuators are always numbers.
    """
    boolean_vars = {k for k, v in (internal_types or _internal_types(program)).items() if v == "boolean"}
    sites: list[MutationSite] = []
    for node in program.nodes():
        if isinstance(node, BinOp):
            sites.append(MutationSite(
                node.nid, "arithmetic", node.op,
                tuple((MutationOperator.AOR, r) for r in ARITH_OPS if r != node.op),
            ))
        elif isinstance(node, Compare):
            sites.append(MutationSite(
                node.nid, "relational", node.op,
                tuple((MutationOperator.ROR, r) for r in REL_OPS if r != node.op),
            ))
        elif isinstance(node, Logic):
            sites.append(MutationSite(
                node.nid, "logical", node.op,
                tuple((MutationOperator.LCR, r) for r in LOGIC_OPS if r != node.op),
            ))
        if _is_numeric(node) and not (isinstance(node, Var) and node.name in boolean_vars):
            sites.append(MutationSite(
                node.nid, "numeric", format_expr(node),
                ((MutationOperator.ABS, "abs"), (MutationOperator.UOI, "-")),
            ))
    return sites


def _internal_types(program: Program) -> dict[str, str]:
    types: dict[str, str] = {}
    for node in program.nodes():
        if isinstance(node, Assign) and node.target not in types:
            e = node.expr
            if isinstance(e, Var):
                types[node.target] = types.get(e.name, "number")
            else:
                types[node.target] = "number" if _is_numeric(e) else "boolean"
    return types


def _rewrite(node, nid: int, fn):
    """Copy ``node`` with the descendant whose id is ``nid`` replaced by ``fn(it)``."""
    if node.nid == nid:
        return fn(node)
    updates = {}
    for f in fields(node):
        if f.name in ("nid", "pos"):
            continue
        value = getattr(node, f.name)
        if isinstance(value, tuple) and f.name in ("then", "orelse"):
            new = tuple(_rewrite(s, nid, fn) for s in value)
        elif hasattr(value, "nid"):
            new = _rewrite(value, nid, fn)
        else:
            continue
        if new is not value:
            updates[f.name] = new
    return replace(node, **updates) if updates else node


def apply(program: Program, site: MutationSite, replacement: str, mutant_id: str = "M") -> Mutant:
    """Apply one replacement at ``site``.

    Operator replacements keep the node id.  For the wrapping insertions (ABS,
    UOI) the wrapped node keeps its id and the new wrapper takes the next
    unused id, so "was the mutation executed" stays a test on ``site.node_id``.
    """
    target = program.find(site.node_id)
    if target is None:
        raise MutationError(f"stale site: node {site.node_id} not in program")
    matches = [op for op, r in site.replacements if r == replacement]
    if not matches:
        raise MutationError(f"illegal replacement {replacement!r} for site {site.node_id}")
    operator = matches[0]
    if operator in (MutationOperator.AOR, MutationOperator.ROR, MutationOperator.LCR):
        if getattr(target, "op", None) != site.original:
            raise MutationError(f"stale site: node {site.node_id} no longer has operator {site.original!r}")
        fn = lambda n: replace(n, op=replacement)  # noqa: E731
    else:
        if not _is_numeric(target):
            raise MutationError(f"stale site: node {site.node_id} is not numeric")
        fresh = max(program.node_ids(), default=-1) + 1
        wrapper = Abs if operator is MutationOperator.ABS else Neg
        fn = lambda n: wrapper(n, nid=fresh, pos=n.pos)  # noqa: E731
    body = tuple(_rewrite(s, site.node_id, fn) for s in program.body)
    return Mutant(
        id=mutant_id,
        base_hash=program_hash(program),
        operator=operator,
        node_id=site.node_id,
        original=site.original,
        replacement=replacement,
        program=Program(body),
    )


def mutant_universe(program: Program, ops: Iterable[MutationOperator] | None = None) -> list[Mutant]:
    """Every distinct single-edit mutant, in site order, structural duplicates dropped."""
    allowed = frozenset(MutationOperator(o) for o in (ops if ops is not None else ALL_OPERATORS))
    seen: set[Program] = set()
    out: list[Mutant] = []
    for site in enumerate_sites(program):
        for op, repl in site.replacements:
            if op not in allowed:
                continue
            m = apply(program, site, repl)
            if m.program in seen:
                continue
            seen.add(m.program)
            out.append(m)
    return out


def generate_mutants(
    program: Program,
    ops: Iterable[MutationOperator] | None = None,
    limit: int | None = None,
    seed: int = 0,
) -> MutantSet:
    """Sample ``limit`` distinct mutants without replacement.

    The sample is kept in universe order and ids are ``M00``, ``M01``, ...
    ``limit=None`` returns the whole universe.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be >= 1")
    universe = mutant_universe(program, ops)
    exhausted = limit is not None and limit > len(universe)
    if limit is None or exhausted:
        chosen = list(range(len(universe)))
    else:
        chosen = sorted(random.Random(seed).sample(range(len(universe)), limit))
    width = max(2, len(str(max(len(chosen) - 1, 0))))
    mutants = [replace(universe[i], id=f"M{k:0{width}d}") for k, i in enumerate(chosen)]
    return MutantSet(mutants, exhausted, len(universe))


def write_manifest(path, base: Program, mutants: Sequence[Mutant], extra: dict | None = None) -> None:
    doc = dict(extra or {})
    doc["base_hash"] = program_hash(base)
    doc["mutants"] = [m.manifest_entry(base) for m in mutants]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
