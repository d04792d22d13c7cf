import dataclasses
import json

import pytest

from helpers import SMALL_CORPUS, ProgramGen, brute_force_mutants
from mutinv.dsl import Abs, Neg, Program, Var, parse, pretty_print, validate
from mutinv.dsl.ast import children
from mutinv.mutation import (
    ALL_OPERATORS,
    MutationError,
    MutationOperator,
    MutationSite,
    apply,
    enumerate_sites,
    generate_mutants,
    mutant_universe,
    program_hash,
    write_manifest,
)

BIG = 10**6


def edit_distance(a, b) -> int:
    """Number of edited nodes between two ASTs, allowing one wrapper insertion per edit."""
    if a == b:
        return 0
    if isinstance(b, (Abs, Neg)) and b.operand == a:
        return 1
    if type(a) is not type(b):
        return BIG
    ca, cb = children(a), children(b)
    if len(ca) != len(cb):
        return BIG
    shallow = [f.name for f in dataclasses.fields(a)
               if f.name not in ("nid", "pos") and not isinstance(getattr(a, f.name), (tuple, type(None)))
               and not dataclasses.is_dataclass(getattr(a, f.name))]
    own = int(any(getattr(a, n) != getattr(b, n) for n in shallow))
    return own + sum(edit_distance(x, y) for x, y in zip(ca, cb))


def program_edits(base: Program, mutant: Program) -> int:
    if len(base.body) != len(mutant.body):
        return BIG
    return sum(edit_distance(x, y) for x, y in zip(base.body, mutant.body))


def sites_by_kind(src):
    out = {}
    for s in enumerate_sites(parse(src)):
        out.setdefault(s.kind, []).append(s)
    return out


def test_exactly_five_operators():
    assert [op.value for op in ALL_OPERATORS] == ["ABS", "AOR", "LCR", "ROR", "UOI"]


def test_aor_site_on_addition():
    (site,) = sites_by_kind("x := a + b;")["arithmetic"]
    assert [r for _, r in site.replacements] == ["-", "*", "/"]
    assert len(mutant_universe(parse("x := a + b;"), [MutationOperator.AOR])) == 3


def test_ror_site_and_numeric_sites_on_guard():
    kinds = sites_by_kind("P1 := L1 > 800;")
    (ror,) = kinds["relational"]
    assert [r for _, r in ror.replacements] == [">=", "<", "<=", "=", "<>"]
    assert sorted(s.original for s in kinds["numeric"]) == ["800", "L1"]
    assert all(s.operators == {MutationOperator.ABS, MutationOperator.UOI} for s in kinds["numeric"])


def test_literal_only_program():
    kinds = sites_by_kind("P1 := 1;")
    assert set(kinds) == {"numeric"}
    assert len(kinds["numeric"]) == 1


def test_lcr_site_has_one_replacement():
    (site,) = sites_by_kind("P1 := L1 > 1 and L2 > 2;")["logical"]
    assert site.replacements == ((MutationOperator.LCR, "or"),)


def test_replacement_lists_exclude_original():
    for s in enumerate_sites(ProgramGen(5).program(8)):
        assert s.original not in [r for _, r in s.replacements] or s.kind == "numeric"


def test_boolean_internal_reads_are_not_numeric_sites():
    p = parse("b := L1 < 5; P1 := b;")
    numeric_reads = [s for s in enumerate_sites(p) if s.kind == "numeric" and s.original == "b"]
    assert numeric_reads == []


def test_apply_aor_and_ror():
    p = parse("x := a + b;")
    (site,) = [s for s in enumerate_sites(p) if s.kind == "arithmetic"]
    assert pretty_print(apply(p, site, "-").program) == "x := a - b;"
    g = parse("P1 := L1 > 800;")
    (site,) = [s for s in enumerate_sites(g) if s.kind == "relational"]
    assert pretty_print(apply(g, site, "<=").program) == "P1 := L1 <= 800;"


def test_apply_keeps_untouched_ids_and_gives_wrapper_fresh_id():
    p = parse("if L1 > 800 then P1 := 0; end")
    site = next(s for s in enumerate_sites(p) if s.original == "L1")
    m = apply(p, site, "-", "M0")
    wrapped = m.program.find(site.node_id)
    assert wrapped == Var("L1")
    assert pretty_print(m.program) == "if -L1 > 800 then\n    P1 := 0;\nend"
    assert m.program.node_ids() == p.node_ids() | {max(p.node_ids()) + 1}
    assert isinstance(m.program.find(max(p.node_ids()) + 1), Neg)
    for n in p.nodes():
        assert m.program.find(n.nid) is not None


def test_apply_errors():
    p = parse("x := a + b;")
    (site,) = [s for s in enumerate_sites(p) if s.kind == "arithmetic"]
    with pytest.raises(MutationError, match="illegal replacement"):
        apply(p, site, "+")
    with pytest.raises(MutationError, match="stale site"):
        apply(p, MutationSite(99, "arithmetic", "+", site.replacements), "-")
    other = parse("x := a * b;")
    with pytest.raises(MutationError, match="stale site"):
        apply(other, site, "-")


def test_single_edit_law(controller):
    for program in [controller] + [ProgramGen(s).program() for s in range(40)]:
        base_text = pretty_print(program)
        for m in mutant_universe(program):
            assert program_edits(program, m.program) == 1
            assert pretty_print(m.program) != base_text


def test_count_law_on_corpus():
    for src in SMALL_CORPUS:
        p = parse(src)
        got = [pretty_print(m.program) for m in generate_mutants(p).mutants]
        assert got == brute_force_mutants(p), src


def test_count_law_with_operator_subsets():
    p = parse("P1 := L1 - 2 > L2 and not (L3 = 1);")
    for op in ALL_OPERATORS:
        got = [pretty_print(m.program) for m in generate_mutants(p, [op]).mutants]
        assert got == brute_force_mutants(p, (op.value,))


def test_structural_duplicates_removed():
    p = parse("x := -a;")
    texts = [pretty_print(m.program) for m in mutant_universe(p)]
    assert texts.count("x := --a;") == 1
    assert len(texts) == len(set(texts)) == 3


def test_generate_is_deterministic_and_sampled(controller):
    a = generate_mutants(controller, limit=20, seed=0)
    b = generate_mutants(controller, limit=20, seed=0)
    c = generate_mutants(controller, limit=20, seed=1)
    assert [m.program for m in a] == [m.program for m in b]
    assert [m.id for m in a] == [f"M{i:02d}" for i in range(20)]
    assert len({m.program for m in a}) == 20
    assert [m.program for m in a] != [m.program for m in c]
    assert not a.exhausted and a.universe_size > 20


def test_limit_beyond_universe_sets_warning():
    p = parse("x := a + b;")
    ms = generate_mutants(p, limit=50)
    assert ms.exhausted and len(ms) == ms.universe_size == 9


def test_no_sites_for_operator():
    ms = generate_mutants(parse("P1 := 1;"), [MutationOperator.ROR], limit=3)
    assert len(ms) == 0 and ms.exhausted


def test_limit_must_be_positive():
    with pytest.raises(ValueError):
        generate_mutants(parse("P1 := 1;"), limit=0)


def test_mutants_remain_valid(controller, declarations):
    for m in mutant_universe(controller):
        assert validate(m.program, declarations) == [], m.id


def test_manifest(tmp_path, controller):
    ms = generate_mutants(controller, limit=3, seed=0)
    path = tmp_path / "manifest.json"
    write_manifest(path, controller, ms.mutants, {"note": "x"})
    doc = json.loads(path.read_text())
    assert doc["base_hash"] == program_hash(controller)
    assert [e["id"] for e in doc["mutants"]] == ["M00", "M01", "M02"]
    for e, m in zip(doc["mutants"], ms):
        assert e["operator"] == m.operator.value and e["node_id"] == m.node_id
        assert e["diff"].startswith("--- base.ctl\n+++ M0")
        assert e["original"] == m.original and e["replacement"] == m.replacement
