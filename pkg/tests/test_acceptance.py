"""Acceptance gate: the nine headline behaviours, one test and one line each.

Run with -v to get the per-criterion pass/fail listing; each test also
prints its own summary line (visible with -s or on failure).
"""

import random
import time

import pytest

from jungle.core import (
    Inner,
    Input,
    NodeWithMultipleDefiningEdges,
    iso,
)
from jungle.algebra import (
    bang,
    build,
    dup,
    exchange,
    identity,
    prim,
    seq,
    ten,
    to_expression,
)
from jungle.matching import dangling_ok, find_matchings
from jungle.dpo import (
    LhsNotSolidError,
    NotInjectiveMatchError,
    ResultNotTermGraphError,
    make_rule,
    pushout,
    pushout_complement,
    rewrite,
)
from jungle.context import check_context_preservation, image_context, verify_image_context
from jungle.semantics import (
    CostedInterpretation,
    Exhaustive,
    builtin_interpretation,
    rule_preserves,
    step_preserves,
)

from corpus import could_match, pattern_corpus, target_corpus
from oracles import brute_matchings, canonical_matching, pushout_agrees
from randgen import SIG, identity_rule, random_application, random_rule, random_term_graph

SIZES = (0, 1, 2, 3)


def is_iso(g, h) -> bool:
    ga = g.dhg if hasattr(g, "dhg") else g
    ha = h.dhg if hasattr(h, "dhg") else h
    return iso(ga, ha) is not None


def test_criterion_1_worked_example_rewrite(worked_rule, worked_graph, worked_doc, expected_result):
    started = time.perf_counter()
    found = find_matchings(worked_rule.lhs, worked_graph, injective=True)
    assert len(found) == 1
    step = rewrite(worked_rule, worked_graph, found[0])
    assert iso(step.result, expected_result) is not None
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    print(f"criterion 1: PASS (one match, rewrite isomorphic to target, {elapsed:.3f}s)")


def test_criterion_2_semantics_preserved_mod_5(worked_rule, worked_graph, worked_doc):
    started = time.perf_counter()
    interp = builtin_interpretation("zmod:5", worked_doc.signature)
    rv = rule_preserves(interp, worked_rule, Exhaustive())
    assert rv.preserved and rv.checked == 25 and rv.counterexample is None
    step = rewrite(worked_rule, worked_graph, worked_doc.matches["m0"].matching)
    sv = step_preserves(interp, worked_graph, step, Exhaustive())
    assert sv.preserved and sv.checked == 625 and sv.counterexample is None
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    print(f"criterion 2: PASS (25/25 rule and 625/625 step inputs agree, {elapsed:.3f}s)")


def test_criterion_3_context_preserved(worked_rule, worked_graph, worked_doc):
    m1 = worked_doc.matches["m0"].matching
    ctx = image_context(worked_graph, m1, worked_rule)
    assert ctx.k == 2
    assert ctx.top.edges == ()
    assert verify_image_context(worked_graph, m1, ctx).ok
    step = rewrite(worked_rule, worked_graph, m1)
    assert verify_image_context(step.result, step.m2, ctx).ok

    rng = random.Random(808808)
    for _ in range(50):
        rule = random_rule(rng, SIG)
        a, m = random_application(rng, SIG, rule)
        assert len(a.edges) <= 12
        rnd_ctx = image_context(a, m, rule)
        assert verify_image_context(a, m, rnd_ctx).ok
        rnd_step = rewrite(rule, a, m)
        assert verify_image_context(rnd_step.result, rnd_step.m2, rnd_ctx).ok
        assert check_context_preservation(a, m, rule, rnd_step, maximal=True)
    print("criterion 3: PASS (k=2 edge-free top on the worked example; 50 random triples)")


def test_criterion_4_negative_configurations(load_fixture):
    wire_doc = load_fixture("unsolid_wire.tg")
    with pytest.raises(LhsNotSolidError):
        wire_doc.rule("bad_wire")
    unsolid = wire_doc.rule("bad_wire", allow_unsolid=True)
    target = wire_doc.graphs["C"].graph
    on_inner = next(
        m
        for m in find_matchings(unsolid.lhs, target)
        if m.node_map[Input(0)] == Inner(0)
    )
    with pytest.raises(ResultNotTermGraphError) as err:
        rewrite(unsolid, target, on_inner, unsafe_bypass=True)
    assert isinstance(err.value.cause, NodeWithMultipleDefiningEdges)

    shared_doc = load_fixture("shared_output.tg")
    split = shared_doc.rule("split_consts")
    folded = shared_doc.graphs["D"].graph
    (m,) = find_matchings(split.lhs, folded, injective=False)
    with pytest.raises(NotInjectiveMatchError):
        rewrite(split, folded, m)
    with pytest.raises(ResultNotTermGraphError) as err:
        rewrite(split, folded, m, unsafe_bypass=True)
    assert isinstance(err.value.cause, NodeWithMultipleDefiningEdges)
    print("criterion 4: PASS (both violation setups caught, before or after the fact)")


def test_criterion_5_gs_monoidal_laws():
    failures: list[str] = []
    checked = 0

    def law(name: str, lhs, rhs) -> None:
        nonlocal checked
        checked += 1
        if not is_iso(lhs, rhs):
            failures.append(name)

    for a in SIZES:
        law(f"dup_coassoc[{a}]",
            seq(dup(a), ten(identity(a), dup(a))),
            seq(dup(a), ten(dup(a), identity(a))))
        law(f"dup_cocomm[{a}]", seq(dup(a), exchange(a, a)), dup(a))
        law(f"dup_counit[{a}]", seq(dup(a), ten(identity(a), bang(a))), identity(a))
        for b in SIZES:
            law(f"exch_involution[{a},{b}]",
                seq(exchange(a, b), exchange(b, a)), identity(a + b))
            law(f"dup_monoidal[{a},{b}]",
                seq(dup(a + b), ten(ten(identity(a), exchange(b, a)), identity(b))),
                ten(dup(a), dup(b)))
            law(f"bang_monoidal[{a},{b}]", bang(a + b), ten(bang(a), bang(b)))
            for c in SIZES:
                law(f"exch_monoidal[{a},{b},{c}]",
                    exchange(a + b, c),
                    seq(ten(identity(a), exchange(b, c)), ten(exchange(a, c), identity(b))))
    law("unit_collapse_bang", identity(0), bang(0))
    law("unit_collapse_dup", identity(0), dup(0))

    rng = random.Random(909909)
    for n in range(12):
        f = random_term_graph(rng, SIG, rng.choice(SIZES), rng.choice(SIZES), rng.randint(0, 3))
        g = random_term_graph(rng, SIG, rng.choice(SIZES), rng.choice(SIZES), rng.randint(0, 3))
        law(f"exch_natural[{n}]",
            seq(ten(f, g), exchange(f.n_outputs, g.n_outputs)),
            seq(exchange(f.n_inputs, g.n_inputs), ten(g, f)))

    assert failures == []

    # sharing and discarding are observable: neither copy nor drop is natural
    f = prim(SIG, "u")
    assert not is_iso(seq(f, dup(1)), seq(dup(1), ten(f, f)))
    assert not is_iso(seq(f, bang(1)), bang(1))
    print(f"criterion 5: PASS ({checked} law instances, 2 non-naturality witnesses)")


def test_criterion_6_functor_laws_mod_7():
    from jungle.semantics import Interpretation, evaluate, zmod_domain

    interp = Interpretation(
        zmod_domain(7),
        {
            "b": (2, lambda x, y: (x * y + 1) % 7),
            "u": (1, lambda x: (x + 3) % 7),
            "c": (0, lambda: 5),
        },
    )
    rng = random.Random(232323)
    for _ in range(100):
        a, b, c = rng.choice(SIZES), rng.choice(SIZES), rng.choice(SIZES)
        f = random_term_graph(rng, SIG, a, b, rng.randint(0, 5))
        g = random_term_graph(rng, SIG, b, c, rng.randint(0, 5))
        xs = tuple(rng.randrange(7) for _ in range(a))
        ys = tuple(rng.randrange(7) for _ in range(b))
        assert evaluate(interp, seq(f, g), xs) == evaluate(interp, g, evaluate(interp, f, xs))
        assert evaluate(interp, ten(f, g), xs + ys) == (
            evaluate(interp, f, xs) + evaluate(interp, g, ys)
        )
    print("criterion 6: PASS (100 composable pairs satisfy the seq and ten laws)")


def test_criterion_7_oracle_equivalence_on_the_small_corpus():
    patterns = pattern_corpus()
    targets = target_corpus()

    compared = 0
    for injective in (True, False):
        for p in patterns:
            for t in targets:
                if not could_match(p, t, injective):
                    continue
                engine = {
                    canonical_matching(m.node_map, m.edge_map)
                    for m in find_matchings(p, t, injective=injective)
                }
                assert engine == brute_matchings(p, t, injective)
                compared += 1
    assert compared > 200

    instances = 0
    for p in patterns:
        try:
            rule = identity_rule(SIG, p)
        except LhsNotSolidError:
            continue
        for t in targets:
            if not could_match(p, t, True):
                continue
            for m in find_matchings(p, t, injective=True):
                if not dangling_ok(rule.phi, m):
                    continue
                comp = pushout_complement(rule, m)
                glue = pushout(rule, comp.chi)
                assert pushout_agrees(comp.host, rule.rhs, comp.chi, rule.psi, glue)
                instances += 1
    assert instances > 100
    print(
        f"criterion 7: PASS ({compared} match sets identical, "
        f"{instances} pushouts against the quotient oracle)"
    )


def test_criterion_8_expression_round_trip():
    rng = random.Random(343434)
    for _ in range(100):
        t = random_term_graph(
            rng, SIG, rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 10)
        )
        assert len(t.edges) <= 10
        rebuilt = build(SIG, to_expression(t))
        assert iso(rebuilt, t.dhg) is not None
    print("criterion 8: PASS (100 graphs rebuilt from their expressions)")


def test_criterion_9_costed_contrast(worked_rule, worked_graph, worked_doc):
    plain = builtin_interpretation("zmod:5", worked_doc.signature)
    step = rewrite(worked_rule, worked_graph, worked_doc.matches["m0"].matching)
    cartesian = step_preserves(plain, worked_graph, step, Exhaustive())
    assert cartesian.preserved

    costed = step_preserves(CostedInterpretation(plain), worked_graph, step, Exhaustive())
    assert costed.value_preserved
    assert costed.costs == (4, 2)
    assert not costed.preserved
    print("criterion 9: PASS (cartesian verdict preserved, costed verdict 4 -> 2)")
