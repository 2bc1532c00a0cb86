"""Factoring a graph around a match image and carrying the context across a step."""

import dataclasses
import random

import pytest

from jungle.core import Inner, Input, as_term_graph, iso, make_dhg
from jungle.matching import StaleMatchingError, check_matching, find_matchings
from jungle.dpo import make_rule, rewrite
from jungle.context import (
    ImageContext,
    PreconditionViolatedError,
    check_context_preservation,
    image_context,
    recompose,
    verify_image_context,
)

from oracles import maps_correspond
from randgen import SIG, random_application, random_rule
from test_dpo import DOUBLE_U, U_STEP, match_chain, tg, wire


def identity_match(t):
    return check_matching(t, t, {x: x for x in t.nodes()}, {e.uid: e.uid for e in t.edges})


@pytest.fixture(scope="module")
def ctx(worked_graph, worked_rule, worked_doc):
    return image_context(worked_graph, worked_doc.matches["m0"].matching, worked_rule)


class TestWorkedExample:
    def test_two_bypass_wires(self, ctx):
        assert ctx.k == 2
        assert ctx.bypass == (Input(3), Input(0))

    def test_top_is_pure_wiring(self, ctx):
        assert ctx.top.edges == ()
        assert (ctx.top.n_inputs, ctx.top.n_outputs) == (4, 4)
        # pattern inputs first, bypass wires after
        assert ctx.top.g_out == (Input(1), Input(2), Input(3), Input(0))
        assert ctx.top_edges == frozenset()

    def test_bottom_holds_the_remaining_arithmetic(self, ctx):
        assert ctx.bottom_edges == frozenset({2, 3})
        assert (ctx.bottom.n_inputs, ctx.bottom.n_outputs) == (3, 1)
        mul, add = ctx.bottom.edges
        assert (mul.label, add.label) == ("mul", "add")
        # the mul reads the pattern output and the first bypass wire
        assert mul.inputs == (Input(0), Input(1))
        assert add.inputs == (Input(2), Inner(mul.output))
        assert ctx.bottom.g_out == (Inner(add.output),)

    def test_context_verifies_on_the_original(self, ctx, worked_graph, worked_doc):
        check = verify_image_context(worked_graph, worked_doc.matches["m0"].matching, ctx)
        assert check
        assert check.ok and check.reason == ""
        assert check.witness is not None

    def test_same_context_verifies_after_the_step(
        self, ctx, worked_rule, worked_graph, worked_doc
    ):
        step = rewrite(worked_rule, worked_graph, worked_doc.matches["m0"].matching)
        check = verify_image_context(step.result, step.m2, ctx)
        assert check.ok

    def test_preservation_both_flavours(self, worked_rule, worked_graph, worked_doc):
        m1 = worked_doc.matches["m0"].matching
        step = rewrite(worked_rule, worked_graph, m1)
        assert check_context_preservation(worked_graph, m1, worked_rule, step)
        assert check_context_preservation(worked_graph, m1, worked_rule, step, maximal=True)


class TestDegenerateWholeGraphMatch:
    def test_graph_equal_to_pattern_needs_no_bypass(self, worked_rule):
        lhs = worked_rule.lhs
        ctx = image_context(lhs, identity_match(lhs), worked_rule)
        assert ctx.k == 0
        assert ctx.bypass == ()
        assert ctx.top.edges == () and ctx.bottom.edges == ()
        assert ctx.top.g_out == (Input(0), Input(1))
        assert ctx.bottom.g_out == (Input(0),)
        assert verify_image_context(lhs, identity_match(lhs), ctx).ok


# one u-edge matched inside a diamond: a second, independent u-edge reads the
# same graph input, and a b-edge joins both results
DIAMOND = tg(1, 1, [(0, "u", ["in0"]), (1, "u", ["in0"]), (2, "b", [0, 1])], [2])
ID_U = make_rule(SIG, U_STEP, U_STEP)


def diamond_match():
    return check_matching(
        U_STEP, DIAMOND, {Input(0): Input(0), Inner(0): Inner(0)}, {0: 0}
    )


class TestMinimalVersusMaximal:
    def test_minimal_keeps_independent_work_below(self):
        ctx = image_context(DIAMOND, diamond_match(), ID_U)
        assert ctx.top_edges == frozenset()
        assert ctx.bottom_edges == frozenset({1, 2})
        assert ctx.k == 1
        assert ctx.bypass == (Input(0),)
        assert verify_image_context(DIAMOND, diamond_match(), ctx).ok

    def test_maximal_lifts_independent_work_above(self):
        ctx = image_context(DIAMOND, diamond_match(), ID_U, maximal=True)
        assert ctx.top_edges == frozenset({1})
        assert ctx.bottom_edges == frozenset({2})
        assert ctx.k == 1
        assert ctx.bypass == (Inner(1),)
        assert len(ctx.top.edges) == 1
        assert verify_image_context(DIAMOND, diamond_match(), ctx).ok

    def test_both_flavours_survive_the_step(self):
        step = rewrite(ID_U, DIAMOND, diamond_match())
        assert check_context_preservation(DIAMOND, diamond_match(), ID_U, step)
        assert check_context_preservation(
            DIAMOND, diamond_match(), ID_U, step, maximal=True
        )


class TestRecompose:
    def test_rebuilds_the_worked_graph(self, worked_graph, worked_rule, worked_doc):
        ctx = image_context(worked_graph, worked_doc.matches["m0"].matching, worked_rule)
        composed, node_map, edge_map = recompose(
            ctx.top, worked_rule.lhs, ctx.k, ctx.bottom
        )
        assert iso(composed, worked_graph.dhg) is not None
        assert set(node_map) == set(worked_rule.lhs.nodes())
        assert set(edge_map) == {e.uid for e in worked_rule.lhs.edges}
        assert maps_correspond(worked_rule.lhs.dhg, composed, node_map, edge_map)

    def test_middle_copy_lands_on_the_match_image(self, worked_graph, worked_rule, worked_doc):
        m1 = worked_doc.matches["m0"].matching
        ctx = image_context(worked_graph, m1, worked_rule)
        composed, node_map, edge_map = recompose(
            ctx.top, worked_rule.lhs, ctx.k, ctx.bottom
        )
        witness = iso(
            composed,
            worked_graph.dhg,
            pinned_nodes={node_map[v]: m1.node_map[v] for v in node_map},
            pinned_edges={edge_map[u]: m1.edge_map[u] for u in edge_map},
        )
        assert witness is not None


class TestPreconditions:
    def test_match_must_connect_rule_and_graph(self, worked_rule, worked_graph):
        with pytest.raises(StaleMatchingError):
            image_context(worked_graph, identity_match(U_STEP), worked_rule)

    def test_requires_a_solid_rule(self):
        unsolid = make_rule(SIG, wire(), U_STEP, allow_unsolid=True)
        m = find_matchings(unsolid.lhs, U_STEP)[0]
        with pytest.raises(PreconditionViolatedError, match="solid"):
            image_context(U_STEP, m, unsolid)

    def test_requires_an_injective_match(self):
        rule = make_rule(
            SIG,
            tg(0, 2, [(0, "c", []), (1, "c", [])], [0, 1]),
            tg(0, 2, [(0, "c", []), (1, "u", [0])], [0, 1]),
        )
        folded = tg(0, 2, [(0, "c", [])], [0, 0])
        (m,) = find_matchings(rule.lhs, folded, injective=False)
        with pytest.raises(PreconditionViolatedError, match="injective"):
            image_context(folded, m, rule)

    def test_requires_a_clean_cut(self):
        del_rule = make_rule(SIG, DOUBLE_U, U_STEP)
        blocked = tg(
            1, 1, [(0, "u", ["in0"]), (1, "u", [0]), (2, "b", [0, 1])], [2]
        )
        with pytest.raises(PreconditionViolatedError, match="cleanly"):
            image_context(blocked, match_chain(blocked), del_rule)


class TestVerifyRejections:
    def test_wrong_graph(self, ctx, worked_rule, worked_doc):
        check = verify_image_context(
            worked_rule.lhs, worked_doc.matches["m0"].matching, ctx
        )
        assert not check
        assert check.reason == "matching does not land in the supplied graph"

    def test_tampered_bypass_count(self, ctx, worked_graph, worked_doc):
        check = verify_image_context(
            worked_graph,
            worked_doc.matches["m0"].matching,
            dataclasses.replace(ctx, k=ctx.k + 1),
        )
        assert not check and "top interface" in check.reason

    def test_tampered_bottom_interface(self, ctx, worked_graph, worked_doc):
        narrow = as_term_graph(make_dhg(2, 1, [], [], [Input(0)]))
        check = verify_image_context(
            worked_graph,
            worked_doc.matches["m0"].matching,
            dataclasses.replace(ctx, bottom=narrow),
        )
        assert not check and "bottom interface" in check.reason

    def test_swapped_bypass_wires(self, ctx, worked_graph, worked_doc):
        # same interfaces, but the two bypass wires feed each other's slots
        swapped = as_term_graph(
            make_dhg(4, 4, [], [], [Input(1), Input(2), Input(0), Input(3)])
        )
        check = verify_image_context(
            worked_graph,
            worked_doc.matches["m0"].matching,
            dataclasses.replace(ctx, top=swapped),
        )
        assert not check
        assert check.reason == "no isomorphism maps the pattern copy onto the match image"


class TestRandomTriples:
    def test_fifty_randomized_applications(self):
        rng = random.Random(424243)
        for _ in range(50):
            rule = random_rule(rng, SIG)
            a, m1 = random_application(rng, SIG, rule)
            assert len(a.edges) <= 12
            ctx = image_context(a, m1, rule)
            assert verify_image_context(a, m1, ctx).ok
            step = rewrite(rule, a, m1)
            assert verify_image_context(step.result, step.m2, ctx).ok
            assert check_context_preservation(a, m1, rule, step, maximal=True)
