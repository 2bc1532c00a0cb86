"""Seeded random construction of graphs, rules, and rewrite scenarios."""

from __future__ import annotations

import random

from jungle.context import recompose
from jungle.core import (
    Edge,
    Inner,
    Input,
    NodeId,
    Signature,
    TermGraph,
    as_term_graph,
    validate_dhg,
)
from jungle.dpo import Rule, make_rule
from jungle.matching import Matching, check_matching

SIG = Signature({"b": 2, "u": 1, "c": 0})


def random_term_graph(
    rng: random.Random,
    sig: Signature,
    n_inputs: int,
    n_outputs: int,
    n_edges: int,
) -> TermGraph:
    """Acyclic by construction: each edge consumes already-present nodes."""
    labels = sorted(sig.arities)
    nullary = [l for l in labels if sig.arity(l) == 0]
    if n_inputs == 0 and n_outputs > 0:
        n_edges = max(n_edges, 1)  # outputs need at least one node to point at
    nodes: list[NodeId] = [Input(p) for p in range(n_inputs)]
    edges = []
    for uid in range(n_edges):
        pool = labels if nodes else nullary
        label = rng.choice(pool)
        ins = tuple(rng.choice(nodes) for _ in range(sig.arity(label)))
        edges.append(Edge(uid, label, uid, ins))
        nodes.append(Inner(uid))
    g_out = tuple(rng.choice(nodes) for _ in range(n_outputs))
    return as_term_graph(validate_dhg(sig, n_inputs, n_outputs, range(n_edges), edges, g_out))


def random_solid_term_graph(
    rng: random.Random,
    sig: Signature,
    n_inputs: int,
    n_outputs: int,
    n_edges: int,
) -> TermGraph:
    """Like random_term_graph but with pairwise distinct inner output nodes."""
    assert n_edges >= n_outputs
    base = random_term_graph(rng, sig, n_inputs, n_outputs, n_edges)
    g_out = tuple(Inner(u) for u in rng.sample(sorted(base.inner), n_outputs))
    return as_term_graph(
        validate_dhg(sig, n_inputs, n_outputs, base.inner, base.edges, g_out)
    )


def random_rule(rng: random.Random, sig: Signature, max_side_edges: int = 3) -> Rule:
    i = rng.randint(0, 2)
    j = rng.randint(1, 2)
    lhs = random_solid_term_graph(rng, sig, i, j, rng.randint(j, max_side_edges))
    rhs = random_solid_term_graph(rng, sig, i, j, rng.randint(j, max_side_edges))
    return make_rule(sig, lhs, rhs)


def identity_rule(sig: Signature, side: TermGraph) -> Rule:
    return make_rule(sig, side, side)


def random_application(
    rng: random.Random,
    sig: Signature,
    rule: Rule,
    max_extra_edges: int = 6,
) -> tuple[TermGraph, Matching]:
    """A graph containing the rule's pattern, with the embedding match.

    Built by wrapping the left side in random top and bottom layers plus k
    bypass wires; the construction guarantees the match is injective and
    that removing the pattern leaves nothing dangling.
    """
    i, j = rule.n_inputs, rule.n_outputs
    k = rng.randint(0, 2)
    m = rng.randint(0, 3)
    n = rng.randint(1, 3)
    top_budget = rng.randint(0, max_extra_edges // 2)
    # the top layer must offer i + k pairwise distinct wires
    top_edges = max(top_budget, i + k - m, 1 if m == 0 and i + k > 0 else 0)
    top = random_term_graph(rng, sig, m, 0, top_edges)
    wires = rng.sample(list(top.nodes()), i + k)
    top = as_term_graph(
        validate_dhg(sig, m, i + k, top.inner, top.edges, wires)
    )
    bottom = random_term_graph(
        rng, sig, j + k, n, rng.randint(0, max(0, max_extra_edges - top_edges))
    )
    composed, node_map, edge_map = recompose(top, rule.lhs, k, bottom)
    a = as_term_graph(composed)
    return a, check_matching(rule.lhs, a, node_map, edge_map)
