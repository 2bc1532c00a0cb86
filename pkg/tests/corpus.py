"""Deterministic enumeration of small term graphs for oracle comparisons."""

from __future__ import annotations

from itertools import product

from jungle.core import Edge, Inner, Input, Signature, TermGraph, as_term_graph, validate_dhg

from randgen import SIG


def enumerate_term_graphs(
    sig: Signature,
    n_inputs: int,
    n_outputs: int,
    max_edges: int,
    labels: tuple[str, ...] | None = None,
) -> list[TermGraph]:
    """Every term graph with the given interface and at most max_edges edges.

    Edges are created in dependency order, which reaches each term graph
    exactly once up to the choice of uid numbering.
    """
    use = sorted(labels) if labels else sorted(sig.arities)
    out: list[TermGraph] = []

    def extend(edges: list[Edge], nodes: list) -> None:
        for row in product(nodes, repeat=n_outputs):
            out.append(
                as_term_graph(
                    validate_dhg(sig, n_inputs, n_outputs, [e.uid for e in edges], edges, row)
                )
            )
        if len(edges) == max_edges:
            return
        uid = len(edges)
        for label in use:
            for ins in product(nodes, repeat=sig.arity(label)):
                extend(edges + [Edge(uid, label, uid, tuple(ins))], nodes + [Inner(uid)])

    extend([], [Input(p) for p in range(n_inputs)])
    return out


def pattern_corpus() -> list[TermGraph]:
    patterns = enumerate_term_graphs(SIG, 1, 1, 2, labels=("u", "c"))
    patterns += enumerate_term_graphs(SIG, 2, 1, 1, labels=("b",))
    patterns += enumerate_term_graphs(SIG, 0, 1, 2, labels=("u", "c"))
    return patterns


def target_corpus() -> list[TermGraph]:
    targets = enumerate_term_graphs(SIG, 1, 1, 3, labels=("u", "c"))[::3]
    targets += enumerate_term_graphs(SIG, 2, 1, 2, labels=("b", "u"))[::5]
    targets += enumerate_term_graphs(SIG, 0, 1, 4, labels=("u", "c"))[::7]
    return targets


def could_match(pattern: TermGraph, target: TermGraph, injective: bool) -> bool:
    """Cheap necessary conditions; both sides find nothing when these fail."""
    t_labels = [e.label for e in target.edges]
    for label in {e.label for e in pattern.edges}:
        need = sum(1 for e in pattern.edges if e.label == label) if injective else 1
        if t_labels.count(label) < need:
            return False
    if injective:
        if len(pattern.edges) > len(target.edges):
            return False
        if pattern.node_count > target.node_count:
            return False
    elif pattern.node_count > 0 and target.node_count == 0:
        return False
    return True
