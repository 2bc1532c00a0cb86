"""Decomposing an application graph around a match.

Given an injective match of a solid pattern L into a graph A, the graph
factors as  top ; (L in parallel with k pass-through wires) ; bottom,
where the embedded copy of L is exactly the match image.  The top part
collects the edges feeding the match, the bottom part everything that
consumes its results, and the k extra wires carry top-side nodes that the
bottom still needs.  The same decomposition stays valid after a rewrite
step replaces L by the rule's right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Dhg,
    Edge,
    Inner,
    Input,
    Iso,
    JungleError,
    NodeId,
    TermGraph,
    as_dhg,
    as_term_graph,
    iso,
    make_dhg,
)
from .algebra import _seq_tracked, _ten_tracked, identity
from .dpo import InternalSoundnessError, RewriteResult, Rule
from .matching import Matching, StaleMatchingError, dangling_ok, deleted_nodes


class PreconditionViolatedError(JungleError):
    """The match does not meet the requirements for a context decomposition."""


@dataclass(frozen=True)
class ImageContext:
    """Factorisation of a graph around a match image.

    ``top`` maps the graph inputs to the pattern inputs plus ``k`` bypass
    wires; ``bottom`` consumes the pattern outputs plus the bypass wires.
    ``bypass`` lists the top-side nodes (in the original graph) that the
    bottom part consumes directly; ``top_edges``/``bottom_edges`` record
    which original edges went where.
    """

    k: int
    top: TermGraph
    bottom: TermGraph
    bypass: tuple[NodeId, ...]
    top_edges: frozenset[int]
    bottom_edges: frozenset[int]


def _reaches_pattern_inputs(a: Dhg, image_edges: set[int], targets: set[NodeId]) -> set[int]:
    """Edges outside the image from which some target node is reachable downstream."""
    result: set[int] = set()
    # consumed_by: node -> edges outside the image consuming it
    grow = True
    wanted = set(targets)
    while grow:
        grow = False
        for e in a.edges:
            if e.uid in image_edges or e.uid in result:
                continue
            if e.output_node in wanted:
                result.add(e.uid)
                wanted.update(e.inputs)
                grow = True
    return result


def _independent_of_pattern_outputs(a: Dhg, image_edges: set[int], out_images: set[NodeId]) -> set[int]:
    """Edges outside the image that do not consume a pattern output, transitively."""
    tainted: set[NodeId] = set(out_images)
    tainted_edges: set[int] = set()
    grow = True
    while grow:
        grow = False
        for e in a.edges:
            if e.uid in image_edges or e.uid in tainted_edges:
                continue
            if any(x in tainted for x in e.inputs):
                tainted_edges.add(e.uid)
                tainted.add(e.output_node)
                grow = True
    return {e.uid for e in a.edges if e.uid not in image_edges and e.uid not in tainted_edges}


def image_context(
    a: TermGraph,
    m1: Matching,
    rule: Rule,
    *,
    maximal: bool = False,
) -> ImageContext:
    """Factor ``a`` around the match image of the rule's left-hand side.

    By default the top part holds only the edges that feed the pattern
    inputs; with ``maximal=True`` it instead holds every edge that does not
    depend on a pattern output.  Both choices satisfy the same contract.
    """
    if m1.src != rule.lhs.dhg or m1.trg != a.dhg:
        raise StaleMatchingError("match does not connect the rule's left-hand side to the graph")
    if not rule.solid:
        raise PreconditionViolatedError("context decomposition requires a solid left-hand side")
    if not m1.is_injective():
        raise PreconditionViolatedError("context decomposition requires an injective match")
    if not dangling_ok(rule.phi, m1):
        raise PreconditionViolatedError("match image cannot be cut out cleanly")

    g = a.dhg
    l = rule.lhs
    image_edges = set(m1.edge_map.values())
    input_images = [m1.node_map[Input(p)] for p in range(l.n_inputs)]
    output_images = [m1.node_map[x] for x in l.g_out]

    if maximal:
        top_edges = _independent_of_pattern_outputs(g, image_edges, set(output_images))
    else:
        top_edges = _reaches_pattern_inputs(g, image_edges, set(input_images))
    bottom_edges = {e.uid for e in g.edges if e.uid not in image_edges and e.uid not in top_edges}

    top_side: set[NodeId] = {Input(p) for p in range(g.n_inputs)}
    top_side.update(g.edge(uid).output_node for uid in top_edges)

    bypass: list[NodeId] = []
    seen: set[NodeId] = set()
    for uid in sorted(bottom_edges):
        for x in g.edge(uid).inputs:
            if x in top_side and x not in seen:
                bypass.append(x)
                seen.add(x)
    for x in g.g_out:
        if x in top_side and x not in seen:
            bypass.append(x)
            seen.add(x)
    k = len(bypass)

    # top graph: the original inputs to (pattern inputs ++ bypass)
    top_ids = {uid: n for n, uid in enumerate(sorted(g.edge(u).output for u in top_edges))}

    def top_node(x: NodeId) -> NodeId:
        if isinstance(x, Input):
            return x
        if x.uid not in top_ids:
            raise InternalSoundnessError("top part of the context references a bottom-side node")
        return Inner(top_ids[x.uid])

    top = make_dhg(
        g.n_inputs,
        l.n_inputs + k,
        top_ids.values(),
        (
            Edge(n, g.edge(uid).label, top_ids[g.edge(uid).output],
                 tuple(top_node(x) for x in g.edge(uid).inputs))
            for n, uid in enumerate(sorted(top_edges))
        ),
        [top_node(x) for x in input_images] + [top_node(x) for x in bypass],
    )

    # bottom graph: (pattern outputs ++ bypass) to the original outputs
    bottom_ids = {uid: n for n, uid in enumerate(sorted(g.edge(u).output for u in bottom_edges))}
    entry: dict[NodeId, NodeId] = {}
    for s, x in enumerate(output_images):
        entry[x] = Input(s)
    for t, x in enumerate(bypass):
        entry.setdefault(x, Input(l.n_outputs + t))

    def bottom_node(x: NodeId) -> NodeId:
        if x in entry:
            return entry[x]
        if isinstance(x, Inner) and x.uid in bottom_ids:
            return Inner(bottom_ids[x.uid])
        raise InternalSoundnessError("bottom part of the context references a hidden node")

    bottom = make_dhg(
        l.n_outputs + k,
        g.n_outputs,
        bottom_ids.values(),
        (
            Edge(n, g.edge(uid).label, bottom_ids[g.edge(uid).output],
                 tuple(bottom_node(x) for x in g.edge(uid).inputs))
            for n, uid in enumerate(sorted(bottom_edges))
        ),
        (bottom_node(x) for x in g.g_out),
    )

    return ImageContext(
        k=k,
        top=as_term_graph(top),
        bottom=as_term_graph(bottom),
        bypass=tuple(bypass),
        top_edges=frozenset(top_edges),
        bottom_edges=frozenset(bottom_edges),
    )


def recompose(top: Dhg | TermGraph, middle: Dhg | TermGraph, k: int, bottom: Dhg | TermGraph):
    """Build top ; (middle x id_k) ; bottom, tracking where ``middle`` lands.

    Returns the composed graph plus node and edge maps for the middle copy.
    """
    mid = as_dhg(middle)
    t1 = _ten_tracked(mid, identity(k).dhg)
    s1 = _seq_tracked(as_dhg(top), t1.graph)
    s2 = _seq_tracked(s1.graph, as_dhg(bottom))
    node_map = {
        v: s2.left_nodes[s1.right_nodes[t1.left_nodes[v]]] for v in mid.nodes()
    }
    edge_map = {
        e.uid: s2.left_edges[s1.right_edges[t1.left_edges[e.uid]]] for e in mid.edges
    }
    return s2.graph, node_map, edge_map


@dataclass(frozen=True)
class ContextCheck:
    """Outcome of verifying a context against a match."""

    ok: bool
    witness: Iso | None
    reason: str

    def __bool__(self) -> bool:
        return self.ok


def verify_image_context(
    graph: TermGraph | Dhg,
    matching: Matching,
    ctx: ImageContext,
) -> ContextCheck:
    """Check that ``ctx`` factors ``graph`` around ``matching``'s image.

    Rebuilds top ; (pattern x id_k) ; bottom and looks for an isomorphism to
    ``graph`` that sends the embedded pattern copy exactly onto the match
    image.
    """
    g = as_dhg(graph)
    pattern = matching.src
    if matching.trg != g:
        return ContextCheck(False, None, "matching does not land in the supplied graph")
    if ctx.top.n_outputs != pattern.n_inputs + ctx.k:
        return ContextCheck(False, None, "top interface does not fit the pattern")
    if ctx.bottom.n_inputs != pattern.n_outputs + ctx.k:
        return ContextCheck(False, None, "bottom interface does not fit the pattern")
    if ctx.top.n_inputs != g.n_inputs or ctx.bottom.n_outputs != g.n_outputs:
        return ContextCheck(False, None, "context interface does not fit the graph")

    composed, node_map, edge_map = recompose(ctx.top, pattern, ctx.k, ctx.bottom)

    pinned_nodes: dict[NodeId, NodeId] = {}
    for v, c_node in node_map.items():
        want = matching.node_map[v]
        if pinned_nodes.get(c_node, want) != want:
            return ContextCheck(False, None, "pattern copy collapses nodes differently than the match")
        pinned_nodes[c_node] = want
    pinned_edges: dict[int, int] = {}
    for uid, c_uid in edge_map.items():
        want = matching.edge_map[uid]
        if pinned_edges.get(c_uid, want) != want:
            return ContextCheck(False, None, "pattern copy collapses edges differently than the match")
        pinned_edges[c_uid] = want

    witness = iso(composed, g, pinned_nodes=pinned_nodes, pinned_edges=pinned_edges)
    if witness is None:
        return ContextCheck(False, None, "no isomorphism maps the pattern copy onto the match image")
    return ContextCheck(True, witness, "")


def check_context_preservation(
    a: TermGraph,
    m1: Matching,
    rule: Rule,
    step: RewriteResult,
    *,
    maximal: bool = False,
) -> bool:
    """One context serves both sides of a rewrite step.

    Computes the context around the match in the graph before the step and
    verifies it both there and around the replacement's match in the result.
    """
    ctx = image_context(a, m1, rule, maximal=maximal)
    before = verify_image_context(a, m1, ctx)
    after = verify_image_context(step.result, step.m2, ctx)
    return bool(before and after)
