"""Rule-based rewriting by removing a match image and gluing in a replacement.

A rule is a span of homomorphisms from an edge-free gluing graph into the
left- and right-hand term graphs.  Applying it to an injective match first
cuts the matched material out of the application graph (keeping the gluing
image) and then glues the right-hand side back in along the gluing map.
Both construction steps are plain colimit computations over node and edge
classes; the side conditions checked up front guarantee the result is
again a term graph.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Dhg,
    Edge,
    Inner,
    Input,
    InterfaceMismatchError,
    InvalidGraphError,
    JungleError,
    NodeId,
    Signature,
    TermGraph,
    TermGraphError,
    as_term_graph,
    make_dhg,
    structural_problems,
)
from .algebra import bottom
from .matching import (
    DanglingReport,
    Homomorphism,
    Matching,
    StaleMatchingError,
    check_homomorphism,
    dangling_ok,
    deleted_nodes,
)


class LhsNotSolidError(JungleError):
    """The left-hand side does not expose its outputs as distinct inner nodes."""


class NotInjectiveMatchError(JungleError):
    """Rewriting requires an injective match."""


class DanglingConflictError(JungleError):
    def __init__(self, report: DanglingReport):
        self.report = report
        parts = [f"edge e{uid} touches deleted node" for uid, _ in report.edge_conflicts]
        parts += [f"output out{q} points at deleted node" for q, _ in report.output_conflicts]
        super().__init__("; ".join(parts) or "dangling conflict")


class IdentificationConflictError(JungleError):
    """The match identifies material that the rule does not permit to merge."""


class ResultNotTermGraphError(JungleError):
    """Bypassed validation produced a graph that is not a term graph."""

    def __init__(self, cause: Exception, graph: Dhg):
        self.cause = cause
        self.graph = graph
        super().__init__(f"rewrite result is not a term graph: {cause}")


class InternalSoundnessError(JungleError):
    """A validated rewrite produced an invalid result; indicates a bug."""


def is_solid(t: TermGraph) -> bool:
    """Outputs are pairwise distinct inner nodes (never inputs, never shared)."""
    outs = t.g_out
    return all(isinstance(x, Inner) for x in outs) and len(set(outs)) == len(outs)


def interface_embedding(gluing: Dhg, target: TermGraph | Dhg) -> Homomorphism:
    """The unique homomorphism from an edge-free gluing graph into ``target``."""
    trg = target.dhg if isinstance(target, TermGraph) else target
    if (gluing.n_inputs, gluing.n_outputs) != (trg.n_inputs, trg.n_outputs):
        raise InterfaceMismatchError(
            f"gluing graph is {gluing.n_inputs}->{gluing.n_outputs}, "
            f"target is {trg.n_inputs}->{trg.n_outputs}"
        )
    node_map: dict[NodeId, NodeId] = {Input(p): Input(p) for p in range(gluing.n_inputs)}
    for q, node in enumerate(gluing.g_out):
        node_map[node] = trg.g_out[q]
    return check_homomorphism(gluing, trg, node_map, {})


@dataclass(frozen=True)
class Rule:
    """Rewrite rule: replace the left pattern by the right one around a shared interface."""

    lhs: TermGraph
    rhs: TermGraph
    gluing: Dhg
    phi: Homomorphism  # gluing -> lhs
    psi: Homomorphism  # gluing -> rhs
    solid: bool

    @property
    def n_inputs(self) -> int:
        return self.lhs.n_inputs

    @property
    def n_outputs(self) -> int:
        return self.lhs.n_outputs


def make_rule(
    sig: Signature,
    lhs: TermGraph,
    rhs: TermGraph,
    *,
    allow_unsolid: bool = False,
) -> Rule:
    """Build a rule from its two sides.

    The sides must share an interface, and the left side must be solid so
    that the gluing map into it is injective.  ``allow_unsolid`` skips the
    solidity requirement; rules built that way can only be applied with
    validation bypassed.
    """
    if (lhs.n_inputs, lhs.n_outputs) != (rhs.n_inputs, rhs.n_outputs):
        raise InterfaceMismatchError(
            f"rule sides disagree: {lhs.n_inputs}->{lhs.n_outputs} vs {rhs.n_inputs}->{rhs.n_outputs}"
        )
    for side in (lhs, rhs):
        for e in side.edges:
            sig.arity(e.label)  # raises UnknownLabelError
    solid = is_solid(lhs)
    if not solid and not allow_unsolid:
        raise LhsNotSolidError(
            "left-hand side outputs must be pairwise distinct inner nodes"
        )
    gluing = bottom(lhs.n_inputs, lhs.n_outputs)
    phi = interface_embedding(gluing, lhs)
    psi = interface_embedding(gluing, rhs)
    return Rule(lhs, rhs, gluing, phi, psi, solid)


@dataclass(frozen=True)
class Complement:
    """The application graph with the match image cut out."""

    host: Dhg
    chi: Matching  # gluing -> host
    xi: Homomorphism  # host -> application graph (an inclusion)


def _complement_raw(phi: Homomorphism, m1: Matching) -> Complement:
    a = m1.trg
    deleted = deleted_nodes(phi, m1)
    kept_gluing_edges = set(phi.edge_map.values())
    removed_edges = {m1.edge_map[e.uid] for e in phi.trg.edges if e.uid not in kept_gluing_edges}
    host = make_dhg(
        a.n_inputs,
        a.n_outputs,
        (u for u in a.inner if Inner(u) not in deleted),
        (e for e in a.edges if e.uid not in removed_edges),
        a.g_out,
    )
    chi_nodes = {v: m1.node_map[phi.node_map[v]] for v in phi.src.nodes()}
    chi_edges = {e.uid: m1.edge_map[phi.edge_map[e.uid]] for e in phi.src.edges}
    chi = Matching(phi.src, host, chi_nodes, chi_edges)
    xi_nodes = {x: x for x in host.nodes()}
    xi_edges = {e.uid: e.uid for e in host.edges}
    xi = Homomorphism(host, a, xi_nodes, xi_edges)
    return Complement(host, chi, xi)


def pushout_complement(rule: Rule, m1: Matching) -> Complement:
    """Cut the match image out of the application graph.

    Requires an injective match whose removal leaves no dangling tentacle;
    the gluing image (interface nodes) is retained.
    """
    if m1.src != rule.lhs.dhg:
        raise StaleMatchingError("matching does not start at the rule's left-hand side")
    if not m1.is_injective():
        raise IdentificationConflictError("match identifies distinct pattern material")
    report = dangling_ok(rule.phi, m1)
    if not report:
        raise DanglingConflictError(report)
    return _complement_raw(rule.phi, m1)


@dataclass(frozen=True)
class Gluing:
    """The replacement glued into the host along the gluing map."""

    result: Dhg
    m2: Matching  # rhs -> result
    omega: Homomorphism  # host -> result


class _UnionFind:
    """Union-find with deterministic, priority-based representatives."""

    def __init__(self) -> None:
        self.parent: dict[tuple, tuple] = {}

    def find(self, x: tuple) -> tuple:
        path = []
        while self.parent.setdefault(x, x) != x:
            path.append(x)
            x = self.parent[x]
        for p in path:
            self.parent[p] = x
        return x

    def union(self, a: tuple, b: tuple, prefer) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        keep = min(ra, rb, key=prefer)
        drop = rb if keep == ra else ra
        self.parent[drop] = keep


def _node_priority(key: tuple) -> tuple[int, int]:
    # representative preference: graph inputs, then host inner, then replacement inner
    side, node = key
    if side == "h":
        if isinstance(node, Input):
            return (0, node.index)
        return (1, node.uid)
    return (2, node)


def _glue_raw(psi: Homomorphism, chi: Matching) -> Gluing:
    """Glue the replacement ``psi.trg`` into the host along the shared gluing graph."""
    r = psi.trg
    host = chi.trg
    uf = _UnionFind()

    def hkey(node: NodeId) -> tuple:
        return ("h", node)

    def rkey(node: NodeId) -> tuple:
        # replacement inputs realize directly as host nodes via chi
        if isinstance(node, Input):
            return hkey(chi.node_map[Input(node.index)])
        return ("r", node.uid)

    for node in host.nodes():
        uf.find(hkey(node))
    for u in sorted(r.inner):
        uf.find(("r", u))
    for v in psi.src.nodes():
        if isinstance(v, Input):
            continue  # definitional: replacement inputs realize as chi images
        uf.union(rkey(psi.node_map[v]), hkey(chi.node_map[v]), _node_priority)

    # edge classes: replacement edges in the gluing image realize as host edges
    edge_uf = _UnionFind()
    shared_r_edges: dict[int, tuple] = {}
    for e in psi.src.edges:
        target = psi.edge_map[e.uid]
        hedge = ("e", chi.edge_map[e.uid])
        edge_uf.find(hedge)
        if target in shared_r_edges:
            edge_uf.union(shared_r_edges[target], hedge, lambda k: k)
        else:
            shared_r_edges[target] = hedge

    fresh: dict[tuple, int] = {}
    next_uid = max([u for u in host.inner] + [-1]) + 1

    def rep_node(key: tuple) -> NodeId:
        root = uf.find(key)
        side, node = root
        if side == "h":
            return node
        nonlocal next_uid
        if root not in fresh:
            fresh[root] = next_uid
            next_uid += 1
        return Inner(fresh[root])

    # make fresh ids deterministic: allocate in replacement uid order
    for u in sorted(r.inner):
        rep_node(("r", u))

    # inputs have top representative priority, so an input mapping elsewhere
    # means two distinct inputs were forced into one class
    for p in range(host.n_inputs):
        if rep_node(hkey(Input(p))) != Input(p):
            raise InterfaceMismatchError("gluing forces distinct graph inputs to merge")

    def host_node(node: NodeId) -> NodeId:
        return rep_node(hkey(node))

    def repl_node(node: NodeId) -> NodeId:
        return rep_node(rkey(node))

    edge_canon: dict[int, int] = {}
    for e in host.edges:
        root = edge_uf.find(("e", e.uid))
        edge_canon[e.uid] = root[1]

    edges: list[Edge] = []
    for e in host.edges:
        if edge_canon[e.uid] != e.uid:
            continue
        out = host_node(e.output_node)
        if not isinstance(out, Inner):
            raise InterfaceMismatchError("gluing forces an edge output onto a graph input")
        edges.append(Edge(e.uid, e.label, out.uid, tuple(host_node(x) for x in e.inputs)))

    next_edge = max([e.uid for e in host.edges] + [-1]) + 1
    shared = set(psi.edge_map.values())
    repl_edge_ids: dict[int, int] = {}
    for e in r.edges:
        if e.uid in shared:
            # realized by the host edge its gluing preimage points at
            g_edge = next(ge for ge in psi.src.edges if psi.edge_map[ge.uid] == e.uid)
            repl_edge_ids[e.uid] = edge_canon[chi.edge_map[g_edge.uid]]
            continue
        out = repl_node(e.output_node)
        if not isinstance(out, Inner):
            raise InterfaceMismatchError("gluing forces an edge output onto a graph input")
        edges.append(Edge(next_edge, e.label, out.uid, tuple(repl_node(x) for x in e.inputs)))
        repl_edge_ids[e.uid] = next_edge
        next_edge += 1

    inner_ids = {x.uid for x in map(host_node, (Inner(u) for u in host.inner)) if isinstance(x, Inner)}
    inner_ids |= {x.uid for x in map(repl_node, (Inner(u) for u in r.inner)) if isinstance(x, Inner)}
    result = make_dhg(
        host.n_inputs,
        host.n_outputs,
        inner_ids,
        edges,
        (host_node(x) for x in host.g_out),
    )

    m2 = Matching(
        r,
        result,
        {x: repl_node(x) for x in r.nodes()},
        dict(repl_edge_ids),
    )
    omega = Homomorphism(
        host,
        result,
        {x: host_node(x) for x in host.nodes()},
        dict(edge_canon),
    )
    return Gluing(result, m2, omega)


def pushout(rule: Rule, chi: Matching) -> Gluing:
    """Glue the rule's right-hand side into the host graph along ``chi``."""
    if chi.src != rule.gluing:
        raise StaleMatchingError("gluing matching does not start at the rule's gluing graph")
    return _glue_raw(rule.psi, chi)


@dataclass(frozen=True)
class RewriteResult:
    """Everything produced by one rewrite step."""

    rule: Rule
    before: TermGraph
    m1: Matching
    host: Dhg
    chi: Matching
    xi: Homomorphism
    result: TermGraph
    m2: Matching
    omega: Homomorphism

    @property
    def graph(self) -> TermGraph:
        return self.result


def _squares_commute(rule: Rule, m1: Matching, comp: Complement, glue: Gluing) -> bool:
    for v in rule.gluing.nodes():
        if m1.node_map[rule.phi.node_map[v]] != comp.xi.node_map[comp.chi.node_map[v]]:
            return False
        if glue.m2.node_map[rule.psi.node_map[v]] != glue.omega.node_map[comp.chi.node_map[v]]:
            return False
    return True


def rewrite(
    rule: Rule,
    graph: TermGraph,
    match: Matching,
    *,
    unsafe_bypass: bool = False,
) -> RewriteResult:
    """Apply ``rule`` at ``match`` inside ``graph``.

    With validation on (the default) the match must be injective, the rule
    solid, and the cut must leave no dangling tentacles; the result is then
    guaranteed to be a term graph again.  ``unsafe_bypass`` skips those
    checks and surfaces whatever violation the construction produces.
    """
    if match.src != rule.lhs.dhg:
        raise StaleMatchingError("match does not start at the rule's left-hand side")
    if match.trg != graph.dhg:
        raise StaleMatchingError("match does not land in the supplied graph")

    if not unsafe_bypass:
        if not rule.solid:
            raise LhsNotSolidError("rule left-hand side is not solid")
        if not match.is_injective():
            raise NotInjectiveMatchError("rewriting requires an injective match")
        report = dangling_ok(rule.phi, match)
        if not report:
            raise DanglingConflictError(report)

    try:
        comp = _complement_raw(rule.phi, match)
        glue = _glue_raw(rule.psi, comp.chi)
        problems = structural_problems(glue.result)
        if problems:
            raise InvalidGraphError(problems)
        result = as_term_graph(glue.result)
    except (TermGraphError, InterfaceMismatchError, InvalidGraphError) as exc:
        raw = glue.result if "glue" in locals() else None
        if unsafe_bypass:
            raise ResultNotTermGraphError(exc, raw) from exc
        raise InternalSoundnessError(f"validated rewrite produced an invalid graph: {exc}") from exc

    if not unsafe_bypass:
        expected = len(graph.edges) - len(rule.lhs.edges) + len(rule.rhs.edges)
        if len(result.edges) != expected or not _squares_commute(rule, match, comp, glue):
            raise InternalSoundnessError("rewrite bookkeeping failed")

    return RewriteResult(
        rule=rule,
        before=graph,
        m1=match,
        host=comp.host,
        chi=comp.chi,
        xi=comp.xi,
        result=result,
        m2=glue.m2,
        omega=glue.omega,
    )
