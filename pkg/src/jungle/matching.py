"""Structure-preserving maps between graphs and match enumeration.

A matching sends nodes to nodes and edges to edges so that labels,
produced nodes, and tentacle sequences are preserved; the two interfaces
are unrelated.  A homomorphism is a matching between graphs of equal
interface that fixes every input node and preserves the output
assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import (
    Dhg,
    Edge,
    Inner,
    Input,
    JungleError,
    NodeId,
    TermGraph,
    as_dhg,
    format_node,
    node_key,
)


class MatchingError(JungleError):
    """Candidate maps fail the matching equations; lists every violation."""

    def __init__(self, violations: Sequence[str]):
        self.violations = tuple(violations)
        super().__init__("; ".join(violations))


class StaleMatchingError(JungleError):
    """A stored matching refers to a different graph than the one supplied."""


@dataclass(frozen=True)
class Matching:
    """Label- and tentacle-preserving map from ``src`` into ``trg``."""

    src: Dhg
    trg: Dhg
    node_map: dict[NodeId, NodeId]
    edge_map: dict[int, int]

    def node(self, node: NodeId) -> NodeId:
        return self.node_map[node]

    def edge(self, uid: int) -> int:
        return self.edge_map[uid]

    def is_injective(self) -> bool:
        return len(set(self.node_map.values())) == len(self.node_map) and len(
            set(self.edge_map.values())
        ) == len(self.edge_map)

    def then(self, other: Matching) -> Matching:
        if self.trg != other.src:
            raise StaleMatchingError("composition target does not match the next source")
        return Matching(
            self.src,
            other.trg,
            {k: other.node_map[v] for k, v in self.node_map.items()},
            {k: other.edge_map[v] for k, v in self.edge_map.items()},
        )

    def image_nodes(self) -> set[NodeId]:
        return set(self.node_map.values())

    def image_edges(self) -> set[int]:
        return set(self.edge_map.values())


@dataclass(frozen=True)
class Homomorphism(Matching):
    """Matching between equal interfaces that fixes inputs and outputs."""


def matching_violations(
    src: Dhg | TermGraph,
    trg: Dhg | TermGraph,
    node_map: Mapping[NodeId, NodeId],
    edge_map: Mapping[int, int],
) -> list[str]:
    src, trg = as_dhg(src), as_dhg(trg)
    out: list[str] = []
    for node in src.nodes():
        if node not in node_map:
            out.append(f"node {format_node(node)} is unmapped")
        elif not trg.has_node(node_map[node]):
            out.append(f"node {format_node(node)} maps outside the target graph")
    for e in src.edges:
        if e.uid not in edge_map:
            out.append(f"edge e{e.uid} is unmapped")
            continue
        if edge_map[e.uid] not in trg._edge_index:
            out.append(f"edge e{e.uid} maps outside the target graph")
            continue
        f = trg.edge(edge_map[e.uid])
        if f.label != e.label:
            out.append(f"label equation fails on e{e.uid}: {e.label!r} vs {f.label!r}")
        src_out = node_map.get(e.output_node)
        if src_out is not None and src_out != f.output_node:
            out.append(f"output equation fails on e{e.uid}")
        mapped_in = tuple(node_map.get(x) for x in e.inputs)
        if None not in mapped_in and mapped_in != f.inputs:
            out.append(f"tentacle equation fails on e{e.uid}")
    return out


def check_matching(
    src: Dhg | TermGraph,
    trg: Dhg | TermGraph,
    node_map: Mapping[NodeId, NodeId],
    edge_map: Mapping[int, int],
) -> Matching:
    """Validate candidate maps and wrap them as a Matching."""
    violations = matching_violations(src, trg, node_map, edge_map)
    if violations:
        raise MatchingError(violations)
    return Matching(as_dhg(src), as_dhg(trg), dict(node_map), dict(edge_map))


def check_homomorphism(
    src: Dhg | TermGraph,
    trg: Dhg | TermGraph,
    node_map: Mapping[NodeId, NodeId],
    edge_map: Mapping[int, int],
) -> Homomorphism:
    """Validate a homomorphism: a matching that also respects the interface."""
    src_d, trg_d = as_dhg(src), as_dhg(trg)
    violations = matching_violations(src_d, trg_d, node_map, edge_map)
    if (src_d.n_inputs, src_d.n_outputs) != (trg_d.n_inputs, trg_d.n_outputs):
        violations.append(
            f"interfaces differ: {src_d.n_inputs}->{src_d.n_outputs} vs {trg_d.n_inputs}->{trg_d.n_outputs}"
        )
    else:
        for p in range(src_d.n_inputs):
            if node_map.get(Input(p)) != Input(p):
                violations.append(f"input in{p} is not fixed")
        for q, node in enumerate(src_d.g_out):
            if node in node_map and node_map[node] != trg_d.g_out[q]:
                violations.append(f"output out{q} is not preserved")
    if violations:
        raise MatchingError(violations)
    return Homomorphism(src_d, trg_d, dict(node_map), dict(edge_map))


def find_matchings(pattern: TermGraph, target: Dhg | TermGraph, injective: bool = True) -> list[Matching]:
    """Enumerate matchings of ``pattern`` into ``target``.

    Complete and duplicate-free; the result is ordered lexicographically by
    the edge images (in pattern schedule order) and then the node images.
    """
    l = pattern.dhg
    a = as_dhg(target)
    by_label: dict[str, list[Edge]] = {}
    for e in a.edges:
        by_label.setdefault(e.label, []).append(e)

    order = [l.edge(uid) for uid in pattern.schedule]
    results: list[Matching] = []
    nmap: dict[NodeId, NodeId] = {}
    emap: dict[int, int] = {}
    used_nodes: dict[NodeId, int] = {}
    used_edges: set[int] = set()

    def bind(x: NodeId, y: NodeId, trail: list[NodeId]) -> bool:
        if x in nmap:
            return nmap[x] == y
        if injective and y in used_nodes:
            return False
        nmap[x] = y
        used_nodes[y] = used_nodes.get(y, 0) + 1
        trail.append(x)
        return True

    def unbind(trail: list[NodeId]) -> None:
        for x in reversed(trail):
            y = nmap.pop(x)
            used_nodes[y] -= 1
            if not used_nodes[y]:
                del used_nodes[y]

    def assign_edges(i: int) -> None:
        if i == len(order):
            assign_free_nodes([x for x in l.nodes() if x not in nmap])
            return
        e = order[i]
        for f in by_label.get(e.label, ()):
            if injective and f.uid in used_edges:
                continue
            trail: list[NodeId] = []
            if bind(e.output_node, f.output_node, trail) and all(
                bind(x, y, trail) for x, y in zip(e.inputs, f.inputs)
            ):
                emap[e.uid] = f.uid
                used_edges.add(f.uid)
                assign_edges(i + 1)
                del emap[e.uid]
                used_edges.discard(f.uid)
            unbind(trail)

    def assign_free_nodes(free: list[NodeId]) -> None:
        if not free:
            results.append(Matching(l, a, dict(nmap), dict(emap)))
            return
        x = free[0]
        for y in a.nodes():
            trail: list[NodeId] = []
            if bind(x, y, trail):
                assign_free_nodes(free[1:])
            unbind(trail)

    assign_edges(0)

    def sort_key(m: Matching) -> tuple:
        edge_part = tuple(m.edge_map[uid] for uid in pattern.schedule)
        node_part = tuple(node_key(m.node_map[x]) for x in l.nodes())
        return edge_part + node_part

    results.sort(key=sort_key)
    return results


@dataclass(frozen=True)
class DanglingReport:
    """Outcome of the dangling check for removing a match's image."""

    deleted: frozenset[NodeId]
    edge_conflicts: tuple[tuple[int, NodeId], ...]
    output_conflicts: tuple[tuple[int, NodeId], ...]

    @property
    def ok(self) -> bool:
        return not self.edge_conflicts and not self.output_conflicts

    def __bool__(self) -> bool:
        return self.ok


def deleted_nodes(phi: Homomorphism, m1: Matching) -> set[NodeId]:
    """Nodes of the application graph removed by the rewrite.

    These are match images of pattern inner nodes that the gluing map
    ``phi`` does not preserve.
    """
    preserved = set(phi.node_map.values())
    return {
        m1.node_map[Inner(u)]
        for u in phi.trg.inner
        if Inner(u) not in preserved
    }


def dangling_ok(phi: Homomorphism, m1: Matching) -> DanglingReport:
    """Check that removing the match image leaves no dangling tentacles.

    No edge outside the match image may touch a deleted node, and no graph
    output may point at one.  The report lists every violator.
    """
    if phi.trg != m1.src:
        raise StaleMatchingError("gluing map and matching disagree on the pattern graph")
    a = m1.trg
    deleted = deleted_nodes(phi, m1)
    removed_edges = {
        m1.edge_map[e.uid] for e in phi.trg.edges if e.uid not in set(phi.edge_map.values())
    }
    edge_conflicts: list[tuple[int, NodeId]] = []
    for e in a.edges:
        if e.uid in removed_edges:
            continue
        for node in (e.output_node, *e.inputs):
            if node in deleted:
                edge_conflicts.append((e.uid, node))
    output_conflicts = [
        (q, node) for q, node in enumerate(a.g_out) if node in deleted
    ]
    return DanglingReport(frozenset(deleted), tuple(edge_conflicts), tuple(output_conflicts))
