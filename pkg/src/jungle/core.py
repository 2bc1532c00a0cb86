"""Directed hypergraphs with interfaces, and the term-graph refinement.

A graph has ``m`` numbered inputs, ``n`` numbered outputs, a finite set of
inner nodes, and labelled hyperedges.  Every edge consumes an ordered
sequence of nodes (its tentacles) and produces exactly one inner node.
Term graphs (jungles) additionally require every inner node to be produced
by exactly one edge and the edge dependencies to be acyclic.  General
graphs drop that requirement; they show up as gluing and host graphs
during rewriting, where nodes may temporarily lack a producing edge.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence


class JungleError(Exception):
    """Base class for every error raised by this package."""


class UnknownLabelError(JungleError):
    def __init__(self, label: str):
        super().__init__(f"label {label!r} is not declared in the signature")
        self.label = label


class InterfaceMismatchError(JungleError):
    """Composition or rule construction over incompatible interfaces."""


@dataclass(frozen=True)
class Problem:
    """One structural violation found while validating raw graph data."""

    code: str  # arity_mismatch | dangling_reference | duplicate_id | unknown_label
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}[{self.subject}]: {self.message}"


class InvalidGraphError(JungleError):
    """Raw graph data violates the structural invariants; lists every problem."""

    def __init__(self, problems: Sequence[Problem]):
        self.problems = tuple(problems)
        super().__init__("; ".join(str(p) for p in self.problems))


class TermGraphError(JungleError):
    """The graph is structurally valid but is not a term graph."""


class NodeWithoutDefiningEdge(TermGraphError):
    def __init__(self, uids: Sequence[int]):
        self.uids = tuple(uids)
        super().__init__(f"inner nodes without a producing edge: {list(self.uids)}")


class NodeWithMultipleDefiningEdges(TermGraphError):
    def __init__(self, uids: Sequence[int]):
        self.uids = tuple(uids)
        super().__init__(f"inner nodes with several producing edges: {list(self.uids)}")


class CycleDetected(TermGraphError):
    def __init__(self, cycle: Sequence[int]):
        self.cycle = tuple(cycle)
        super().__init__(f"dependency cycle through inner nodes {list(self.cycle)}")


@dataclass(frozen=True)
class Signature:
    """Edge alphabet: maps each label to the number of inputs its edges take."""

    arities: dict[str, int]

    def __post_init__(self) -> None:
        for label, arity in self.arities.items():
            if arity < 0:
                raise ValueError(f"negative arity for label {label!r}")

    def arity(self, label: str) -> int:
        try:
            return self.arities[label]
        except KeyError:
            raise UnknownLabelError(label) from None

    def __contains__(self, label: str) -> bool:
        return label in self.arities


@dataclass(frozen=True)
class Input:
    """Graph input node, identified by its position in the input interface."""

    index: int


@dataclass(frozen=True)
class Inner:
    """Inner node, identified by an id that is local to its graph."""

    uid: int


NodeId = Input | Inner


def node_key(node: NodeId) -> tuple[int, int]:
    """Sort key placing inputs (by index) before inner nodes (by uid)."""
    if isinstance(node, Input):
        return (0, node.index)
    return (1, node.uid)


def format_node(node: NodeId) -> str:
    if isinstance(node, Input):
        return f"in{node.index}"
    return f"n{node.uid}"


@dataclass(frozen=True)
class Edge:
    """Labelled hyperedge: consumes ``inputs`` in order, produces inner node ``output``."""

    uid: int
    label: str
    output: int
    inputs: tuple[NodeId, ...]

    @property
    def output_node(self) -> Inner:
        return Inner(self.output)


@dataclass(frozen=True)
class Dhg:
    """Directed hypergraph with an m-to-n interface.

    Plain value object: instances can hold structurally broken data, so raw
    data coming from outside should pass through :func:`validate_dhg`.
    Inner node ids and edge ids are opaque and local to the graph.
    """

    n_inputs: int
    n_outputs: int
    inner: frozenset[int]
    edges: tuple[Edge, ...]
    g_out: tuple[NodeId, ...]

    @cached_property
    def _edge_index(self) -> dict[int, Edge]:
        return {e.uid: e for e in self.edges}

    @cached_property
    def producers(self) -> dict[int, tuple[int, ...]]:
        """Inner node uid to the (sorted) uids of edges producing it."""
        out: dict[int, list[int]] = {u: [] for u in self.inner}
        for e in self.edges:
            out[e.output].append(e.uid)
        return {u: tuple(sorted(v)) for u, v in out.items()}

    def edge(self, uid: int) -> Edge:
        return self._edge_index[uid]

    def has_node(self, node: NodeId) -> bool:
        if isinstance(node, Input):
            return 0 <= node.index < self.n_inputs
        return node.uid in self.inner

    def nodes(self) -> Iterator[NodeId]:
        for p in range(self.n_inputs):
            yield Input(p)
        for u in sorted(self.inner):
            yield Inner(u)

    @property
    def node_count(self) -> int:
        return self.n_inputs + len(self.inner)

    def labels(self) -> list[str]:
        return sorted(e.label for e in self.edges)


def make_dhg(
    n_inputs: int,
    n_outputs: int,
    inner: Iterable[int],
    edges: Iterable[Edge],
    g_out: Iterable[NodeId],
) -> Dhg:
    """Coerce raw collections into a Dhg without structural checks."""
    return Dhg(
        n_inputs=n_inputs,
        n_outputs=n_outputs,
        inner=frozenset(inner),
        edges=tuple(sorted(edges, key=lambda e: e.uid)),
        g_out=tuple(g_out),
    )


def validate_dhg(
    sig: Signature,
    n_inputs: int,
    n_outputs: int,
    inner: Iterable[int],
    edges: Iterable[Edge],
    g_out: Iterable[NodeId],
) -> Dhg:
    """Build a Dhg from raw data, reporting every structural violation at once."""
    inner_list = list(inner)
    edge_list = list(edges)
    outs = list(g_out)
    problems: list[Problem] = []

    seen_inner: set[int] = set()
    for u in inner_list:
        if u in seen_inner:
            problems.append(Problem("duplicate_id", f"n{u}", "inner node id declared twice"))
        seen_inner.add(u)
    seen_edges: set[int] = set()
    for e in edge_list:
        if e.uid in seen_edges:
            problems.append(Problem("duplicate_id", f"e{e.uid}", "edge id declared twice"))
        seen_edges.add(e.uid)

    inner_set = frozenset(inner_list)

    def ref_ok(node: NodeId) -> bool:
        if isinstance(node, Input):
            return 0 <= node.index < n_inputs
        return node.uid in inner_set

    for e in edge_list:
        if e.label not in sig:
            problems.append(Problem("unknown_label", f"e{e.uid}", f"label {e.label!r} not in signature"))
        else:
            want = sig.arity(e.label)
            if len(e.inputs) != want:
                problems.append(
                    Problem(
                        "arity_mismatch",
                        f"e{e.uid}",
                        f"label {e.label!r} takes {want} inputs, got {len(e.inputs)}",
                    )
                )
        if e.output not in inner_set:
            problems.append(
                Problem("dangling_reference", f"e{e.uid}", f"output node n{e.output} not declared")
            )
        for pos, node in enumerate(e.inputs):
            if not ref_ok(node):
                problems.append(
                    Problem(
                        "dangling_reference",
                        f"e{e.uid}",
                        f"input {pos} refers to missing node {format_node(node)}",
                    )
                )

    if len(outs) != n_outputs:
        problems.append(
            Problem("dangling_reference", "outputs", f"expected {n_outputs} outputs, got {len(outs)}")
        )
    for q, node in enumerate(outs):
        if not ref_ok(node):
            problems.append(
                Problem("dangling_reference", f"out{q}", f"refers to missing node {format_node(node)}")
            )

    if problems:
        raise InvalidGraphError(problems)
    return make_dhg(n_inputs, n_outputs, inner_list, edge_list, outs)


def structural_problems(g: Dhg) -> list[Problem]:
    """Reference checks for an already-built graph, ignoring the signature."""
    problems: list[Problem] = []

    def ref_ok(node: NodeId) -> bool:
        if isinstance(node, Input):
            return 0 <= node.index < g.n_inputs
        return node.uid in g.inner

    for e in g.edges:
        if e.output not in g.inner:
            problems.append(
                Problem("dangling_reference", f"e{e.uid}", f"output node n{e.output} not declared")
            )
        for pos, node in enumerate(e.inputs):
            if not ref_ok(node):
                problems.append(
                    Problem(
                        "dangling_reference",
                        f"e{e.uid}",
                        f"input {pos} refers to missing node {format_node(node)}",
                    )
                )
    if len(g.g_out) != g.n_outputs:
        problems.append(
            Problem(
                "dangling_reference",
                "outputs",
                f"expected {g.n_outputs} outputs, got {len(g.g_out)}",
            )
        )
    for q, node in enumerate(g.g_out):
        if not ref_ok(node):
            problems.append(
                Problem("dangling_reference", f"out{q}", f"refers to missing node {format_node(node)}")
            )
    return problems


@dataclass(frozen=True)
class TermGraph:
    """A Dhg together with its validity witness (a topological edge order)."""

    dhg: Dhg
    schedule: tuple[int, ...]

    @property
    def n_inputs(self) -> int:
        return self.dhg.n_inputs

    @property
    def n_outputs(self) -> int:
        return self.dhg.n_outputs

    @property
    def inner(self) -> frozenset[int]:
        return self.dhg.inner

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.dhg.edges

    @property
    def g_out(self) -> tuple[NodeId, ...]:
        return self.dhg.g_out

    @property
    def node_count(self) -> int:
        return self.dhg.node_count

    def edge(self, uid: int) -> Edge:
        return self.dhg.edge(uid)

    def defining_edge(self, uid: int) -> Edge:
        """The unique edge producing inner node ``uid``."""
        return self.dhg.edge(self.dhg.producers[uid][0])

    def nodes(self) -> Iterator[NodeId]:
        return self.dhg.nodes()


def as_dhg(g: Dhg | TermGraph) -> Dhg:
    return g.dhg if isinstance(g, TermGraph) else g


def as_term_graph(g: Dhg | TermGraph) -> TermGraph:
    """Check that ``g`` is a term graph and return it with a topological schedule.

    Every inner node must be produced by exactly one edge and the
    edge-dependency relation must be acyclic.
    """
    if isinstance(g, TermGraph):
        return g
    producers = g.producers
    missing = sorted(u for u, es in producers.items() if len(es) == 0)
    if missing:
        raise NodeWithoutDefiningEdge(missing)
    multi = sorted(u for u, es in producers.items() if len(es) > 1)
    if multi:
        raise NodeWithMultipleDefiningEdges(multi)

    # Kahn's algorithm over edge dependencies, smallest ready uid first.
    deps: dict[int, set[int]] = {}
    consumers: dict[int, list[int]] = {e.uid: [] for e in g.edges}
    for e in g.edges:
        need = {producers[n.uid][0] for n in e.inputs if isinstance(n, Inner)}
        deps[e.uid] = need
        for d in need:
            consumers[d].append(e.uid)
    ready = [uid for uid, need in deps.items() if not need]
    heapq.heapify(ready)
    schedule: list[int] = []
    pending = {uid: len(need) for uid, need in deps.items()}
    while ready:
        uid = heapq.heappop(ready)
        schedule.append(uid)
        for c in consumers[uid]:
            pending[c] -= 1
            if pending[c] == 0:
                heapq.heappush(ready, c)
    if len(schedule) < len(g.edges):
        scheduled = set(schedule)
        start = next(e.uid for e in g.edges if e.uid not in scheduled)
        trail: list[int] = []
        seen: dict[int, int] = {}
        cur = start
        while cur not in seen:
            seen[cur] = len(trail)
            trail.append(cur)
            cur = next(d for d in sorted(deps[cur]) if d not in scheduled)
        cycle_edges = trail[seen[cur]:]
        raise CycleDetected([g.edge(uid).output for uid in cycle_edges])
    return TermGraph(g, tuple(schedule))


def output_closure(g: Dhg | TermGraph) -> tuple[set[NodeId], set[int]]:
    """Nodes and edges from which some graph output is reachable."""
    g = as_dhg(g)
    nodes: set[NodeId] = set()
    edges: set[int] = set()
    stack: list[NodeId] = list(g.g_out)
    while stack:
        node = stack.pop()
        if node in nodes:
            continue
        nodes.add(node)
        if isinstance(node, Inner):
            for uid in g.producers.get(node.uid, ()):
                if uid not in edges:
                    edges.add(uid)
                    stack.extend(g.edge(uid).inputs)
    return nodes, edges


def strip_garbage(t: TermGraph) -> TermGraph:
    """Drop inner nodes and edges from which no output is reachable.

    Input nodes always survive: the interface is part of the graph.
    """
    nodes, edges = output_closure(t)
    keep_inner = {n.uid for n in nodes if isinstance(n, Inner)}
    g = t.dhg
    stripped = make_dhg(
        g.n_inputs,
        g.n_outputs,
        keep_inner,
        (e for e in g.edges if e.uid in edges),
        g.g_out,
    )
    return as_term_graph(stripped)


def relabel(g: Dhg, node_ids: Mapping[int, int], edge_ids: Mapping[int, int]) -> Dhg:
    """Rename inner node and edge ids through the given bijections."""

    def tr(node: NodeId) -> NodeId:
        return Inner(node_ids[node.uid]) if isinstance(node, Inner) else node

    return make_dhg(
        g.n_inputs,
        g.n_outputs,
        (node_ids[u] for u in g.inner),
        (
            Edge(edge_ids[e.uid], e.label, node_ids[e.output], tuple(tr(x) for x in e.inputs))
            for e in g.edges
        ),
        (tr(x) for x in g.g_out),
    )


@dataclass(frozen=True)
class Iso:
    """Interface-respecting isomorphism witness between two graphs."""

    node_map: dict[NodeId, NodeId]
    edge_map: dict[int, int]

    def inverse(self) -> Iso:
        return Iso(
            {v: k for k, v in self.node_map.items()},
            {v: k for k, v in self.edge_map.items()},
        )

    def then(self, other: Iso) -> Iso:
        return Iso(
            {k: other.node_map[v] for k, v in self.node_map.items()},
            {k: other.edge_map[v] for k, v in self.edge_map.items()},
        )


def _iso_conditions_hold(g1: Dhg, g2: Dhg, nmap: Mapping[NodeId, NodeId], emap: Mapping[int, int]) -> bool:
    for p in range(g1.n_inputs):
        if nmap.get(Input(p)) != Input(p):
            return False
    if tuple(nmap[x] for x in g1.g_out) != g2.g_out:
        return False
    for e in g1.edges:
        f = g2.edge(emap[e.uid])
        if f.label != e.label:
            return False
        if nmap[e.output_node] != f.output_node:
            return False
        if tuple(nmap[x] for x in e.inputs) != f.inputs:
            return False
    return True


def iso(
    g1: Dhg | TermGraph,
    g2: Dhg | TermGraph,
    *,
    pinned_nodes: Mapping[NodeId, NodeId] | None = None,
    pinned_edges: Mapping[int, int] | None = None,
) -> Iso | None:
    """Search for an isomorphism from ``g1`` to ``g2``.

    An isomorphism is a pair of bijections (nodes, edges) that fixes input
    nodes pointwise, preserves labels, tentacles, produced nodes, and the
    output assignment.  ``pinned_nodes``/``pinned_edges`` force parts of the
    correspondence in advance.  Deterministic: the same inputs always yield
    the same witness.
    """
    g1, g2 = as_dhg(g1), as_dhg(g2)
    if (g1.n_inputs, g1.n_outputs) != (g2.n_inputs, g2.n_outputs):
        return None
    if len(g1.inner) != len(g2.inner) or len(g1.edges) != len(g2.edges):
        return None
    if g1.labels() != g2.labels():
        return None

    nmap: dict[NodeId, NodeId] = {}
    nrev: dict[NodeId, NodeId] = {}
    emap: dict[int, int] = {}
    erev: dict[int, int] = {}

    def bind_node(a: NodeId, b: NodeId, trail: list[NodeId]) -> bool:
        if isinstance(a, Input) != isinstance(b, Input):
            return False
        if isinstance(a, Input) and a != b:
            return False
        if a in nmap:
            return nmap[a] == b
        if b in nrev:
            return False
        nmap[a] = b
        nrev[b] = a
        trail.append(a)
        return True

    def bind_edge(e1: Edge, e2: Edge, trail: list[NodeId], etrail: list[int]) -> bool:
        if e1.label != e2.label or e1.uid in emap or e2.uid in erev:
            return False
        if not bind_node(e1.output_node, e2.output_node, trail):
            return False
        for a, b in zip(e1.inputs, e2.inputs):
            if not bind_node(a, b, trail):
                return False
        emap[e1.uid] = e2.uid
        erev[e2.uid] = e1.uid
        etrail.append(e1.uid)
        return True

    def undo(trail: list[NodeId], etrail: list[int]) -> None:
        for a in reversed(trail):
            nrev.pop(nmap.pop(a))
        for u in reversed(etrail):
            erev.pop(emap.pop(u))

    seed_trail: list[NodeId] = []
    seed_etrail: list[int] = []
    for p in range(g1.n_inputs):
        bind_node(Input(p), Input(p), seed_trail)
    for a, b in zip(g1.g_out, g2.g_out):
        if not bind_node(a, b, seed_trail):
            return None
    for a, b in (pinned_nodes or {}).items():
        if not bind_node(a, b, seed_trail):
            return None
    for u, v in (pinned_edges or {}).items():
        if u in emap:
            if emap[u] != v:
                return None
            continue
        if not bind_edge(g1.edge(u), g2.edge(v), seed_trail, seed_etrail):
            return None

    by_label: dict[str, list[Edge]] = {}
    for e in g2.edges:
        by_label.setdefault(e.label, []).append(e)

    def compatible(e1: Edge, e2: Edge) -> bool:
        if e2.uid in erev:
            return False
        pairs = [(e1.output_node, e2.output_node), *zip(e1.inputs, e2.inputs)]
        local: dict[NodeId, NodeId] = {}
        used: set[NodeId] = set()
        for a, b in pairs:
            if isinstance(a, Input) != isinstance(b, Input):
                return False
            if isinstance(a, Input):
                if a != b:
                    return False
                continue
            want = nmap.get(a, local.get(a))
            if want is not None:
                if want != b:
                    return False
                continue
            if b in nrev or b in used:
                return False
            local[a] = b
            used.add(b)
        return True

    def search() -> bool:
        remaining = [e for e in g1.edges if e.uid not in emap]
        if not remaining:
            return True
        best: tuple[int, Edge, list[Edge]] | None = None
        for e1 in remaining:
            cands = [e2 for e2 in by_label[e1.label] if compatible(e1, e2)]
            if best is None or len(cands) < best[0]:
                best = (len(cands), e1, cands)
            if best[0] == 0:
                return False
        _, e1, cands = best
        for e2 in cands:
            trail: list[NodeId] = []
            etrail: list[int] = []
            if bind_edge(e1, e2, trail, etrail) and search():
                return True
            undo(trail, etrail)
        return False

    if not search():
        return None

    left1 = [Inner(u) for u in sorted(g1.inner) if Inner(u) not in nmap]
    left2 = [Inner(u) for u in sorted(g2.inner) if Inner(u) not in nrev]
    if len(left1) != len(left2):
        return None
    for a, b in zip(left1, left2):
        nmap[a] = b
        nrev[b] = a

    if not _iso_conditions_hold(g1, g2, nmap, emap):
        return None
    return Iso(dict(nmap), dict(emap))
