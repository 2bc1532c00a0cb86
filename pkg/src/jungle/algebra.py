"""Composition algebra for interfaced graphs.

Graphs with interfaces compose sequentially (outputs glued to inputs) and
in parallel (side by side).  Together with the wiring constants (identity,
wire exchange, duplication, discarding) and one-edge primitive graphs this
gives every term graph an expression form, and expressions evaluate back
to graphs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .core import (
    Dhg,
    Edge,
    Inner,
    Input,
    InterfaceMismatchError,
    JungleError,
    NodeId,
    Signature,
    TermGraph,
    as_dhg,
    as_term_graph,
    make_dhg,
    output_closure,
)


class IllTypedError(JungleError):
    """An expression composes parts whose interfaces do not line up."""


def identity(k: int) -> TermGraph:
    """Wiring that passes k inputs straight through."""
    return as_term_graph(make_dhg(k, k, (), (), (Input(p) for p in range(k))))


def exchange(m: int, n: int) -> TermGraph:
    """Wiring that swaps a block of m wires past a block of n wires."""
    outs = [Input(m + q) for q in range(n)] + [Input(p) for p in range(m)]
    return as_term_graph(make_dhg(m + n, m + n, (), (), outs))


def dup(k: int) -> TermGraph:
    """Wiring that duplicates k wires: outputs are the inputs twice over."""
    outs = [Input(p) for p in range(k)] * 2
    return as_term_graph(make_dhg(k, 2 * k, (), (), outs))


def bang(k: int) -> TermGraph:
    """Wiring that discards k wires."""
    return as_term_graph(make_dhg(k, 0, (), (), ()))


def bottom(i: int, j: int) -> Dhg:
    """Edge-free graph with i inputs and j isolated inner nodes as outputs.

    For j > 0 this is not a term graph: the output nodes have no producing
    edge.  It is the gluing interface used by rewrite rules.
    """
    return make_dhg(i, j, range(j), (), (Inner(q) for q in range(j)))


def prim(sig: Signature, label: str) -> TermGraph:
    """One-edge graph: the edge consumes the graph inputs and feeds the output."""
    a = sig.arity(label)
    edge = Edge(0, label, 0, tuple(Input(p) for p in range(a)))
    return as_term_graph(make_dhg(a, 1, (0,), (edge,), (Inner(0),)))


@dataclass(frozen=True)
class Composed:
    """Result of a composition along with where each operand landed."""

    graph: Dhg
    left_nodes: dict[NodeId, NodeId]
    left_edges: dict[int, int]
    right_nodes: dict[NodeId, NodeId]
    right_edges: dict[int, int]


def _seq_tracked(f: Dhg, g: Dhg) -> Composed:
    if f.n_outputs != g.n_inputs:
        raise InterfaceMismatchError(
            f"cannot compose: left graph has {f.n_outputs} outputs, right graph takes {g.n_inputs} inputs"
        )
    fnode: dict[int, int] = {}
    inner: list[int] = []
    for u in sorted(f.inner):
        fnode[u] = len(inner)
        inner.append(len(inner))
    gnode: dict[int, int] = {}
    for u in sorted(g.inner):
        gnode[u] = len(inner)
        inner.append(len(inner))

    def left(node: NodeId) -> NodeId:
        return Inner(fnode[node.uid]) if isinstance(node, Inner) else node

    def right(node: NodeId) -> NodeId:
        if isinstance(node, Inner):
            return Inner(gnode[node.uid])
        return left(f.g_out[node.index])

    fedge: dict[int, int] = {}
    gedge: dict[int, int] = {}
    edges: list[Edge] = []
    for e in f.edges:
        fedge[e.uid] = len(edges)
        edges.append(Edge(len(edges), e.label, fnode[e.output], tuple(left(x) for x in e.inputs)))
    for e in g.edges:
        gedge[e.uid] = len(edges)
        edges.append(Edge(len(edges), e.label, gnode[e.output], tuple(right(x) for x in e.inputs)))

    graph = make_dhg(f.n_inputs, g.n_outputs, inner, edges, (right(x) for x in g.g_out))
    left_nodes = {n: left(n) for n in f.nodes()}
    right_nodes = {n: right(n) for n in g.nodes()}
    return Composed(graph, left_nodes, fedge, right_nodes, gedge)


def _ten_tracked(f: Dhg, g: Dhg) -> Composed:
    fnode: dict[int, int] = {}
    inner: list[int] = []
    for u in sorted(f.inner):
        fnode[u] = len(inner)
        inner.append(len(inner))
    gnode: dict[int, int] = {}
    for u in sorted(g.inner):
        gnode[u] = len(inner)
        inner.append(len(inner))

    def left(node: NodeId) -> NodeId:
        return Inner(fnode[node.uid]) if isinstance(node, Inner) else node

    def right(node: NodeId) -> NodeId:
        if isinstance(node, Inner):
            return Inner(gnode[node.uid])
        return Input(f.n_inputs + node.index)

    fedge: dict[int, int] = {}
    gedge: dict[int, int] = {}
    edges: list[Edge] = []
    for e in f.edges:
        fedge[e.uid] = len(edges)
        edges.append(Edge(len(edges), e.label, fnode[e.output], tuple(left(x) for x in e.inputs)))
    for e in g.edges:
        gedge[e.uid] = len(edges)
        edges.append(Edge(len(edges), e.label, gnode[e.output], tuple(right(x) for x in e.inputs)))

    outs = [left(x) for x in f.g_out] + [right(x) for x in g.g_out]
    graph = make_dhg(f.n_inputs + g.n_inputs, f.n_outputs + g.n_outputs, inner, edges, outs)
    left_nodes = {n: left(n) for n in f.nodes()}
    right_nodes = {n: right(n) for n in g.nodes()}
    return Composed(graph, left_nodes, fedge, right_nodes, gedge)


def seq(f: Dhg | TermGraph, g: Dhg | TermGraph) -> Dhg:
    """Sequential composition: output p of ``f`` is glued to input p of ``g``."""
    return _seq_tracked(as_dhg(f), as_dhg(g)).graph


def ten(f: Dhg | TermGraph, g: Dhg | TermGraph) -> Dhg:
    """Parallel composition: disjoint union with ``g``'s interface shifted after ``f``'s."""
    return _ten_tracked(as_dhg(f), as_dhg(g)).graph


# --- expressions ------------------------------------------------------------


class GsExpr:
    """Expression over the composition algebra; see the concrete node types."""

    __slots__ = ()


@dataclass(frozen=True)
class Prim(GsExpr):
    label: str


@dataclass(frozen=True)
class Id(GsExpr):
    size: int


@dataclass(frozen=True)
class Exch(GsExpr):
    left: int
    right: int


@dataclass(frozen=True)
class Dup(GsExpr):
    size: int


@dataclass(frozen=True)
class Bang(GsExpr):
    size: int


@dataclass(frozen=True)
class Seq(GsExpr):
    first: GsExpr
    second: GsExpr


@dataclass(frozen=True)
class Ten(GsExpr):
    left: GsExpr
    right: GsExpr


def expr_interface(sig: Signature, e: GsExpr) -> tuple[int, int]:
    """Interface (inputs, outputs) an expression denotes; raises if ill-typed."""
    match e:
        case Prim(label):
            return sig.arity(label), 1
        case Id(k):
            _nonneg(k)
            return k, k
        case Exch(m, n):
            _nonneg(m)
            _nonneg(n)
            return m + n, m + n
        case Dup(k):
            _nonneg(k)
            return k, 2 * k
        case Bang(k):
            _nonneg(k)
            return k, 0
        case Seq(a, b):
            ma, na = expr_interface(sig, a)
            mb, nb = expr_interface(sig, b)
            if na != mb:
                raise IllTypedError(
                    f"sequential composition mismatch: {format_expr(a)} yields {na} wires, "
                    f"{format_expr(b)} takes {mb}"
                )
            return ma, nb
        case Ten(a, b):
            ma, na = expr_interface(sig, a)
            mb, nb = expr_interface(sig, b)
            return ma + mb, na + nb
    raise TypeError(f"not an expression: {e!r}")


def _nonneg(k: int) -> None:
    if k < 0:
        raise IllTypedError(f"negative wire count {k}")


def build(sig: Signature, e: GsExpr) -> Dhg:
    """Evaluate an expression to the graph it denotes."""
    expr_interface(sig, e)  # reject ill-typed expressions up front
    return _build(sig, e)


def _build(sig: Signature, e: GsExpr) -> Dhg:
    match e:
        case Prim(label):
            return prim(sig, label).dhg
        case Id(k):
            return identity(k).dhg
        case Exch(m, n):
            return exchange(m, n).dhg
        case Dup(k):
            return dup(k).dhg
        case Bang(k):
            return bang(k).dhg
        case Seq(a, b):
            return seq(_build(sig, a), _build(sig, b))
        case Ten(a, b):
            return ten(_build(sig, a), _build(sig, b))
    raise TypeError(f"not an expression: {e!r}")


def _seq_e(a: GsExpr | None, b: GsExpr) -> GsExpr:
    # keeps chains left-nested, the shape the text parser produces
    if a is None or isinstance(a, Id):
        return b
    if isinstance(b, Id):
        return a
    if isinstance(b, Seq):
        return Seq(_seq_e(a, b.first), b.second)
    return Seq(a, b)


def _ten_parts(e: GsExpr) -> Iterator[GsExpr]:
    if isinstance(e, Ten):
        yield from _ten_parts(e.left)
        yield from _ten_parts(e.right)
    else:
        yield e


def _ten_all(parts: Iterable[GsExpr]) -> GsExpr:
    acc: GsExpr | None = None
    for top in parts:
        for part in _ten_parts(top):
            if isinstance(part, Id) and part.size == 0:
                continue
            if acc is None:
                acc = part
            elif isinstance(acc, Id) and isinstance(part, Id):
                acc = Id(acc.size + part.size)
            else:
                acc = Ten(acc, part)
    return acc if acc is not None else Id(0)


def _copy_chain(count: int) -> GsExpr:
    # count copies of a single wire, as a right-nested chain of one-wire splits
    if count == 0:
        return Bang(1)
    if count == 1:
        return Id(1)
    rest = _copy_chain(count - 1)
    if isinstance(rest, Id):
        return Dup(1)
    return Seq(Dup(1), _ten_all([Id(1), rest]))


def _wiring_expr(src: Sequence[NodeId], dst: Sequence[NodeId]) -> GsExpr:
    """Expression turning the wire list ``src`` into ``dst``.

    ``src`` holds distinct nodes; ``dst`` may repeat or drop them.  Built as
    per-wire copy chains followed by adjacent transpositions.
    """
    if list(src) == list(dst):
        return Id(len(src))
    counts = {s: 0 for s in src}
    for d in dst:
        counts[d] += 1
    stage = _ten_all(_copy_chain(counts[s]) for s in src)

    expanded: list[NodeId] = [s for s in src for _ in range(counts[s])]
    queues: dict[NodeId, list[int]] = {}
    for pos, node in enumerate(expanded):
        queues.setdefault(node, []).append(pos)
    target_of = [0] * len(expanded)
    for goal, node in enumerate(dst):
        target_of[queues[node].pop(0)] = goal

    order = list(target_of)
    expr: GsExpr = stage
    changed = True
    while changed:
        changed = False
        for i in range(len(order) - 1):
            if order[i] > order[i + 1]:
                order[i], order[i + 1] = order[i + 1], order[i]
                layer = _ten_all([Id(i), Exch(1, 1), Id(len(order) - i - 2)])
                expr = _seq_e(expr, layer)
                changed = True
    return expr


def to_expression(t: TermGraph) -> GsExpr:
    """Decompose a term graph into wiring and primitive layers.

    The result rebuilds the graph up to isomorphism: build(to_expression(t))
    is isomorphic to t.  Edges are scheduled greedily in dependency order,
    garbage edges last; dropped wires end in a discard.
    """
    g = t.dhg
    _, productive = output_closure(t)
    frontier: list[NodeId] = [Input(p) for p in range(g.n_inputs)]
    remaining = set(e.uid for e in g.edges)
    expr: GsExpr | None = None

    def ready(uids: Iterable[int]) -> list[int]:
        out = []
        for uid in sorted(uids):
            e = g.edge(uid)
            if all(not isinstance(x, Inner) or x.uid not in undefined for x in e.inputs):
                out.append(uid)
        return out

    undefined = set(g.inner)
    while remaining:
        layer = ready(uid for uid in remaining if uid in productive)
        if not layer:
            layer = ready(uid for uid in remaining if uid not in productive)
        assert layer, "term graph schedule stuck"
        remaining.difference_update(layer)
        for uid in layer:
            undefined.discard(g.edge(uid).output)
        later_needs: set[NodeId] = set(g.g_out)
        for uid in remaining:
            later_needs.update(g.edge(uid).inputs)
        passthrough = [x for x in frontier if x in later_needs]
        target = [x for uid in layer for x in g.edge(uid).inputs] + passthrough
        wiring = _wiring_expr(frontier, target)
        prims = _ten_all([Prim(g.edge(uid).label) for uid in layer] + [Id(len(passthrough))])
        expr = _seq_e(_seq_e(expr, wiring), prims)
        frontier = [g.edge(uid).output_node for uid in layer] + passthrough

    expr = _seq_e(expr, _wiring_expr(frontier, list(g.g_out)))
    return expr if expr is not None else Id(g.n_inputs)


# --- textual expression form -------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<prim>prim:[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<exch>exch:\d+,\d+)"
    r"|(?P<id>id:\d+)"
    r"|(?P<dup>dup:\d+)"
    r"|(?P<bang>bang:\d+)"
    r"|(?P<op>[;*()]))"
)


def format_expr(e: GsExpr) -> str:
    """Render an expression; ``;`` binds looser than ``*``."""
    match e:
        case Prim(label):
            return f"prim:{label}"
        case Id(k):
            return f"id:{k}"
        case Exch(m, n):
            return f"exch:{m},{n}"
        case Dup(k):
            return f"dup:{k}"
        case Bang(k):
            return f"bang:{k}"
        case Seq(a, b):
            return f"{format_expr(a)} ; {format_expr(b)}"
        case Ten(a, b):
            return f"{_fmt_factor(a)} * {_fmt_factor(b)}"
    raise TypeError(f"not an expression: {e!r}")


def _fmt_factor(e: GsExpr) -> str:
    text = format_expr(e)
    return f"({text})" if isinstance(e, Seq) else text


class ExprSyntaxError(JungleError):
    pass


def parse_expr(text: str) -> GsExpr:
    """Parse the textual expression form produced by :func:`format_expr`."""
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ExprSyntaxError(f"bad expression syntax at offset {pos}: {text[pos:pos + 12]!r}")
            break
        tokens.append(m.group(m.lastgroup))
        pos = m.end()
    tokens.reverse()  # pop() from the end

    def peek() -> str | None:
        return tokens[-1] if tokens else None

    def parse_seq() -> GsExpr:
        e = parse_ten()
        while peek() == ";":
            tokens.pop()
            e = Seq(e, parse_ten())
        return e

    def parse_ten() -> GsExpr:
        e = parse_atom()
        while peek() == "*":
            tokens.pop()
            e = Ten(e, parse_atom())
        return e

    def parse_atom() -> GsExpr:
        tok = peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of expression")
        tokens.pop()
        if tok == "(":
            e = parse_seq()
            if peek() != ")":
                raise ExprSyntaxError("missing closing parenthesis")
            tokens.pop()
            return e
        if tok.startswith("prim:"):
            return Prim(tok[5:])
        if tok.startswith("id:"):
            return Id(int(tok[3:]))
        if tok.startswith("dup:"):
            return Dup(int(tok[4:]))
        if tok.startswith("bang:"):
            return Bang(int(tok[5:]))
        if tok.startswith("exch:"):
            a, b = tok[5:].split(",")
            return Exch(int(a), int(b))
        raise ExprSyntaxError(f"unexpected token {tok!r}")

    e = parse_seq()
    if tokens:
        raise ExprSyntaxError(f"trailing tokens: {tokens[-1]!r}")
    return e
