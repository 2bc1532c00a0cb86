"""Text format for signatures, graphs, rules, and matches, plus DOT export.

A document lists one signature followed by named blocks::

    sig { add/2; sub/2; }

    graph A(2 -> 1) {
      p = add(in0, in1);
      out0 = p;
    }

    rule dedup(2 -> 1) {
      lhs { a = add(in0, in1); out0 = a; }
      rhs { b = add(in1, in0); out0 = b; }
    }

    match m0(dedup -> A) {
      in0 -> in0;
      in1 -> in1;
      a -> p;
    }

Inputs are written ``in<idx>``; every other name on the left of ``=``
defines an inner node (exactly once), and every output ``out<idx>`` is
assigned exactly once.  Definitions may appear in any order; the parser
stores them topologically sorted, so serialising a parsed document yields
a canonical form.  ``//`` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    Dhg,
    Edge,
    Inner,
    Input,
    JungleError,
    NodeId,
    Signature,
    TermGraph,
    as_dhg,
    as_term_graph,
    node_key,
    validate_dhg,
)
from .dpo import Rule, make_rule
from .matching import Matching, MatchingError, check_matching


class ParseError(JungleError):
    def __init__(self, line: int, col: int, message: str):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


@dataclass(frozen=True)
class GraphDef:
    """A parsed graph block: the term graph plus its source-level node names."""

    name: str
    graph: TermGraph
    node_names: tuple[str, ...]  # indexed by inner node uid

    def node_name(self, node: NodeId) -> str:
        if isinstance(node, Input):
            return f"in{node.index}"
        return self.node_names[node.uid]


@dataclass(frozen=True)
class RuleDef:
    name: str
    lhs: GraphDef
    rhs: GraphDef


@dataclass(frozen=True)
class MatchDef:
    name: str
    rule: str
    graph: str
    pairs: tuple[tuple[str, str], ...]
    matching: Matching


@dataclass
class Document:
    signature: Signature
    graphs: dict[str, GraphDef] = field(default_factory=dict)
    rules: dict[str, RuleDef] = field(default_factory=dict)
    matches: dict[str, MatchDef] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Document):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.graphs == other.graphs
            and self.rules == other.rules
            and self.matches == other.matches
        )

    def rule(self, name: str, *, allow_unsolid: bool = False) -> Rule:
        rd = self.rules[name]
        return make_rule(self.signature, rd.lhs.graph, rd.rhs.graph, allow_unsolid=allow_unsolid)


_IN = re.compile(r"^in(\d+)$")
_OUT = re.compile(r"^out(\d+)$")
_LEX = re.compile(r"->|[A-Za-z_][A-Za-z0-9_]*|\d+|[{}();,=/]")


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    lineno = 1
    for lineno, raw in enumerate(text.split("\n"), start=1):
        pos = 0
        while pos < len(raw):
            if raw[pos] in " \t\r":
                pos += 1
                continue
            if raw.startswith("//", pos):
                break
            m = _LEX.match(raw, pos)
            if m is None:
                raise ParseError(lineno, pos + 1, f"unexpected character {raw[pos]!r}")
            tokens.append(_Token(m.group(0), lineno, pos + 1))
            pos = m.end()
    tokens.append(_Token("", lineno, 1))  # end marker
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.text:
            self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.take()
        if tok.text != text:
            got = repr(tok.text) if tok.text else "end of input"
            raise ParseError(tok.line, tok.col, f"expected {text!r}, found {got}")
        return tok

    def expect_name(self) -> _Token:
        tok = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok.text):
            got = repr(tok.text) if tok.text else "end of input"
            raise ParseError(tok.line, tok.col, f"expected a name, found {got}")
        return tok

    def expect_number(self) -> int:
        tok = self.take()
        if not tok.text.isdigit():
            got = repr(tok.text) if tok.text else "end of input"
            raise ParseError(tok.line, tok.col, f"expected a number, found {got}")
        return int(tok.text)


def parse(text: str) -> Document:
    """Parse a document; name resolution errors carry line and column."""
    p = _Parser(text)
    first = p.peek()
    if first.text != "sig":
        raise ParseError(first.line, first.col, "document must start with a sig block")
    p.take()
    p.expect("{")
    arities: dict[str, int] = {}
    while p.peek().text != "}":
        label = p.expect_name()
        p.expect("/")
        arity = p.expect_number()
        p.expect(";")
        if label.text in arities:
            raise ParseError(label.line, label.col, f"label {label.text!r} declared twice")
        arities[label.text] = arity
    p.expect("}")
    sig = Signature(arities)
    doc = Document(sig)
    taken_names: set[str] = set()

    while p.peek().text:
        tok = p.take()
        if tok.text == "graph":
            gd = _parse_graph_block(p, sig)
            _claim(taken_names, gd.name, tok)
            doc.graphs[gd.name] = gd
        elif tok.text == "rule":
            rd = _parse_rule_block(p, sig)
            _claim(taken_names, rd.name, tok)
            doc.rules[rd.name] = rd
        elif tok.text == "match":
            md = _parse_match_block(p, doc)
            _claim(taken_names, md.name, tok)
            doc.matches[md.name] = md
        else:
            raise ParseError(tok.line, tok.col, f"expected graph, rule, or match, found {tok.text!r}")
    return doc


def _claim(taken: set[str], name: str, tok: _Token) -> None:
    if name in taken:
        raise ParseError(tok.line, tok.col, f"name {name!r} is already in use")
    taken.add(name)


def _parse_interface(p: _Parser) -> tuple[int, int]:
    p.expect("(")
    m = p.expect_number()
    p.expect("->")
    n = p.expect_number()
    p.expect(")")
    return m, n


@dataclass
class _BodyDef:
    name: _Token
    label: _Token
    args: list[_Token]


def _parse_body(p: _Parser, sig: Signature, n_inputs: int, n_outputs: int, where: str) -> GraphDef:
    p.expect("{")
    defs: list[_BodyDef] = []
    outs: dict[int, tuple[_Token, _Token]] = {}
    names_seen: dict[str, _Token] = {}
    while p.peek().text != "}":
        lhs = p.expect_name()
        p.expect("=")
        out_m = _OUT.match(lhs.text)
        if out_m:
            ref = p.expect_name()
            p.expect(";")
            q = int(out_m.group(1))
            if q >= n_outputs:
                raise ParseError(lhs.line, lhs.col, f"output index {q} out of range (outputs: {n_outputs})")
            if q in outs:
                raise ParseError(lhs.line, lhs.col, f"output out{q} assigned twice")
            outs[q] = (lhs, ref)
            continue
        if _IN.match(lhs.text):
            raise ParseError(lhs.line, lhs.col, f"{lhs.text!r} names an input and cannot be defined")
        if lhs.text in names_seen:
            raise ParseError(lhs.line, lhs.col, f"node {lhs.text!r} defined twice")
        label = p.expect_name()
        p.expect("(")
        args: list[_Token] = []
        if p.peek().text != ")":
            args.append(p.expect_name())
            while p.peek().text == ",":
                p.take()
                args.append(p.expect_name())
        p.expect(")")
        p.expect(";")
        names_seen[lhs.text] = lhs
        defs.append(_BodyDef(lhs, label, args))
    p.expect("}")

    for q in range(n_outputs):
        if q not in outs:
            tok = p.tokens[p.pos - 1]
            raise ParseError(tok.line, tok.col, f"output out{q} is never assigned in {where}")

    def_names = {d.name.text for d in defs}
    for d in defs:
        for arg in d.args:
            if not _IN.match(arg.text) and arg.text not in def_names:
                raise ParseError(arg.line, arg.col, f"unknown node {arg.text!r}")
    for q, (_, ref) in outs.items():
        if not _IN.match(ref.text) and ref.text not in def_names:
            raise ParseError(ref.line, ref.col, f"unknown node {ref.text!r}")

    # stable topological order: keep source order wherever dependencies allow
    placed: dict[str, int] = {}
    ordered: list[_BodyDef] = []
    remaining = list(defs)
    while remaining:
        progress = [
            d
            for d in remaining
            if all(_IN.match(a.text) or a.text in placed for a in d.args)
        ]
        if not progress:
            break  # dependency cycle: keep source order, term graph check reports it
        for d in progress:
            placed[d.name.text] = len(ordered)
            ordered.append(d)
        remaining = [d for d in remaining if d.name.text not in placed]
    for d in remaining:
        placed[d.name.text] = len(ordered)
        ordered.append(d)

    def resolve(tok: _Token) -> NodeId:
        m = _IN.match(tok.text)
        if m:
            return Input(int(m.group(1)))
        return Inner(placed[tok.text])

    edges = [
        Edge(uid, d.label.text, uid, tuple(resolve(a) for a in d.args))
        for uid, d in enumerate(ordered)
    ]
    g_out = [resolve(outs[q][1]) for q in range(n_outputs)]
    graph = as_term_graph(
        validate_dhg(sig, n_inputs, n_outputs, range(len(ordered)), edges, g_out)
    )
    return GraphDef(where, graph, tuple(d.name.text for d in ordered))


def _parse_graph_block(p: _Parser, sig: Signature) -> GraphDef:
    name = p.expect_name()
    m, n = _parse_interface(p)
    body = _parse_body(p, sig, m, n, name.text)
    return GraphDef(name.text, body.graph, body.node_names)


def _parse_rule_block(p: _Parser, sig: Signature) -> RuleDef:
    name = p.expect_name()
    m, n = _parse_interface(p)
    p.expect("{")
    p.expect("lhs")
    lhs = _parse_body(p, sig, m, n, f"{name.text}.lhs")
    p.expect("rhs")
    rhs = _parse_body(p, sig, m, n, f"{name.text}.rhs")
    p.expect("}")
    return RuleDef(
        name.text,
        GraphDef("lhs", lhs.graph, lhs.node_names),
        GraphDef("rhs", rhs.graph, rhs.node_names),
    )


def _parse_match_block(p: _Parser, doc: Document) -> MatchDef:
    name = p.expect_name()
    p.expect("(")
    rule_tok = p.expect_name()
    p.expect("->")
    graph_tok = p.expect_name()
    p.expect(")")
    if rule_tok.text not in doc.rules:
        raise ParseError(rule_tok.line, rule_tok.col, f"unknown rule {rule_tok.text!r}")
    if graph_tok.text not in doc.graphs:
        raise ParseError(graph_tok.line, graph_tok.col, f"unknown graph {graph_tok.text!r}")
    lhs = doc.rules[rule_tok.text].lhs
    target = doc.graphs[graph_tok.text]

    p.expect("{")
    raw_pairs: list[tuple[_Token, _Token]] = []
    while p.peek().text != "}":
        src = p.expect_name()
        p.expect("->")
        trg = p.expect_name()
        p.expect(";")
        raw_pairs.append((src, trg))
    close = p.expect("}")

    def resolve(tok: _Token, gd: GraphDef) -> NodeId:
        m = _IN.match(tok.text)
        if m:
            idx = int(m.group(1))
            if idx >= gd.graph.n_inputs:
                raise ParseError(tok.line, tok.col, f"input index {idx} out of range")
            return Input(idx)
        try:
            return Inner(gd.node_names.index(tok.text))
        except ValueError:
            raise ParseError(tok.line, tok.col, f"unknown node {tok.text!r}") from None

    node_map: dict[NodeId, NodeId] = {}
    for src, trg in raw_pairs:
        s = resolve(src, lhs)
        if s in node_map:
            raise ParseError(src.line, src.col, f"node {src.text!r} mapped twice")
        node_map[s] = resolve(trg, target)

    edge_map: dict[int, int] = {}
    for u in sorted(lhs.graph.inner):
        image = node_map.get(Inner(u))
        if isinstance(image, Inner):
            edge_map[lhs.graph.defining_edge(u).uid] = target.graph.defining_edge(image.uid).uid
    try:
        matching = check_matching(lhs.graph, target.graph, node_map, edge_map)
    except MatchingError as exc:
        raise ParseError(close.line, close.col, f"invalid match {name.text!r}: {exc}") from None

    pairs = tuple(
        sorted(
            ((lhs.node_name(s), target.node_name(t)) for s, t in node_map.items()),
            key=lambda st: node_key(_name_node(st[0], lhs)),
        )
    )
    return MatchDef(name.text, rule_tok.text, graph_tok.text, pairs, matching)


def _name_node(name: str, gd: GraphDef) -> NodeId:
    m = _IN.match(name)
    if m:
        return Input(int(m.group(1)))
    return Inner(gd.node_names.index(name))


# --- serialisation ------------------------------------------------------------


def _body_lines(gd: GraphDef, indent: str) -> list[str]:
    g = gd.graph
    lines = []
    for uid in g.schedule:
        e = g.edge(uid)
        args = ", ".join(gd.node_name(x) for x in e.inputs)
        lines.append(f"{indent}{gd.node_names[e.output]} = {e.label}({args});")
    for q, node in enumerate(g.g_out):
        lines.append(f"{indent}out{q} = {gd.node_name(node)};")
    return lines


def serialize_graph(graph: TermGraph | Dhg, name: str, node_names: dict[int, str] | None = None) -> str:
    """Render one graph block; inner nodes without names are called n<uid>."""
    t = as_term_graph(as_dhg(graph))
    if node_names is None:
        node_names = {}
    max_uid = max(t.inner, default=-1)
    names = [node_names.get(u, f"n{u}") for u in range(max_uid + 1)]
    gd = GraphDef(name, t, tuple(names))
    body = "\n".join(_body_lines(gd, "  "))
    inner = f"\n{body}\n" if body else "\n"
    return f"graph {name}({t.n_inputs} -> {t.n_outputs}) {{{inner}}}\n"


def serialize(doc: Document) -> str:
    """Canonical text for a document; parse(serialize(doc)) == doc."""
    parts: list[str] = []
    sig_items = "".join(f" {label}/{arity};" for label, arity in doc.signature.arities.items())
    parts.append(f"sig {{{sig_items} }}\n")
    for gd in doc.graphs.values():
        body = "\n".join(_body_lines(gd, "  "))
        inner = f"\n{body}\n" if body else "\n"
        parts.append(f"graph {gd.name}({gd.graph.n_inputs} -> {gd.graph.n_outputs}) {{{inner}}}\n")
    for rd in doc.rules.values():
        lhs_body = "\n".join(_body_lines(rd.lhs, "    "))
        rhs_body = "\n".join(_body_lines(rd.rhs, "    "))
        lhs_inner = f"\n{lhs_body}\n  " if lhs_body else "\n  "
        rhs_inner = f"\n{rhs_body}\n  " if rhs_body else "\n  "
        parts.append(
            f"rule {rd.name}({rd.lhs.graph.n_inputs} -> {rd.lhs.graph.n_outputs}) {{\n"
            f"  lhs {{{lhs_inner}}}\n"
            f"  rhs {{{rhs_inner}}}\n"
            f"}}\n"
        )
    for md in doc.matches.values():
        lines = "".join(f"  {s} -> {t};\n" for s, t in md.pairs)
        parts.append(f"match {md.name}({md.rule} -> {md.graph}) {{\n{lines}}}\n")
    return "\n".join(parts)


# --- DOT export ---------------------------------------------------------------


def to_dot(graph: TermGraph | Dhg, name: str = "G") -> str:
    """Deterministic DOT rendering.

    Nodes are points, edges are labelled boxes, interface attachment points
    are triangles (inputs pinned to the top rank, outputs to the bottom).
    Tentacle order is written on the arrows as port numbers.
    """
    g = as_dhg(graph)

    def nid(node: NodeId) -> str:
        return f"i{node.index}" if isinstance(node, Input) else f"n{node.uid}"

    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    if g.n_inputs:
        tris = " ".join(f'ti{p} [shape=triangle, label="in{p}"];' for p in range(g.n_inputs))
        lines.append(f"  {{ rank=min; {tris} }}")
    if g.n_outputs:
        tris = " ".join(f'to{q} [shape=invtriangle, label="out{q}"];' for q in range(g.n_outputs))
        lines.append(f"  {{ rank=max; {tris} }}")
    for p in range(g.n_inputs):
        lines.append(f"  i{p} [shape=point];")
    for u in sorted(g.inner):
        lines.append(f"  n{u} [shape=point];")
    for e in g.edges:
        lines.append(f'  e{e.uid} [shape=box, label="{e.label}"];')
    for p in range(g.n_inputs):
        lines.append(f"  ti{p} -> i{p};")
    for e in g.edges:
        for port, node in enumerate(e.inputs):
            lines.append(f'  {nid(node)} -> e{e.uid} [label="{port}"];')
        lines.append(f"  e{e.uid} -> n{e.output};")
    for q, node in enumerate(g.g_out):
        lines.append(f"  {nid(node)} -> to{q};")
    lines.append("}")
    return "\n".join(lines) + "\n"
