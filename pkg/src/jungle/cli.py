"""Command line interface.

Exit codes: 0 on success, 1 when a violation or counterexample is found
(including files that fail to parse or validate), 2 for usage errors such
as unknown names or malformed options.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import NoReturn

import click

from .algebra import format_expr, to_expression
from .context import image_context
from .core import Dhg, JungleError, format_node, node_key
from .dpo import ResultNotTermGraphError, rewrite
from .frontend import Document, parse, serialize_graph, to_dot
from .matching import Matching, dangling_ok, find_matchings
from .semantics import (
    CostedInterpretation,
    Exhaustive,
    MissingOpError,
    Sampled,
    Verdict,
    builtin_interpretation,
    rule_preserves,
    step_preserves,
)


def _violation(message: str) -> NoReturn:
    click.echo(message, err=True)
    sys.exit(1)


def _load(path: str) -> Document:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.UsageError(f"cannot read {path}: {exc}")
    try:
        return parse(text)
    except JungleError as exc:
        _violation(f"{path}: {exc}")


def _pick(table: dict, name: str, kind: str):
    if name not in table:
        known = ", ".join(sorted(table)) or "(none)"
        raise click.UsageError(f"unknown {kind} {name!r}; file defines: {known}")
    return table[name]


def _select_matches(
    doc: Document,
    rule_name: str,
    graph_name: str,
    lhs,
    target,
    selector: str | None,
    all_matches: bool,
    injective: bool = True,
) -> list[Matching]:
    if selector is not None and all_matches:
        raise click.UsageError("--match and --all are mutually exclusive")
    if selector is not None and selector in doc.matches:
        md = doc.matches[selector]
        if md.rule != rule_name or md.graph != graph_name:
            raise click.UsageError(
                f"match {selector!r} connects {md.rule} -> {md.graph}, "
                f"not {rule_name} -> {graph_name}"
            )
        return [md.matching]
    found = find_matchings(lhs, target, injective=injective)
    if not found:
        _violation(f"no matchings of {rule_name} in {graph_name}")
    if all_matches:
        return found
    idx = 0
    if selector is not None:
        try:
            idx = int(selector)
        except ValueError:
            raise click.UsageError(f"--match takes an index or a match block name, got {selector!r}")
    if not 0 <= idx < len(found):
        raise click.UsageError(f"match index {idx} out of range; {len(found)} matching(s) exist")
    return [found[idx]]


def _raw_dump(g: Dhg) -> str:
    lines = [f"raw graph ({g.n_inputs} -> {g.n_outputs})"]
    for e in g.edges:
        args = ", ".join(format_node(x) for x in e.inputs)
        lines.append(f"  e{e.uid}: n{e.output} = {e.label}({args})")
    for q, node in enumerate(g.g_out):
        lines.append(f"  out{q} = {format_node(node)}")
    return "\n".join(lines)


@click.group()
@click.version_option(package_name="jungle")
def main() -> None:
    """Term graph rewriting: validate, match, rewrite, decompose, verify."""


@main.command()
@click.argument("file")
def check(file: str) -> None:
    """Parse and validate FILE, including rule well-formedness."""
    doc = _load(file)
    problems = []
    for name in doc.rules:
        try:
            doc.rule(name)
        except JungleError as exc:
            problems.append(f"rule {name}: {exc}")
    if problems:
        for p in problems:
            click.echo(p, err=True)
        sys.exit(1)
    click.echo(
        f"ok: {len(doc.graphs)} graph(s), {len(doc.rules)} rule(s), {len(doc.matches)} match(es)"
    )


@main.command("match")
@click.argument("file")
@click.option("--rule", "-r", required=True, help="rule whose left side is the pattern")
@click.option("--graph", "-g", required=True, help="graph to search")
@click.option("--non-injective", is_flag=True, help="also list non-injective matchings")
def match_cmd(file: str, rule: str, graph: str, non_injective: bool) -> None:
    """List the matchings of a rule's left side in a graph."""
    doc = _load(file)
    rd = _pick(doc.rules, rule, "rule")
    gd = _pick(doc.graphs, graph, "graph")
    found = find_matchings(rd.lhs.graph, gd.graph, injective=not non_injective)
    click.echo(f"{len(found)} matching(s) of {rule} in {graph}")
    for i, m in enumerate(found):
        pairs = ", ".join(
            f"{rd.lhs.node_name(s)} -> {gd.node_name(t)}"
            for s, t in sorted(m.node_map.items(), key=lambda st: node_key(st[0]))
        )
        click.echo(f"  [{i}] {pairs}")


@main.command("rewrite")
@click.argument("file")
@click.option("--rule", "-r", required=True)
@click.option("--graph", "-g", required=True)
@click.option("--match", "-m", "selector", default=None, help="match index or match block name")
@click.option("--all", "all_matches", is_flag=True, help="apply at every matching")
@click.option(
    "--unsafe-bypass",
    is_flag=True,
    help="skip the solid/injective preconditions and report failures after the fact",
)
def rewrite_cmd(
    file: str, rule: str, graph: str, selector: str | None, all_matches: bool, unsafe_bypass: bool
) -> None:
    """Apply a rule at a matching and print the rewritten graph."""
    doc = _load(file)
    gd = _pick(doc.graphs, graph, "graph")
    _pick(doc.rules, rule, "rule")
    try:
        r = doc.rule(rule, allow_unsolid=unsafe_bypass)
    except JungleError as exc:
        _violation(f"rule {rule}: {exc}")
    selected = _select_matches(
        doc, rule, graph, r.lhs, gd.graph, selector, all_matches, injective=not unsafe_bypass
    )
    failures = 0
    for i, m in enumerate(selected):
        suffix = f"_rw{i}" if all_matches else "_rw"
        try:
            step = rewrite(r, gd.graph, m, unsafe_bypass=unsafe_bypass)
        except ResultNotTermGraphError as exc:
            click.echo(f"matching {i}: {exc}", err=True)
            if exc.graph is not None:
                click.echo(_raw_dump(exc.graph))
            failures += 1
            continue
        except JungleError as exc:
            click.echo(f"matching {i}: {exc}", err=True)
            failures += 1
            continue
        click.echo(serialize_graph(step.result, f"{graph}{suffix}"), nl=False)
    if failures:
        sys.exit(1)


@main.command()
@click.argument("file")
@click.option("--graph", "-g", required=True)
@click.option("--rules", "-r", "rule_names", required=True, help="comma separated, tried in order")
@click.option("--max-steps", default=100, show_default=True)
def normalize(file: str, graph: str, rule_names: str, max_steps: int) -> None:
    """Rewrite with the given rules until none applies (or the step limit)."""
    doc = _load(file)
    gd = _pick(doc.graphs, graph, "graph")
    rules = []
    for name in rule_names.split(","):
        name = name.strip()
        _pick(doc.rules, name, "rule")
        try:
            rules.append((name, doc.rule(name)))
        except JungleError as exc:
            _violation(f"rule {name}: {exc}")

    current = gd.graph
    for step_no in range(1, max_steps + 1):
        for name, r in rules:
            hit = next(
                (m for m in find_matchings(r.lhs, current) if dangling_ok(r.phi, m)), None
            )
            if hit is not None:
                current = rewrite(r, current, hit).result
                click.echo(f"step {step_no}: {name}")
                break
        else:
            click.echo(f"normal form after {step_no - 1} step(s)")
            break
    else:
        click.echo(f"stopped at the step limit ({max_steps})")
    click.echo(serialize_graph(current, f"{graph}_nf"), nl=False)


@main.command()
@click.argument("file")
@click.option("--rule", "-r", required=True)
@click.option("--graph", "-g", required=True)
@click.option("--match", "-m", "selector", default=None, help="match index or match block name")
@click.option("--maximal", is_flag=True, help="largest possible top layer instead of the smallest")
def decompose(file: str, rule: str, graph: str, selector: str | None, maximal: bool) -> None:
    """Split a graph into top / pattern / bottom layers around a matching."""
    doc = _load(file)
    gd = _pick(doc.graphs, graph, "graph")
    _pick(doc.rules, rule, "rule")
    try:
        r = doc.rule(rule)
    except JungleError as exc:
        _violation(f"rule {rule}: {exc}")
    (m,) = _select_matches(doc, rule, graph, r.lhs, gd.graph, selector, False)
    try:
        ctx = image_context(gd.graph, m, r, maximal=maximal)
    except JungleError as exc:
        _violation(str(exc))
    click.echo(f"k = {ctx.k}")
    bypass = ", ".join(gd.node_name(x) for x in ctx.bypass) or "(none)"
    click.echo(f"bypass: {bypass}")
    click.echo(serialize_graph(ctx.top, "top"), nl=False)
    click.echo(serialize_graph(ctx.bottom, "bottom"), nl=False)


@main.command("expr")
@click.argument("file")
@click.option("--graph", "-g", required=True)
def expr_cmd(file: str, graph: str) -> None:
    """Print a gs-monoidal expression that rebuilds the graph."""
    doc = _load(file)
    gd = _pick(doc.graphs, graph, "graph")
    click.echo(format_expr(to_expression(gd.graph)))


def _parse_mode(text: str):
    if text == "exhaustive":
        return Exhaustive()
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "sample" and parts[1].isdigit() and parts[2].isdigit():
        return Sampled(int(parts[1]), int(parts[2]))
    raise click.UsageError(f"mode must be 'exhaustive' or 'sample:<count>:<seed>', got {text!r}")


def _report(prefix: str, v: Verdict) -> None:
    if v.counterexample is None:
        click.echo(f"{prefix}: values agree on {v.checked} input tuple(s) [{v.mode}]")
    else:
        ins, left, right = v.counterexample
        click.echo(f"{prefix}: counterexample at {ins}: {left} vs {right}")
    if v.costs is not None:
        a, b = v.costs
        note = "unchanged" if a == b else "changed"
        click.echo(f"{prefix}: cost {a} -> {b} ({note})")


@main.command()
@click.argument("file")
@click.option("--rule", "-r", required=True)
@click.option("--graph", "-g", default=None, help="also verify one rewrite step on this graph")
@click.option("--match", "-m", "selector", default=None, help="match index or match block name")
@click.option("--interp", default="zmod:5", show_default=True, help="zmod:<p> or wrap64")
@click.option("--mode", default="exhaustive", show_default=True, help="exhaustive or sample:<count>:<seed>")
@click.option("--cost", "with_cost", is_flag=True, help="also compare edge counts")
def verify(
    file: str,
    rule: str,
    graph: str | None,
    selector: str | None,
    interp: str,
    mode: str,
    with_cost: bool,
) -> None:
    """Check that a rule (and optionally one step) preserves evaluation."""
    doc = _load(file)
    _pick(doc.rules, rule, "rule")
    try:
        base = builtin_interpretation(interp, doc.signature)
    except (ValueError, MissingOpError) as exc:
        raise click.UsageError(str(exc))
    checked_mode = _parse_mode(mode)
    if isinstance(checked_mode, Exhaustive) and not base.domain.finite:
        raise click.UsageError(
            f"domain {base.domain.name} cannot be checked exhaustively; use sample:<count>:<seed>"
        )
    semantics = CostedInterpretation(base) if with_cost else base
    try:
        r = doc.rule(rule)
    except JungleError as exc:
        _violation(f"rule {rule}: {exc}")

    ok = True
    verdict = rule_preserves(semantics, r, checked_mode)
    _report(f"rule {rule}", verdict)
    ok = ok and verdict.preserved

    if graph is not None:
        gd = _pick(doc.graphs, graph, "graph")
        (m,) = _select_matches(doc, rule, graph, r.lhs, gd.graph, selector, False)
        try:
            step = rewrite(r, gd.graph, m)
        except JungleError as exc:
            _violation(f"rewrite on {graph}: {exc}")
        step_verdict = step_preserves(semantics, gd.graph, step, checked_mode)
        _report(f"step on {graph}", step_verdict)
        ok = ok and step_verdict.preserved

    sys.exit(0 if ok else 1)


@main.command()
@click.argument("file")
@click.option("--graph", "-g", required=True)
def dot(file: str, graph: str) -> None:
    """Print a deterministic DOT rendering of a graph."""
    doc = _load(file)
    gd = _pick(doc.graphs, graph, "graph")
    click.echo(to_dot(gd.graph, graph), nl=False)


if __name__ == "__main__":
    main()
