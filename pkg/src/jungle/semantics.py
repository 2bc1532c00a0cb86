"""Interpretations of term graphs and preservation checks for rewrites.

A term graph with m inputs and n outputs denotes a function from m-tuples
to n-tuples over a chosen value domain: each edge applies the operation
named by its label.  Sequential composition denotes function composition
and parallel composition denotes pairing, so a rule whose two sides denote
the same function yields rewrite steps that never change the meaning of
the whole graph.  A costed interpretation pairs the function with an edge
count, which rewriting generally does change.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from .core import (
    Dhg,
    Inner,
    Input,
    InterfaceMismatchError,
    JungleError,
    NodeId,
    Signature,
    TermGraph,
    as_term_graph,
    output_closure,
)
from .dpo import RewriteResult
from .matching import StaleMatchingError


class MissingOpError(JungleError):
    def __init__(self, label: str):
        super().__init__(f"interpretation defines no operation for label {label!r}")
        self.label = label


@dataclass(frozen=True)
class ValueDomain:
    """Carrier of an interpretation, with enumeration or sampling support."""

    name: str
    values: tuple[int, ...] | None  # None when the domain is too large to enumerate
    sample: Callable[[random.Random], int]

    @property
    def finite(self) -> bool:
        return self.values is not None


def zmod_domain(p: int) -> ValueDomain:
    if p < 1:
        raise ValueError("modulus must be positive")
    return ValueDomain(f"zmod:{p}", tuple(range(p)), lambda rng: rng.randrange(p))


_WRAP = 1 << 64


def wrap64_domain() -> ValueDomain:
    return ValueDomain("wrap64", None, lambda rng: rng.randrange(_WRAP))


@dataclass(frozen=True)
class Interpretation:
    """Assigns every label an operation over the value domain."""

    domain: ValueDomain
    ops: dict[str, tuple[int, Callable[..., int]]]
    cartesian: bool = True

    def op(self, label: str) -> tuple[int, Callable[..., int]]:
        try:
            return self.ops[label]
        except KeyError:
            raise MissingOpError(label) from None

    def check_signature(self, sig: Signature) -> None:
        for label, arity in sig.arities.items():
            got, _ = self.op(label)
            if got != arity:
                raise MissingOpError(label)


@dataclass(frozen=True)
class CostedInterpretation:
    """Interpretation whose morphisms carry an additive edge-count cost."""

    base: Interpretation


_CONST = re.compile(r"^const_(\d+)$")


def _standard_ops(sig: Signature, reduce: Callable[[int], int]) -> dict[str, tuple[int, Callable[..., int]]]:
    ops: dict[str, tuple[int, Callable[..., int]]] = {}
    for label, arity in sig.arities.items():
        m = _CONST.match(label)
        if m and arity == 0:
            value = reduce(int(m.group(1)))
            ops[label] = (0, lambda value=value: value)
        elif label == "add" and arity == 2:
            ops[label] = (2, lambda a, b: reduce(a + b))
        elif label == "sub" and arity == 2:
            ops[label] = (2, lambda a, b: reduce(a - b))
        elif label == "mul" and arity == 2:
            ops[label] = (2, lambda a, b: reduce(a * b))
        elif label == "neg" and arity == 1:
            ops[label] = (1, lambda a: reduce(-a))
        else:
            raise MissingOpError(label)
    return ops


def builtin_interpretation(name: str, sig: Signature) -> Interpretation:
    """Interpretations by name: ``zmod:<p>`` or ``wrap64``.

    Both understand the labels add, sub, mul, neg, and const_<n> at the
    standard arities; any other label in the signature is rejected.
    """
    if name.startswith("zmod:"):
        try:
            p = int(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"unknown interpretation {name!r}") from None
        return Interpretation(zmod_domain(p), _standard_ops(sig, lambda v: v % p))
    if name == "wrap64":
        return Interpretation(wrap64_domain(), _standard_ops(sig, lambda v: v % _WRAP))
    raise ValueError(f"unknown interpretation {name!r}")


def evaluate(
    interp: Interpretation | CostedInterpretation,
    graph: TermGraph | Dhg,
    inputs: Sequence[int],
) -> tuple[int, ...]:
    """Run the graph as a function on the given input tuple.

    Garbage (material no output depends on) is never evaluated: the meaning
    of a graph is its input-output function only.
    """
    if isinstance(interp, CostedInterpretation):
        interp = interp.base
    t = as_term_graph(graph)
    if len(inputs) != t.n_inputs:
        raise InterfaceMismatchError(f"graph takes {t.n_inputs} inputs, got {len(inputs)}")
    needed_nodes, needed_edges = output_closure(t)
    values: dict[NodeId, int] = {Input(p): v for p, v in enumerate(inputs)}
    for uid in t.schedule:
        if uid not in needed_edges:
            continue
        e = t.edge(uid)
        _, fn = interp.op(e.label)
        values[e.output_node] = fn(*(values[x] for x in e.inputs))
    return tuple(values[x] for x in t.g_out)


def evaluate_cost(
    interp: CostedInterpretation,
    graph: TermGraph | Dhg,
    inputs: Sequence[int],
) -> tuple[tuple[int, ...], int]:
    """Value and cost of a run; cost counts every edge, garbage included."""
    t = as_term_graph(graph)
    return evaluate(interp.base, t, inputs), len(t.edges)


@dataclass(frozen=True)
class Exhaustive:
    """Check every input tuple; needs a finite value domain."""


@dataclass(frozen=True)
class Sampled:
    """Check ``count`` pseudo-random input tuples drawn from ``seed``."""

    count: int
    seed: int


Mode = Exhaustive | Sampled


@dataclass(frozen=True)
class Verdict:
    """Outcome of a preservation check."""

    preserved: bool
    value_preserved: bool
    checked: int
    counterexample: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]] | None
    mode: str
    costs: tuple[int, int] | None = None

    @property
    def cost_preserved(self) -> bool | None:
        return None if self.costs is None else self.costs[0] == self.costs[1]


def _input_tuples(domain: ValueDomain, arity: int, mode: Mode) -> Iterable[tuple[int, ...]]:
    if isinstance(mode, Exhaustive):
        if not domain.finite:
            raise ValueError(f"domain {domain.name} cannot be enumerated exhaustively")
        return product(domain.values, repeat=arity)
    rng = random.Random(mode.seed)
    return (tuple(domain.sample(rng) for _ in range(arity)) for _ in range(mode.count))


def _mode_name(mode: Mode) -> str:
    if isinstance(mode, Exhaustive):
        return "exhaustive"
    return f"sample:{mode.count}:{mode.seed}"


def _compare(
    interp: Interpretation | CostedInterpretation,
    left: TermGraph,
    right: TermGraph,
    mode: Mode,
) -> Verdict:
    base = interp.base if isinstance(interp, CostedInterpretation) else interp
    if left.n_inputs != right.n_inputs or left.n_outputs != right.n_outputs:
        raise InterfaceMismatchError("cannot compare graphs over different interfaces")
    checked = 0
    counterexample = None
    for tup in _input_tuples(base.domain, left.n_inputs, mode):
        lv = evaluate(base, left, tup)
        rv = evaluate(base, right, tup)
        checked += 1
        if lv != rv:
            counterexample = (tup, lv, rv)
            break
    value_ok = counterexample is None
    costs = None
    preserved = value_ok
    if isinstance(interp, CostedInterpretation):
        costs = (len(left.edges), len(right.edges))
        preserved = value_ok and costs[0] == costs[1]
    return Verdict(
        preserved=preserved,
        value_preserved=value_ok,
        checked=checked,
        counterexample=counterexample,
        mode=_mode_name(mode),
        costs=costs,
    )


def rule_preserves(
    interp: Interpretation | CostedInterpretation,
    rule,
    mode: Mode,
) -> Verdict:
    """Do the two sides of the rule denote the same morphism?"""
    return _compare(interp, rule.lhs, rule.rhs, mode)


def step_preserves(
    interp: Interpretation | CostedInterpretation,
    before: TermGraph,
    step: RewriteResult,
    mode: Mode,
) -> Verdict:
    """Does the whole graph denote the same morphism after the step?"""
    if step.before != before:
        raise StaleMatchingError("rewrite result does not belong to the supplied graph")
    return _compare(interp, before, step.result, mode)
