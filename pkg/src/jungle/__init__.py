"""Term graph rewriting over directed hypergraphs.

Graphs carry an input/output interface; term graphs additionally give
every inner node exactly one defining edge and forbid cycles.  Rules are
spans of interface-preserving embeddings and are applied by cutting out
the matched pattern and gluing in the replacement, with the dangling and
identification conditions checked up front.  The algebra module builds
graphs from a small gs-monoidal expression language and decomposes them
back; the semantics module evaluates graphs as functions and checks that
rewriting preserves them.
"""

from .algebra import (
    GsExpr,
    bang,
    bottom,
    build,
    dup,
    exchange,
    format_expr,
    identity,
    parse_expr,
    prim,
    seq,
    ten,
    to_expression,
)
from .context import ImageContext, check_context_preservation, image_context, verify_image_context
from .core import (
    CycleDetected,
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
    as_dhg,
    as_term_graph,
    iso,
    make_dhg,
    strip_garbage,
    validate_dhg,
)
from .dpo import (
    DanglingConflictError,
    IdentificationConflictError,
    LhsNotSolidError,
    NotInjectiveMatchError,
    ResultNotTermGraphError,
    RewriteResult,
    Rule,
    is_solid,
    make_rule,
    pushout,
    pushout_complement,
    rewrite,
)
from .frontend import Document, ParseError, parse, serialize, serialize_graph, to_dot
from .matching import (
    Homomorphism,
    Matching,
    MatchingError,
    check_homomorphism,
    check_matching,
    dangling_ok,
    find_matchings,
)
from .semantics import (
    CostedInterpretation,
    Exhaustive,
    Interpretation,
    Sampled,
    Verdict,
    builtin_interpretation,
    evaluate,
    evaluate_cost,
    rule_preserves,
    step_preserves,
)

__version__ = "0.1.0"

__all__ = [
    "GsExpr",
    "bang",
    "bottom",
    "build",
    "dup",
    "exchange",
    "format_expr",
    "identity",
    "parse_expr",
    "prim",
    "seq",
    "ten",
    "to_expression",
    "ImageContext",
    "check_context_preservation",
    "image_context",
    "verify_image_context",
    "CycleDetected",
    "Dhg",
    "Edge",
    "Inner",
    "Input",
    "InterfaceMismatchError",
    "InvalidGraphError",
    "JungleError",
    "NodeId",
    "Signature",
    "TermGraph",
    "TermGraphError",
    "as_dhg",
    "as_term_graph",
    "iso",
    "make_dhg",
    "strip_garbage",
    "validate_dhg",
    "DanglingConflictError",
    "IdentificationConflictError",
    "LhsNotSolidError",
    "NotInjectiveMatchError",
    "ResultNotTermGraphError",
    "RewriteResult",
    "Rule",
    "is_solid",
    "make_rule",
    "pushout",
    "pushout_complement",
    "rewrite",
    "Document",
    "ParseError",
    "parse",
    "serialize",
    "serialize_graph",
    "to_dot",
    "Homomorphism",
    "Matching",
    "MatchingError",
    "check_homomorphism",
    "check_matching",
    "dangling_ok",
    "find_matchings",
    "CostedInterpretation",
    "Exhaustive",
    "Interpretation",
    "Sampled",
    "Verdict",
    "builtin_interpretation",
    "evaluate",
    "evaluate_cost",
    "rule_preserves",
    "step_preserves",
]
