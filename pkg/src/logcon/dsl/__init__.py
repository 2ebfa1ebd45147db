"""A small wiring language for spaces, concepts, states and channels.

Programs declare named values and wire them with `;` (diagrammatic
composition, left runs first) and `*` (tensor):

    space   C = box(3)
    concept green = fuzz(ball(C, (0,1,0), 0.1), 0.2)
    state   w = uniform(box(3))
    scalar  grade = w ; green

The surface syntax is the linear reading of string diagrams; see
`logcon.dsl.parser` for the grammar and `logcon.dsl.interp` for the
builtins, the dimension typechecker, and the evaluator.
"""

from logcon.dsl.parser import (
    Ast,
    Call,
    Decl,
    Name,
    Number,
    ParseError,
    Seq,
    Ten,
    TupleLit,
    canonical,
    parse,
    pretty,
)
from logcon.dsl.interp import (
    DslTypeError,
    EvalError,
    TypedDiagram,
    corpus_dir,
    corpus_path,
    evaluate,
    typecheck,
)

__all__ = [
    "Ast", "Call", "Decl", "Name", "Number", "ParseError", "Seq", "Ten",
    "TupleLit", "canonical", "parse", "pretty",
    "DslTypeError", "EvalError", "TypedDiagram", "typecheck", "evaluate",
    "corpus_dir", "corpus_path",
]
