"""Lexer, recursive-descent parser, and pretty-printer for the wiring DSL.

Grammar (EBNF):

    program := decl*
    decl    := [kind] NAME "=" expr
    kind    := "space" | "concept" | "state" | "channel" | "scalar"
    expr    := ten (";" ten)*          composition, left runs first
    ten     := atom ("*" atom)*        tensor
    atom    := call | NAME | tuple | NUMBER | "(" expr ")"
    call    := NAME "(" [expr ("," expr)*] ")"
    tuple   := "(" expr "," expr ("," expr)* ")"

Comments run from `#` to end of line.  Numbers are decimal 64-bit floats
(optional sign, fraction, exponent).  `(e)` is a parenthesized expression;
`(a, b, ...)` is a tuple.  Every node carries its source span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

KINDS = ("space", "concept", "state", "channel", "scalar")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[();,*=])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    """Syntax error with position and the token set that was expected."""

    def __init__(self, message, line, col, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(sorted(expected))
        suffix = f" (expected one of: {', '.join(self.expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{suffix}")


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "name" | punctuation literal | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            if kind == "punct":
                tokens.append(Token(chunk, chunk, line, col))
            else:
                tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Name(Expr):
    ident: str
    span: Span


@dataclass(frozen=True)
class Number(Expr):
    value: float
    span: Span


@dataclass(frozen=True)
class TupleLit(Expr):
    items: tuple
    span: Span


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple
    span: Span


@dataclass(frozen=True)
class Seq(Expr):
    left: Expr
    right: Expr
    span: Span


@dataclass(frozen=True)
class Ten(Expr):
    left: Expr
    right: Expr
    span: Span


@dataclass(frozen=True)
class Decl:
    kind: str | None  # one of KINDS, or None when the keyword was omitted
    name: str
    expr: Expr
    span: Span


@dataclass(frozen=True)
class Ast:
    decls: tuple

    def names(self):
        return [d.name for d in self.decls]

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(f"no declaration named {name!r}")


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead=0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, kind) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"unexpected {tok.kind or 'end of input'} {tok.text!r}",
                tok.line, tok.col, expected=(kind,),
            )
        return self.next()

    def span_from(self, tok: Token, end: Token | None = None) -> Span:
        end = end or self.tokens[max(self.pos - 1, 0)]
        return Span(tok.line, tok.col, end.line, end.col + len(end.text))

    # -- grammar ----------------------------------------------------------

    def program(self) -> Ast:
        decls = []
        while self.peek().kind != "eof":
            decls.append(self.decl())
        return Ast(tuple(decls))

    def decl(self) -> Decl:
        start = self.peek()
        kind = None
        if start.kind == "name" and start.text in KINDS and self.peek(1).kind == "name":
            kind = self.next().text
        name_tok = self.expect("name")
        self.expect("=")
        expr = self.expr()
        return Decl(kind, name_tok.text, expr, self.span_from(start))

    def expr(self) -> Expr:
        start = self.peek()
        node = self.tensor_expr()
        while self.peek().kind == ";":
            self.next()
            rhs = self.tensor_expr()
            node = Seq(node, rhs, self.span_from(start))
        return node

    def tensor_expr(self) -> Expr:
        start = self.peek()
        node = self.atom()
        while self.peek().kind == "*":
            self.next()
            rhs = self.atom()
            node = Ten(node, rhs, self.span_from(start))
        return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return Number(float(tok.text), self.span_from(tok, tok))
        if tok.kind == "name":
            self.next()
            if self.peek().kind == "(":
                return self.call(tok)
            return Name(tok.text, self.span_from(tok, tok))
        if tok.kind == "(":
            return self.paren_or_tuple()
        raise ParseError(
            f"unexpected {tok.kind or 'end of input'} {tok.text!r}",
            tok.line, tok.col, expected=("name", "number", "("),
        )

    def call(self, name_tok: Token) -> Call:
        self.expect("(")
        args = []
        if self.peek().kind != ")":
            args.append(self.expr())
            while self.peek().kind == ",":
                self.next()
                args.append(self.expr())
        self.expect(")")
        return Call(name_tok.text, tuple(args), self.span_from(name_tok))

    def paren_or_tuple(self) -> Expr:
        open_tok = self.expect("(")
        first = self.expr()
        if self.peek().kind == ",":
            items = [first]
            while self.peek().kind == ",":
                self.next()
                if self.peek().kind == ")":  # trailing comma: 1-tuples etc.
                    break
                items.append(self.expr())
            self.expect(")")
            return TupleLit(tuple(items), self.span_from(open_tok))
        self.expect(")")
        return first


def parse(text: str) -> Ast:
    """Parse a program; raises ParseError with line/column on bad input."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    return _Parser(_tokenize(text)).program()


# ---------------------------------------------------------------------------
# Pretty-printing and structural comparison
# ---------------------------------------------------------------------------


def _pp(node) -> str:
    if isinstance(node, Number):
        return repr(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, TupleLit):
        if len(node.items) == 1:
            return "(" + _pp(node.items[0]) + ",)"
        return "(" + ", ".join(_pp(i) for i in node.items) + ")"
    if isinstance(node, Call):
        return node.name + "(" + ", ".join(_pp(a) for a in node.args) + ")"
    if isinstance(node, Ten):
        return f"({_pp(node.left)} * {_pp(node.right)})"
    if isinstance(node, Seq):
        return f"({_pp(node.left)} ; {_pp(node.right)})"
    raise TypeError(f"cannot pretty-print {node!r}")


def pretty(ast: Ast) -> str:
    """Canonical text form; reparsing yields a structurally equal AST."""
    lines = []
    for d in ast.decls:
        kind = f"{d.kind} " if d.kind else ""
        lines.append(f"{kind}{d.name} = {_pp(d.expr)}")
    return "\n".join(lines) + ("\n" if lines else "")


def canonical(node):
    """Span-free nested-tuple form, for alpha-equivalence comparison."""
    if isinstance(node, Ast):
        return ("ast",) + tuple(canonical(d) for d in node.decls)
    if isinstance(node, Decl):
        return ("decl", node.kind, node.name, canonical(node.expr))
    if isinstance(node, Number):
        return ("num", node.value)
    if isinstance(node, Name):
        return ("name", node.ident)
    if isinstance(node, TupleLit):
        return ("tuple",) + tuple(canonical(i) for i in node.items)
    if isinstance(node, Call):
        return ("call", node.name) + tuple(canonical(a) for a in node.args)
    if isinstance(node, Ten):
        return ("ten", canonical(node.left), canonical(node.right))
    if isinstance(node, Seq):
        return ("seq", canonical(node.left), canonical(node.right))
    raise TypeError(f"no canonical form for {node!r}")


def ast_to_json(node):
    """JSON-friendly AST dump (spans included) for tooling."""
    if isinstance(node, Ast):
        return {"node": "program", "decls": [ast_to_json(d) for d in node.decls]}
    if isinstance(node, Decl):
        return {
            "node": "decl", "kind": node.kind, "name": node.name,
            "expr": ast_to_json(node.expr), "span": str(node.span),
        }
    if isinstance(node, Number):
        return {"node": "number", "value": node.value, "span": str(node.span)}
    if isinstance(node, Name):
        return {"node": "name", "ident": node.ident, "span": str(node.span)}
    if isinstance(node, TupleLit):
        return {
            "node": "tuple", "items": [ast_to_json(i) for i in node.items],
            "span": str(node.span),
        }
    if isinstance(node, Call):
        return {
            "node": "call", "name": node.name,
            "args": [ast_to_json(a) for a in node.args], "span": str(node.span),
        }
    if isinstance(node, Ten):
        return {
            "node": "tensor", "left": ast_to_json(node.left),
            "right": ast_to_json(node.right), "span": str(node.span),
        }
    if isinstance(node, Seq):
        return {
            "node": "compose", "left": ast_to_json(node.left),
            "right": ast_to_json(node.right), "span": str(node.span),
        }
    raise TypeError(f"cannot dump {node!r}")
