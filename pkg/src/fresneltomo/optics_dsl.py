"""A tiny language for paraxial element chains.

Grammar (whitespace separated, left to right = order light meets them)::

    system  := element+
    element := "free" "(" number ")"
             | "lens" "(" number ")"
             | "matrix" "(" number "," number "," number "," number ")"
    number  := decimal with optional sign and exponent, e.g. -1.5e-3

Element matrices: free(d) = [1, d; 0, 1], lens(f) = [1, 0; -1/f, 1].
The system matrix is M_n ... M_2 M_1 with M_1 the first element.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import ParseError
from .symplectic import RayMatrix

MATRIX_DET_TOL = 1e-9

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int
    line: int
    column: int


@dataclass(frozen=True)
class Free:
    d: float
    span: tuple = (0, 0)


@dataclass(frozen=True)
class ThinLens:
    f: float
    span: tuple = (0, 0)


@dataclass(frozen=True)
class RawMatrix:
    A: float
    B: float
    C: float
    D: float
    span: tuple = (0, 0)


ElementAst = Union[Free, ThinLens, RawMatrix]


@dataclass(frozen=True)
class SystemAst:
    elements: tuple

    def __post_init__(self):
        if not self.elements:
            raise ParseError("an optical system needs at least one element")

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def tokenize(text: str) -> Iterator[Token]:
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _position(text, pos)
            raise ParseError("unexpected character", line, col, text[pos])
        kind = m.lastgroup
        if kind != "ws":
            line, col = _position(text, pos)
            yield Token(kind, m.group(), pos, line, col)
        pos = m.end()


_ARITY = {"free": 1, "lens": 1, "matrix": 4}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = list(tokenize(text))
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _fail(self, message, tok=None):
        if tok is None:
            line, col = _position(self.text, len(self.text))
            raise ParseError(f"{message}, found end of input", line, col)
        raise ParseError(message, tok.line, tok.column, tok.text)

    def _expect(self, kind, text=None):
        tok = self._peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text else kind
            self._fail(f"expected {want}", tok)
        self.i += 1
        return tok

    def system(self) -> SystemAst:
        elements = []
        while self._peek() is not None:
            elements.append(self.element())
        if not elements:
            self._fail("expected an element (free, lens or matrix)")
        return SystemAst(tuple(elements))

    def element(self) -> ElementAst:
        head = self._peek()
        if head is None or head.kind != "name" or head.text not in _ARITY:
            self._fail("expected an element (free, lens or matrix)", head)
        self.i += 1
        self._expect("punct", "(")
        args = [self.number()]
        for _ in range(_ARITY[head.text] - 1):
            self._expect("punct", ",")
            args.append(self.number())
        close = self._expect("punct", ")")
        span = (head.offset, close.offset + 1)
        source = self.text[span[0]:span[1]]

        if head.text == "free":
            return Free(args[0], span)
        if head.text == "lens":
            if args[0] == 0.0:
                raise ParseError(f"{source}: focal length must be nonzero", head.line, head.column, source)
            return ThinLens(args[0], span)
        A, B, C, D = args
        det = A * D - B * C
        if abs(det - 1.0) > MATRIX_DET_TOL:
            raise ParseError(
                f"{source}: determinant {det:.12g} != 1 (element is not unimodular)",
                head.line, head.column, source,
            )
        return RawMatrix(A, B, C, D, span)

    def number(self) -> float:
        tok = self._expect("number")
        return float(tok.text)


def parse(text: str) -> SystemAst:
    return _Parser(text).system()


def element_matrix(el: ElementAst) -> RayMatrix:
    if isinstance(el, Free):
        return RayMatrix(1.0, el.d, 0.0, 1.0)
    if isinstance(el, ThinLens):
        return RayMatrix(1.0, 0.0, -1.0 / el.f, 1.0)
    return RayMatrix(el.A, el.B, el.C, el.D)


def evaluate(ast: SystemAst) -> RayMatrix:
    total = None
    for el in ast:
        m = element_matrix(el)
        total = m if total is None else m @ total
    return total


def render(ast: SystemAst) -> str:
    """Canonical text for an AST; ``parse(render(ast))`` evaluates identically."""
    parts = []
    for el in ast:
        if isinstance(el, Free):
            parts.append(f"free({el.d!r})")
        elif isinstance(el, ThinLens):
            parts.append(f"lens({el.f!r})")
        else:
            parts.append(f"matrix({el.A!r},{el.B!r},{el.C!r},{el.D!r})")
    return " ".join(parts)


def system_matrix(text: str) -> RayMatrix:
    return evaluate(parse(text))
