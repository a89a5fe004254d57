"""Propositional formulas over a finite, ordered atom vocabulary.

Grammar (whitespace ignored, ``->`` associates to the right)::

    formula := imp
    imp     := or ("->" imp)?
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "~" unary | "(" formula ")" | "false" | atom
    atom    := [a-zA-Z_][a-zA-Z0-9_]*
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union


class ParseError(ValueError):
    """Raised for malformed formula text; carries the 0-based offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


@dataclass(frozen=True)
class Vocabulary:
    atoms: tuple[str, ...]

    def __post_init__(self):
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("vocabulary must contain at least one atom")
        if len(set(atoms)) != len(atoms):
            raise ValueError(f"duplicate atom names in {atoms!r}")
        for a in atoms:
            if not _ATOM_RE.fullmatch(a) or a == "false":
                raise ValueError(f"invalid atom name {a!r}")

    @classmethod
    def of(cls, *names: str) -> "Vocabulary":
        if len(names) == 1 and not isinstance(names[0], str):
            names = tuple(names[0])
        return cls(tuple(names))

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def n_worlds(self) -> int:
        return 1 << len(self.atoms)

    def index(self, name: str) -> int:
        return self.atoms.index(name)

    def world_str(self, w: int) -> str:
        """Render a world as a bit string in atom order, e.g. '10' = p true, q false."""
        return "".join("1" if (w >> i) & 1 else "0" for i in range(self.n))


# -- formula tree ---------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, Falsum, Not, And, Or, Implies]

TOP: Formula = Not(Falsum())  # canonical tautology
BOTTOM: Formula = Falsum()

_PREC = {Implies: 1, Or: 2, And: 3, Not: 4, Atom: 5, Falsum: 5}


def atoms_of(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, Falsum):
        return set()
    if isinstance(f, Not):
        return atoms_of(f.arg)
    return atoms_of(f.left) | atoms_of(f.right)


def is_connective_free(f: Formula) -> bool:
    return isinstance(f, Atom)


def to_text(f: Formula) -> str:
    """Print with the fewest parentheses that re-parse to the same tree."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Falsum):
        return "false"
    if isinstance(f, Not):
        inner = to_text(f.arg)
        return "~" + (f"({inner})" if _PREC[type(f.arg)] < 4 else inner)
    p = _PREC[type(f)]
    sym = {And: "&", Or: "|", Implies: "->"}[type(f)]
    lp, rp = _PREC[type(f.left)], _PREC[type(f.right)]
    if isinstance(f, Implies):
        lpar, rpar = lp <= p, rp < p
    else:
        lpar, rpar = lp < p, rp <= p
    left = f"({to_text(f.left)})" if lpar else to_text(f.left)
    right = f"({to_text(f.right)})" if rpar else to_text(f.right)
    return f"{left} {sym} {right}"


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[0]
    for g in fs[1:]:
        out = And(out, g)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return BOTTOM
    out = fs[0]
    for g in fs[1:]:
        out = Or(out, g)
    return out


# -- parser -----------------------------------------------------------------

_ATOM_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*")
_TOKEN_RE = re.compile(r"\s*(?:(->)|([~&|()])|([a-zA-Z_][a-zA-Z0-9_]*))")


def _tokenize(text: str) -> Iterator[tuple[str, int]]:
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        tok = m.group(1) or m.group(2) or m.group(3)
        yield tok, m.start(m.lastindex)
        pos = m.end()


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary | None):
        self.text = text
        self.vocab = vocab
        self.toks = list(_tokenize(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.peek() == "|":
            self.take()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.peek() == "&":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.pos(), self.text)
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok == "(":
            _, start = self.take()
            inner = self.formula()
            if self.peek() != ")":
                raise ParseError(f"unbalanced parenthesis opened at {start}", self.pos(), self.text)
            self.take()
            return inner
        if tok == "false":
            self.take()
            return Falsum()
        if _ATOM_RE.fullmatch(tok):
            name, p = self.take()
            if self.vocab is not None and name not in self.vocab.atoms:
                raise ParseError(f"unknown atom {name!r}", p, self.text)
            return Atom(name)
        raise ParseError(f"unexpected token {tok!r}", self.pos(), self.text)


def parse_formula(text: str, vocab: Vocabulary | None = None) -> Formula:
    """Parse one formula; atoms are checked against ``vocab`` when given."""
    p = _Parser(text, vocab)
    if not p.toks:
        raise ParseError("empty formula", 0, text)
    f = p.formula()
    if p.i != len(p.toks):
        tok, at = p.toks[p.i]
        if tok == ")":
            raise ParseError("unbalanced parenthesis", at, text)
        raise ParseError(f"trailing input {tok!r}", at, text)
    return f
