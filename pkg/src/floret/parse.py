"""Recursive-descent parser for the textual bouquet grammar.

    bouquet := flower ("," flower)* | eps
    flower  := atom | "[" garden "|>" petals "]"
    petals  := garden (";" garden)* | eps
    garden  := (varlist ".")? bouquet
    varlist := ident ("," ident)*
    atom    := ident ("(" varlist ")")?

Identifiers are ASCII: a letter or underscore, then letters, digits,
underscores or primes.  Unknown predicates are an error against the active
signature, never auto-registered.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    ArityError, Atom, Bloom, Bouquet, FloretError, Flower, Garden, Signature,
    VarId, canonicalize, free_var, fresh_var,
)


class ParseError(FloretError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(r"\|>|[A-Za-z_][A-Za-z0-9_']*|[\[\](),;.]|\S")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    for ln, line in enumerate(text.splitlines() or [""], 1):
        for m in _TOKEN.finditer(line):
            toks.append(_Tok(m.group(), ln, m.start() + 1))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature, scope: dict[str, VarId] | None):
        self.toks = _tokenize(text)
        self.pos = 0
        self.sig = sig
        self.scope = dict(scope) if scope else {}

    def peek(self) -> _Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else _Tok("", 1, 1)
            return ParseError(f"{msg} (at end of input)", last.line, last.col + len(last.text))
        return ParseError(f"{msg} (found {t.text!r})", t.line, t.col)

    def take(self, text: str | None = None) -> _Tok:
        t = self.peek()
        if t is None or (text is not None and t.text != text):
            raise self.error(f"expected {text!r}" if text else "unexpected end of input")
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def at_ident(self) -> bool:
        t = self.peek()
        return t is not None and _IDENT.match(t.text) is not None

    # grammar -------------------------------------------------------------

    def bouquet(self, scope: dict[str, VarId]) -> Bouquet:
        flowers: list[Flower] = []
        if self.at_ident() or self.at("["):
            flowers.append(self.flower(scope))
            while self.at(","):
                self.take(",")
                flowers.append(self.flower(scope))
        return tuple(flowers)

    def flower(self, scope: dict[str, VarId]) -> Flower:
        if self.at("["):
            self.take("[")
            pistil, inner = self.garden(scope)
            self.take("|>")
            petals = []
            if not self.at("]"):
                petals.append(self.garden(inner)[0])
                while self.at(";"):
                    self.take(";")
                    petals.append(self.garden(inner)[0])
            self.take("]")
            return Bloom(pistil, tuple(petals))
        return self.atom(scope)

    def atom(self, scope: dict[str, VarId]) -> Atom:
        t = self.take()
        if not _IDENT.match(t.text):
            raise ParseError(f"expected an atom or '[' (found {t.text!r})", t.line, t.col)
        args: list[VarId] = []
        if self.at("("):
            self.take("(")
            args.append(self.var(scope, self.take()))
            while self.at(","):
                self.take(",")
                args.append(self.var(scope, self.take()))
            self.take(")")
        arity = self.sig.arity(t.text)
        if arity != len(args):
            raise ArityError(f"{t.line}:{t.col}: predicate {t.text!r} expects {arity} arguments, got {len(args)}")
        return Atom(t.text, tuple(args))

    def var(self, scope: dict[str, VarId], t: _Tok) -> VarId:
        if not _IDENT.match(t.text):
            raise ParseError(f"expected a variable (found {t.text!r})", t.line, t.col)
        return scope.get(t.text) or free_var(t.text)

    def garden(self, scope: dict[str, VarId]) -> tuple[Garden, dict[str, VarId]]:
        """Parse a garden; returns it plus the scope extended with its binders.

        A bare ``.`` is an explicit empty sprinkler (required in petal
        position, where a fully blank garden would read as "no petal")."""
        binders: list[VarId] = []
        if self.at("."):
            self.take(".")
        elif self.at_ident():
            # tentatively read a varlist; back off unless a '.' follows
            save = self.pos
            names = [self.take().text]
            ok = True
            while ok and self.at(","):
                self.take(",")
                if self.at_ident():
                    names.append(self.take().text)
                else:
                    ok = False
            if ok and self.at("."):
                self.take(".")
                binders = [fresh_var(n) for n in names]
            else:
                self.pos = save
        inner = dict(scope)
        inner.update({v.display: v for v in binders})
        return Garden(tuple(binders), self.bouquet(inner)), inner


def parse_bouquet(text: str, sig: Signature, scope: dict[str, VarId] | None = None,
                  canonical: bool = True) -> Bouquet:
    """Parse text into a bouquet; strips ``#`` comments; canonicalizes by default.

    ``scope`` optionally pre-binds names (used when a rule payload is parsed at
    a location under enclosing binders).
    """
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    p = _Parser(text, sig, scope)
    b = p.bouquet(p.scope)
    if p.peek() is not None:
        raise p.error("trailing input after bouquet")
    return canonicalize(b) if canonical else b


def parse_garden(text: str, sig: Signature, scope: dict[str, VarId] | None = None) -> Garden:
    p = _Parser(text, sig, scope)
    g, _ = p.garden(p.scope)
    if p.peek() is not None:
        raise p.error("trailing input after garden")
    return g


def parse_petals(text: str, sig: Signature, scope: dict[str, VarId] | None = None) -> tuple[Garden, ...]:
    """Semicolon-separated gardens (the glue payload syntax)."""
    p = _Parser(text, sig, scope)
    petals = [p.garden(p.scope)[0]]
    while p.at(";"):
        p.take(";")
        petals.append(p.garden(p.scope)[0])
    if p.peek() is not None:
        raise p.error("trailing input after petals")
    return tuple(petals)
