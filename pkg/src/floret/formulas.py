"""Conventional first-order formulas and the two-way bridge to bouquets.

The kernel never depends on this module; formulas exist as the testing and
user-facing interface.  ``eval_formula`` is a deliberately separate textbook
Kripke evaluator over formulas, kept minimal: it is the anti-circularity
oracle for the flower-level forcing relation.

Grammar (ASCII): atoms as in the term language; connectives ``~ & | ->``
with precedence ``~ > & > | > ->`` and right-associative ``->``; quantifiers
``forall x.`` and ``exists x.`` extend as far right as possible; ``true`` and
``false`` are reserved constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .semantics import Evaluation, KripkeModel, update
from .syntax import (
    ArityError, Atom as FAtom, Bloom, Bouquet, EMPTY_GARDEN,
    Garden, Signature, VarId, canonicalize, free_var, fresh_var,
)
from .parse import ParseError, _IDENT


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[VarId, ...]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


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


@dataclass(frozen=True)
class Forall:
    var: VarId
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: VarId
    body: "Formula"


Formula = Union[Atom, Top, Bottom, And, Or, Implies, Forall, Exists]


def Not(f: Formula) -> Implies:
    """Intuitionistic negation, stored as implication into falsum."""
    return Implies(f, Bottom())


# ---------------------------------------------------------------------------
# Printing and parsing

def formula_text(f: Formula, prec: int = 0) -> str:
    if isinstance(f, Atom):
        return f.pred if not f.args else f"{f.pred}({', '.join(a.display for a in f.args)})"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Implies):
        if isinstance(f.right, Bottom):
            return _wrap(f"~{formula_text(f.left, 4)}", 4, prec)
        return _wrap(f"{formula_text(f.left, 2)} -> {formula_text(f.right, 1)}", 1, prec)
    if isinstance(f, Or):
        return _wrap(f"{formula_text(f.left, 2)} | {formula_text(f.right, 3)}", 2, prec)
    if isinstance(f, And):
        return _wrap(f"{formula_text(f.left, 3)} & {formula_text(f.right, 4)}", 3, prec)
    if isinstance(f, Forall):
        return _wrap(f"forall {f.var.display}. {formula_text(f.body, 0)}", 0, prec)
    if isinstance(f, Exists):
        return _wrap(f"exists {f.var.display}. {formula_text(f.body, 0)}", 0, prec)
    raise AssertionError(f)


def _wrap(text: str, level: int, prec: int) -> str:
    return f"({text})" if level < prec else text


_RESERVED = {"true", "false", "forall", "exists"}

_FTOKEN = re.compile(r"->|[A-Za-z_][A-Za-z0-9_']*|[()~&|,.]|\S")


@dataclass
class _FTok:
    text: str
    line: int
    col: int


def _ftokenize(text: str) -> list[_FTok]:
    toks = []
    for ln, line in enumerate(text.splitlines() or [""], 1):
        for m in _FTOKEN.finditer(line):
            toks.append(_FTok(m.group(), ln, m.start() + 1))
    return toks


class _FParser:
    def __init__(self, text: str, sig: Signature):
        self.toks = _ftokenize(text)
        self.pos = 0
        self.sig = sig

    def peek(self):
        return self.toks[self.pos].text if self.pos < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        if self.pos >= len(self.toks):
            raise ParseError("unexpected end of formula", 1, 0)
        t = self.toks[self.pos]
        if expect is not None and t.text != expect:
            raise ParseError(f"expected {expect!r}, found {t.text!r}", t.line, t.col)
        self.pos += 1
        return t.text

    def formula(self, scope: dict[str, VarId]) -> Formula:
        return self.implication(scope)

    def implication(self, scope) -> Formula:
        left = self.disjunction(scope)
        if self.peek() == "->":
            self.take("->")
            return Implies(left, self.implication(scope))
        return left

    def disjunction(self, scope) -> Formula:
        f = self.conjunction(scope)
        while self.peek() == "|":
            self.take("|")
            f = Or(f, self.conjunction(scope))
        return f

    def conjunction(self, scope) -> Formula:
        f = self.unary(scope)
        while self.peek() == "&":
            self.take("&")
            f = And(f, self.unary(scope))
        return f

    def unary(self, scope) -> Formula:
        t = self.peek()
        if t == "~":
            self.take("~")
            return Not(self.unary(scope))
        if t in ("forall", "exists"):
            self.take(t)
            name = self.take()
            if not _IDENT.match(name) or name in _RESERVED:
                raise ParseError(f"expected a variable, found {name!r}", 1, 0)
            self.take(".")
            v = fresh_var(name)
            inner = dict(scope)
            inner[name] = v
            body = self.formula(inner)
            return Forall(v, body) if t == "forall" else Exists(v, body)
        if t == "(":
            self.take("(")
            f = self.formula(scope)
            self.take(")")
            return f
        if t == "true":
            self.take()
            return Top()
        if t == "false":
            self.take()
            return Bottom()
        return self.atom(scope)

    def atom(self, scope) -> Atom:
        name = self.take()
        if not _IDENT.match(name) or name in _RESERVED:
            raise ParseError(f"expected an atom, found {name!r}", 1, 0)
        args: list[VarId] = []
        if self.peek() == "(":
            self.take("(")
            args.append(self._var(scope))
            while self.peek() == ",":
                self.take(",")
                args.append(self._var(scope))
            self.take(")")
        if self.sig.arity(name) != len(args):
            raise ArityError(f"predicate {name!r} expects {self.sig.arity(name)} arguments")
        return Atom(name, tuple(args))

    def _var(self, scope) -> VarId:
        name = self.take()
        if not _IDENT.match(name):
            raise ParseError(f"expected a variable, found {name!r}", 1, 0)
        return scope.get(name) or free_var(name)


def parse_formula(text: str, sig: Signature) -> Formula:
    p = _FParser(text, sig)
    f = p.formula({})
    if p.peek() is not None:
        raise ParseError(f"trailing input {p.peek()!r}", 1, 0)
    return f


# ---------------------------------------------------------------------------
# Encoding formulas to bouquets

def encode(f: Formula) -> Bouquet:
    """Truth is the blank sheet; conjunction is juxtaposition; an implication
    becomes a one-petal flower; a disjunction an empty-pistil flower with one
    petal per disjunct; quantifiers become sprinklers (universal in a pistil,
    existential in a petal)."""
    return canonicalize(_encode(f))


def _encode(f: Formula) -> Bouquet:
    if isinstance(f, Atom):
        return (FAtom(f.pred, f.args),)
    if isinstance(f, Top):
        return ()
    if isinstance(f, Bottom):
        return (Bloom(EMPTY_GARDEN, ()),)
    if isinstance(f, And):
        return _encode(f.left) + _encode(f.right)
    if isinstance(f, Implies):
        return (Bloom(Garden((), _encode(f.left)), (Garden((), _encode(f.right)),)),)
    if isinstance(f, Or):
        return (Bloom(EMPTY_GARDEN, (Garden((), _encode(f.left)),
                                     Garden((), _encode(f.right)))),)
    if isinstance(f, Forall):
        body = _encode(f.body)
        if len(body) == 1 and isinstance(body[0], Bloom):
            # merge the binder into the pistil sprinkler: forall x. (A -> B)
            # is the single flower with x sprinkled on the antecedent garden
            g = body[0]
            return (Bloom(Garden((f.var,) + g.pistil.binders, g.pistil.flowers), g.petals),)
        return (Bloom(Garden((f.var,), ()), (Garden((), body),)),)
    if isinstance(f, Exists):
        return (Bloom(EMPTY_GARDEN, (Garden((f.var,), _encode(f.body)),)),)
    raise AssertionError(f)


def decode(b: Bouquet) -> Formula:
    """The coherent reading: a flower is a universally closed implication from
    the conjunction of its pistil to the disjunction of its existentially
    closed petals; empty conjunction is truth, empty disjunction falsum."""
    return _conj([_decode_flower(f) for f in b])


def _decode_flower(f) -> Formula:
    if isinstance(f, FAtom):
        return Atom(f.pred, f.args)
    body = _conj([_decode_flower(x) for x in f.pistil.flowers])
    cases = []
    for p in f.petals:
        case = _conj([_decode_flower(x) for x in p.flowers])
        for v in reversed(p.binders):
            case = Exists(v, case)
        cases.append(case)
    disj = _disj(cases)
    out: Formula = disj if isinstance(body, Top) else Implies(body, disj)
    for v in reversed(f.pistil.binders):
        out = Forall(v, out)
    return out


def _conj(fs: list[Formula]) -> Formula:
    if not fs:
        return Top()
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def _disj(fs: list[Formula]) -> Formula:
    if not fs:
        return Bottom()
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


# ---------------------------------------------------------------------------
# Independent formula-level Kripke evaluator (the oracle)

def eval_formula(m: KripkeModel, w: int, e: Evaluation, f: Formula) -> bool:
    if isinstance(f, Atom):
        return m.holds(f.pred, w, tuple(e(a) for a in f.args))
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, And):
        return eval_formula(m, w, e, f.left) and eval_formula(m, w, e, f.right)
    if isinstance(f, Or):
        return eval_formula(m, w, e, f.left) or eval_formula(m, w, e, f.right)
    if isinstance(f, Implies):
        return all(not eval_formula(m, v, e, f.left) or eval_formula(m, v, e, f.right)
                   for v in m.successors(w))
    if isinstance(f, Forall):
        return all(
            eval_formula(m, v, update(e, (f.var,), Evaluation(((f.var, d),))), f.body)
            for v in m.successors(w) for d in m.domain(v))
    if isinstance(f, Exists):
        return any(
            eval_formula(m, w, update(e, (f.var,), Evaluation(((f.var, d),))), f.body)
            for d in m.domain(w))
    raise AssertionError(f)


def formula_valid(f: Formula, models) -> bool:
    """True when no model in the stream falsifies f at any world (closed or
    propositional formulas only: the evaluation is the default one)."""
    e = Evaluation()
    for m in models:
        for w in m.worlds():
            if not eval_formula(m, w, e, f):
                return False
    return True
