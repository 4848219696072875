"""User guides, guide inputs and helper files.

A user guide file is a sequence of ``.``-terminated statements::

    input: a -> integer, b -> integer.
    input: living/1, father/2.
    output: prime/1.
    assume: exists N (a = N).

Helper files use ``lemma:`` (optionally ``lemma(forward):`` or
``lemma(backward):``) and ``induction:`` statements.  Comments start with
``%`` or ``#``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .fol import (Cmp, Exists, Formula, FormulaParser, Interpretation, Sort, Var, constants,
                  evaluate, free_variables, predicates, to_text)
from .syntax import Num, Precomputed, Pred, Sym, tokenize


class GuideError(ValueError):
    pass


@dataclass(frozen=True)
class Statement:
    kind: str  # input, output, assume, spec, lemma, induction
    payload: object
    direction: str = "both"  # lemmas only: both, forward, backward


_KINDS = ("input", "output", "assume", "spec", "lemma", "induction")


class _StatementParser(FormulaParser):
    def statements(self) -> list[Statement]:
        out = []
        while self.peek().kind != "EOF":
            out.extend(self.statement())
        return out

    def statement(self) -> list[Statement]:
        tok = self.next()
        if tok.kind != "IDENT" or tok.text not in _KINDS:
            raise self.error(f"expected one of {', '.join(_KINDS)}, found {tok.text!r}", tok)
        direction = "both"
        if tok.text == "lemma" and self.accept("("):
            d = self.next()
            if d.text not in ("forward", "backward"):
                raise self.error("lemma direction must be forward or backward", d)
            direction = d.text
            self.expect(")")
        self.expect(":")
        if tok.text in ("input", "output"):
            items = [self._declaration(tok.text)]
            while self.accept(","):
                items.append(self._declaration(tok.text))
            result = [Statement(tok.text, item) for item in items]
        else:
            result = [Statement(tok.text, self.formula(), direction)]
        self.expect(".")
        return result

    def _declaration(self, kind: str):
        tok = self.next()
        if tok.kind != "IDENT":
            raise self.error(f"expected a symbol, found {tok.text or 'end of input'!r}", tok)
        if self.accept("/"):
            n = self.next()
            if n.kind != "INT":
                raise self.error("expected an arity", n)
            return Pred(tok.text, int(n.text))
        if kind == "output":
            raise self.error(f"output statements declare predicate symbols p/n, not {tok.text!r}",
                             tok)
        if self.accept("->"):
            s = self.next()
            if s.text not in ("integer", "general"):
                raise self.error("placeholder sort must be integer or general", s)
            return (tok.text, s.text)
        return (tok.text, "general")


def parse_statements(text: str) -> list[Statement]:
    return _StatementParser(tokenize(text, hash_comments=True)).statements()


def integrality_assumption(name: str) -> Formula:
    return Exists((Var("N", Sort.INTEGER),), Cmp(Sym(name), "=", Var("N", Sort.INTEGER)))


@dataclass(frozen=True)
class UserGuide:
    placeholders: tuple = ()
    inputs: frozenset = frozenset()
    outputs: frozenset = frozenset()
    assumptions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        object.__setattr__(self, "placeholders", tuple(dict.fromkeys(self.placeholders)))
        object.__setattr__(self, "assumptions", tuple(self.assumptions))
        overlap = self.inputs & self.outputs
        if overlap:
            raise GuideError("symbols declared both input and output: "
                             + ", ".join(sorted(map(str, overlap))))
        for a in self.assumptions:
            extra = predicates(a) - self.inputs
            if extra:
                raise GuideError(f"assumption {to_text(a)} mentions non-input symbols: "
                                 + ", ".join(sorted(map(str, extra))))
            if free_variables(a):
                raise GuideError(f"assumption {to_text(a)} has free variables")

    def with_assumptions(self, extra: Iterable[Formula]) -> "UserGuide":
        return UserGuide(self.placeholders, self.inputs, self.outputs,
                         self.assumptions + tuple(extra))

    def to_text(self) -> str:
        lines = []
        if self.placeholders:
            lines.append(f"input: {', '.join(self.placeholders)}.")
        if self.inputs:
            lines.append(f"input: {', '.join(map(str, sorted(self.inputs)))}.")
        if self.outputs:
            lines.append(f"output: {', '.join(map(str, sorted(self.outputs)))}.")
        lines += [f"assume: {to_text(a)}." for a in self.assumptions]
        return "\n".join(lines) + "\n"


def _guide_from_statements(stmts: list[Statement]) -> UserGuide:
    ph, ins, outs, asm = [], set(), set(), []
    for s in stmts:
        if s.kind == "input":
            if isinstance(s.payload, Pred):
                ins.add(s.payload)
            else:
                name, sort = s.payload
                ph.append(name)
                if sort == "integer":
                    asm.append(integrality_assumption(name))
        elif s.kind == "output":
            outs.add(s.payload)
        elif s.kind == "assume":
            asm.append(s.payload)
        else:
            raise GuideError(f"{s.kind} statements are not allowed in a user guide")
    return UserGuide(tuple(ph), frozenset(ins), frozenset(outs), tuple(asm))


def parse_user_guide(text: str) -> UserGuide:
    return _guide_from_statements(parse_statements(text))


@dataclass(frozen=True)
class HelperFile:
    lemmas: tuple = ()  # (formula, direction)
    induction: tuple = ()

    def lemmas_for(self, direction: str) -> list[Formula]:
        return [f for f, d in self.lemmas if d in ("both", direction)]


def parse_helper(text: str) -> HelperFile:
    lemmas, induction = [], []
    for s in parse_statements(text):
        if s.kind == "lemma":
            if free_variables(s.payload):
                raise GuideError(f"lemma {to_text(s.payload)} has free variables")
            lemmas.append((s.payload, s.direction))
        elif s.kind == "induction":
            if free_variables(s.payload):
                raise GuideError(f"induction axiom {to_text(s.payload)} has free variables")
            induction.append(s.payload)
        else:
            raise GuideError(f"{s.kind} statements are not allowed in a helper file")
    return HelperFile(tuple(lemmas), tuple(induction))


def merge_helpers(helpers: Iterable[HelperFile]) -> HelperFile:
    lemmas, induction = [], []
    for h in helpers:
        lemmas.extend(h.lemmas)
        induction.extend(h.induction)
    return HelperFile(tuple(lemmas), tuple(induction))


@dataclass(frozen=True)
class GuideInput:
    valuation: Mapping[str, Precomputed] = field(default_factory=dict)
    atoms: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        object.__setattr__(self, "valuation", dict(self.valuation))

    def __hash__(self):
        return hash((tuple(sorted(self.valuation.items())), self.atoms))

    def validate(self, guide: UserGuide) -> None:
        ph = set(guide.placeholders)
        if set(self.valuation) != ph:
            raise GuideError(f"valuation must assign exactly the placeholders {sorted(ph)}")
        for c, t in self.valuation.items():
            if isinstance(t, Sym) and t.name in ph:
                raise GuideError(f"placeholder {c} is mapped to placeholder {t}")
        for a in self.atoms:
            if a.pred not in guide.inputs:
                raise GuideError(f"input atom {a} does not use an input symbol")
            for t in a.args:
                if isinstance(t, Sym) and t.name in ph:
                    raise GuideError(f"input atom {a} contains placeholder {t}")

    def describe(self) -> str:
        parts = [f"{c}={t}" for c, t in sorted(self.valuation.items())]
        parts += [f"{a}." for a in sorted(self.atoms)]
        return " ".join(parts) if parts else "(empty input)"


def input_universe(guide: UserGuide, gi: GuideInput, window: tuple[int, int] | None = None,
                   extra: Iterable[Precomputed] = ()) -> set[Precomputed]:
    """Finite stand-in for the set of all precomputed terms: the terms of
    the input, the non-placeholder constants of the assumptions, ``extra``
    and the numerals of ``window``."""
    ph = set(guide.placeholders)
    out = set(extra) | set(gi.valuation.values())
    for a in gi.atoms:
        out.update(a.args)
    for f in guide.assumptions:
        out.update(c for c in constants(f) if not (isinstance(c, Sym) and c.name in ph))
    if window is not None:
        out.update(Num(i) for i in range(window[0], window[1] + 1))
    return out


def input_in_domain(guide: UserGuide, gi: GuideInput, window: tuple[int, int] | None = None,
                    extra: Iterable[Precomputed] = ()) -> bool:
    """Whether ``I(v, atoms)`` satisfies every assumption of ``guide``.

    Quantifiers range over :func:`input_universe`.
    """
    gi.validate(guide)
    if not guide.assumptions:
        return True
    interp = Interpretation(gi.atoms, gi.valuation, input_universe(guide, gi, window, extra))
    return all(evaluate(a, interp) for a in guide.assumptions)
