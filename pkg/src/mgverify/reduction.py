"""Elimination of private predicates and construction of the proof goal.

The private predicates of each program are renamed to fresh constants
(``_1`` for the first program, ``_2`` for the second).  Their completed
definitions become axioms, so the second-order completion of each program
turns into a first-order formula over the public symbols plus the fresh
constants.  The goal is::

    (Asm and F_i(p) and G_j(q)) -> (G'(q) <-> F'(p))

checked in two directions: the specification ``F'`` from the translated
program ``G'`` (forward) and ``G'`` from ``F'`` (backward).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Collection, Iterable

from .analysis import gate
from .completion import SecondOrderCompletion, second_order_completion
from .fol import Formula, Implies, Iff, conj, predicates, rename_predicates, to_text
from .syntax import Pred, Program, Sym, predicate_symbols
from .userguide import UserGuide, integrality_assumption

log = logging.getLogger(__name__)

FORWARD = "forward"
BACKWARD = "backward"
DIRECTION_TITLES = {
    FORWARD: "verification of specification from translated program",
    BACKWARD: "verification of translated program from specification",
}


class GatingError(ValueError):
    def __init__(self, diagnostics):
        super().__init__("; ".join(map(str, diagnostics)))
        self.diagnostics = list(diagnostics)


def fresh_rename(privates: Iterable[Pred], suffix: str, taken: Collection[Pred] = (),
                 ) -> dict[Pred, Pred]:
    """Map each private ``p/n`` to ``p<suffix>/n``, avoiding ``taken``.

    A name that is already in use gets a further numeric suffix, and a
    warning is logged.
    """
    taken = set(taken)
    out: dict[Pred, Pred] = {}
    for p in privates:
        target = Pred(p.name + suffix, p.arity)
        k = 1
        while target in taken or target in out.values():
            k += 1
            target = Pred(f"{p.name}{suffix}_{k}", p.arity)
        if k > 1:
            log.warning("renaming %s to %s: %s%s/%d is already in use",
                        p, target, p.name, suffix, p.arity)
        out[p] = target
    return out


def split_completion(comp: SecondOrderCompletion, renaming: dict[Pred, Pred],
                     ) -> tuple[list[Formula], list[Formula]]:
    """Renamed private definitions and the renamed remaining conjuncts."""
    if set(renaming) != set(comp.private):
        raise ValueError("renaming must cover exactly the private symbols")
    defs = [rename_predicates(d.formula, renaming) for d in comp.private_definitions()]
    rest = [rename_predicates(d.formula, renaming) for d in comp.public_definitions()]
    rest += [rename_predicates(c, renaming) for c in comp.body.constraints]
    return defs, rest


def _guide_symbols(guide: UserGuide) -> set[Pred]:
    out = set(guide.inputs) | set(guide.outputs)
    for a in guide.assumptions:
        out |= predicates(a)
    return out


def _check_gate(prog1: Program, prog2: Program | None, guide: UserGuide) -> None:
    diags = gate(prog1, prog2, guide)
    if diags:
        raise GatingError(diags)


@dataclass(frozen=True)
class Specification:
    placeholders: tuple
    inputs: tuple  # In followed by the fresh constants for program-1 privates
    outputs: tuple
    assumptions: tuple  # Asm followed by F_i(p)
    specs: tuple  # conjuncts of F'(p)

    def to_text(self) -> str:
        lines = []
        integral = {c for c in self.placeholders
                    if integrality_assumption(c) in self.assumptions}
        if self.placeholders:
            decl = [f"{c} -> integer" if c in integral else c for c in self.placeholders]
            lines.append(f"input: {', '.join(decl)}.")
        for p in self.inputs:
            lines.append(f"input: {p}.")
        for p in self.outputs:
            lines.append(f"output: {p}.")
        skipped = {integrality_assumption(c) for c in integral}
        for a in self.assumptions:
            if a not in skipped:
                lines.append(f"assume: {to_text(a)}.")
        for s in self.specs:
            lines.append(f"spec: {to_text(s)}.")
        return "\n".join(lines) + "\n"


def _completion(prog: Program, guide: UserGuide) -> SecondOrderCompletion:
    return second_order_completion(prog, guide.inputs, guide.outputs)


def build_specification(prog1: Program, guide: UserGuide, prog2: Program | None = None,
                        check: bool = True) -> Specification:
    if check:
        _check_gate(prog1, prog2, guide)
    comp = _completion(prog1, guide)
    taken = predicate_symbols(prog1) | _guide_symbols(guide)
    if prog2 is not None:
        taken |= predicate_symbols(prog2)
    ren = fresh_rename(comp.private, "_1", taken)
    defs, rest = split_completion(comp, ren)
    return Specification(
        placeholders=guide.placeholders,
        inputs=tuple(sorted(guide.inputs)) + tuple(ren[p] for p in comp.private),
        outputs=tuple(sorted(guide.outputs)),
        assumptions=guide.assumptions + tuple(defs),
        specs=tuple(rest),
    )


@dataclass(frozen=True)
class GoalCondition:
    axioms: tuple  # Asm, F_i(p), G_j(q)
    spec_conjuncts: tuple  # F'(p)
    program_conjuncts: tuple  # G'(q)
    placeholders: tuple = ()

    def formula(self) -> Formula:
        return Implies(conj(*self.axioms),
                       Iff(conj(*self.program_conjuncts), conj(*self.spec_conjuncts)))

    def hypotheses(self, direction: str) -> list[Formula]:
        extra = self.program_conjuncts if direction == FORWARD else self.spec_conjuncts
        return list(self.axioms) + list(extra)

    def goals(self, direction: str) -> list[Formula]:
        return list(self.spec_conjuncts if direction == FORWARD else self.program_conjuncts)


def _program_side(prog2: Program, guide: UserGuide, taken: set[Pred]):
    comp = _completion(prog2, guide)
    ren = fresh_rename(comp.private, "_2", taken)
    return split_completion(comp, ren)


def goal_from_specification(spec: Specification, prog2: Program, guide: UserGuide,
                            taken: Collection[Pred] = ()) -> GoalCondition:
    """The goal obtained by checking that ``prog2`` implements ``spec``."""
    taken = set(taken) | set(spec.inputs) | set(spec.outputs) | predicate_symbols(prog2)
    for f in spec.assumptions + spec.specs:
        taken |= predicates(f)
    defs2, rest2 = _program_side(prog2, guide, taken)
    return GoalCondition(spec.assumptions + tuple(defs2), spec.specs, tuple(rest2),
                         spec.placeholders)


def build_goal(prog1: Program, prog2: Program, guide: UserGuide, check: bool = True,
               ) -> GoalCondition:
    if check:
        _check_gate(prog1, prog2, guide)
    taken = predicate_symbols(prog1) | predicate_symbols(prog2) | _guide_symbols(guide)
    comp1 = _completion(prog1, guide)
    ren1 = fresh_rename(comp1.private, "_1", taken)
    defs1, rest1 = split_completion(comp1, ren1)
    defs2, rest2 = _program_side(prog2, guide, taken | set(ren1.values()))
    return GoalCondition(guide.assumptions + tuple(defs1) + tuple(defs2), tuple(rest1),
                         tuple(rest2), guide.placeholders)


def placeholder_constants(guide: UserGuide) -> set[Sym]:
    return {Sym(c) for c in guide.placeholders}
