"""Translation of mini-gringo rules into two-sorted formulas and completion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Iterable

from . import syntax as mg
from .fol import (FALSE, Arith, Atomic, Cmp, Formula, ForAll, Iff, Neg, Not,
                  Sort, Var, conj, disj, exists, fresh_var, predicates, replace_atoms,
                  simplify)
from .syntax import Precomputed, Pred


class CompletionError(ValueError):
    pass


class InputSymbolInHead(CompletionError):
    def __init__(self, pred: Pred):
        super().__init__(f"input symbol in head: {pred}")
        self.pred = pred


class _Names:
    """Fresh-name supply for one disjunct."""

    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)

    def fresh(self, sort: Sort, prefix: str | None = None) -> Var:
        prefix = prefix or ("Z" if sort is Sort.GENERAL else "N")
        v = fresh_var(sort, self.taken, prefix)
        self.taken.add(v.name)
        return v


def _is_integer_term(t, int_vars: Collection[str]) -> bool:
    if isinstance(t, mg.Num) or isinstance(t, (mg.BinOp, mg.Minus, mg.Interval)):
        return True
    return isinstance(t, mg.Var) and t.name in int_vars


def _arith_variables(t, inside: bool = False) -> set[str]:
    if isinstance(t, mg.Var):
        return {t.name} if inside else set()
    if isinstance(t, mg.Minus):
        return _arith_variables(t.arg, True)
    if isinstance(t, (mg.BinOp,)):
        return _arith_variables(t.left, True) | _arith_variables(t.right, True)
    if isinstance(t, mg.Interval):
        return _arith_variables(t.low, True) | _arith_variables(t.high, True)
    return set()


def integer_variables(rule: mg.Rule) -> set[str]:
    """Rule variables that can only take integer values in a firing instance.

    These are the variables occurring inside arithmetic or interval terms and
    the variables equated in the body to an integer-valued term.
    """
    terms = list(rule.head.args) if rule.head is not None else []
    for e in rule.body:
        terms.extend(mg.element_terms(e))
    out: set[str] = set()
    for t in terms:
        out |= _arith_variables(t)
    equations = [e for e in rule.body if isinstance(e, mg.Comparison) and e.op == "="]
    changed = True
    while changed:
        changed = False
        for e in equations:
            for a, b in ((e.left, e.right), (e.right, e.left)):
                if isinstance(a, mg.Var) and a.name not in out and _is_integer_term(b, out):
                    out.add(a.name)
                    changed = True
    return out


def term_value_formula(t, z: Var, names: _Names, env: dict[str, Var] | None = None) -> Formula:
    """Formula that holds iff ``z`` is one of the values of the term ``t``.

    ``env`` maps program variable names to the formula variables standing
    for them (by default, a general variable of the same name).
    """
    env = env or {}
    if isinstance(t, Precomputed):
        return Cmp(z, "=", t)
    if isinstance(t, mg.Var):
        return Cmp(z, "=", env.get(t.name, Var(t.name)))
    if isinstance(t, mg.Minus):
        i = names.fresh(Sort.INTEGER)
        return exists([i], conj(Cmp(z, "=", Neg(i)), term_value_formula(t.arg, i, names, env)))
    if isinstance(t, mg.BinOp):
        i = names.fresh(Sort.INTEGER)
        j = names.fresh(Sort.INTEGER)
        return exists([i, j], conj(Cmp(z, "=", Arith(t.op, i, j)),
                                   term_value_formula(t.left, i, names, env),
                                   term_value_formula(t.right, j, names, env)))
    if isinstance(t, mg.Interval):
        i = names.fresh(Sort.INTEGER)
        j = names.fresh(Sort.INTEGER)
        k = names.fresh(Sort.INTEGER)
        return exists([i, j, k], conj(term_value_formula(t.low, i, names, env),
                                      term_value_formula(t.high, j, names, env),
                                      Cmp(i, "<=", k), Cmp(k, "<=", j), Cmp(z, "=", k)))
    raise TypeError(f"not a mini-gringo term: {t!r}")


def _atom_formula(atom: mg.Atom, names: _Names, env, negations: int) -> Formula:
    zs = [names.fresh(Sort.GENERAL) for _ in atom.args]
    inner: Formula = Atomic(atom.pred, tuple(zs))
    for _ in range(negations):
        inner = Not(inner)
    vals = [term_value_formula(t, z, names, env) for t, z in zip(atom.args, zs)]
    return exists(zs, conj(*vals, inner))


_NEGATIONS = {mg.Sign.POS: 0, mg.Sign.NOT: 1, mg.Sign.NOTNOT: 2}


def body_formula(element, names: _Names, env) -> Formula:
    if isinstance(element, mg.Literal):
        return _atom_formula(element.atom, names, env, _NEGATIONS[element.sign])
    z1 = names.fresh(Sort.GENERAL)
    z2 = names.fresh(Sort.GENERAL)
    return exists([z1, z2], conj(term_value_formula(element.left, z1, names, env),
                                 term_value_formula(element.right, z2, names, env),
                                 Cmp(z1, element.op, z2)))


def head_variables(arity: int) -> tuple[Var, ...]:
    if arity == 1:
        return (Var("V"),)
    return tuple(Var(f"V{i}") for i in range(1, arity + 1))


_GENERAL_INITIALS = "UVWXYZ"
_INTEGER_INITIALS = "IJKLMN"


def _rule_environment(rule: mg.Rule, reserved: Collection[str]) -> tuple[dict[str, Var], _Names]:
    """Formula variables for the variables of ``rule``.

    Names that already follow the sort convention are kept; the others are
    replaced by fresh ``X``/``N`` names.
    """
    ints = integer_variables(rule)
    order = []
    terms = list(rule.head.args) if rule.head is not None else []
    for e in rule.body:
        terms.extend(mg.element_terms(e))
    for t in terms:
        for name in _ordered_variables(t):
            if name not in order:
                order.append(name)
    taken = set(reserved) | set(order)
    names = _Names(taken)
    env: dict[str, Var] = {}
    for name in order:
        sort = Sort.INTEGER if name in ints else Sort.GENERAL
        initials = _INTEGER_INITIALS if sort is Sort.INTEGER else _GENERAL_INITIALS
        if name[0] in initials and name not in reserved:
            env[name] = Var(name, sort)
        else:
            env[name] = names.fresh(sort, "X" if sort is Sort.GENERAL else "N")
    # fresh val/body variables must not collide with kept rule-variable names
    names.taken |= {v.name for v in env.values()}
    return env, names


def _ordered_variables(t) -> list[str]:
    if isinstance(t, mg.Var):
        return [t.name]
    if isinstance(t, mg.Minus):
        return _ordered_variables(t.arg)
    if isinstance(t, mg.BinOp):
        return _ordered_variables(t.left) + _ordered_variables(t.right)
    if isinstance(t, mg.Interval):
        return _ordered_variables(t.low) + _ordered_variables(t.high)
    return []


def rule_body_formula(rule: mg.Rule, env, names: _Names) -> Formula:
    return conj(*(body_formula(e, names, env) for e in rule.body))


def definition_disjunct(rule: mg.Rule, params: tuple[Var, ...]) -> Formula:
    """Existentially closed body of ``rule`` plus the head-value bindings."""
    env, names = _rule_environment(rule, {v.name for v in params})
    parts = [rule_body_formula(rule, env, names)]
    for t, v in zip(rule.head.args, params):
        parts.append(term_value_formula(t, v, names, env))
    if rule.choice:
        parts.append(Atomic(rule.head.pred, params))
    return exists(env.values(), conj(*parts))


def constraint_formula(rule: mg.Rule) -> Formula:
    env, names = _rule_environment(rule, ())
    return Not(exists(env.values(), rule_body_formula(rule, env, names)))


@dataclass(frozen=True)
class CompletedDefinition:
    predicate: Pred
    params: tuple
    rhs: Formula

    @property
    def formula(self) -> Formula:
        atom = Atomic(self.predicate, self.params)
        body = Iff(atom, self.rhs)
        return ForAll(self.params, body) if self.params else body

    def __str__(self):
        return str(self.formula)


def _unique_rules(prog: mg.Program) -> list[mg.Rule]:
    return list(dict.fromkeys(prog.rules))


def completed_definition(pred: Pred, prog: mg.Program, do_simplify: bool = True,
                         ) -> CompletedDefinition:
    params = head_variables(pred.arity)
    disjuncts = [definition_disjunct(r, params) for r in _unique_rules(prog)
                 if r.head is not None and r.head.pred == pred]
    rhs = disj(*disjuncts) if disjuncts else FALSE
    if do_simplify:
        rhs = simplify(rhs)
    return CompletedDefinition(pred, params, rhs)


@dataclass(frozen=True)
class FirstOrderCompletion:
    definitions: tuple
    constraints: tuple = ()

    def definition(self, pred: Pred) -> CompletedDefinition:
        for d in self.definitions:
            if d.predicate == pred:
                return d
        raise KeyError(pred)

    def conjuncts(self) -> list[Formula]:
        return [d.formula for d in self.definitions] + list(self.constraints)

    @property
    def formula(self) -> Formula:
        return conj(*self.conjuncts())

    def unfold(self, preds: Iterable[Pred]) -> "FirstOrderCompletion":
        """Substitute the definitions of ``preds`` into the remaining
        formulas and drop them.  The definitions must not be recursive."""
        defs = list(self.definitions)
        constraints = list(self.constraints)
        for p in preds:
            found = [r for r in defs if r.predicate == p]
            if not found:
                raise KeyError(p)
            d = found[0]
            if p in predicates(d.rhs):
                raise CompletionError(f"cannot unfold recursive definition of {p}")
            defs = [CompletedDefinition(r.predicate, r.params,
                                        simplify(replace_atoms(r.rhs, p, d.params, d.rhs)))
                    for r in defs if r.predicate != p]
            constraints = [simplify(replace_atoms(c, p, d.params, d.rhs)) for c in constraints]
        return FirstOrderCompletion(tuple(defs), tuple(constraints))


@dataclass(frozen=True)
class SecondOrderCompletion:
    """``exists P (completion)`` with ``P`` the private predicates; kept
    symbolic, never built as a formula with predicate variables."""

    private: tuple
    body: FirstOrderCompletion

    def private_definitions(self) -> list[CompletedDefinition]:
        return [d for d in self.body.definitions if d.predicate in self.private]

    def public_definitions(self) -> list[CompletedDefinition]:
        return [d for d in self.body.definitions if d.predicate not in self.private]


def private_predicates(prog: mg.Program, inputs: Collection[Pred], outputs: Collection[Pred],
                       ) -> list[Pred]:
    public = set(inputs) | set(outputs)
    seen = []
    for r in prog:
        for a in mg.rule_atoms(r):
            if a.pred not in public and a.pred not in seen:
                seen.append(a.pred)
    return seen


def check_heads(prog: mg.Program, inputs: Collection[Pred]) -> None:
    for r in prog:
        if r.head is not None and r.head.pred in inputs:
            raise InputSymbolInHead(r.head.pred)


def first_order_completion(prog: mg.Program, inputs: Collection[Pred] = (),
                           outputs: Collection[Pred] = (), do_simplify: bool = True,
                           ) -> FirstOrderCompletion:
    check_heads(prog, inputs)
    privates = private_predicates(prog, inputs, outputs)
    defined = sorted(outputs) + privates
    definitions = tuple(completed_definition(p, prog, do_simplify) for p in defined)
    constraints = []
    for r in _unique_rules(prog):
        if r.head is None:
            c = constraint_formula(r)
            constraints.append(simplify(c) if do_simplify else c)
    return FirstOrderCompletion(definitions, tuple(constraints))


def second_order_completion(prog: mg.Program, inputs: Collection[Pred] = (),
                            outputs: Collection[Pred] = (), do_simplify: bool = True,
                            ) -> SecondOrderCompletion:
    body = first_order_completion(prog, inputs, outputs, do_simplify)
    return SecondOrderCompletion(tuple(private_predicates(prog, inputs, outputs)), body)
