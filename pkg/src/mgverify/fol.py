"""Two-sorted first-order formulas over precomputed terms.

Sort ``general`` ranges over all precomputed terms; its subsort ``integer``
ranges over numerals.  Variables carry their sort explicitly.  In the
textual syntax the sort is read off the first letter of the name: ``U``-``Z``
are general, ``I``-``N`` are integer.

Object constants are the precomputed terms of :mod:`mgverify.syntax`
(``Num``, ``Sym``, ``INF``, ``SUP``) used directly as terms.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Collection, Iterable, Iterator, Mapping, Union

from .syntax import (GroundAtom, Num, ParseError, Precomputed, Pred, Sym,
                     TokenStream, tokenize)


class Sort(enum.Enum):
    GENERAL = "general"
    INTEGER = "integer"


class SortError(TypeError):
    pass


class RenameError(ValueError):
    pass


class UnboundedQuantifier(ValueError):
    pass


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort = Sort.GENERAL

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "Term"

    def __post_init__(self):
        if sort_of(self.arg) is not Sort.INTEGER:
            raise SortError(f"unary minus applied to general term {self.arg}")

    def __str__(self):
        return "-" + _wrap_term(self.arg, 3)


ARITH_OPS = ("+", "-", "*")


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Term"
    right: "Term"

    def __post_init__(self):
        for t in (self.left, self.right):
            if sort_of(t) is not Sort.INTEGER:
                raise SortError(f"arithmetic argument {t} is not integer-sorted")

    def __str__(self):
        prec = 2 if self.op == "*" else 1
        return f"{_wrap_term(self.left, prec)} {self.op} {_wrap_term(self.right, prec + 1)}"


Term = Union[Precomputed, Var, Neg, Arith]


def sort_of(t) -> Sort:
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, (Num, Neg, Arith)):
        return Sort.INTEGER
    return Sort.GENERAL


def _term_prec(t) -> int:
    if isinstance(t, Arith):
        return 2 if t.op == "*" else 1
    if isinstance(t, Neg) or (isinstance(t, Num) and t.value < 0):
        return 3
    return 4


def _wrap_term(t, needed: int) -> str:
    return f"({t})" if _term_prec(t) < needed else str(t)


def term_vars(t) -> set[Var]:
    if isinstance(t, Var):
        return {t}
    if isinstance(t, Neg):
        return term_vars(t.arg)
    if isinstance(t, Arith):
        return term_vars(t.left) | term_vars(t.right)
    return set()


def term_constants(t) -> set[Precomputed]:
    if isinstance(t, Precomputed):
        return {t}
    if isinstance(t, Neg):
        return term_constants(t.arg)
    if isinstance(t, Arith):
        return term_constants(t.left) | term_constants(t.right)
    return set()


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Atomic(Formula):
    predicate: Pred
    args: tuple = ()

    def __post_init__(self):
        if len(self.args) != self.predicate.arity:
            raise ValueError(f"{self.predicate} applied to {len(self.args)} arguments")


CMP_OPS = ("=", "!=", "<", ">", "<=", ">=")


@dataclass(frozen=True, eq=True)
class Cmp(Formula):
    left: Term
    op: str
    right: Term


@dataclass(frozen=True, eq=True)
class _Truth(Formula):
    value: bool


TRUE = _Truth(True)
FALSE = _Truth(False)


@dataclass(frozen=True, eq=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, eq=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True, eq=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class ForAll(Formula):
    vars: tuple
    body: Formula


@dataclass(frozen=True, eq=True)
class Exists(Formula):
    vars: tuple
    body: Formula


Quantified = (ForAll, Exists)


def conj(*fs: Formula) -> Formula:
    fs = tuple(fs)
    if not fs:
        return TRUE
    return fs[0] if len(fs) == 1 else And(fs)


def disj(*fs: Formula) -> Formula:
    fs = tuple(fs)
    if not fs:
        return FALSE
    return fs[0] if len(fs) == 1 else Or(fs)


def exists(vs: Iterable[Var], body: Formula) -> Formula:
    vs = tuple(vs)
    return Exists(vs, body) if vs else body


def forall(vs: Iterable[Var], body: Formula) -> Formula:
    vs = tuple(vs)
    return ForAll(vs, body) if vs else body


def conjuncts(f: Formula) -> list[Formula]:
    """Top-level conjunctive members of ``f``."""
    if isinstance(f, And):
        return [g for a in f.args for g in conjuncts(a)]
    if f == TRUE:
        return []
    return [f]


def _children(f: Formula) -> tuple:
    if isinstance(f, (Not,)):
        return (f.arg,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, (Implies, Iff)):
        return (f.left, f.right)
    if isinstance(f, Quantified):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in _children(f):
        yield from subformulas(c)


def predicates(f: Formula) -> set[Pred]:
    return {g.predicate for g in subformulas(f) if isinstance(g, Atomic)}


def formula_terms(f: Formula) -> Iterator:
    for g in subformulas(f):
        if isinstance(g, Atomic):
            yield from g.args
        elif isinstance(g, Cmp):
            yield g.left
            yield g.right


def constants(f: Formula) -> set[Precomputed]:
    out: set[Precomputed] = set()
    for t in formula_terms(f):
        out |= term_constants(t)
    return out


def free_variables(f: Formula) -> set[Var]:
    if isinstance(f, Atomic):
        return set().union(*map(term_vars, f.args)) if f.args else set()
    if isinstance(f, Cmp):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Quantified):
        return free_variables(f.body) - set(f.vars)
    out: set[Var] = set()
    for c in _children(f):
        out |= free_variables(c)
    return out


def all_variable_names(f: Formula) -> set[str]:
    names = set()
    for g in subformulas(f):
        if isinstance(g, Quantified):
            names.update(v.name for v in g.vars)
    for t in formula_terms(f):
        names.update(v.name for v in term_vars(t))
    return names


def is_sentence(f: Formula) -> bool:
    return not free_variables(f)


def map_formula(f: Formula, fn: Callable[[Formula], Formula | None]) -> Formula:
    """Bottom-up rebuild; ``fn`` may return a replacement or ``None``."""
    if isinstance(f, Not):
        g = Not(map_formula(f.arg, fn))
    elif isinstance(f, And):
        g = And(tuple(map_formula(a, fn) for a in f.args))
    elif isinstance(f, Or):
        g = Or(tuple(map_formula(a, fn) for a in f.args))
    elif isinstance(f, Implies):
        g = Implies(map_formula(f.left, fn), map_formula(f.right, fn))
    elif isinstance(f, Iff):
        g = Iff(map_formula(f.left, fn), map_formula(f.right, fn))
    elif isinstance(f, ForAll):
        g = ForAll(f.vars, map_formula(f.body, fn))
    elif isinstance(f, Exists):
        g = Exists(f.vars, map_formula(f.body, fn))
    else:
        g = f
    r = fn(g)
    return g if r is None else r


# ---------------------------------------------------------------------------
# Renaming and substitution
# ---------------------------------------------------------------------------


def rename_predicates(f: Formula, mapping: Mapping[Pred, Pred]) -> Formula:
    """Replace every atom whose predicate is in ``mapping``.

    Raises :class:`RenameError` if a target symbol already occurs in ``f``.
    """
    if not mapping:
        return f
    targets = list(mapping.values())
    if len(set(targets)) != len(targets):
        raise RenameError("predicate renaming is not injective")
    for src, dst in mapping.items():
        if src.arity != dst.arity:
            raise RenameError(f"renaming {src} to {dst} changes the arity")
    clash = predicates(f) & set(targets)
    if clash:
        raise RenameError("renaming targets already occur: "
                          + ", ".join(sorted(map(str, clash))))

    def fn(g):
        if isinstance(g, Atomic) and g.predicate in mapping:
            return Atomic(mapping[g.predicate], g.args)
        return None

    return map_formula(f, fn)


_SORT_PREFIX = {Sort.GENERAL: "X", Sort.INTEGER: "N"}


def fresh_var(sort: Sort, avoid: Collection[str], prefix: str | None = None) -> Var:
    prefix = prefix or _SORT_PREFIX[sort]
    for i in itertools.count(1):
        name = f"{prefix}{i}"
        if name not in avoid:
            return Var(name, sort)
    raise AssertionError


def substitute_term(t, mapping: Mapping[Var, Term]):
    if isinstance(t, Var):
        return mapping.get(t, t)
    if isinstance(t, Neg):
        return Neg(substitute_term(t.arg, mapping))
    if isinstance(t, Arith):
        return Arith(t.op, substitute_term(t.left, mapping), substitute_term(t.right, mapping))
    return t


def substitute(f: Formula, mapping: Mapping[Var, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    for v, t in mapping.items():
        if v.sort is Sort.INTEGER and sort_of(t) is not Sort.INTEGER:
            raise SortError(f"cannot substitute general term {t} for integer variable {v}")
    mapping = {v: t for v, t in mapping.items() if t != v}
    if not mapping:
        return f
    return _subst(f, mapping)


def _subst(f: Formula, mapping: dict) -> Formula:
    if isinstance(f, Atomic):
        return Atomic(f.predicate, tuple(substitute_term(t, mapping) for t in f.args))
    if isinstance(f, Cmp):
        return Cmp(substitute_term(f.left, mapping), f.op, substitute_term(f.right, mapping))
    if isinstance(f, _Truth):
        return f
    if isinstance(f, Not):
        return Not(_subst(f.arg, mapping))
    if isinstance(f, And):
        return And(tuple(_subst(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_subst(a, mapping) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_subst(f.left, mapping), _subst(f.right, mapping))
    if isinstance(f, Iff):
        return Iff(_subst(f.left, mapping), _subst(f.right, mapping))
    # quantifier
    body_free = free_variables(f.body)
    inner = {v: t for v, t in mapping.items() if v not in f.vars and v in body_free}
    if not inner:
        return f
    incoming = set()
    for t in inner.values():
        incoming |= {v.name for v in term_vars(t)}
    new_vars = []
    renames = {}
    avoid = incoming | {v.name for v in body_free} | all_variable_names(f.body) \
        | {v.name for v in inner}
    for v in f.vars:
        if v.name in incoming:
            nv = fresh_var(v.sort, avoid, v.name.rstrip("0123456789") or None)
            avoid.add(nv.name)
            renames[v] = nv
            new_vars.append(nv)
        else:
            new_vars.append(v)
    body = _subst(f.body, renames) if renames else f.body
    return type(f)(tuple(new_vars), _subst(body, inner))


def replace_atoms(f: Formula, pred: Pred, params: tuple, definition: Formula) -> Formula:
    """Replace each atom ``pred(t)`` in ``f`` by ``definition[params := t]``."""

    def fn(g):
        if isinstance(g, Atomic) and g.predicate == pred:
            return substitute(definition, dict(zip(params, g.args)))
        return None

    return map_formula(f, fn)


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------


def _ground_compare(left, op: str, right) -> bool | None:
    """Decide a comparison of two constants when placeholders cannot
    interfere (symbolic constants may be placeholders)."""
    if left == right and op in ("=", "<=", ">="):
        return True
    if left == right and op in ("!=", "<", ">"):
        return False
    if not (isinstance(left, Precomputed) and isinstance(right, Precomputed)):
        return None
    if isinstance(left, Sym) or isinstance(right, Sym):
        return None
    return compare(left, op, right)


def compare(left: Precomputed, op: str, right: Precomputed) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    a, b = left.key(), right.key()
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    raise ValueError(op)


def simplify(f: Formula) -> Formula:
    """Return an equivalent, usually smaller formula.

    Applies truth-constant absorption, flattening of ``and``/``or``, double
    negation removal, merging and pruning of quantifiers, and elimination
    of existential witnesses: ``exists X (X = t and F)`` becomes ``F[X:=t]``
    when the sort of ``t`` fits ``X`` and ``X`` does not occur in ``t``.
    """
    if isinstance(f, Cmp):
        r = _ground_compare(f.left, f.op, f.right)
        return f if r is None else (TRUE if r else FALSE)
    if isinstance(f, (Atomic, _Truth)):
        return f
    if isinstance(f, Not):
        a = simplify(f.arg)
        if isinstance(a, _Truth):
            return FALSE if a.value else TRUE
        if isinstance(a, Not):
            return a.arg
        return Not(a)
    if isinstance(f, And):
        return _simplify_junction(And, [simplify(a) for a in f.args])
    if isinstance(f, Or):
        return _simplify_junction(Or, [simplify(a) for a in f.args])
    if isinstance(f, Implies):
        a, b = simplify(f.left), simplify(f.right)
        if a == TRUE:
            return b
        if a == FALSE or b == TRUE:
            return TRUE
        if b == FALSE:
            return simplify(Not(a))
        if a == b:
            return TRUE
        return Implies(a, b)
    if isinstance(f, Iff):
        a, b = simplify(f.left), simplify(f.right)
        if a == TRUE:
            return b
        if b == TRUE:
            return a
        if a == FALSE:
            return simplify(Not(b))
        if b == FALSE:
            return simplify(Not(a))
        if a == b:
            return TRUE
        return Iff(a, b)
    if isinstance(f, ForAll):
        return _simplify_forall(f)
    if isinstance(f, Exists):
        return _simplify_exists(f)
    raise TypeError(f)


def _simplify_junction(kind, args: list[Formula]) -> Formula:
    unit, zero = (TRUE, FALSE) if kind is And else (FALSE, TRUE)
    flat: list[Formula] = []
    for a in args:
        members = a.args if isinstance(a, kind) else (a,)
        for m in members:
            if m == zero:
                return zero
            if m != unit and m not in flat:
                flat.append(m)
    if not flat:
        return unit
    return flat[0] if len(flat) == 1 else kind(tuple(flat))


def _simplify_forall(f: ForAll) -> Formula:
    body = simplify(f.body)
    vs = list(f.vars)
    while isinstance(body, ForAll):
        vs = [v for v in vs if v not in body.vars] + list(body.vars)
        body = body.body
    free = free_variables(body)
    vs = [v for v in vs if v in free]
    return ForAll(tuple(vs), body) if vs else body


def _simplify_exists(f: Exists) -> Formula:
    body = simplify(f.body)
    vs = list(f.vars)
    while True:
        if isinstance(body, Exists):
            vs = [v for v in vs if v not in body.vars] + list(body.vars)
            body = body.body
            continue
        if isinstance(body, And) and any(isinstance(a, Exists) for a in body.args):
            body, vs = _pull_exists(body, vs)
            continue
        break
    changed = True
    while changed:
        changed = False
        free = free_variables(body)
        vs = [v for v in vs if v in free]
        parts = conjuncts(body)
        for v in vs:
            witness = _find_witness(v, parts)
            if witness is None:
                continue
            idx, t = witness
            rest = parts[:idx] + parts[idx + 1:]
            body = simplify(substitute(conj(*rest), {v: t}))
            vs.remove(v)
            changed = True
            break
        if changed and isinstance(body, (Exists, And)):
            return _simplify_exists(Exists(tuple(vs), body)) if vs else body
    free = free_variables(body)
    vs = [v for v in vs if v in free]
    if not vs:
        return body
    if isinstance(body, _Truth):
        return body
    return Exists(tuple(vs), body)


def _pull_exists(body: And, vs: list[Var]) -> tuple[Formula, list[Var]]:
    """Move quantifiers of existential conjuncts to the enclosing prefix."""
    parts: list[Formula] = []
    new_vs = list(vs)
    taken = {v.name for v in vs} | all_variable_names(body)
    others_free: set[str] = set()
    for a in body.args:
        if not isinstance(a, Exists):
            others_free |= {v.name for v in free_variables(a)}
    for a in body.args:
        if not isinstance(a, Exists):
            parts.append(a)
            continue
        renames = {}
        for v in a.vars:
            if v in new_vs or v.name in others_free:
                nv = fresh_var(v.sort, taken, v.name.rstrip("0123456789") or None)
                taken.add(nv.name)
                renames[v] = nv
                new_vs.append(nv)
            else:
                new_vs.append(v)
        inner = substitute(a.body, renames) if renames else a.body
        others_free |= {v.name for v in free_variables(inner)}
        parts.extend(conjuncts(inner))
    return conj(*parts), new_vs


def _find_witness(v: Var, parts: list[Formula]):
    for i, p in enumerate(parts):
        if not (isinstance(p, Cmp) and p.op == "="):
            continue
        for a, b in ((p.left, p.right), (p.right, p.left)):
            if a != v or v in term_vars(b):
                continue
            if v.sort is Sort.INTEGER and sort_of(b) is not Sort.INTEGER:
                continue
            return i, b
    return None


# ---------------------------------------------------------------------------
# Alpha-equivalence modulo commutativity
# ---------------------------------------------------------------------------

_FLIP = {">": "<", ">=": "<="}


def _normal_cmp(c: Cmp) -> tuple:
    if c.op in _FLIP:
        return (c.right, _FLIP[c.op], c.left)
    return (c.left, c.op, c.right)


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    """Structural equality up to renaming of bound variables, order of
    variables within a quantifier, order of ``and``/``or`` members,
    orientation of ``=``/``!=`` and ``>``/``<`` flips."""
    return next(_match(_standardize(f), _standardize(g), {}, {}), None) is not None


def _standardize(f: Formula) -> Formula:
    counter = itertools.count()

    def walk(h: Formula, ren: dict) -> Formula:
        if isinstance(h, Quantified):
            ren = dict(ren)
            nvs = []
            for v in h.vars:
                nv = Var(f"#{next(counter)}", v.sort)
                ren[v] = nv
                nvs.append(nv)
            return type(h)(tuple(nvs), walk(h.body, ren))
        if isinstance(h, Atomic):
            return Atomic(h.predicate, tuple(substitute_term(t, ren) for t in h.args))
        if isinstance(h, Cmp):
            return Cmp(substitute_term(h.left, ren), h.op, substitute_term(h.right, ren))
        if isinstance(h, Not):
            return Not(walk(h.arg, ren))
        if isinstance(h, (And, Or)):
            return type(h)(tuple(walk(a, ren) for a in h.args))
        if isinstance(h, (Implies, Iff)):
            return type(h)(walk(h.left, ren), walk(h.right, ren))
        return h

    return walk(f, {})


def _match_term(s, t, fwd: dict, bwd: dict):
    if isinstance(s, Var) and s.name.startswith("#"):
        if not (isinstance(t, Var) and t.name.startswith("#") and s.sort == t.sort):
            return
        if s in fwd:
            if fwd[s] == t:
                yield fwd, bwd
            return
        if t in bwd:
            return
        yield {**fwd, s: t}, {**bwd, t: s}
        return
    if type(s) is not type(t):
        return
    if isinstance(s, Neg):
        yield from _match_term(s.arg, t.arg, fwd, bwd)
    elif isinstance(s, Arith):
        if s.op != t.op:
            return
        for e1 in _match_term(s.left, t.left, fwd, bwd):
            yield from _match_term(s.right, t.right, *e1)
    elif s == t:
        yield fwd, bwd


def _match_seq(ss, ts, fwd, bwd):
    if not ss:
        yield fwd, bwd
        return
    for e in _match_term(ss[0], ts[0], fwd, bwd):
        yield from _match_seq(ss[1:], ts[1:], *e)


def _match(f: Formula, g: Formula, fwd: dict, bwd: dict):
    if isinstance(f, Cmp) and isinstance(g, Cmp):
        a, op, b = _normal_cmp(f)
        c, op2, d = _normal_cmp(g)
        if op != op2:
            return
        yield from _match_seq((a, b), (c, d), fwd, bwd)
        if op in ("=", "!="):
            yield from _match_seq((a, b), (d, c), fwd, bwd)
        return
    if type(f) is not type(g):
        return
    if isinstance(f, Atomic):
        if f.predicate == g.predicate:
            yield from _match_seq(f.args, g.args, fwd, bwd)
    elif isinstance(f, _Truth):
        if f == g:
            yield fwd, bwd
    elif isinstance(f, Not):
        yield from _match(f.arg, g.arg, fwd, bwd)
    elif isinstance(f, (And, Or)):
        if len(f.args) == len(g.args):
            yield from _match_multiset(list(f.args), list(g.args), fwd, bwd)
    elif isinstance(f, Implies):
        for e in _match(f.left, g.left, fwd, bwd):
            yield from _match(f.right, g.right, *e)
    elif isinstance(f, Iff):
        for e in _match(f.left, g.left, fwd, bwd):
            yield from _match(f.right, g.right, *e)
        for e in _match(f.left, g.right, fwd, bwd):
            yield from _match(f.right, g.left, *e)
    elif isinstance(f, Quantified):
        if sorted(v.sort.value for v in f.vars) != sorted(v.sort.value for v in g.vars):
            return
        for fwd2, bwd2 in _match(f.body, g.body, fwd, bwd):
            # bound variables must correspond to bound variables of the same block
            if all(fwd2.get(v, None) in g.vars or v not in fwd2 for v in f.vars):
                yield fwd2, bwd2


def _match_multiset(fs: list, gs: list, fwd, bwd):
    if not fs:
        yield fwd, bwd
        return
    head, rest = fs[0], fs[1:]
    for i, g in enumerate(gs):
        for e in _match(head, g, fwd, bwd):
            yield from _match_multiset(rest, gs[:i] + gs[i + 1:], *e)


# ---------------------------------------------------------------------------
# Evaluation in finite standard interpretations
# ---------------------------------------------------------------------------


@dataclass
class Interpretation:
    """A finite fragment of the standard interpretation ``I(v, atoms)``.

    ``universe`` is the set of precomputed terms general variables range
    over; integer variables range over its numerals.  Symbolic constants in
    ``valuation`` denote their values, every other precomputed term denotes
    itself.  An atom is true iff it belongs to ``atoms``.
    """

    atoms: Collection[GroundAtom] = frozenset()
    valuation: Mapping[str, Precomputed] = field(default_factory=dict)
    universe: Collection[Precomputed] | None = None

    def __post_init__(self):
        if not isinstance(self.atoms, (set, frozenset)):
            self.atoms = frozenset(self.atoms)
        if self.universe is not None:
            self.universe = sorted(set(self.universe))
            self._integers = [t for t in self.universe if isinstance(t, Num)]

    def domain(self, sort: Sort) -> list[Precomputed]:
        if self.universe is None:
            raise UnboundedQuantifier("quantifier needs a finite universe")
        return self.universe if sort is Sort.GENERAL else self._integers

    def value(self, t, env: Mapping[Var, Precomputed]) -> Precomputed:
        if isinstance(t, Var):
            return env[t]
        if isinstance(t, Sym):
            return self.valuation.get(t.name, t)
        if isinstance(t, Precomputed):
            return t
        if isinstance(t, Neg):
            return Num(-_int(self.value(t.arg, env)))
        a, b = _int(self.value(t.left, env)), _int(self.value(t.right, env))
        if t.op == "+":
            return Num(a + b)
        if t.op == "-":
            return Num(a - b)
        return Num(a * b)


def _int(v: Precomputed) -> int:
    if not isinstance(v, Num):
        raise SortError(f"{v} is not an integer")
    return v.value


def make_universe(terms: Iterable[Precomputed], window: tuple[int, int] | None = None,
                  ) -> list[Precomputed]:
    out = set(terms)
    if window is not None:
        out.update(Num(i) for i in range(window[0], window[1] + 1))
    return sorted(out)


def evaluate(f: Formula, interp: Interpretation, env: Mapping[Var, Precomputed] | None = None,
             ) -> bool:
    """Truth value of ``f`` in ``interp`` (free variables read from ``env``)."""
    return _eval(f, interp, dict(env or {}))


def _eval(f: Formula, I: Interpretation, env: dict) -> bool:
    if isinstance(f, Atomic):
        return GroundAtom(f.predicate.name, tuple(I.value(t, env) for t in f.args)) in I.atoms
    if isinstance(f, Cmp):
        return compare(I.value(f.left, env), f.op, I.value(f.right, env))
    if isinstance(f, _Truth):
        return f.value
    if isinstance(f, Not):
        return not _eval(f.arg, I, env)
    if isinstance(f, And):
        return all(_eval(a, I, env) for a in f.args)
    if isinstance(f, Or):
        return any(_eval(a, I, env) for a in f.args)
    if isinstance(f, Implies):
        return (not _eval(f.left, I, env)) or _eval(f.right, I, env)
    if isinstance(f, Iff):
        return _eval(f.left, I, env) == _eval(f.right, I, env)
    if isinstance(f, Exists):
        return _eval_exists(list(f.vars), f.body, I, env)
    if isinstance(f, ForAll):
        return not _eval_exists(list(f.vars), Not(f.body), I, env)
    raise TypeError(f)


def _eval_exists(vs: list[Var], body: Formula, I: Interpretation, env: dict) -> bool:
    if not vs:
        return _eval(body, I, env)
    # an equation v = t among the conjuncts pins v to a single candidate
    parts = body.args if isinstance(body, And) else (body,)
    for v in vs:
        for p in parts:
            if not (isinstance(p, Cmp) and p.op == "="):
                continue
            for a, b in ((p.left, p.right), (p.right, p.left)):
                if a == v and not (term_vars(b) - set(env)) and not (term_vars(b) & set(vs)):
                    val = I.value(b, env)
                    if v.sort is Sort.INTEGER and not isinstance(val, Num):
                        return False
                    if val not in I.domain(v.sort):
                        return False
                    rest = [w for w in vs if w != v]
                    return _eval_exists(rest, body, I, {**env, v: val})
    v, rest = vs[0], vs[1:]
    missing = object()
    saved = env.get(v, missing)  # restore a shadowed outer binding afterwards
    try:
        for val in I.domain(v.sort):
            env[v] = val
            if _eval_exists(rest, body, I, env):
                return True
        return False
    finally:
        if saved is missing:
            env.pop(v, None)
        else:
            env[v] = saved


# ---------------------------------------------------------------------------
# Text syntax
# ---------------------------------------------------------------------------

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}


def to_text(f: Formula) -> str:
    """Render ``f`` in the ASCII syntax used by user-guide files."""
    if isinstance(f, Atomic):
        if not f.args:
            return f.predicate.name
        return f"{f.predicate.name}({', '.join(map(str, f.args))})"
    if isinstance(f, Cmp):
        return f"{f.left} {f.op} {f.right}"
    if isinstance(f, _Truth):
        return "#true" if f.value else "#false"
    if isinstance(f, Not):
        return "not " + _wrap_formula(f.arg, 5)
    if isinstance(f, (And, Or)):
        word = " and " if isinstance(f, And) else " or "
        return word.join(_wrap_formula(a, _PREC[type(f)] + 1) for a in f.args)
    if isinstance(f, Implies):
        return f"{_wrap_formula(f.left, 3)} -> {_wrap_formula(f.right, 2)}"
    if isinstance(f, Iff):
        return f"{_wrap_formula(f.left, 2)} <-> {_wrap_formula(f.right, 2)}"
    if isinstance(f, Quantified):
        word = "forall" if isinstance(f, ForAll) else "exists"
        return f"{word} {', '.join(v.name for v in f.vars)} ({to_text(f.body)})"
    raise TypeError(f)


def _wrap_formula(f: Formula, needed: int) -> str:
    prec = _PREC.get(type(f), 5)
    s = to_text(f)
    return f"({s})" if prec < needed else s


_GENERAL_INITIALS = "UVWXYZ"
_INTEGER_INITIALS = "IJKLMN"


def variable_sort(name: str) -> Sort:
    if name[0] in _GENERAL_INITIALS:
        return Sort.GENERAL
    if name[0] in _INTEGER_INITIALS:
        return Sort.INTEGER
    raise SortError(f"cannot infer the sort of variable {name} "
                    "(general variables start with U-Z, integer variables with I-N)")


class FormulaParser(TokenStream):
    """Recursive-descent parser for the ASCII formula syntax.

    Precedence from loosest: ``<->``, ``->`` (right associative), ``or``,
    ``and``, ``not``.  A quantifier applies to the unary formula after its
    variable list, so ``exists N (a = N) and p`` is a conjunction.
    """

    def formula(self) -> Formula:
        left = self._implication()
        while self.accept("<->"):
            left = Iff(left, self._implication())
        return left

    def _implication(self) -> Formula:
        left = self._disjunction()
        if self.accept("->"):
            return Implies(left, self._implication())
        if self.accept("<-"):
            return Implies(self._implication(), left)
        return left

    def _disjunction(self) -> Formula:
        args = [self._conjunction()]
        while self.accept("or"):
            args.append(self._conjunction())
        return disj(*args)

    def _conjunction(self) -> Formula:
        args = [self._unary_formula()]
        while self.accept("and"):
            args.append(self._unary_formula())
        return conj(*args)

    def _unary_formula(self) -> Formula:
        if self.accept("not"):
            return Not(self._unary_formula())
        if self.at("forall") or self.at("exists"):
            kind = ForAll if self.next().text == "forall" else Exists
            vs = [self._variable()]
            while self.accept(","):
                vs.append(self._variable())
            return kind(tuple(vs), self._unary_formula())
        return self._primary_formula()

    def _variable(self) -> Var:
        tok = self.next()
        if tok.kind != "VAR":
            raise self.error(f"expected a variable, found {tok.text!r}", tok)
        try:
            return Var(tok.text, variable_sort(tok.text))
        except SortError as e:
            raise self.error(str(e), tok) from None

    def _primary_formula(self) -> Formula:
        tok = self.peek()
        if tok.kind == "HASH" and tok.text in ("#true", "#false"):
            self.next()
            return TRUE if tok.text == "#true" else FALSE
        if tok.kind == "IDENT" and tok.text in ("true", "false") and not self._term_follows():
            self.next()
            return TRUE if tok.text == "true" else FALSE
        if self.at("("):
            # parenthesised formula or parenthesised term in a comparison
            save = self.pos
            self.next()
            try:
                f = self.formula()
                self.expect(")")
                if self.comparison_op() is None and not self._arith_follows():
                    return f
            except ParseError:
                pass
            self.pos = save
            return self._comparison()
        if tok.kind == "IDENT" and not self._term_follows():
            self.next()
            args = []
            if self.accept("("):
                args.append(self._term())
                while self.accept(","):
                    args.append(self._term())
                self.expect(")")
            return Atomic(Pred(tok.text, len(args)), tuple(args))
        return self._comparison()

    def _term_follows(self) -> bool:
        nxt = self.peek(1)
        return nxt.kind == "OP" and nxt.text in (
            "=", "==", "!=", "<>", "<", ">", "<=", ">=", "+", "-", "*")

    def _arith_follows(self) -> bool:
        return self.peek().kind == "OP" and self.peek().text in ("+", "-", "*")

    def _comparison(self) -> Formula:
        left = self._term()
        op = self.comparison_op()
        if op is None:
            self.check_unsupported(self.peek())
            raise self.error(f"expected a comparison, found {self.peek().text or 'end of input'!r}")
        self.next()
        return Cmp(left, op, self._term())

    def _term(self) -> Term:
        return _convert_term(self.parse_term(intervals=False), self)


def _convert_term(t, ts: TokenStream | None = None):
    from . import syntax

    if isinstance(t, Precomputed):
        return t
    if isinstance(t, syntax.Var):
        try:
            return Var(t.name, variable_sort(t.name))
        except SortError as e:
            raise ParseError(str(e)) from None
    try:
        if isinstance(t, syntax.Minus):
            return Neg(_convert_term(t.arg))
        if isinstance(t, syntax.BinOp):
            return Arith(t.op, _convert_term(t.left), _convert_term(t.right))
    except SortError as e:
        raise ParseError(str(e)) from None
    raise ParseError(f"unsupported term {t}")


def parse_formula(text: str) -> Formula:
    ts = FormulaParser(tokenize(text, hash_comments=True))
    f = ts.formula()
    if ts.peek().kind != "EOF":
        raise ts.error(f"unexpected {ts.peek().text!r} after formula")
    return f
