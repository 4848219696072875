"""Desk-scale grounding, stable models and equivalence checking.

Grounding follows the term semantics of the formula translation: a term
denotes a finite set of values, a body literal holds if it holds for some
value, and a head stands for all of its values.  An optional integer
*window* bounds the numerals considered: atoms with out-of-window numerals
are treated as false and variables not bound by the body range over the
window numerals plus the constants in sight.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from . import syntax as mg
from .fol import Interpretation, compare, evaluate
from .syntax import GroundAtom, Num, Precomputed, Pred, Program, Sign, Sym
from .userguide import GuideInput, UserGuide, input_in_domain

Window = tuple[int, int]


class GroundingError(RuntimeError):
    pass


class SizeGuardExceeded(RuntimeError):
    pass


class DomainError(ValueError):
    pass


MAX_INTERVAL = 100_000


def eval_ground_term(t) -> frozenset:
    """Values of a variable-free term (empty if undefined)."""
    if isinstance(t, Precomputed):
        return frozenset((t,))
    if isinstance(t, mg.Minus):
        return frozenset(Num(-v.value) for v in eval_ground_term(t.arg) if isinstance(v, Num))
    if isinstance(t, mg.BinOp):
        left = [v.value for v in eval_ground_term(t.left) if isinstance(v, Num)]
        right = [v.value for v in eval_ground_term(t.right) if isinstance(v, Num)]
        op = {"+": int.__add__, "-": int.__sub__, "*": int.__mul__}[t.op]
        return frozenset(Num(op(a, b)) for a in left for b in right)
    if isinstance(t, mg.Interval):
        lows = [v.value for v in eval_ground_term(t.low) if isinstance(v, Num)]
        highs = [v.value for v in eval_ground_term(t.high) if isinstance(v, Num)]
        out = set()
        for lo in lows:
            for hi in highs:
                if hi - lo > MAX_INTERVAL:
                    raise GroundingError(f"interval {t} is too large")
                out.update(Num(k) for k in range(lo, hi + 1))
        return frozenset(out)
    if isinstance(t, mg.Var):
        raise GroundingError(f"variable {t} in a ground term")
    raise TypeError(t)


def _bind_term(t, env: Mapping[str, Precomputed]):
    if isinstance(t, mg.Var):
        return env.get(t.name, t)
    if isinstance(t, mg.Minus):
        return mg.Minus(_bind_term(t.arg, env))
    if isinstance(t, mg.BinOp):
        return mg.BinOp(t.op, _bind_term(t.left, env), _bind_term(t.right, env))
    if isinstance(t, mg.Interval):
        return mg.Interval(_bind_term(t.low, env), _bind_term(t.high, env))
    return t


# ---------------------------------------------------------------------------
# Ground programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class GroundRule:
    """``head :- pos, not neg, not not negneg``; ``head is None`` for a
    constraint.  A choice rule leaves its head free when the body holds."""

    head: GroundAtom | None
    pos: tuple = ()
    neg: tuple = ()
    negneg: tuple = ()
    choice: bool = False

    def __str__(self):
        head = "" if self.head is None else (f"{{{self.head}}}" if self.choice else str(self.head))
        body = [str(a) for a in self.pos] + [f"not {a}" for a in self.neg] \
            + [f"not not {a}" for a in self.negneg]
        if not body:
            return f"{head}."
        return f"{head} :- {', '.join(body)}."


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple

    def atoms(self) -> set[GroundAtom]:
        out = set()
        for r in self.rules:
            if r.head is not None:
                out.add(r.head)
            out.update(r.pos, r.neg, r.negneg)
        return out

    def __len__(self):
        return len(self.rules)

    def __str__(self):
        return "".join(f"{r}\n" for r in self.rules)


def _in_window(values: Iterable[Precomputed], window: Window | None) -> bool:
    if window is None:
        return True
    lo, hi = window
    return all(not isinstance(v, Num) or lo <= v.value <= hi for v in values)


def _atom_instances(atom: mg.Atom, env, window) -> list[GroundAtom]:
    sets = [sorted(eval_ground_term(_bind_term(t, env))) for t in atom.args]
    return [GroundAtom(atom.name, args) for args in itertools.product(*sets)
            if _in_window(args, window)]


class _Grounder:
    def __init__(self, prog: Program, window: Window | None, universe: Sequence[Precomputed],
                 max_atoms: int):
        self.prog = prog
        self.window = window
        self.universe = sorted(set(universe))
        self.max_atoms = max_atoms
        self.possible: set[GroundAtom] = set()
        self.by_pred: dict[Pred, list[GroundAtom]] = {}

    def _add_possible(self, atoms: Iterable[GroundAtom]) -> bool:
        changed = False
        for a in atoms:
            if a not in self.possible:
                self.possible.add(a)
                self.by_pred.setdefault(a.pred, []).append(a)
                changed = True
        if len(self.possible) > self.max_atoms:
            raise GroundingError(f"universe cap exceeded: more than {self.max_atoms} "
                                 "possible atoms")
        return changed

    def run(self) -> GroundProgram:
        rules = [r for r in dict.fromkeys(self.prog.rules)]
        while True:
            changed = False
            for r in rules:
                if r.head is None:
                    continue
                for env in self._instances(r):
                    changed |= self._add_possible(_atom_instances(r.head, env, self.window))
            if not changed:
                break
        out: list[GroundRule] = []
        for r in rules:
            for env in self._instances(r):
                out.extend(self._ground_rule(r, env))
        return GroundProgram(tuple(dict.fromkeys(out)))

    # instantiation ---------------------------------------------------------

    def _instances(self, rule: mg.Rule) -> Iterator[dict]:
        variables = mg.rule_variables(rule)
        yield from self._bind(list(rule.body), {}, variables)

    def _bind(self, pending: list, env: dict, variables: set[str]) -> Iterator[dict]:
        unbound = variables - set(env)
        if not unbound:
            yield dict(env)
            return
        # 1. positive literals whose unbound variables occur as plain arguments
        for i, e in enumerate(pending):
            if not (isinstance(e, mg.Literal) and e.sign is Sign.POS):
                continue
            plain = [t.name for t in e.atom.args if isinstance(t, mg.Var) and t.name in unbound]
            if not plain:
                continue
            rest = pending[:i] + pending[i + 1:]
            for atom in self.by_pred.get(e.atom.pred, ()):
                ext = self._match(e.atom, atom, env)
                if ext is not None:
                    yield from self._bind(rest, ext, variables)
            return
        # 2. equations X = t with t already bound
        for i, e in enumerate(pending):
            if not (isinstance(e, mg.Comparison) and e.op == "="):
                continue
            for a, b in ((e.left, e.right), (e.right, e.left)):
                if isinstance(a, mg.Var) and a.name in unbound \
                        and not (mg.term_variables(b) - set(env)):
                    rest = pending[:i] + pending[i + 1:]
                    for v in sorted(eval_ground_term(_bind_term(b, env))):
                        if _in_window((v,), self.window):
                            yield from self._bind(rest, {**env, a.name: v}, variables)
                    return
        # 3. anything else ranges over the universe
        if self.window is None:
            raise GroundingError("unsafe variables " + ", ".join(sorted(unbound))
                                 + " need an integer window")
        name = min(unbound)
        for v in self.universe:
            yield from self._bind(pending, {**env, name: v}, variables)

    @staticmethod
    def _match(pattern: mg.Atom, atom: GroundAtom, env: dict) -> dict | None:
        ext = dict(env)
        for t, c in zip(pattern.args, atom.args):
            if isinstance(t, mg.Var):
                if t.name in ext:
                    if ext[t.name] != c:
                        return None
                else:
                    ext[t.name] = c
            elif not (mg.term_variables(t) - set(ext)):
                if c not in eval_ground_term(_bind_term(t, ext)):
                    return None
        return ext

    # ground rule construction -------------------------------------------

    def _ground_rule(self, rule: mg.Rule, env: dict) -> list[GroundRule]:
        pos_options: list[list[GroundAtom]] = []
        neg_options: list[list[GroundAtom]] = []
        nn_options: list[list[GroundAtom]] = []
        for e in rule.body:
            if isinstance(e, mg.Comparison):
                lefts = eval_ground_term(_bind_term(e.left, env))
                rights = eval_ground_term(_bind_term(e.right, env))
                if not any(compare(a, e.op, b) for a in lefts for b in rights):
                    return []
                continue
            sets = [eval_ground_term(_bind_term(t, env)) for t in e.atom.args]
            if any(not s for s in sets):
                return []  # no value: the literal is false
            tuples = list(itertools.product(*map(sorted, sets)))
            atoms = [GroundAtom(e.atom.name, args) for args in tuples
                     if _in_window(args, self.window)]
            known = [a for a in atoms if a in self.possible]
            if e.sign is Sign.POS:
                if not known:
                    return []
                pos_options.append(known)
            elif e.sign is Sign.NOT:
                if len(known) < len(tuples):
                    continue  # some instance is certainly false, so "not" holds
                neg_options.append(known)
            else:
                if not known:
                    return []
                nn_options.append(known)
        if rule.head is None:
            heads: list[GroundAtom | None] = [None]
        else:
            heads = _atom_instances(rule.head, env, self.window)
            if not heads:
                return []
        out = []
        for pos in itertools.product(*pos_options):
            for neg in itertools.product(*neg_options):
                for nn in itertools.product(*nn_options):
                    for h in heads:
                        out.append(GroundRule(h, tuple(sorted(set(pos))), tuple(sorted(set(neg))),
                                              tuple(sorted(set(nn))), rule.choice))
        return out


def program_universe(prog: Program, window: Window | None = None,
                     extra: Iterable[Precomputed] = ()) -> set[Precomputed]:
    out = set(mg.program_constants(prog)) | set(extra)
    out = {c for c in out if not isinstance(c, Num) or _in_window((c,), window)}
    if window is not None:
        out.update(Num(i) for i in range(window[0], window[1] + 1))
    return out


def ground(prog: Program, window: Window | None = None, universe: Iterable[Precomputed] = (),
           max_atoms: int = 20_000) -> GroundProgram:
    """Ground ``prog``.

    Without a window every variable must be bound by a positive literal or
    an equation; with one, the remaining variables range over the window
    numerals, the constants of ``prog`` and ``universe``.
    """
    full = program_universe(prog, window, universe)
    return _Grounder(prog, window, sorted(full), max_atoms).run()


# ---------------------------------------------------------------------------
# Stable models
# ---------------------------------------------------------------------------

DEFAULT_GUARD = 24


class _Solver:
    def __init__(self, gp: GroundProgram):
        self.atoms = sorted(gp.atoms())
        index = {a: i for i, a in enumerate(self.atoms)}
        self.rules = []
        self.constraints = []
        for r in gp.rules:
            pos = tuple(index[a] for a in r.pos)
            neg = tuple(index[a] for a in r.neg)
            nn = tuple(index[a] for a in r.negneg)
            if r.head is None:
                self.constraints.append((pos, neg, nn))
                continue
            h = index[r.head]
            if r.choice:
                nn = nn + (h,)  # {a} :- B  is  a :- B, not not a
            self.rules.append((h, pos, neg, nn))
        self.watch: dict[int, list[int]] = {}
        for k, (_, pos, _, _) in enumerate(self.rules):
            for a in set(pos):
                self.watch.setdefault(a, []).append(k)

    def _least(self, enabled) -> set[int]:
        missing = {}
        queue = []
        for k, (h, pos, neg, nn) in enumerate(self.rules):
            if not enabled(neg, nn):
                continue
            missing[k] = len(set(pos))
            if missing[k] == 0:
                queue.append(h)
        derived: set[int] = set()
        while queue:
            a = queue.pop()
            if a in derived:
                continue
            derived.add(a)
            for k in self.watch.get(a, ()):
                if k in missing:
                    missing[k] -= 1
                    if missing[k] == 0:
                        queue.append(self.rules[k][0])
        return derived

    def propagate(self, assign: dict[int, bool]) -> bool:
        while True:
            lower = self._least(lambda neg, nn: all(assign.get(a) is False for a in neg)
                                and all(assign.get(a) is True for a in nn))
            upper = self._least(lambda neg, nn: all(assign.get(a) is not True for a in neg)
                                and all(assign.get(a) is not False for a in nn))
            changed = False
            for a in lower:
                if assign.get(a) is False:
                    return False
                if a not in assign:
                    assign[a] = True
                    changed = True
            for a in range(len(self.atoms)):
                if a not in upper:
                    if assign.get(a) is True:
                        return False
                    if a not in assign:
                        assign[a] = False
                        changed = True
            for pos, neg, nn in self.constraints:
                if all(assign.get(a) is True for a in pos) \
                        and all(assign.get(a) is False for a in neg) \
                        and all(assign.get(a) is True for a in nn):
                    return False
            if not changed:
                return True

    def is_stable(self, model: set[int]) -> bool:
        reduct_least = self._least(lambda neg, nn: all(a not in model for a in neg)
                                   and all(a in model for a in nn))
        if reduct_least != model:
            return False
        for pos, neg, nn in self.constraints:
            if all(a in model for a in pos) and all(a not in model for a in neg) \
                    and all(a in model for a in nn):
                return False
        return True

    def solve(self, guard: int) -> list[frozenset[GroundAtom]]:
        assign: dict[int, bool] = {}
        if not self.propagate(assign):
            return []
        free = len(self.atoms) - len(assign)
        if free > guard:
            raise SizeGuardExceeded(f"{free} undecided ground atoms after propagation "
                                    f"(limit {guard})")
        models = []
        self._search(assign, models)
        return sorted(models, key=lambda m: sorted(m))

    def _search(self, assign: dict[int, bool], models: list):
        free = [a for a in range(len(self.atoms)) if a not in assign]
        if not free:
            model = {a for a, v in assign.items() if v}
            if self.is_stable(model):
                models.append(frozenset(self.atoms[a] for a in model))
            return
        a = free[0]
        for value in (True, False):
            trial = dict(assign)
            trial[a] = value
            if self.propagate(trial):
                self._search(trial, models)


def stable_models(gp: GroundProgram, guard: int = DEFAULT_GUARD) -> list[frozenset[GroundAtom]]:
    """All stable models of a ground program, sorted.

    ``guard`` bounds the number of atoms left undecided by propagation at
    the root of the search.
    """
    return _Solver(gp).solve(guard)


# ---------------------------------------------------------------------------
# External behavior and equivalence
# ---------------------------------------------------------------------------

Behavior = frozenset  # of frozensets of output atoms


def instantiate(prog: Program, gi: GuideInput) -> Program:
    """``v(prog)`` together with the input facts."""
    body = mg.substitute_placeholders(prog, gi.valuation)
    return Program(body.rules + mg.facts_program(gi.atoms).rules)


def external_behavior(prog: Program, guide: UserGuide, gi: GuideInput,
                      window: Window | None = None, guard: int = DEFAULT_GUARD,
                      max_atoms: int = 20_000, check_domain: bool = True) -> Behavior:
    for r in prog:
        if r.head is not None and r.head.pred in guide.inputs:
            raise DomainError(f"input symbol {r.head.pred} occurs in a rule head")
    if check_domain and not input_in_domain(guide, gi, window):
        raise DomainError(f"input {gi.describe()} is not in the domain of the user guide")
    full = instantiate(prog, gi)
    gp = ground(full, window, gi.valuation.values(), max_atoms)
    outs = guide.outputs
    return frozenset(frozenset(a for a in m if a.pred in outs) for m in stable_models(gp, guard))


def format_behavior(b: Behavior) -> str:
    models = sorted(sorted(str(a) for a in m) for m in b)
    return "{" + ", ".join("{" + ", ".join(m) + "}" for m in models) + "}"


@dataclass(frozen=True)
class NoCounterexample:
    n_tested: int


@dataclass(frozen=True)
class Counterexample:
    input: GuideInput
    behavior1: Behavior
    behavior2: Behavior
    n_tested: int = 0


def placeholder_valuations(placeholders: Sequence[str], values: Sequence[Precomputed],
                           ) -> Iterator[dict[str, Precomputed]]:
    for combo in itertools.product(values, repeat=len(placeholders)):
        yield dict(zip(placeholders, combo))


def input_atoms(inputs: Iterable[Pred], pool: Sequence[Precomputed]) -> list[GroundAtom]:
    out = []
    for p in sorted(inputs):
        for args in itertools.product(sorted(pool), repeat=p.arity):
            out.append(GroundAtom(p.name, args))
    return out


def fact_subsets(atoms: Sequence[GroundAtom], max_facts: int | None = None,
                 ) -> Iterator[frozenset[GroundAtom]]:
    top = len(atoms) if max_facts is None else min(max_facts, len(atoms))
    for k in range(top + 1):
        for combo in itertools.combinations(atoms, k):
            yield frozenset(combo)


def guide_inputs(guide: UserGuide, numerals: Iterable[int] = (), constants: Iterable[str] = (),
                 max_facts: int | None = 2, window: Window | None = None,
                 ) -> Iterator[GuideInput]:
    """Inputs of the guide over a bounded pool, restricted to its domain.

    Placeholders take values from ``numerals`` and ``constants``; input
    facts are built from the same pool, at most ``max_facts`` at a time.
    """
    ph = set(guide.placeholders)
    pool = [Num(i) for i in numerals] + [Sym(c) for c in constants if c not in ph]
    atoms = input_atoms(guide.inputs, pool)
    for valuation in placeholder_valuations(guide.placeholders, pool):
        for facts in fact_subsets(atoms, max_facts):
            gi = GuideInput(valuation, facts)
            if input_in_domain(guide, gi, window, pool):
                yield gi


def _compare_one(args):
    p1, p2, guide, gi, window, guard = args
    b1 = external_behavior(p1, guide, gi, window, guard, check_domain=False)
    b2 = external_behavior(p2, guide, gi, window, guard, check_domain=False)
    return b1, b2


def check_equivalence(p1: Program, p2: Program, guide: UserGuide, inputs: Iterable[GuideInput],
                      window: Window | None = None, guard: int = DEFAULT_GUARD,
                      workers: int = 1):
    """First input (in generation order) on which the behaviors differ."""
    jobs = ((p1, p2, guide, gi, window, guard) for gi in inputs)
    n = 0
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = list(jobs)
            for (_, _, _, gi, _, _), (b1, b2) in zip(jobs, pool.map(_compare_one, jobs,
                                                                     chunksize=4)):
                n += 1
                if b1 != b2:
                    return Counterexample(gi, b1, b2, n)
        return NoCounterexample(n)
    for job in jobs:
        n += 1
        b1, b2 = _compare_one(job)
        if b1 != b2:
            return Counterexample(job[3], b1, b2, n)
    return NoCounterexample(n)


# ---------------------------------------------------------------------------
# Behavior computed from the completion
# ---------------------------------------------------------------------------


def behavior_from_completion(prog: Program, guide: UserGuide, gi: GuideInput,
                             window: Window | None = None) -> Behavior:
    """Output sets ``J`` such that some extension of the renamed private
    symbols satisfies the reduced first-order condition in ``I(v, I+J+P)``.

    Quantifiers range over the window numerals, the constants of the
    instantiated program and the terms of its ground atoms; values that only
    occur inside arithmetic (such as the factors of a product) need a window
    that covers them.  Predicates are handled
    one strongly connected component of the dependency graph at a time:
    a non-recursive predicate gets the extension its definition prescribes,
    and for a recursive component every subset of candidate atoms is tried
    against the component's definitions.
    """
    from .completion import CompletedDefinition, second_order_completion
    from .fol import predicates, rename_predicates
    from .reduction import fresh_rename

    comp = second_order_completion(prog, guide.inputs, guide.outputs)
    ren = fresh_rename(comp.private, "_1", mg.predicate_symbols(prog) | set(guide.outputs)
                       | set(guide.inputs))
    defs = {}
    for d in comp.private_definitions() + comp.public_definitions():
        p = ren.get(d.predicate, d.predicate)
        defs[p] = CompletedDefinition(p, d.params, rename_predicates(d.rhs, ren))
    constraints = [rename_predicates(c, ren) for c in comp.body.constraints]

    concrete = instantiate(prog, gi)
    universe = program_universe(concrete, window, gi.valuation.values())
    for a in ground(concrete, window, universe).atoms():
        universe.update(a.args)
    universe = sorted(universe)
    interp_base = dict(valuation=gi.valuation, universe=universe)

    graph = {p: {q for q in predicates(d.rhs) if q in defs} for p, d in defs.items()}
    order = _components(graph)

    results: set[frozenset] = set()

    def tuples(p: Pred):
        return itertools.product(universe, repeat=p.arity)

    def extend(i: int, atoms: frozenset):
        if i == len(order):
            interp = Interpretation(atoms, **interp_base)
            if all(evaluate(c, interp) for c in constraints):
                results.add(frozenset(a for a in atoms if a.pred in guide.outputs))
            return
        preds = order[i]
        if len(preds) == 1 and preds[0] not in graph[preds[0]]:
            # the definition fixes the extension outright
            d = defs[preds[0]]
            interp = Interpretation(atoms, **interp_base)
            ext = frozenset(GroundAtom(d.predicate.name, args) for args in tuples(d.predicate)
                            if evaluate(d.rhs, interp, dict(zip(d.params, args))))
            extend(i + 1, atoms | ext)
            return
        candidates = [GroundAtom(p.name, args) for p in sorted(preds) for args in tuples(p)]
        for subset in fact_subsets(candidates):
            trial = atoms | subset
            interp = Interpretation(trial, **interp_base)
            if all(evaluate(defs[p].formula, interp) for p in preds):
                extend(i + 1, trial)

    extend(0, frozenset(gi.atoms))
    return frozenset(results)


def _components(graph: dict) -> list[list]:
    """Strongly connected components, dependencies before dependents."""
    index, low, stack, on, out = {}, {}, [], set(), []
    counter = itertools.count()

    def visit(v):
        index[v] = low[v] = next(counter)
        stack.append(v)
        on.add(v)
        for w in sorted(graph[v]):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(comp)

    for v in sorted(graph):
        if v not in index:
            visit(v)
    return out
