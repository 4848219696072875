import itertools

import pytest

from mgverify.completion import second_order_completion
from mgverify.fol import (ForAll, Iff, Interpretation, alpha_equivalent, evaluate,
                          parse_formula, predicates, rename_predicates, simplify)
from mgverify.oracle import external_behavior
from mgverify.reduction import (BACKWARD, FORWARD, GatingError, build_goal,
                                build_specification, fresh_rename, goal_from_specification,
                                split_completion)
from mgverify.syntax import GroundAtom, Pred, Sym, parse_program
from mgverify.userguide import GuideInput, parse_statements, parse_user_guide

PRINTED_ASSUME = ("forall X (composite_1(X) <-> "
                  "exists N1, N2 (N1 > 1 and N2 > 1 and X = N1 * N2))")
PRINTED_SPEC = ("forall X (prime(X) <-> exists N1 (not composite_1(N1) and "
                "exists N2, N3 (N2 = a and N3 = b and N2 <= N1 and N1 <= N3) and X = N1))")


def same(f, text):
    return alpha_equivalent(simplify(f), simplify(parse_formula(text)))


def test_fresh_rename():
    c = Pred("composite", 1)
    assert fresh_rename([c], "_1") == {c: Pred("composite_1", 1)}
    assert fresh_rename([], "_2") == {}
    aux, aux2 = Pred("aux", 2), Pred("aux2", 1)
    assert fresh_rename([aux, aux2], "_2") == {aux: Pred("aux_2", 2), aux2: Pred("aux2_2", 1)}


def test_fresh_rename_collision(caplog):
    c = Pred("composite", 1)
    ren = fresh_rename([c], "_1", {Pred("composite_1", 1)})
    assert ren[c] not in {Pred("composite_1", 1), c}
    assert ren[c].arity == 1
    assert "already in use" in caplog.text


def test_split_completion(primes, primes_guide):
    comp = second_order_completion(primes[0], (), primes_guide.outputs)
    defs, rest = split_completion(comp, {Pred("composite", 1): Pred("composite_1", 1)})
    assert len(defs) == 1 and same(defs[0], PRINTED_ASSUME)
    assert len(rest) == 1 and same(rest[0], PRINTED_SPEC)
    with pytest.raises(ValueError):
        split_completion(comp, {})


def test_split_completion_second_program(primes, primes_guide):
    comp = second_order_completion(primes[1], (), primes_guide.outputs)
    defs, _ = split_completion(comp, {Pred("composite", 1): Pred("composite_2", 1)})
    # b is general, so the interval bounds stay behind integer variables
    assert same(defs[0], "forall X (composite_2(X) <-> exists N1, N2, N3, N4 (N3 = b and "
                         "2 <= N1 and N1 <= N3 and N4 = b and 2 <= N2 and N2 <= N4 "
                         "and X = N1 * N2))")


def test_split_without_privates(orphan_short, orphan_guide):
    comp = second_order_completion(orphan_short, orphan_guide.inputs, orphan_guide.outputs)
    defs, rest = split_completion(comp, {})
    assert defs == [] and len(rest) == 1


def test_prime_specification_file(primes, primes_guide):
    text = build_specification(primes[0], primes_guide).to_text()
    lines = text.splitlines()
    assert lines[:3] == ["input: a -> integer, b -> integer.", "input: composite_1/1.",
                         "output: prime/1."]
    stmts = parse_statements(text)
    (assume,) = [s.payload for s in stmts if s.kind == "assume"]
    (spec,) = [s.payload for s in stmts if s.kind == "spec"]
    assert same(assume, PRINTED_ASSUME)
    assert same(spec, PRINTED_SPEC)


def test_orphan_specification(orphan, orphan_short, orphan_guide):
    sp = build_specification(orphan, orphan_guide)
    assert sp.inputs[-1] == Pred("parent_living_1", 1)
    assert same(sp.assumptions[0], "forall X (parent_living_1(X) <-> exists Y "
                "(father(Y, X) and living(Y)) or exists Y (mother(Y, X) and living(Y)))")
    assert same(sp.specs[0], "forall X (orphan(X) <-> living(X) and not parent_living_1(X))")
    short = build_specification(orphan_short, orphan_guide)
    assert short.assumptions == () and len(short.specs) == 1
    assert "assume:" not in short.to_text()


def test_prime_goal(primes, primes_guide):
    goal = build_goal(primes[0], primes[1], primes_guide)
    names = set().union(*(predicates(a) for a in goal.axioms))
    assert names == {Pred("composite_1", 1), Pred("composite_2", 1)}
    assert set(primes_guide.assumptions) <= set(goal.axioms)
    assert len(goal.spec_conjuncts) == len(goal.program_conjuncts) == 1
    assert predicates(goal.spec_conjuncts[0]) == {Pred("prime", 1), Pred("composite_1", 1)}
    assert predicates(goal.program_conjuncts[0]) == {Pred("prime", 1), Pred("composite_2", 1)}
    assert goal.goals(FORWARD) == list(goal.spec_conjuncts)
    assert goal.hypotheses(FORWARD)[-1] == goal.program_conjuncts[0]
    assert goal.goals(BACKWARD) == list(goal.program_conjuncts)


def test_symmetric_goal(primes, primes_guide):
    goal = build_goal(primes[0], primes[0], primes_guide)
    c1, c2 = Pred("composite_1", 1), Pred("composite_2", 1)
    assert [rename_predicates(f, {c1: c2}) for f in goal.goals(FORWARD)] == \
        goal.goals(BACKWARD)
    d1, d2 = goal.axioms[-2:]
    assert predicates(d1).isdisjoint(predicates(d2))


def test_orphan_goal_privates_on_one_side(orphan, orphan_short, orphan_guide):
    goal = build_goal(orphan, orphan_short, orphan_guide)
    privates = {p for a in goal.axioms for p in predicates(a)} - orphan_guide.inputs
    assert privates == {Pred("parent_living_1", 1)}


def test_gating(orphan_guide):
    guide = parse_user_guide("output: p/0.")
    with pytest.raises(GatingError, match="NotTight"):
        build_goal(parse_program("p :- q.\nq :- p."), parse_program("p."), guide)
    with pytest.raises(GatingError, match="InputSymbolInHead"):
        build_specification(parse_program("father(a,b)."), orphan_guide)


@pytest.mark.parametrize("pair", [(0, 1), (1, 2), (0, 0)])
def test_specification_route_equals_direct_route(primes, primes_guide, pair):
    p1, p2 = primes[pair[0]], primes[pair[1]]
    direct = build_goal(p1, p2, primes_guide)
    spec = build_specification(p1, primes_guide, p2)
    via = goal_from_specification(spec, p2, primes_guide)
    assert via == direct


# --- fidelity: the goal holds on an input iff the behaviors agree ----------------

PERSONS = [Sym("jacob"), Sym("rachel")]


def _orphan_inputs(guide):
    atoms = [GroundAtom("living", (p,)) for p in PERSONS]
    atoms += [GroundAtom(n, (p, q)) for n in ("father", "mother")
              for p, q in itertools.product(PERSONS, repeat=2)]
    for k in range(3):
        for chosen in itertools.combinations(atoms, k):
            yield GuideInput({}, frozenset(chosen))


def _extend(defs, atoms, universe):
    """Extend ``atoms`` by the private atoms the (acyclic) definitions force."""
    out = set(atoms)
    for _ in range(len(defs) + 1):
        interp = Interpretation(frozenset(out), {}, universe)
        new = set(atoms)
        for d in defs:
            vs, iff = (d.vars, d.body) if isinstance(d, ForAll) else ((), d)
            assert isinstance(iff, Iff)
            head = iff.left
            for vals in itertools.product(universe, repeat=len(vs)):
                env = dict(zip(vs, vals))
                if evaluate(iff.right, interp, env):
                    new.add(GroundAtom(head.predicate.name, vals))
        if new == out:
            break
        out = new
    return frozenset(out)


def goal_holds(goal, guide, gi, universe):
    n = len(goal.axioms) - len(guide.assumptions)
    priv = list(goal.axioms[len(guide.assumptions):len(guide.assumptions) + n])
    outputs = [GroundAtom(p.name, vals) for p in sorted(guide.outputs)
               for vals in itertools.product(universe, repeat=p.arity)]
    f = goal.formula()
    for k in range(len(outputs) + 1):
        for chosen in itertools.combinations(outputs, k):
            atoms = _extend(priv, gi.atoms | set(chosen), universe)
            if not evaluate(f, Interpretation(atoms, gi.valuation, universe)):
                return False
    return True


ORPHAN_VARIANTS = [
    "orphan(X) :- living(X), father(Y,X), mother(Z,X), not living(Y), not living(Z).",
    "pl(X) :- father(Y,X), living(Y).\npl(X) :- mother(Y,X), living(Y).\n"
    "orphan(X) :- living(X), not pl(X).",
    "orphan(X) :- living(X), not living(X).",
    "fl(X) :- father(Y,X), living(Y).\nml(X) :- mother(Y,X), living(Y).\n"
    "orphan(X) :- living(X), not fl(X), not ml(X).",
]


@pytest.mark.parametrize("i, j", [(1, 3), (0, 1), (1, 2), (0, 3)])
def test_goal_fidelity(orphan_guide, i, j):
    p1, p2 = parse_program(ORPHAN_VARIANTS[i]), parse_program(ORPHAN_VARIANTS[j])
    goal = build_goal(p1, p2, orphan_guide)
    for gi in _orphan_inputs(orphan_guide):
        same_behavior = (external_behavior(p1, orphan_guide, gi)
                         == external_behavior(p2, orphan_guide, gi))
        assert goal_holds(goal, orphan_guide, gi, PERSONS) == same_behavior, gi.describe()
