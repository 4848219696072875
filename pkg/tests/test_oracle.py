import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgverify.oracle import (Counterexample, DomainError, GroundingError, NoCounterexample,
                             SizeGuardExceeded, behavior_from_completion, check_equivalence,
                             eval_ground_term, external_behavior, format_behavior, ground,
                             guide_inputs, instantiate, stable_models)
from mgverify.syntax import (BinOp, GroundAtom, Interval, Num, Program, Sign, Sym, parse_facts,
                             parse_program)
from mgverify.userguide import GuideInput, parse_user_guide


def atoms(text):
    return frozenset(parse_facts(text))


def models(text, **kw):
    return stable_models(ground(parse_program(text), **kw))


def test_eval_ground_term():
    assert eval_ground_term(Interval(Num(2), Num(4))) == {Num(2), Num(3), Num(4)}
    assert eval_ground_term(BinOp("*", Num(3), Num(4))) == {Num(12)}
    assert eval_ground_term(BinOp("+", Sym("c"), Num(1))) == frozenset()
    assert eval_ground_term(Interval(Num(4), Num(2))) == frozenset()
    assert eval_ground_term(Interval(Sym("c"), Num(2))) == frozenset()
    assert eval_ground_term(BinOp("+", Interval(Num(1), Num(2)), Num(10))) == {Num(11), Num(12)}


def test_symbolic_arithmetic_drops_rule():
    # p(c+1) has no value, so the rule has no instances
    assert models("p(c+1). q(1+1).") == [atoms("q(2).")]
    assert models("p :- not q(c+1).") == [frozenset()]


def test_ground_safe_prime_program(primes):
    prog = instantiate(primes[1], GuideInput({"a": Num(10), "b": Num(15)}))
    heads = {r.head for r in ground(prog).rules if r.head and r.head.name == "composite"}
    assert heads == {GroundAtom("composite", (Num(i * j),))
                     for i in range(2, 16) for j in range(2, 16)}


def test_ground_orphan_program(orphan, orphan_guide, orphan_input):
    gp = ground(instantiate(orphan, orphan_input))
    consts = {t for a in gp.atoms() for t in a.args}
    assert consts == {Sym("jacob"), Sym("rachel"), Sym("joseph")}
    assert ground(Program(())).rules == ()


def test_stable_model_examples():
    assert models("p(a).\np(b).\nq(X,Y) :- p(X), p(Y).") == [
        atoms("p(a). p(b). q(a,a). q(a,b). q(b,a). q(b,b).")]
    assert models("") == [frozenset()]
    assert models("p :- not p.") == []
    assert models("{p}. q :- not not p.") == [frozenset(), atoms("p. q.")]
    assert models("p :- not q.\nq :- not p.") == [atoms("p."), atoms("q.")]
    assert models("p :- p.") == [frozenset()]
    assert models("{p}. :- not p.") == [atoms("p.")]


def test_grounding_needs_window_for_unsafe_variables():
    with pytest.raises(GroundingError, match="window"):
        models("p(X) :- not q(X).")
    assert models("p(X) :- not q(X).", window=(0, 2)) == [atoms("p(0). p(1). p(2).")]


def test_size_guard():
    with pytest.raises(SizeGuardExceeded):
        models("{p(X)} :- X = 1..30.")
    assert len(stable_models(ground(parse_program("{p(X)} :- X = 1..3.")))) == 8


def test_behavior_anchors(primes, primes_guide, orphan, orphan_short, orphan_guide,
                          orphan_input):
    gi = GuideInput({"a": Num(10), "b": Num(15)})
    expected = frozenset({atoms("prime(11). prime(13).")})
    assert external_behavior(primes[0], primes_guide, gi, window=(0, 15)) == expected
    for prog in primes[1:]:
        assert external_behavior(prog, primes_guide, gi) == expected
    assert format_behavior(expected) == "{{prime(11), prime(13)}}"
    b2 = external_behavior(orphan, orphan_guide, orphan_input)
    assert b2 == frozenset({atoms("orphan(jacob). orphan(rachel).")})
    assert external_behavior(orphan_short, orphan_guide, orphan_input) == {frozenset()}


def test_behavior_rejects_bad_inputs(primes, primes_guide, orphan_guide):
    with pytest.raises(DomainError):
        external_behavior(primes[1], primes_guide, GuideInput({"a": Sym("c"), "b": Num(3)}))
    with pytest.raises(DomainError):
        external_behavior(parse_program("father(a,b)."), orphan_guide, GuideInput())


def test_check_equivalence(primes, primes_guide, orphan, orphan_short, orphan_guide,
                           orphan_input):
    inputs = [GuideInput(), orphan_input]
    r = check_equivalence(orphan, orphan_short, orphan_guide, inputs)
    assert isinstance(r, Counterexample) and r.input == orphan_input
    assert r.behavior2 == {frozenset()}
    gis = list(guide_inputs(primes_guide, range(0, 6)))
    assert len(gis) == 36
    assert check_equivalence(primes[1], primes[1], primes_guide, gis) == NoCounterexample(36)


def test_parallel_check_is_deterministic(orphan, orphan_short, orphan_guide):
    gis = list(guide_inputs(orphan_guide, constants=["jacob", "rachel"], max_facts=2))
    r1 = check_equivalence(orphan, orphan_short, orphan_guide, gis)
    r2 = check_equivalence(orphan, orphan_short, orphan_guide, gis, workers=2)
    assert isinstance(r1, Counterexample) and r1 == r2


def test_guide_inputs_respect_domain(orphan_functional_guide):
    gis = list(guide_inputs(orphan_functional_guide, constants=["x"], max_facts=None))
    # one person: father and mother of x must both be x
    assert {gi.atoms - atoms("living(x).") for gi in gis} == {atoms("father(x,x). mother(x,x).")}


def test_unique_model_on_running_examples(primes, orphan, orphan_short, orphan_guide):
    for a, b in itertools.product(range(0, 8), repeat=2):
        gi = GuideInput({"a": Num(a), "b": Num(b)})
        assert len(stable_models(ground(instantiate(primes[0], gi), window=(0, 8)))) == 1
        for prog in primes[1:]:
            assert len(stable_models(ground(instantiate(prog, gi)))) == 1
    for gi in guide_inputs(orphan_guide, constants=["x", "y"], max_facts=2):
        for prog in (orphan, orphan_short):
            assert len(stable_models(ground(instantiate(prog, gi)))) == 1


def test_prime_behavior_matches_arithmetic(primes, primes_guide):
    for a, b in [(0, 12), (2, 2), (5, 3), (14, 20)]:
        gi = GuideInput({"a": Num(a), "b": Num(b)})
        # 0 and 1 are not composite, so the program reports them too
        want = {GroundAtom("prime", (Num(n),)) for n in range(a, b + 1)
                if all(n % d for d in range(2, n))}
        assert external_behavior(primes[2], primes_guide, gi) == {frozenset(want)}


def test_repeated_fact_changes_nothing(orphan, orphan_guide, orphan_input):
    fact = next(iter(orphan_input.atoms))
    again = GuideInput({}, orphan_input.atoms | {fact})
    assert external_behavior(orphan, orphan_guide, again) == \
        external_behavior(orphan, orphan_guide, orphan_input)


# --- brute-force reference on random propositional programs ------------------

NAMES = ["p", "q", "r", "s", "t"]
lit = st.tuples(st.sampled_from(NAMES), st.sampled_from(list(Sign)))
prop_rule = st.tuples(st.one_of(st.none(), st.sampled_from(NAMES)),
                      st.lists(lit, max_size=3), st.booleans())
WORDS = {Sign.POS: "", Sign.NOT: "not ", Sign.NOTNOT: "not not "}


def _text(rules):
    lines = []
    for head, body, choice in rules:
        if head is None and not body:
            continue
        h = "" if head is None else ("{%s}" % head if choice else head)
        b = ", ".join(WORDS[s] + a for a, s in body)
        lines.append(f"{h} :- {b}." if b else f"{h}.")
    return "\n".join(lines)


def _reference_models(rules):
    """Stable models by enumerating all candidate sets and checking that
    each is the least model of its reduct."""
    out = []
    for k in range(len(NAMES) + 1):
        for cand in itertools.combinations(NAMES, k):
            m = set(cand)
            reduct, ok = [], True
            for head, body, choice in rules:
                if head is None and not body:
                    continue
                pos = {a for a, s in body if s is Sign.POS}
                if any(a in m for a, s in body if s is Sign.NOT) or \
                        any(a not in m for a, s in body if s is Sign.NOTNOT):
                    continue
                if head is None:
                    ok &= not pos <= m
                elif not choice or head in m:
                    reduct.append((head, pos))
            least, changed = set(), True
            while changed:
                changed = False
                for head, pos in reduct:
                    if pos <= least and head not in least:
                        least.add(head)
                        changed = True
            if ok and least == m:
                out.append(frozenset(GroundAtom(a, ()) for a in m))
    return sorted(out, key=lambda s: sorted(s))


@settings(max_examples=300, deadline=None)
@given(st.lists(prop_rule, max_size=6))
def test_solver_matches_brute_force(rules):
    got = models(_text(rules))
    assert sorted(got, key=lambda s: sorted(s)) == _reference_models(rules)


# --- the completion route agrees on tight programs -----------------------------

TIGHT = [
    ("input: q/1.\noutput: r/0.", "{p(X)} :- q(X).\nr :- p(X), X > 1."),
    ("input: q/1.\noutput: p/1.", "p(X) :- q(X), not s(X).\ns(X) :- q(X), X < 1."),
    ("input: q/1.\noutput: p/1.", "p(X+1) :- q(X).\n:- p(X), q(X)."),
    ("input: q/1.\noutput: p/1.", "p(X) :- q(X), not not p(X)."),
]


@pytest.mark.parametrize("guide_text, prog_text", TIGHT)
def test_completion_route_agrees(guide_text, prog_text):
    guide, prog = parse_user_guide(guide_text), parse_program(prog_text)
    for gi in guide_inputs(guide, numerals=range(0, 3), max_facts=None):
        assert behavior_from_completion(prog, guide, gi) == \
            external_behavior(prog, guide, gi), gi.describe()


def test_completion_route_on_running_examples(primes, primes_guide, orphan, orphan_short,
                                              orphan_guide):
    for a, b in [(10, 15), (0, 4), (3, 2)]:
        gi = GuideInput({"a": Num(a), "b": Num(b)})
        for prog in primes[1:]:
            # the window makes the factors of each composite visible
            assert behavior_from_completion(prog, primes_guide, gi, (0, max(a, b))) == \
                external_behavior(prog, primes_guide, gi)
    for gi in guide_inputs(orphan_guide, constants=["x", "y"], max_facts=2):
        for prog in (orphan, orphan_short):
            assert behavior_from_completion(prog, orphan_guide, gi) == \
                external_behavior(prog, orphan_guide, gi)
