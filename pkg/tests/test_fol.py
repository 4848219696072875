import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgverify.fol import (FALSE, TRUE, And, Arith, Atomic, Cmp, Exists, ForAll, Iff, Implies,
                          Interpretation, Not, Or, RenameError, Sort, SortError,
                          UnboundedQuantifier, Var, alpha_equivalent, evaluate, free_variables,
                          parse_formula, rename_predicates, replace_atoms, simplify, substitute,
                          to_text)
from mgverify.syntax import GroundAtom, Num, ParseError, Pred, Sym

X, Y = Var("X"), Var("Y")
N = Var("N", Sort.INTEGER)


def test_free_variables():
    assert free_variables(parse_formula("exists N (N = X)")) == {X}
    assert free_variables(parse_formula("forall X exists Y (p(X, Y))")) == set()
    assert free_variables(parse_formula("p(X) and forall X q(X)")) == {X}


def test_variable_sorts_follow_first_letter():
    f = parse_formula("exists N, V (N = V)")
    assert f.vars == (N, Var("V"))


def test_arithmetic_only_on_integers():
    assert isinstance(parse_formula("(N + 1) * 2 > 3").left, Arith)
    with pytest.raises((ParseError, SortError)):
        parse_formula("X + 1 > 3")
    with pytest.raises(SortError):
        Arith("+", X, Num(1))


def test_rename_predicates():
    f = parse_formula("p(X) and q(X)")
    assert rename_predicates(f, {Pred("p", 1): Pred("r", 1)}) == parse_formula("r(X) and q(X)")
    assert rename_predicates(f, {}) == f
    with pytest.raises(RenameError):
        rename_predicates(f, {Pred("p", 1): Pred("q", 1)})
    with pytest.raises(RenameError):
        rename_predicates(f, {Pred("p", 1): Pred("s", 2)})


def test_rename_composite_definition():
    f = parse_formula("forall X (composite(X) <-> exists I, J (I > 1 and J > 1 and X = I * J))")
    g = rename_predicates(f, {Pred("composite", 1): Pred("composite_1", 1)})
    assert "composite_1(X)" in to_text(g)
    assert rename_predicates(g, {Pred("composite_1", 1): Pred("composite", 1)}) == f


def test_simplify_examples():
    assert simplify(parse_formula("#true and p(X)")) == parse_formula("p(X)")
    assert simplify(parse_formula("exists N (N = 3 and p(N))")) == parse_formula("p(3)")
    assert simplify(parse_formula("p or #false")) == parse_formula("p")
    assert simplify(parse_formula("exists X (p)")) == parse_formula("p")
    assert simplify(parse_formula("not not p")) == parse_formula("p")
    # merging a shadowed quantifier keeps the inner binder
    for q in ("forall", "exists"):
        f = parse_formula(f"{q} X {q} X (p(X))")
        assert simplify(f) == parse_formula(f"{q} X (p(X))")


def test_simplify_respects_sorts():
    # a general witness cannot replace an integer variable
    f = parse_formula("exists N (N = X and p(N))")
    assert isinstance(simplify(f), Exists)


def test_unfolding_two_constant_definition():
    q = parse_formula("forall V1, V2 (q(V1, V2) <-> exists X, Y (p(X) and p(Y) "
                      "and V1 = X and V2 = Y))")
    unfolded = replace_atoms(q, Pred("p", 1), (Var("V"),), parse_formula("V = a or V = b"))
    expected = parse_formula("forall V1, V2 (q(V1, V2) <-> (V1 = a or V1 = b) "
                             "and (V2 = a or V2 = b))")
    assert alpha_equivalent(simplify(unfolded), expected)


def test_substitute_avoids_capture():
    f = parse_formula("exists Y (p(X, Y))")
    g = substitute(f, {X: Y})
    assert free_variables(g) == {Y}
    assert not alpha_equivalent(g, parse_formula("exists Y (p(Y, Y))"))


def test_alpha_equivalence():
    assert alpha_equivalent(parse_formula("forall X exists Y (p(X) and q(Y))"),
                            parse_formula("forall Z exists W (q(W) and p(Z))"))
    assert alpha_equivalent(parse_formula("exists N (a = N)"), parse_formula("exists M (M = a)"))
    assert alpha_equivalent(parse_formula("N > 1"), parse_formula("1 < N"))
    assert not alpha_equivalent(parse_formula("forall X (p(X))"),
                                parse_formula("exists X (p(X))"))
    assert not alpha_equivalent(parse_formula("p(X)"), parse_formula("p(Y)"))  # free vars


def test_evaluate_examples(orphan_input):
    asm = parse_formula("exists N (a = N) and exists N (b = N)")
    universe = [Num(10), Num(15), Sym("c")]
    assert evaluate(asm, Interpretation(frozenset(), {"a": Num(10), "b": Num(15)}, universe))
    assert not evaluate(asm, Interpretation(frozenset(), {"a": Sym("c"), "b": Num(15)},
                                            universe))
    assert evaluate(parse_formula("living(jacob)"), Interpretation(orphan_input.atoms))


def test_unbounded_quantifier():
    with pytest.raises(UnboundedQuantifier):
        evaluate(parse_formula("exists X (p(X))"), Interpretation(frozenset()))


def test_comparisons_follow_term_order():
    interp = Interpretation(frozenset())
    assert evaluate(parse_formula("3 < a and a < b and #inf < -5 and b < #sup"), interp)
    assert not evaluate(parse_formula("12 < 3"), interp)


def test_text_syntax():
    f = parse_formula("forall X (p(X) -> exists Y (q(X, Y) or not r))")
    assert to_text(f) == "forall X (p(X) -> exists Y (q(X, Y) or not r))"
    assert isinstance(f.body, Implies)
    assert isinstance(parse_formula("p <-> q"), Iff)


# --- randomized checks ----------------------------------------------------------

UNIVERSE = [Num(0), Num(1), Num(2), Sym("a"), Sym("b")]
GEN_VARS = [Var("X"), Var("Y")]
INT_VARS = [Var("N", Sort.INTEGER), Var("M", Sort.INTEGER)]
P, Q, R = Pred("p", 1), Pred("q", 2), Pred("r", 0)


def _terms(bound):
    opts = [st.sampled_from(UNIVERSE)]
    if bound:
        opts.append(st.sampled_from(sorted(bound, key=lambda v: v.name)))
    return st.one_of(*opts)


def formulas(bound=frozenset(), depth=3):
    t = _terms(bound)
    base = [
        st.builds(lambda a: Atomic(P, (a,)), t),
        st.builds(lambda a, b: Atomic(Q, (a, b)), t, t),
        st.just(Atomic(R, ())),
        st.builds(Cmp, t, st.sampled_from(["=", "!=", "<", "<=", ">", ">="]), t),
        st.sampled_from([TRUE, FALSE]),
    ]
    if depth == 0:
        return st.one_of(*base)
    sub = formulas(bound, depth - 1)

    def quantified(kind):
        return st.sampled_from(GEN_VARS + INT_VARS).flatmap(
            lambda v: formulas(bound | {v}, depth - 1).map(lambda b: kind((v,), b)))

    return st.one_of(
        *base,
        sub.map(Not),
        st.builds(lambda a, b: And((a, b)), sub, sub),
        st.builds(lambda a, b: Or((a, b)), sub, sub),
        st.builds(Implies, sub, sub),
        st.builds(Iff, sub, sub),
        quantified(Exists),
        quantified(ForAll),
        # witness shapes that simplify eliminates
        st.sampled_from(GEN_VARS + INT_VARS).flatmap(
            lambda v: st.tuples(_terms(bound), formulas(bound | {v}, depth - 1)).map(
                lambda p: Exists((v,), And((Cmp(v, "=", p[0]), p[1]))))),
    )


def interpretations():
    atoms = [GroundAtom("p", (c,)) for c in UNIVERSE] + \
        [GroundAtom("q", (c, d)) for c, d in itertools.product(UNIVERSE, repeat=2)] + \
        [GroundAtom("r", ())]
    return st.sets(st.sampled_from(atoms)).map(
        lambda s: Interpretation(frozenset(s), {}, UNIVERSE))


@settings(max_examples=400, deadline=None)
@given(formulas(), interpretations())
def test_simplify_preserves_truth(f, interp):
    assert evaluate(simplify(f), interp) == evaluate(f, interp)


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_text_round_trip(f):
    assert parse_formula(to_text(f)) == f


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_alpha_equivalence_is_reflexive_under_renaming(f):
    renamed = rename_predicates(f, {P: Pred("s", 1)})
    back = rename_predicates(renamed, {Pred("s", 1): P})
    assert back == f
    assert alpha_equivalent(f, f)
