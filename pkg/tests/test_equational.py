import dataclasses
import random

import pytest

from gen import random_solved_problem
from soas.cli.parser import parse_file, parse_term
from soas.equational import (EqualityCertificate, NotFoundWithinBudget, NotSolvedForm, axiom_lint,
                             check_certificate, equal_modulo, match_second_order, rewrite_once,
                             solved_form_check, solved_form_unifier)
from soas.syntax import Constraint, MetaDecl, SoasError, UnificationProblem
from soas.terms import Meta, Op, Var
from soas.types import Sort, arrow, prod
from suites import matching

A, B = Sort("a"), Sort("b")


def app(f, x, s=A, t=A):
    return Op("app", (s, t), ((0, f), (0, x)))


# -- matching -----------------------------------------------------------------

def test_match_beta_redex(stlc):
    xi = {"m": MetaDecl("m", (A,), A), "n": MetaDecl("n", (), A)}
    pat = parse_term(stlc, "app(abs(x. m[x]), n[])", xi, [], A, ())
    subj = parse_term(stlc, "app(abs(x. x), y)", {}, ["y"], A, (A,))
    res = match_second_order(pat, subj, xi, stlc.sig, {}, (A,))
    assert [s.mapping for s in res] == [{"m": (1, Var(0)), "n": (0, Var(0))}]


def test_match_nullary_metavariable(stlc):
    res = match_second_order(Meta("m", ()), Var(0), {"m": MetaDecl("m", (), A)}, stlc.sig, {}, (A,))
    assert [s.mapping for s in res] == [{"m": (0, Var(0))}]


def test_match_head_clash(stlc):
    xi = {"m": MetaDecl("m", (), A), "n": MetaDecl("n", (), B)}
    pat = parse_term(stlc, "fst(pair(m[], n[]))", xi, [], A, ())
    subj = parse_term(stlc, "fst(y)", {}, ["y"], A, (prod(A, B),))
    assert match_second_order(pat, subj, xi, stlc.sig, {}, (prod(A, B),)) == []


def test_match_abstracts_every_subset_of_occurrences():
    # m[c] against f(c, c): c may be abstracted at neither, either or both positions
    pf = parse_file("sort a . op c : a . op f : (a, a) -> a .")
    xi = {"m": MetaDecl("m", (A,), A)}
    res = match_second_order(Meta("m", (Op("c"),)), parse_term(pf, "f(c, c)", {}, [], A, ()), xi, pf.sig)
    assert len(res) == 4


def test_matching_agrees_with_brute_force():
    n, bad, exact = matching(11, 60)
    assert bad == []


# -- rewriting ----------------------------------------------------------------

def test_rewrite_beta(stlc):
    t = parse_term(stlc, "app(abs(x. x), y)", {}, ["y"], A, (A,))
    steps = rewrite_once(stlc.presentation, {}, (A,), t)
    assert [(s.axiom, s.direction, s.path, s.after) for s in steps] == [("beta", "lr", (), Var(0))]


def test_rewrite_projection(stlc):
    ctx = (A, B)
    t = parse_term(stlc, "fst(pair(u, v))", {}, ["u", "v"], A, ctx)
    steps = rewrite_once(stlc.presentation, {}, ctx, t)
    assert [(s.axiom, s.after) for s in steps] == [("beta_fst", Var(1))]
    assert steps[0].subst.mapping == {"m": (0, Var(1)), "n": (0, Var(0))}


def test_bare_variable_does_not_rewrite(stlc):
    assert rewrite_once(stlc.presentation, {}, (A,), Var(0)) == []


def test_rewrite_under_binders_and_parameters(stlc):
    ctx = (A,)
    theta = {"M": MetaDecl("M", (A,), A)}
    t = parse_term(stlc, "M[app(abs(x. x), y)]", theta, ["y"], A, ctx)
    steps = rewrite_once(stlc.presentation, theta, ctx, t)
    assert [(s.path, s.after) for s in steps] == [((0,), Meta("M", (Var(0),)))]


def test_every_rewrite_step_replays(corpus):
    for pf in corpus.values():
        for P in pf.problems.values():
            for c in P.constraints:
                for side in (c.lhs, c.rhs):
                    for st in rewrite_once(pf.presentation, P.theta, c.ctx, side):
                        cert = EqualityCertificate(st.before, (st,), st.after)
                        assert check_certificate(pf.presentation, cert, P.theta, c.ctx, c.type)


# -- equality modulo E --------------------------------------------------------

def test_equal_syntactic(stlc):
    t = parse_term(stlc, "abs(x. x)", {}, [], arrow(A, A), ())
    cert = equal_modulo(stlc.presentation, {}, (), t, t)
    assert len(cert) == 0 and cert.start == cert.end == t


def test_equal_by_beta(stlc):
    ctx = (arrow(A, B), A)
    names = ["g", "a0"]
    s = parse_term(stlc, "app(app(abs(x. abs(y. app(y, x))), g), abs(z. app(z, a0)))", {}, names, B, ctx)
    t = parse_term(stlc, "app(g, a0)", {}, names, B, ctx)
    cert = equal_modulo(stlc.presentation, {}, ctx, s, t, max_steps=8)
    assert cert and len(cert) == 3 and {st.axiom for st in cert.steps} == {"beta"}
    assert check_certificate(stlc.presentation, cert, {}, ctx, B)


def test_equal_by_surjective_pairing(stlc):
    ctx = (prod(A, B),)
    s = parse_term(stlc, "pair(fst(p), snd(p))", {}, ["p"], prod(A, B), ctx)
    cert = equal_modulo(stlc.presentation, {}, ctx, s, Var(0))
    assert [(st.axiom, st.direction) for st in cert.steps] == [("eta_pair", "lr")]


def test_equal_budget_exhaustion_is_not_a_disproof(stlc):
    ctx = (A, A)
    res = equal_modulo(stlc.presentation, {}, ctx, Var(0), Var(1))
    assert isinstance(res, NotFoundWithinBudget) and not res


def test_equal_is_symmetric_for_bidirectional_axioms(corpus):
    pf = corpus["lambda_mu"]
    E = pf.presentation
    star = Sort("star")
    ctx = (star, star)
    s = parse_term(pf, "app(mu(a. named(a, t)), v)", {}, ["t", "v"], star, ctx)
    t = rewrite_once(E, {}, ctx, s)[0].after
    fwd = equal_modulo(E, {}, ctx, s, t)
    back = equal_modulo(E, {}, ctx, t, s)
    assert len(fwd) == len(back) == 1
    assert check_certificate(E, fwd.reversed(), {}, ctx, star)


def test_tampered_certificates_are_rejected(stlc):
    ctx = (arrow(A, B), A)
    names = ["g", "a0"]
    s = parse_term(stlc, "app(app(abs(x. abs(y. app(y, x))), g), abs(z. app(z, a0)))", {}, names, B, ctx)
    t = parse_term(stlc, "app(g, a0)", {}, names, B, ctx)
    E = stlc.presentation
    cert = equal_modulo(E, {}, ctx, s, t)
    assert check_certificate(E, cert)
    assert not check_certificate(E, EqualityCertificate(cert.end, cert.steps, cert.start))
    bad = dataclasses.replace(cert.steps[0], path=(1,))
    assert not check_certificate(E, EqualityCertificate(cert.start, (bad,) + cert.steps[1:], cert.end))
    wrong = dataclasses.replace(cert.steps[0], axiom="eta")
    assert not check_certificate(E, EqualityCertificate(cert.start, (wrong,) + cert.steps[1:], cert.end))
    flipped = dataclasses.replace(cert.steps[0], direction="sideways")
    assert not check_certificate(E, EqualityCertificate(cert.start, (flipped,) + cert.steps[1:], cert.end))


# -- solved forms -------------------------------------------------------------

def _problem(stlc, theta, names, ctx, lhs, rhs, ty):
    c = Constraint(ctx, parse_term(stlc, lhs, theta, names, ty, ctx), parse_term(stlc, rhs, theta, names, ty, ctx), ty)
    return UnificationProblem(theta, [c], "p", tuple(names))


def test_solved_form_examples(stlc):
    theta = {"M": MetaDecl("M", (B, A), A)}
    P1 = _problem(stlc, theta, ["x", "y"], (A, B), "M[y, x]", "app(abs(z. x), y)", A)
    ok, diags = solved_form_check(P1)
    assert ok and diags == []
    theta2 = {"M": MetaDecl("M", (A, A), A)}
    P2 = _problem(stlc, theta2, ["x", "y"], (A, A), "M[x, x]", "app(abs(z. x), y)", A)
    ok, diags = solved_form_check(P2)
    assert not ok and "distinct" in diags[0]
    theta3 = {"M": MetaDecl("M", (A, B), B)}
    P3 = _problem(stlc, theta3, ["f", "y"], (arrow(A, B), A), "M[y, app(f, y)]", "app(f, y)", B)
    ok, diags = solved_form_check(P3)
    assert not ok and "not a variable" in diags[0]


def test_solved_form_unifier_example(stlc):
    theta = {"M": MetaDecl("M", (B, A), A)}
    P = _problem(stlc, theta, ["x", "y"], (A, B), "M[y, x]", "app(abs(z. x), y)", A)
    xi = solved_form_unifier(P)
    # [M[z1, z2] |-> app(abs(z. z2), z1)]
    assert xi.mapping == {"M": (2, Op("app", (B, A), ((0, Op("abs", (B, A), ((1, Var(1)),))), (0, Var(1)))))}


def test_solved_form_unifier_of_empty_problem():
    assert solved_form_unifier(UnificationProblem({}, [], "empty")).mapping == {}


def test_solved_form_unifier_rejects_other_problems(stlc):
    theta = {"M": MetaDecl("M", (A, A), A)}
    P = _problem(stlc, theta, ["x", "y"], (A, A), "M[x, x]", "app(abs(z. x), y)", A)
    with pytest.raises(NotSolvedForm):
        solved_form_unifier(P)


def test_solved_metavariable_may_not_reoccur():
    theta = {"M": MetaDecl("M", (), A), "N": MetaDecl("N", (), A)}
    f = lambda t: Op("f", (), ((0, t),))  # noqa: E731
    P = UnificationProblem(theta, [Constraint((), Meta("M", ()), f(Meta("N", ())), A),
                                   Constraint((), Meta("N", ()), Op("c"), A)], "p")
    ok, diags = solved_form_check(P)
    assert not ok and "occurs in a solution" in diags[0]


def test_solved_form_unifier_unifies():
    rng = random.Random(5)
    done = 0
    while done < 300:
        P = random_solved_problem(rng)
        if P is None:
            continue
        ok, diags = solved_form_check(P)
        assert ok, diags
        xi = solved_form_unifier(P)
        for c in P.constraints:
            assert xi(c.lhs) == xi(c.rhs)
        done += 1


# -- axioms -------------------------------------------------------------------

def test_axiom_lint_flags_unusable_directions():
    pf = parse_file("""
sort a .
op c : a .
op f : (a) -> a .
axiom grow : m : []a |- m[] == f(m[]) : a .
axiom swap : m : []a, n : []a |- f(m[]) == f(n[]) : a .
""")
    warnings = axiom_lint(pf.presentation)
    assert any("grow (lr)" in w and "matches every term" in w for w in warnings)
    assert any("swap (lr)" in w and "only on the result side" in w for w in warnings)
    assert any("swap (rl)" in w for w in warnings)


def test_degenerate_axiom_is_rejected():
    with pytest.raises(SoasError):
        parse_file("sort a . op c : a . axiom same : |- c == c : a .")
