"""Randomised suites shared by the property tests and the acceptance run."""
from __future__ import annotations

import collections
import random
import time

from gen import random_match_pair, random_presentation, random_problem, random_solved_problem
from oracles import Enumerator, brute_match
from rules import RULES, applications, check_application, fresh_solver, random_states
from soas import kernels
from soas.engine import Solver, Strategy, Verified, check_unifier
from soas.equational import check_certificate, match_second_order, solved_form_check, solved_form_unifier

SOUND = dict(max_solutions=6, max_seconds=1.0, max_bindings=8, max_mutations=3, max_nonshrinking=8,
             verify=False)


def soundness(seed: int, n: int):
    """``(problems, solutions, failures)`` over ``n`` random problems."""
    rng = random.Random(seed)
    done = sols = 0
    failures = []
    while done < n:
        E = random_presentation(rng)
        P = random_problem(rng, E)
        if P is None:
            continue
        done += 1
        for sol in Solver(P, E, Strategy(**SOUND)).solve():
            sols += 1
            res = check_unifier(P, E, sol.unifier, certificates=sol.certificates)
            if not isinstance(res, Verified) or not all(check_certificate(E, c) for c in sol.certificates):
                failures.append((P, sol.unifier.mapping, res))
    return done, sols, failures


def per_rule(seed: int, per_rule_count: int, max_seconds: float = 600.0):
    """``(applications checked per rule, failures per rule)``."""
    rng = random.Random(seed)
    done = collections.Counter()
    fails = collections.Counter()
    t0 = time.monotonic()
    for solver, st in random_states(rng):
        if all(done[r] >= per_rule_count for r in RULES) or time.monotonic() - t0 > max_seconds:
            break
        s2 = fresh_solver(solver, st)
        apps = list(applications(s2, s2.initial()))
        rng.shuffle(apps)
        for rule, succ in apps[:4]:
            if done[rule] >= per_rule_count:
                continue
            r = check_application(s2, succ)
            if r is None:
                continue
            done[rule] += 1
            if not r[0]:
                fails[rule] += 1
    return done, fails


EXACT_UPTO = 6
MAX_CANDIDATES = 200_000


def matching(seed: int, n: int, body_size: int = 4):
    """``(pairs compared, mismatches, pairs compared without a size cut)`` against the brute-force oracle.

    A match body is never larger than the subject, so for subjects up to
    ``EXACT_UPTO`` nodes the oracle bound loses nothing and the two sets must
    coincide.  Above that (or when the oracle would try more than
    ``MAX_CANDIDATES`` substitutions) the oracle stops at ``body_size`` and
    the matcher's answers are compared on that range; larger answers are
    replayed instead.
    """
    rng = random.Random(seed)
    done = exact = 0
    bad = []
    while done < n:
        r = random_match_pair(rng)
        if r is None:
            continue
        sig, xi, ctx, pat, subj = r
        used = {m: xi[m] for m in kernels.metas(pat)}
        enum = Enumerator({k: (d.arity, d.result) for k, d in sig.ops.items()})
        dom = {m: (d.params, d.result) for m, d in used.items()}
        size = kernels.size(subj)
        bound = max(body_size, size) if size <= EXACT_UPTO else body_size
        if bound > body_size and _candidates(enum, dom, ctx, bound) > MAX_CANDIDATES:
            bound = body_size
        exact += bound >= size
        oracle = brute_match(enum, pat, subj, dom, ctx, bound)
        found = match_second_order(pat, subj, used, sig, {}, ctx)
        got = set()
        for s in found:
            if all(kernels.size(b) <= bound for _, b in s.mapping.values()):
                got.add(tuple(sorted(s.mapping.items())))
            elif s(pat) != subj:
                bad.append((pat, subj, s.mapping))
        if got != oracle:
            bad.append((pat, subj, got ^ oracle))
        done += 1
    return done, bad, exact


def _candidates(enum, dom, ctx, bound) -> int:
    total = 1
    for params, res in dom.values():
        total *= len(enum.upto(tuple(ctx) + tuple(params), res, bound))
    return total


def solved_forms(seed: int, n: int):
    """``(problems, failures)``: solved-form problems whose unifier leaves the sides apart."""
    rng = random.Random(seed)
    done = 0
    bad = []
    while done < n:
        P = random_solved_problem(rng)
        if P is None:
            continue
        done += 1
        ok, diags = solved_form_check(P)
        if not ok:
            bad.append((P, diags))
            continue
        xi = solved_form_unifier(P)
        if any(xi(c.lhs) != xi(c.rhs) for c in P.constraints):
            bad.append((P, xi.mapping))
    return done, bad
