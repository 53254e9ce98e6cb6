"""Axioms, second-order matching, one-step rewriting and equality certificates."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .kernels import instantiate, shift
from .subst import MetaSubstitution, rename_metas, zs
from .syntax import (Constraint, SoasError, Signature, TypeCheckError, UnificationProblem,
                     subst_term_types, type_of, typecheck)
from .terms import Meta, Op, Term, Var, replace_at, subterm_at
from .types import match_type, subst_type, type_vars


@dataclass
class Axiom:
    name: str
    xi: dict                 # metavariable context of the axiom (may mention tyvars)
    lhs: Term
    rhs: Term
    type: object
    tyvars: tuple = ()
    oriented: bool = False   # True: only lhs -> rhs is used for search
    varctx: tuple = ()       # (name, type) pairs; parametrised away on load

    def sides(self, direction: str):
        return (self.lhs, self.rhs) if direction == "lr" else (self.rhs, self.lhs)

    def directions(self):
        return ("lr",) if self.oriented else ("lr", "rl")


def check_axiom(sig: Signature, ax: Axiom) -> Axiom:
    """Typecheck both sides, parametrise the variable context, reject degenerate axioms."""
    from .subst import parametrise
    tv = set(ax.tyvars)
    for d in ax.xi.values():
        for ty in (*d.params, d.result):
            tv.update(type_vars(ty))
    tv.update(type_vars(ax.type))
    for _, ty in ax.varctx:
        tv.update(type_vars(ty))
    ctx = tuple(ty for _, ty in ax.varctx)
    try:
        lhs = typecheck(sig, ax.xi, ctx, ax.lhs, ax.type, rigid_tyvars=tv)
        rhs = typecheck(sig, ax.xi, ctx, ax.rhs, ax.type, rigid_tyvars=tv)
    except TypeCheckError as e:
        raise SoasError(f"axiom {ax.name}: {e}") from None
    if lhs == rhs:
        raise SoasError(f"axiom {ax.name} is degenerate (both sides are the same term)")
    ax = Axiom(ax.name, dict(ax.xi), lhs, rhs, ax.type, tuple(sorted(tv)), ax.oriented, ax.varctx)
    if ax.varctx:
        _, ax, _ = parametrise(ax.xi, ax.varctx, ax)
    return ax


def axiom_lint(E: "Presentation") -> list:
    """Warnings for axioms whose shape makes search or rewriting degenerate."""
    from .syntax import free_metavariables
    out = []
    for ax in E.axioms:
        for direction in ax.directions():
            l, r = ax.sides(direction)
            if l.__class__ is Meta:
                out.append(f"axiom {ax.name} ({direction}): the rewritten side is a bare "
                           f"metavariable and matches every term of its type")
            extra = sorted(free_metavariables(r) - free_metavariables(l))
            if extra and l.__class__ is not Meta:
                out.append(f"axiom {ax.name} ({direction}): metavariables {', '.join(extra)} occur only on the "
                           f"result side, so this direction is skipped by rewriting")
    return out


@dataclass
class Presentation:
    sig: Signature
    axioms: list = field(default_factory=list)

    def axiom(self, name: str) -> Axiom:
        for a in self.axioms:
            if a.name == name:
                return a
        raise KeyError(name)


# -- axiom instantiation --------------------------------------------------

def instantiate_axiom(ax: Axiom, theta: dict, ctx, tysubst: dict, supply):
    """Instantiate ``ax`` in context ``theta | ctx``.

    Every axiom metavariable ``m : [s..]t`` gets a fresh ``n : [s.., ctx]t`` and
    ``m[ts]`` becomes ``n[ts, x1..xa]``.  Returns ``(new decls, zeta, l, r)``
    where ``zeta`` maps axiom metavariables to bodies over ``ctx, z..``.
    """
    from .syntax import MetaDecl
    ctx = tuple(ctx)
    a = len(ctx)
    decls = {}
    zeta = {}
    for m, d in ax.xi.items():
        n = supply.fresh(m)
        ps = tuple(subst_type(p, tysubst) for p in d.params)
        decls[n] = MetaDecl(n, ps + ctx, subst_type(d.result, tysubst))
        k = len(ps)
        zeta[m] = (k, Meta(n, zs(k) + tuple(Var(k + a - 1 - i) for i in range(a))))
    lhs = kernels.apply_meta_map(zeta, subst_term_types(ax.lhs, tysubst), 0)
    rhs = kernels.apply_meta_map(zeta, subst_term_types(ax.rhs, tysubst), 0)
    return decls, zeta, lhs, rhs


# -- second-order matching ------------------------------------------------

@dataclass(frozen=True)
class _Typer:
    """Types of subject subterms (optional; matching is untyped without a signature)."""
    sig: Optional[Signature]
    theta: dict

    def type(self, ctx, t):
        if self.sig is None:
            return None
        return type_of(self.sig, self.theta, ctx, t)

    def child_ctxs(self, ctx, t):
        if t.__class__ is Op:
            if self.sig is None:
                return [ctx + (None,) * k for k, _ in t.args]
            arity, _ = self.sig.op_instance(t)
            return [ctx + tuple(bs) for bs, _ in arity]
        return [ctx for _ in t.params]


def match_with_types(pattern: Term, subject: Term, xi: dict, sig: Optional[Signature] = None,
                     theta: Optional[dict] = None, ctx=(), tysubst: Optional[dict] = None) -> list:
    """All ``(sigma, tysubst)`` with ``sigma(pattern) == subject``.

    ``xi`` declares the pattern's metavariables; ``theta``/``ctx`` type the
    subject, whose metavariables are opaque constants.  Bodies of ``sigma``
    live in ``ctx, z1..zk``.  Pattern metavariables left undetermined (their
    instances would form an infinite family) cause the match to be dropped.
    """
    ren = {m: "%" + m for m in xi}
    back = {v: k for k, v in ren.items()}
    pat = rename_metas(pattern, ren)
    rxi = {ren[m]: d for m, d in xi.items()}
    typer = _Typer(sig, theta or {})
    need = kernels.metas(pat)
    out = []
    seen = set()
    for sigma, ts in _solve(((pat, subject, 0, tuple(ctx)),), {}, dict(tysubst or {}), rxi, typer):
        if not need <= set(sigma):
            continue
        inst = kernels.apply_meta_map(sigma, subst_term_types(pat, ts), 0)
        if inst != subject:
            continue
        mp = {back[m]: e for m, e in sigma.items() if m in back}
        key = (tuple(sorted(mp.items(), key=lambda kv: kv[0])), tuple(sorted(ts.items(), key=lambda kv: kv[0])))
        if key in seen:
            continue
        seen.add(key)
        out.append((MetaSubstitution(mp), ts))
    return out


def match_second_order(pattern: Term, subject: Term, xi: dict, sig: Optional[Signature] = None,
                       theta: Optional[dict] = None, ctx=(), tysubst: Optional[dict] = None) -> list:
    return [s for s, _ in match_with_types(pattern, subject, xi, sig, theta, ctx, tysubst)]


def _determined(t, sigma) -> bool:
    return all(m in sigma for m in kernels.metas(t))


def _pick(work, sigma):
    for i, w in enumerate(work):
        if w[0].__class__ is not Meta:
            return i
    for i, w in enumerate(work):
        if all(_determined(p, sigma) for p in w[0].params):
            return i
    return 0


def _solve(work, sigma, ts, xi, typer):
    if not work:
        yield sigma, ts
        return
    i = _pick(work, sigma)
    p, u, d, uctx = work[i]
    rest = work[:i] + work[i + 1:]
    cls = p.__class__
    if cls is Var:
        if u == p:
            yield from _solve(rest, sigma, ts, xi, typer)
        return
    if cls is Op:
        if u.__class__ is not Op or u.name != p.name or len(u.args) != len(p.args):
            return
        if len(p.tyargs) != len(u.tyargs):
            return
        ts2 = dict(ts)
        for pa, ua in zip(p.tyargs, u.tyargs):
            if match_type(pa, ua, ts2) is None:
                return
        new = []
        cctx = typer.child_ctxs(uctx, u)
        for (pk, pb), (uk, ub), c in zip(p.args, u.args, cctx):
            if pk != uk:
                return
            new.append((pb, ub, d + pk, c))
        yield from _solve(tuple(new) + rest, sigma, ts2, xi, typer)
        return
    # flex: p = m[ps]
    decl = xi[p.name]
    k = len(p.params)
    uty = typer.type(uctx, u)
    if uty is not None:
        ts = match_type(decl.result, uty, dict(ts))
        if ts is None:
            return
    known = [_determined(q, sigma) for q in p.params]
    if all(known):
        qs = tuple(kernels.apply_meta_map(sigma, q, d) for q in p.params)
        if p.name in sigma:
            if instantiate(sigma[p.name][1], qs, d) == u:
                yield from _solve(rest, sigma, ts, xi, typer)
            return
        for body in _abstract(u, qs, d, k):
            s2 = dict(sigma)
            s2[p.name] = (k, body)
            yield from _solve(rest, s2, ts, xi, typer)
        return
    # some parameters are not determined yet: guess their images among the
    # subterms of u (or leave them unused)
    cands = _closed_subterms(u, uctx, typer)
    options = []
    for j, q in enumerate(p.params):
        if known[j]:
            options.append([("known", kernels.apply_meta_map(sigma, q, d), None)])
        else:
            opts = [("unused", None, None)]
            pty = decl.params[j]
            for s, sty in cands:
                if sty is not None:
                    t2 = match_type(pty, sty, dict(ts))
                    if t2 is None:
                        continue
                opts.append(("guess", s, sty))
            options.append(opts)
    for choice in itertools.product(*options):
        ts2 = dict(ts)
        ok = True
        for j, (kind, s, sty) in enumerate(choice):
            if kind == "guess" and sty is not None and match_type(decl.params[j], sty, ts2) is None:
                ok = False
                break
        if not ok:
            continue
        qs = tuple(s for _, s, _ in choice)
        guessed = [j for j, (kind, _, _) in enumerate(choice) if kind == "guess"]
        extra = tuple((p.params[j], qs[j], d, uctx) for j in guessed)
        if p.name in sigma:
            body = sigma[p.name][1]
            used = kernels.free_vars(body)
            if any(choice[j][0] == "unused" and (k - 1 - j) in used for j in range(k)):
                continue
            if any((k - 1 - j) not in used for j in guessed):
                continue
            qs_fill = tuple(q if q is not None else Var(0) for q in qs)
            if instantiate(body, qs_fill, d) == u:
                yield from _solve(extra + rest, sigma, ts2, xi, typer)
            continue
        for body in _abstract(u, qs, d, k):
            used = kernels.free_vars(body)
            if any((k - 1 - j) not in used for j in guessed):
                continue
            s2 = dict(sigma)
            s2[p.name] = (k, body)
            yield from _solve(extra + rest, s2, ts2, xi, typer)


def _closed_subterms(u, uctx, typer):
    """Distinct subterms of ``u`` that do not mention variables bound inside ``u``."""
    out = {}

    def walk(s, e, ctx):
        if s._fv <= 0 or all(v >= e for v in kernels.free_vars(s)):
            low = shift(s, -e) if e else s
            if low not in out:
                out[low] = typer.type(ctx, s)
        if s.__class__ is Op:
            for (k, b), c in zip(s.args, typer.child_ctxs(ctx, s)):
                walk(b, e + k, c)
        elif s.__class__ is Meta:
            for p in s.params:
                walk(p, e, ctx)

    walk(u, 0, uctx)
    return list(out.items())


def _abstract(u, qs, d, k) -> list:
    """Bodies ``b`` over ``ctx, z1..zk`` with ``instantiate(b, qs, d) == u``.

    ``qs`` entries may be None (that parameter is never abstracted).  Each
    occurrence of a parameter image may independently be abstracted or kept.
    """
    def go(s, e):
        opts = []
        for j, q in enumerate(qs):
            if q is not None and (shift(q, e) if e else q) == s:
                opts.append(Var(e + k - 1 - j))
        cls = s.__class__
        if cls is Var:
            i = s.index
            if i < e:
                opts.append(s)
            elif i - e >= d:
                opts.append(Var(i - d + k))
        elif cls is Meta:
            ps = [go(p, e) for p in s.params]
            if all(ps):
                for combo in itertools.product(*ps):
                    opts.append(Meta(s.name, combo))
        else:
            args = [go(b, e + kk) for kk, b in s.args]
            if all(args):
                for combo in itertools.product(*args):
                    opts.append(Op(s.name, s.tyargs, tuple((kk, b) for (kk, _), b in zip(s.args, combo))))
        return list(dict.fromkeys(opts))

    return go(u, 0)


# -- rewriting ------------------------------------------------------------

@dataclass(frozen=True)
class RewriteStep:
    axiom: str
    direction: str           # "lr" or "rl"
    path: tuple
    subst: MetaSubstitution  # axiom metavariables -> bodies over the redex context
    tysubst: dict
    before: Term
    after: Term

    def reversed(self) -> "RewriteStep":
        return RewriteStep(self.axiom, "rl" if self.direction == "lr" else "lr", self.path,
                           self.subst, self.tysubst, self.after, self.before)

    def lifted(self, prefix: tuple, outer_before: Term, outer_after: Term) -> "RewriteStep":
        return RewriteStep(self.axiom, self.direction, prefix + self.path, self.subst, self.tysubst,
                           outer_before, outer_after)


@dataclass(frozen=True)
class EqualityCertificate:
    start: Term
    steps: tuple
    end: Term

    def reversed(self) -> "EqualityCertificate":
        return EqualityCertificate(self.end, tuple(s.reversed() for s in reversed(self.steps)), self.start)

    def __len__(self):
        return len(self.steps)


def positions_typed(sig, theta, ctx, t):
    """Pre-order walk yielding ``(path, ctx, subterm)``."""
    stack = [((), tuple(ctx), t)]
    while stack:
        path, c, s = stack.pop()
        yield path, c, s
        kids = []
        if s.__class__ is Op:
            arity, _ = sig.op_instance(s)
            for i, ((k, b), (bs, _)) in enumerate(zip(s.args, arity)):
                kids.append((path + (i,), c + tuple(bs), b))
        elif s.__class__ is Meta:
            for i, p in enumerate(s.params):
                kids.append((path + (i,), c, p))
        stack.extend(reversed(kids))


def rewrite_at(E: Presentation, theta: dict, ctx, t: Term, path: tuple, sctx, s: Term) -> list:
    out = []
    ty = type_of(E.sig, theta, sctx, s)
    for ax in E.axioms:
        ts0 = match_type(ax.type, ty, {})
        if ts0 is None:
            continue
        for direction in ax.directions():
            pat, res = ax.sides(direction)
            if pat.__class__ is Op and (s.__class__ is not Op or s.name != pat.name):
                continue
            for sigma, ts in match_with_types(pat, s, ax.xi, E.sig, theta, sctx, ts0):
                if not kernels.metas(res) <= set(sigma.mapping):
                    continue
                if not all(v in ts for v in ax.tyvars if _mentions(res, ax, v)):
                    continue
                new = kernels.apply_meta_map(sigma.mapping, subst_term_types(res, ts), 0)
                out.append(RewriteStep(ax.name, direction, path, sigma, ts, t, replace_at(t, path, new)))
    return out


def _mentions(res, ax, v) -> bool:
    from .syntax import term_types
    for ty in term_types(res):
        if v in set(type_vars(ty)):
            return True
    return False


def rewrite_once(E: Presentation, theta: dict, ctx, t: Term) -> list:
    """Every single-redex rewrite of ``t`` (leftmost-outermost order)."""
    out = []
    for path, sctx, s in positions_typed(E.sig, theta, ctx, t):
        out.extend(rewrite_at(E, theta, ctx, t, path, sctx, s))
    return out


def normalize_chain(E: Presentation, theta: dict, ctx, t: Term, max_steps: int = 100) -> list:
    """Repeated leftmost-outermost rewriting; stops at a normal form or the step cap."""
    steps = []
    seen = {t}
    for _ in range(max_steps):
        nxt = rewrite_once(E, theta, ctx, t)
        nxt = [s for s in nxt if s.after not in seen]
        if not nxt:
            break
        st = nxt[0]
        steps.append(st)
        t = st.after
        seen.add(t)
    return steps


class NotFoundWithinBudget:
    """Search exhausted its budget; this is not a proof of inequality."""

    def __init__(self, visited: int):
        self.visited = visited

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NotFoundWithinBudget(visited={self.visited})"


def equal_modulo(E: Presentation, theta: dict, ctx, s: Term, t: Term, max_steps: int = 8,
                 max_visited: int = 20000):
    """Bidirectional breadth-first search for a chain ``s <->* t``.

    Returns a minimal-length EqualityCertificate or NotFoundWithinBudget.
    """
    if s == t:
        return EqualityCertificate(s, (), t)
    # parent maps: term -> (previous term, step) with steps oriented away from the root
    par_s = {s: None}
    par_t = {t: None}
    front_s, front_t = [s], [t]
    ds = dt = 0
    best = None
    while front_s or front_t:
        if ds + dt >= max_steps:
            break
        if len(par_s) + len(par_t) > max_visited:
            return NotFoundWithinBudget(len(par_s) + len(par_t))
        expand_s = front_s and (not front_t or len(front_s) <= len(front_t))
        front, par, other = (front_s, par_s, par_t) if expand_s else (front_t, par_t, par_s)
        nxt = []
        for u in front:
            for st in rewrite_once(E, theta, ctx, u):
                v = st.after
                if v in par:
                    continue
                par[v] = (u, st)
                nxt.append(v)
                if v in other:
                    cand = _join(par_s, par_t, v)
                    if best is None or len(cand.steps) < len(best.steps):
                        best = cand
        if expand_s:
            front_s, ds = nxt, ds + 1
        else:
            front_t, dt = nxt, dt + 1
        if best is not None:
            return best
    return NotFoundWithinBudget(len(par_s) + len(par_t))


def _join(par_s, par_t, mid) -> EqualityCertificate:
    left = []
    u = mid
    while par_s[u] is not None:
        prev, st = par_s[u]
        left.append(st)
        u = prev
    start = u
    left.reverse()
    right = []
    u = mid
    while par_t[u] is not None:
        prev, st = par_t[u]
        right.append(st.reversed())
        u = prev
    return EqualityCertificate(start, tuple(left + right), u)


def check_step(E: Presentation, st: RewriteStep) -> bool:
    try:
        ax = E.axiom(st.axiom)
    except KeyError:
        return False
    if st.direction not in ("lr", "rl"):
        return False
    pat, res = ax.sides(st.direction)
    mp = st.subst.mapping
    if not set(mp) <= set(ax.xi):
        return False
    for m, (k, _) in mp.items():
        if k != len(ax.xi[m].params):
            return False
    if not (kernels.metas(pat) | kernels.metas(res)) <= set(mp):
        return False
    try:
        redex = subterm_at(st.before, st.path)
        lhs = kernels.apply_meta_map(mp, subst_term_types(pat, st.tysubst), 0)
        if lhs != redex:
            return False
        rhs = kernels.apply_meta_map(mp, subst_term_types(res, st.tysubst), 0)
        return replace_at(st.before, st.path, rhs) == st.after
    except (IndexError, ValueError):
        return False


def check_certificate(E: Presentation, cert: EqualityCertificate, theta: Optional[dict] = None,
                      ctx=None, ty=None) -> bool:
    """Replay every step; with ``theta``/``ctx``/``ty`` also typecheck each intermediate term."""
    cur = cert.start
    terms = [cur]
    for st in cert.steps:
        if st.before != cur or not check_step(E, st):
            return False
        cur = st.after
        terms.append(cur)
    if cur != cert.end:
        return False
    if theta is not None and ctx is not None and ty is not None:
        try:
            for u in terms:
                if typecheck(E.sig, theta, ctx, u, ty) != u:
                    return False
        except (TypeCheckError, KeyError):
            return False
    return True


# -- solved forms ---------------------------------------------------------

def _solved_entry(c: Constraint):
    """``(name, k, body)`` if ``c`` is ``m[z..] =? t`` with the solved-form side conditions, else a reason."""
    reasons = []
    for lhs, rhs in ((c.lhs, c.rhs), (c.rhs, c.lhs)):
        if lhs.__class__ is not Meta:
            continue
        idx = []
        bad = None
        for p in lhs.params:
            if p.__class__ is not Var:
                bad = "a parameter is not a variable"
                break
            idx.append(p.index)
        if bad is None and len(set(idx)) != len(idx):
            bad = "parameters are not distinct variables"
        if bad is None and kernels.occurs(lhs.name, rhs):
            bad = f"{lhs.name} occurs on the other side"
        if bad is None:
            k = len(idx)
            table = {v: k - 1 - j for j, v in enumerate(idx)}
            if not kernels.free_vars(rhs) <= set(table):
                bad = "the other side mentions a variable that is not a parameter"
            else:
                return lhs.name, k, kernels.remap_free(rhs, table)
        reasons.append(bad)
    return reasons[0] if reasons else "neither side is a metavariable"


def solved_form_check(P: UnificationProblem):
    """``(ok, diagnostics)`` with one diagnostic string per offending constraint."""
    diags = []
    seen = set()
    entries = []
    for i, c in enumerate(P.constraints):
        e = _solved_entry(c)
        if isinstance(e, str):
            diags.append(f"constraint {i + 1}: {e}")
            continue
        if e[0] in seen:
            diags.append(f"constraint {i + 1}: {e[0]} already solved by another constraint")
        seen.add(e[0])
        entries.append((i, e))
    for i, (_, _, body) in entries:
        hit = sorted(kernels.metas(body) & seen)
        if hit:
            diags.append(f"constraint {i + 1}: solved metavariable {hit[0]} occurs in a solution")
    return not diags, diags


class NotSolvedForm(SoasError):
    pass


def solved_form_unifier(P: UnificationProblem) -> MetaSubstitution:
    ok, diags = solved_form_check(P)
    if not ok:
        raise NotSolvedForm("; ".join(diags))
    mp = {}
    for c in P.constraints:
        name, k, body = _solved_entry(c)
        mp[name] = (k, body)
    return MetaSubstitution(mp, dict(P.theta), dict(P.theta))
