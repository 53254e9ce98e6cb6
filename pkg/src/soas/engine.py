"""Transition rules, search, certificate reconstruction, unifier checking.

A search node holds the current metavariable context, the remaining
constraints (each with a stable id), budget counters and a persistent log of
rule applications.  Solutions are rebuilt from the log: the unifier is the
composition of all bindings, and each original constraint gets an equality
certificate assembled from the decompose/mutate/delete records.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .bindings import elimination, identification, imitation, iteration, jp_projection
from .equational import (EqualityCertificate, NotFoundWithinBudget, Presentation, RewriteStep,
                         check_certificate, equal_modulo, instantiate_axiom)
from .subst import MetaSubstitution, NameSupply, compose, rename_metas, zs
from .syntax import (Constraint, MetaDecl, OperatorDecl, Signature, SoasError, TypeCheckError,
                     UnificationProblem, mixed_operator_lint, subst_term_types, term_types, typecheck)
from .terms import Meta, Op, Var, replace_at
from .types import TyCon, TyVar, TypeUnifier, sort_key, subst_type, subterm_types, type_vars


@dataclass
class Strategy:
    discipline: str = "fair"          # "fair" (iterative deepening) or "best-first"
    max_mutations: int = 6
    max_bindings: int = 12
    max_nonshrinking: int = 12
    max_solutions: Optional[int] = None
    max_seconds: Optional[float] = None
    max_depth: Optional[int] = None   # cap on branching depth (None: until exhausted)
    iter_type_depth: int = 1
    iterate: bool = True
    eliminate_star: bool = True
    # mutate flexible sides with operator-headed axiom sides (needed for
    # completeness; switching it off trades completeness for speed)
    flex_mutation: bool = True
    verify: bool = True
    seed: int = 0                     # the search is deterministic; kept for reproducible CLI runs

    def __post_init__(self):
        for k in ("max_mutations", "max_bindings", "max_nonshrinking", "iter_type_depth"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be nonnegative")


@dataclass(frozen=True)
class ProblemState:
    theta: dict
    cons: tuple               # ((cid, Constraint, noroot), ...)
    log: Optional[tuple]      # persistent list: (entry, previous)
    mutations: int = 0
    bindings: int = 0
    nonshrinking: int = 0
    nbinds: int = 0           # number of bind records in the log
    next_cid: int = 0
    counter: int = 0          # name supply position
    depth: int = 0            # branching steps taken
    tysub: dict = field(default_factory=dict)   # bindings of type unknowns
    tycounter: int = 0

    def size(self) -> int:
        return sum(kernels.size(c.lhs) + kernels.size(c.rhs) for _, c, _ in self.cons)


@dataclass
class Solution:
    unifier: MetaSubstitution
    certificates: list        # one EqualityCertificate per original constraint
    trace: list
    depth: int = 0
    counters: tuple = (0, 0, 0)

    def key(self):
        return canonical_key(self.unifier)


def cost(state: ProblemState) -> tuple:
    return (state.bindings, state.mutations, state.size())


# -- classification ---------------------------------------------------------

RIGID, FLEX_OP, FLEX_VAR, FLEX_FLEX = 0, 1, 2, 3


def classify(c: Constraint) -> int:
    lm, rm = c.lhs.__class__ is Meta, c.rhs.__class__ is Meta
    if lm and rm:
        return FLEX_FLEX
    if not lm and not rm:
        return RIGID
    other = c.rhs if lm else c.lhs
    return FLEX_OP if other.__class__ is Op else FLEX_VAR


def solved_pair(c: Constraint):
    """``(m, k, body)`` when ``c`` is ``m[distinct vars] =? t`` with ``t`` over those vars and free of ``m``."""
    for a, b in ((c.lhs, c.rhs), (c.rhs, c.lhs)):
        if a.__class__ is not Meta:
            continue
        idx = []
        for p in a.params:
            if p.__class__ is not Var:
                break
            idx.append(p.index)
        else:
            if len(set(idx)) != len(idx) or kernels.occurs(a.name, b):
                continue
            k = len(idx)
            table = {v: k - 1 - j for j, v in enumerate(idx)}
            if kernels.free_vars(b) <= set(table):
                return a.name, k, kernels.remap_free(b, table)
    return None


# -- type unknowns ------------------------------------------------------------
# Axiom type variables left open by a mutation become unknowns "?tN" that are
# fixed later by decomposition, projection or identification, and defaulted
# when a solution is reached.

UNKNOWN = "?t"


def _unify_types(pairs) -> Optional[dict]:
    u = TypeUnifier()
    for a, b in pairs:
        if not u.unify(a, b):
            return None
    return {k: u.zonk(TyVar(k)) for k in u.bindings}


def _has_unknown(ty) -> bool:
    return any(v.startswith("?") for v in type_vars(ty))


def _zonk_constraint(c: Constraint, d: dict) -> Constraint:
    return Constraint(tuple(subst_type(t, d) for t in c.ctx), subst_term_types(c.lhs, d),
                      subst_term_types(c.rhs, d), subst_type(c.type, d))


def _zonk_decl(x: MetaDecl, d: dict) -> MetaDecl:
    return MetaDecl(x.name, tuple(subst_type(t, d) for t in x.params), subst_type(x.result, d))


def _skeleton_pairs(lp, u, out):
    """Type equations from operator nodes shared by an axiom side and a term."""
    if lp.__class__ is Op and u.__class__ is Op and lp.name == u.name and len(lp.args) == len(u.args):
        out.extend(zip(lp.tyargs, u.tyargs))
        for (_, x), (_, y) in zip(lp.args, u.args):
            _skeleton_pairs(x, y, out)
    return out


# -- solver -------------------------------------------------------------------

class Solver:
    def __init__(self, problem: UnificationProblem, E: Presentation, strategy: Optional[Strategy] = None):
        self.P = problem
        self.E = E
        self.sig = E.sig
        self.strat = strategy or Strategy()
        self.warnings = mixed_operator_lint(self.sig)
        self.stats = {"nodes": 0, "iterations": 0, "cutoff": False, "timeout": False, "rejected": 0}
        self.theta0 = dict(problem.theta)
        self.reserved = set(problem.theta)
        self._types0 = self._type_candidates()
        self._gammas = self._closure(self._types0, self.strat.iter_type_depth)
        self._deadline = None
        self._cut = False
        self._reduce_cache = {}

    # candidate types: ground types of the problem, axioms and signature,
    # closed under components; iteration types add constructor layers on top
    def _type_candidates(self):
        tys = []
        for c in self.P.constraints:
            tys.append(c.type)
            tys.extend(c.ctx)
            tys.extend(term_types(c.lhs))
            tys.extend(term_types(c.rhs))
        for d in self.P.theta.values():
            tys.extend(d.params)
            tys.append(d.result)
        for ax in self.E.axioms:
            tys.append(ax.type)
            for d in ax.xi.values():
                tys.extend(d.params)
                tys.append(d.result)
        for d in self.sig.ops.values():
            for bs, r in d.arity:
                tys.extend(bs)
                tys.append(r)
            tys.append(d.result)
        return sorted(subterm_types(tys), key=sort_key)

    def _closure(self, base, depth):
        out = set(base)
        for _ in range(depth):
            new = set()
            for name, n in self.sig.tycons.items():
                for args in itertools.product(sorted(out, key=sort_key), repeat=n):
                    new.add(TyCon(name, args))
            out |= new
        return out

    # -- entry points
    def initial(self) -> ProblemState:
        cons = tuple((i, c, False) for i, c in enumerate(self.P.constraints))
        return ProblemState(dict(self.P.theta), cons, None, next_cid=len(cons))

    def solve(self):
        self._deadline = (time.monotonic() + self.strat.max_seconds) if self.strat.max_seconds else None
        seen = set()
        count = 0
        gen = self._fair() if self.strat.discipline == "fair" else self._best_first()
        for st in gen:
            sol = self.build_solution(st)
            if sol is None:
                continue
            key = sol.key()
            if key in seen:
                continue
            seen.add(key)
            count += 1
            yield sol
            if self.strat.max_solutions is not None and count >= self.strat.max_solutions:
                return

    def _timed_out(self) -> bool:
        if self._deadline is not None and time.monotonic() > self._deadline:
            self.stats["timeout"] = True
            return True
        return False

    def _fair(self):
        limit = 0
        root = self.initial()
        while True:
            self.stats["iterations"] += 1
            self._cut = False
            for st in self._dfs(root, limit):
                yield st
            if self.stats["timeout"] or not self._cut:
                return
            self.stats["cutoff"] = True
            limit += 1
            if self.strat.max_depth is not None and limit > self.strat.max_depth:
                return

    def _dfs(self, st, limit):
        stack = [st]
        while stack:
            if self._timed_out():
                return
            st = stack.pop()
            self.stats["nodes"] += 1
            st = self.simplify(st)
            if not st.cons:
                if st.depth == limit:
                    yield st
                continue
            succ = self.successors(st, paid=st.depth < limit)
            stack.extend(reversed(succ))

    def _best_first(self):
        tie = itertools.count()
        root = self.initial()
        heap = [(cost(root), next(tie), root)]
        while heap:
            if self._timed_out():
                return
            _, _, st = heapq.heappop(heap)
            self.stats["nodes"] += 1
            st = self.simplify(st)
            if not st.cons:
                yield st
                continue
            for s in self.successors(st):
                heapq.heappush(heap, (cost(s), next(tie), s))

    # -- deterministic steps: delete and eliminate*
    def simplify(self, st: ProblemState) -> ProblemState:
        while True:
            nxt = self.simplify_once(st)
            if nxt is None:
                return st
            st = nxt

    def simplify_once(self, st: ProblemState) -> Optional[ProblemState]:
        """One delete or eliminate* step, or None when neither applies."""
        for pos, (cid, c, _) in enumerate(st.cons):
            if c.lhs == c.rhs:
                return self._delete(st, pos)
            if self.strat.eliminate_star:
                sp = solved_pair(c)
                if sp is not None:
                    name, k, body = sp
                    theta = {n: d for n, d in st.theta.items() if n != name}
                    return self._bind(st, {name: (k, body)}, theta, ("eliminate*", name), paid=False)
        return None

    def _delete(self, st, pos):
        cid, c, _ = st.cons[pos]
        entry = ("delete", cid, st.nbinds, c)
        return _replace(st, cons=st.cons[:pos] + st.cons[pos + 1:], log=(entry, st.log))

    def _bind(self, st, mp: dict, theta, tag, paid=True, branching=True):
        cons = tuple((cid, Constraint(c.ctx, kernels.apply_meta_map(mp, c.lhs), kernels.apply_meta_map(mp, c.rhs), c.type), nr)
                     for cid, c, nr in st.cons)
        new = _replace(st, theta=theta, cons=cons, log=(("bind", mp, tag), st.log), nbinds=st.nbinds + 1)
        if paid:
            grow = new.size() >= st.size()
            new = _replace(new, bindings=st.bindings + 1, nonshrinking=st.nonshrinking + (1 if grow else 0),
                           depth=st.depth + (1 if branching else 0))
        return new

    def _zonk(self, st, d: dict) -> ProblemState:
        if not d:
            return st
        theta = {n: _zonk_decl(x, d) for n, x in st.theta.items()}
        cons = tuple((cid, _zonk_constraint(c, d), nr) for cid, c, nr in st.cons)
        tysub = {k: subst_type(v, d) for k, v in st.tysub.items()}
        tysub.update(d)
        return _replace(st, theta=theta, cons=cons, tysub=tysub)

    # -- branching steps
    def select(self, st: ProblemState):
        """``(pos, options)`` for the constraint to work on, or None when the state is dead.

        Tiers follow the rule priorities (rigid pairs first, then flex-rigid,
        flex-variable, flex-flex).  Within a tier forced constraints come
        first, then those whose flexible head occurs in no other constraint
        (other constraints may still determine it), then fewest options.
        """
        best = None
        for pos, (cid, c, nr) in enumerate(st.cons):
            cls = classify(c)
            if best is not None and cls > best[0][0]:
                continue
            opts = self.options(st, c, nr)
            if not opts:
                return None          # no rule applies: this constraint can never be solved here
            shared = 0
            if cls != RIGID:
                heads = {x.name for x in (c.lhs, c.rhs) if x.__class__ is Meta}
                shared = int(any(h in kernels.metas(o.lhs) or h in kernels.metas(o.rhs)
                                 for h in heads for q, (_, o, _) in enumerate(st.cons) if q != pos))
            key = (cls, len(opts) > 1, shared, len(opts), pos)
            if best is None or key < best[0]:
                best = (key, pos, opts)
        return None if best is None else (best[1], best[2])

    def successors(self, st: ProblemState, paid: bool = True) -> list:
        """Successors for the selected constraint.  With ``paid`` false only
        steps that do not increase the depth are built."""
        sel = self.select(st)
        if sel is None:
            return []
        pos, opts = sel
        branching = len(opts) > 1
        out = []
        for o in opts:
            if not paid and branching and o[0] != "decompose":
                self._cut = True
                continue
            s = self.apply(st, pos, o, branching)
            if s is not None:
                out.append(s)
        return out

    def transitions(self, st: ProblemState) -> list:
        """``(rule tag, step substitution, successor)`` for the selected constraint.

        Delete and eliminate* take priority, as in :meth:`simplify`; a single
        such step is the only successor.
        """
        simple = self.simplify_once(st)
        if simple is not None:
            entry = simple.log[0]
            return [(entry[0] if entry[0] != "bind" else entry[2][0], _step_subst(st, simple), simple)]
        sel = self.select(st)
        if sel is None:
            return []
        pos, opts = sel
        out = []
        for o in opts:
            s = self.apply(st, pos, o, len(opts) > 1)
            if s is not None:
                out.append((o[0], _step_subst(st, s), s))
        return out

    def _can_bind(self, st) -> bool:
        return st.bindings < self.strat.max_bindings and st.nonshrinking <= self.strat.max_nonshrinking

    def options(self, st, c: Constraint, noroot: bool = False) -> list:
        out = []
        l, r = c.lhs, c.rhs
        if l.__class__ is Op and r.__class__ is Op:
            if (l.name == r.name and [k for k, _ in l.args] == [k for k, _ in r.args]
                    and _unify_types(zip(l.tyargs, r.tyargs)) is not None):
                out.append(("decompose",))
        elif l.__class__ is Meta and r.__class__ is Meta and l.name == r.name:
            out.append(("decompose",))
        if not noroot and st.mutations < self.strat.max_mutations:
            out.extend(self._mutate_options(st, c))
        cls = classify(c)
        if cls == RIGID or not self._can_bind(st):
            return out
        if cls == FLEX_FLEX:
            out.extend(self._flex_flex_options(st, c))
            return out
        flex, other = (l, r) if l.__class__ is Meta else (r, l)
        d = st.theta[flex.name]
        if cls == FLEX_OP:
            out.append(("imitate", flex.name))
        for i, p in enumerate(d.params):
            if p == d.result or ((_has_unknown(p) or _has_unknown(d.result))
                                 and _unify_types([(p, d.result)]) is not None):
                out.append(("project", flex.name, i))
        return out

    def _mutate_options(self, st, c: Constraint) -> list:
        out = []
        for side in ("lhs", "rhs"):
            u = c.lhs if side == "lhs" else c.rhs
            for ax in self.E.axioms:
                for direction in ax.directions():
                    lp, _ = ax.sides(direction)
                    if lp.__class__ is not Meta:
                        if u.__class__ is Meta:
                            if not self.strat.flex_mutation:
                                continue
                        elif u.__class__ is not Op or u.name != lp.name:
                            continue
                        elif ax.oriented and not self._compatible(lp, u):
                            continue
                    if self._mutation_types(st, c, u, ax, direction) is not None:
                        out.append(("mutate", side, ax.name, direction))
        return out

    def _mutation_types(self, st, c, u, ax, direction):
        """Axiom type instantiation for mutating ``u``: ``(ts, delta)`` where
        ``ts`` maps the axiom's type variables (open ones to fresh unknowns)
        and ``delta`` binds unknowns of the current state."""
        fresh = {v: TyVar(f"{UNKNOWN}{st.tycounter + i + 1}") for i, v in enumerate(ax.tyvars)}
        lp, _ = ax.sides(direction)
        pairs = [(subst_type(ax.type, fresh), c.type)]
        _skeleton_pairs(subst_term_types(lp, fresh), u, pairs)
        sol = _unify_types(pairs)
        if sol is None:
            return None
        ts = {v: subst_type(t, sol) for v, t in fresh.items()}
        delta = {k: v for k, v in sol.items() if k not in {t.name for t in fresh.values()}}
        return ts, delta

    def _compatible(self, l, u, root=True):
        """Can an instance of ``u`` reach a term matching the oriented side ``l``
        by rewriting below the root?  Metavariables on either side match
        anything; a rigid proper subterm may change its head only if some
        oriented axiom could fire at its root."""
        lc, uc = l.__class__, u.__class__
        if lc is Meta or uc is Meta:
            return True
        if not root and uc is Op and self._may_reduce(u):
            return True
        if lc is Var:
            return uc is Var and u.index == l.index
        if uc is Var or l.name != u.name or len(l.args) != len(u.args):
            return False
        return all(self._compatible(a, b, False) for (_, a), (_, b) in zip(l.args, u.args))

    def _may_reduce(self, u):
        hit = self._reduce_cache.get(u)
        if hit is None:
            hit = False
            for ax in self.E.axioms:
                for d in ax.directions():
                    lp, _ = ax.sides(d)
                    if lp.__class__ is Meta or (lp.__class__ is Op and lp.name == u.name and self._compatible(lp, u)):
                        hit = True
            if len(self._reduce_cache) > 100000:
                self._reduce_cache.clear()
            self._reduce_cache[u] = hit
        return hit

    def _flex_flex_options(self, st, c) -> list:
        out = []
        l, r = c.lhs, c.rhs
        if l.name != r.name:
            out.append(("identify", l.name, r.name))
        else:
            agree = [i for i, (a, b) in enumerate(zip(l.params, r.params)) if a == b]
            for n in range(len(agree), -1, -1):
                for kept in itertools.combinations(agree, n):
                    out.append(("eliminate", l.name, kept))
        if self.strat.iterate:
            targets = [l.name] if l.name == r.name else [l.name, r.name]
            for m in targets:
                for name, d in self.sig.ops.items():
                    for tyargs in itertools.product(self._types0, repeat=len(d.tyvars)):
                        _, res = d.instance(tyargs)
                        if res in self._gammas:
                            out.append(("iterate", m, name, tuple(tyargs), res))
        return out

    def apply(self, st: ProblemState, pos: int, o, branching: bool = True) -> Optional[ProblemState]:
        kind = o[0]
        if kind == "decompose":
            return self._decompose(st, pos)
        supply = NameSupply(self.reserved | set(st.theta), st.counter)
        if kind == "mutate":
            return self._mutate(st, pos, o, supply, branching)
        cid, c, _ = st.cons[pos]
        if kind == "imitate":
            other = c.rhs if c.lhs.__class__ is Meta else c.lhs
            sub, _ = imitation(st.theta, o[1], other.name, other.tyargs, self.sig, supply)
        elif kind == "project":
            d = st.theta[o[1]]
            st = self._zonk(st, _unify_types([(d.params[o[2]], d.result)]))
            sub = jp_projection(st.theta, o[1], o[2])
        elif kind == "identify":
            sub, _ = identification(st.theta, o[1], o[2], supply)
        elif kind == "eliminate":
            sub, _ = elimination(st.theta, o[1], o[2], supply)
        elif kind == "iterate":
            sub, _ = iteration(st.theta, o[1], o[2], o[3], o[4], self.sig, supply)
        else:
            raise ValueError(kind)
        new = self._bind(st, sub.mapping, sub.codomain, o, branching=branching)
        return _replace(new, counter=supply.counter)

    def _decompose(self, st, pos):
        cid, c, _ = st.cons[pos]
        l, r = c.lhs, c.rhs
        if l.__class__ is Op and l.tyargs != r.tyargs:
            st = self._zonk(st, _unify_types(zip(l.tyargs, r.tyargs)))
            cid, c, _ = st.cons[pos]
            l, r = c.lhs, c.rhs
        kids = []
        if l.__class__ is Op:
            arity, _ = self.sig.op_instance(l)
            for (k, a), (_, b), (bs, ty) in zip(l.args, r.args, arity):
                kids.append(Constraint(c.ctx + tuple(bs), a, b, ty))
        else:
            d = st.theta[l.name]
            for a, b, ty in zip(l.params, r.params, d.params):
                kids.append(Constraint(c.ctx, a, b, ty))
        ids = range(st.next_cid, st.next_cid + len(kids))
        entry = ("decompose", cid, st.nbinds, c, tuple(ids))
        cons = st.cons[:pos] + tuple((i, k, False) for i, k in zip(ids, kids)) + st.cons[pos + 1:]
        return _replace(st, cons=cons, log=(entry, st.log), next_cid=st.next_cid + len(kids))

    def _mutate(self, st, pos, o, supply, branching):
        _, side, axname, direction = o
        ax = self.E.axiom(axname)
        cid, c, _ = st.cons[pos]
        u = c.lhs if side == "lhs" else c.rhs
        ts, delta = self._mutation_types(st, c, u, ax, direction)
        st = _replace(self._zonk(st, delta), tycounter=st.tycounter + len(ax.tyvars))
        cid, c, _ = st.cons[pos]
        decls, zeta, zl, zr = instantiate_axiom(ax, st.theta, c.ctx, ts, supply)
        if direction == "rl":
            zl, zr = zr, zl
        u, other = (c.lhs, c.rhs) if side == "lhs" else (c.rhs, c.lhs)
        ids = (st.next_cid, st.next_cid + 1)
        # the first root rewrite splits the chain: the part before it needs none
        c1 = (ids[0], Constraint(c.ctx, u, zl, c.type), True)
        c2 = (ids[1], Constraint(c.ctx, zr, other, c.type), False)
        theta = dict(st.theta)
        theta.update(decls)
        entry = ("mutate", cid, st.nbinds, c, side, axname, direction, zeta, ts, zl, zr, ids)
        return _replace(st, theta=theta, cons=st.cons[:pos] + (c1, c2) + st.cons[pos + 1:],
                        log=(entry, st.log), next_cid=st.next_cid + 2, mutations=st.mutations + 1,
                        counter=supply.counter, depth=st.depth + (1 if branching else 0))

    # -- solutions
    def build_solution(self, st: ProblemState) -> Optional[Solution]:
        entries = []
        node = st.log
        while node is not None:
            entries.append(node[0])
            node = node[1]
        entries.reverse()
        ground = self._grounding(st)
        G = (lambda t: subst_term_types(t, ground)) if ground else (lambda t: t)
        binds = [{m: (k, G(b)) for m, (k, b) in e[1].items()} for e in entries if e[0] == "bind"]
        n = len(binds)
        R = [None] * (n + 1)
        R[n] = {}
        for j in range(n - 1, -1, -1):
            R[j] = _compose_maps(R[j + 1], binds[j])
        theta_final = {m: _zonk_decl(d, ground) for m, d in st.theta.items()}
        certs = {}
        for e in reversed(entries):
            kind = e[0]
            if kind == "bind":
                continue
            cid, j = e[1], e[2]
            c = _zonk_constraint(e[3], ground)
            Rj = R[j]
            if kind == "delete":
                t = kernels.apply_meta_map(Rj, c.lhs)
                certs[cid] = EqualityCertificate(t, (), t)
            elif kind == "decompose":
                certs[cid] = self._decompose_cert(Rj, c, [certs[i] for i in e[4]])
            else:
                side, axname, direction, zeta, ts, zl, zr, ids = e[4:]
                sigma = MetaSubstitution({a: (k, kernels.apply_meta_map(Rj, G(b), k)) for a, (k, b) in zeta.items()})
                ts = {v: subst_type(t, ground) for v, t in ts.items()}
                step = RewriteStep(axname, direction, (), sigma, ts,
                                   kernels.apply_meta_map(Rj, G(zl)), kernels.apply_meta_map(Rj, G(zr)))
                c1, c2 = certs[ids[0]], certs[ids[1]]
                cert = EqualityCertificate(c1.start, c1.steps + (step,) + c2.steps, c2.end)
                certs[cid] = cert if side == "lhs" else cert.reversed()
        mapping = {m: R[0][m] for m in self.theta0 if m in R[0]}
        trace = [e[2] if e[0] == "bind" else ((e[0], e[5], e[6]) if e[0] == "mutate" else (e[0],))
                 for e in entries]
        codomain = {}
        for m in self.theta0:
            if m in mapping:
                for x in _meta_order(mapping[m][1]):
                    codomain.setdefault(x, theta_final[x])
            else:
                codomain[m] = self.theta0[m]
        out_certs = [certs[i] for i in range(len(self.P.constraints))]
        # metavariables that only occur inside certificates still belong to the codomain
        for cert in out_certs:
            for s in cert.steps:
                for x in _meta_order(s.after):
                    if x not in codomain and x in theta_final:
                        codomain[x] = theta_final[x]
        unifier = MetaSubstitution(mapping, dict(self.theta0), codomain)
        unifier, out_certs, theta_final = _tidy(unifier, out_certs, theta_final, self.theta0)
        sol = Solution(unifier, out_certs, trace, st.depth, (st.bindings, st.mutations, st.nonshrinking))
        if self.strat.verify and not self.verify(sol, theta_final):
            self.stats["rejected"] += 1
            return None
        return sol

    def _grounding(self, st) -> dict:
        """Final type substitution: accumulated bindings, then a default for
        every unknown still open (any choice is a solution)."""
        open_ = set()

        def scan_ty(t):
            open_.update(v for v in type_vars(t) if v.startswith(UNKNOWN))

        def scan(t):
            for ty in term_types(t):
                scan_ty(ty)

        node = st.log
        while node is not None:
            e = node[0]
            if e[0] == "bind":
                for _, b in e[1].values():
                    scan(b)
            else:
                c = e[3]
                scan(c.lhs), scan(c.rhs), scan_ty(c.type)
                for t in c.ctx:
                    scan_ty(t)
                if e[0] == "mutate":
                    for t in e[8].values():
                        scan_ty(t)
            node = node[1]
        for d in st.theta.values():
            for t in d.params + (d.result,):
                scan_ty(t)
        ground = dict(st.tysub)
        default = self._types0[0] if self._types0 else None
        for v in sorted(open_):
            if v not in ground:
                if default is None:
                    raise SoasError("no ground type available for an open type unknown")
                ground[v] = default
        return {k: subst_type(v, ground) for k, v in ground.items()}

    def _decompose_cert(self, Rj, c, kids):
        start = kernels.apply_meta_map(Rj, c.lhs)
        cur = start
        steps = []
        if c.lhs.__class__ is Op:
            sites = [[((i,), 0)] for i in range(len(kids))]
        else:
            k = len(c.lhs.params)
            body = Rj[c.lhs.name][1] if c.lhs.name in Rj else Meta(c.lhs.name, zs(k))
            sites = [_var_sites(body, k - 1 - i) for i in range(k)]
        for i, kc in enumerate(kids):
            for path, e in sites[i]:
                for s in kc.steps:
                    s2 = _shift_step(s, e) if e else s
                    new = replace_at(cur, path, s2.after)
                    steps.append(RewriteStep(s2.axiom, s2.direction, path + s2.path, s2.subst, s2.tysubst, cur, new))
                    cur = new
        return EqualityCertificate(start, tuple(steps), cur)

    def verify(self, sol: Solution, theta_final) -> bool:
        for c, cert in zip(self.P.constraints, sol.certificates):
            lhs = kernels.apply_meta_map(sol.unifier.mapping, c.lhs)
            rhs = kernels.apply_meta_map(sol.unifier.mapping, c.rhs)
            if cert.start != lhs or cert.end != rhs:
                return False
            if not check_certificate(self.E, cert, theta_final, c.ctx, c.type):
                return False
        return True


def _step_subst(before: ProblemState, after: ProblemState) -> MetaSubstitution:
    """Composition of the bindings logged between two states."""
    maps = []
    node = after.log
    while node is not None and node is not before.log:
        if node[0][0] == "bind":
            maps.append(node[0][1])
        node = node[1]
    acc = MetaSubstitution({}, dict(before.theta), dict(before.theta))
    for mp in reversed(maps):
        acc = compose(MetaSubstitution(mp), acc)
    return MetaSubstitution(acc.mapping, dict(before.theta), dict(after.theta))


def _var_sites(body, zi):
    """Paths of ``Var`` occurrences referring to body parameter ``zi`` with their binder depth."""
    out = []

    def walk(t, path, e):
        if t.__class__ is Var:
            if t.index == zi + e:
                out.append((path, e))
        elif t.__class__ is Meta:
            for i, p in enumerate(t.params):
                walk(p, path + (i,), e)
        else:
            for i, (k, b) in enumerate(t.args):
                walk(b, path + (i,), e + k)

    walk(body, (), 0)
    return out


def _shift_step(s: RewriteStep, e: int) -> RewriteStep:
    mp = {a: (k, kernels.shift(b, e, k)) for a, (k, b) in s.subst.mapping.items()}
    return RewriteStep(s.axiom, s.direction, s.path, MetaSubstitution(mp), s.tysubst,
                       kernels.shift(s.before, e), kernels.shift(s.after, e))


def _compose_maps(outer: dict, inner: dict) -> dict:
    out = dict(outer)
    for m, (k, b) in inner.items():
        out[m] = (k, kernels.apply_meta_map(outer, b, k))
    return out


def _replace(st: ProblemState, **kw) -> ProblemState:
    d = dict(st.__dict__)
    d.update(kw)
    return ProblemState(**d)


def canonical_key(theta: MetaSubstitution):
    """Unifier identity up to renaming of codomain metavariables."""
    ren = {}
    dom = set(theta.domain or ())
    for m in sorted(theta.mapping):
        for n in _meta_order(theta.mapping[m][1]):
            if n not in ren and n not in dom:
                ren[n] = f"?{len(ren)}"
    return tuple(sorted((m, k, rename_metas(b, ren)) for m, (k, b) in theta.mapping.items()))


def _meta_order(t, out=None):
    if out is None:
        out = []
    if t.__class__ is Meta:
        if t.name not in out:
            out.append(t.name)
        for p in t.params:
            _meta_order(p, out)
    elif t.__class__ is Op:
        for _, b in t.args:
            _meta_order(b, out)
    return out


def _tidy(unifier, certs, theta_final, theta0):
    """Rename fresh metavariables to short stems numbered by first occurrence."""
    used = set(theta0)
    ren = {}
    counters = {}
    order = []
    for m in theta0:
        if m in unifier.mapping:
            order.extend(_meta_order(unifier.mapping[m][1]))
    for cert in certs:
        for t in (cert.start,) + tuple(s.after for s in cert.steps):
            order.extend(_meta_order(t))
    for m in order:
        if m in ren or m in theta0:
            continue
        stem = NameSupply.stem(m)
        while True:
            counters[stem] = counters.get(stem, 0) + 1
            cand = f"{stem}{counters[stem]}"
            if cand not in used:
                break
        used.add(cand)
        ren[m] = cand
    if not ren:
        return unifier, certs, theta_final
    mp = {m: (k, rename_metas(b, ren)) for m, (k, b) in unifier.mapping.items()}
    cod = {ren.get(m, m): MetaDecl(ren.get(m, m), d.params, d.result) for m, d in unifier.codomain.items()}
    th = {ren.get(m, m): MetaDecl(ren.get(m, m), d.params, d.result) for m, d in theta_final.items()}
    new_certs = []
    for cert in certs:
        steps = tuple(RewriteStep(s.axiom, s.direction, s.path,
                                  MetaSubstitution({a: (k, rename_metas(b, ren)) for a, (k, b) in s.subst.mapping.items()}),
                                  s.tysubst, rename_metas(s.before, ren), rename_metas(s.after, ren))
                      for s in cert.steps)
        new_certs.append(EqualityCertificate(rename_metas(cert.start, ren), steps, rename_metas(cert.end, ren)))
    return MetaSubstitution(mp, unifier.domain, cod), new_certs, th


def solve(P: UnificationProblem, E: Presentation, strat: Optional[Strategy] = None):
    """Stream solutions (see :class:`Solver` for statistics and warnings)."""
    return Solver(P, E, strat).solve()


# -- checking and comparison ----------------------------------------------------

@dataclass
class Verified:
    certificates: list

    def __bool__(self):
        return True


@dataclass
class Refuted:
    reason: str

    def __bool__(self):
        return False


@dataclass
class Unknown:
    detail: str = ""

    def __bool__(self):
        return False


def check_unifier(P: UnificationProblem, E: Presentation, xi: MetaSubstitution, budget: int = 8,
                  max_visited: int = 20000, certificates=None):
    """Verified when every constraint is certified within ``budget`` rewrite steps.

    With ``certificates`` (one per constraint) no search is run: each is
    replayed instead, and a certificate that does not replay gives Unknown.
    """
    codomain = xi.codomain if xi.codomain is not None else {}
    certs = []
    for i, c in enumerate(P.constraints):
        try:
            lhs = kernels.apply_meta_map(xi.mapping, c.lhs)
            rhs = kernels.apply_meta_map(xi.mapping, c.rhs)
            typecheck(E.sig, codomain, c.ctx, lhs, c.type)
            typecheck(E.sig, codomain, c.ctx, rhs, c.type)
        except (TypeCheckError, ValueError, KeyError) as e:
            return Refuted(f"constraint {i + 1}: {e}")
        if certificates is not None:
            cert = certificates[i]
            if (cert.start, cert.end) != (lhs, rhs) or not check_certificate(E, cert, codomain, c.ctx, c.type):
                return Unknown(f"constraint {i + 1}: certificate does not replay")
            certs.append(cert)
            continue
        cert = equal_modulo(E, codomain, c.ctx, lhs, rhs, max_steps=budget, max_visited=max_visited)
        if isinstance(cert, NotFoundWithinBudget):
            return Unknown(f"constraint {i + 1}: no chain within {budget} steps")
        certs.append(cert)
    return Verified(certs)


@dataclass
class Witness:
    eta: MetaSubstitution
    certificates: list


FROZEN = "#"


def subsumes(theta: MetaSubstitution, xi: MetaSubstitution, E: Presentation, budget: int = 8,
             max_seconds: float = 20.0):
    """Search for ``eta`` with ``eta . theta =E xi``.

    Metavariables of ``xi``'s codomain are frozen into fresh operators; those
    of ``theta``'s codomain become the unknowns of a derived problem.
    """
    if set(theta.domain) != set(xi.domain):
        raise SoasError("substitutions have different domains")
    sig = Signature(set(E.sig.sorts), dict(E.sig.tycons), dict(E.sig.ops))
    frozen = {}
    for m, d in (xi.codomain or {}).items():
        name = m + FROZEN
        sig.ops[name] = OperatorDecl(name, (), tuple(((), p) for p in d.params), d.result)
        frozen[m] = name
    E2 = Presentation(sig, E.axioms)
    unknowns = dict(theta.codomain or {})
    cons = []
    for m, d in theta.domain.items():
        k = len(d.params)
        lhs = theta.body(m, k)[1]
        rhs = _freeze(xi.body(m, k)[1], frozen)
        cons.append(Constraint(tuple(d.params), lhs, rhs, d.result))
    P = UnificationProblem(unknowns, cons, "subsumes")
    strat = Strategy(max_bindings=budget, max_mutations=min(budget, 6), max_nonshrinking=budget,
                     max_solutions=1, max_seconds=max_seconds)
    for sol in Solver(P, E2, strat).solve():
        thaw = {v: k for k, v in frozen.items()}
        mp = {m: (k, _thaw(b, thaw)) for m, (k, b) in sol.unifier.mapping.items()}
        cod = dict(xi.codomain or {})
        return Witness(MetaSubstitution(mp, unknowns, cod), sol.certificates)
    return Unknown("no witness within budget")


def _freeze(t, frozen):
    if t.__class__ is Meta:
        ps = tuple(_freeze(p, frozen) for p in t.params)
        if t.name in frozen:
            return Op(frozen[t.name], (), tuple((0, p) for p in ps))
        return Meta(t.name, ps)
    if t.__class__ is Op:
        return Op(t.name, t.tyargs, tuple((k, _freeze(b, frozen)) for k, b in t.args))
    return t


def _thaw(t, thaw):
    if t.__class__ is Op:
        args = tuple((k, _thaw(b, thaw)) for k, b in t.args)
        if t.name in thaw:
            return Meta(thaw[t.name], tuple(b for _, b in args))
        return Op(t.name, t.tyargs, args)
    if t.__class__ is Meta:
        return Meta(t.name, tuple(_thaw(p, thaw) for p in t.params))
    return t
