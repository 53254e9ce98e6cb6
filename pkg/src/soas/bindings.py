"""The five elementary substitutions used as partial solutions.

Parameter indices are 0-based.  Every generator returns a MetaSubstitution
whose ``domain`` is the input context and whose ``codomain`` is that context
minus the targets plus the fresh metavariables it introduced.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .subst import MetaSubstitution, NameSupply, zs
from .syntax import MetaDecl, SoasError
from .terms import Meta, Op, Var
from .types import show_type


class BindingError(SoasError):
    pass


def _codomain(theta: dict, targets, fresh: dict) -> dict:
    out = {n: d for n, d in theta.items() if n not in targets}
    out.update(fresh)
    return out


def _decl(theta, m) -> MetaDecl:
    d = theta.get(m)
    if d is None:
        raise BindingError(f"unknown metavariable {m}")
    return d


def _scoped_args(arity, k: int, fresh_names, params):
    """``F(x1. m1[z.., x1], ...)`` arguments inside a body over ``k`` parameters."""
    args = []
    for (bs, _), name in zip(arity, fresh_names):
        a = len(bs)
        z = tuple(Var(a + k - 1 - j) for j in range(k))
        x = tuple(Var(a - 1 - j) for j in range(a))
        args.append((a, Meta(name, z + x)))
    return tuple(args)


def jp_projection(theta: dict, m: str, i: int) -> MetaSubstitution:
    d = _decl(theta, m)
    k = len(d.params)
    if not 0 <= i < k:
        raise BindingError(f"parameter index {i} out of range for {m}")
    if d.params[i] != d.result:
        raise BindingError(f"parameter {i} of {m} has type {show_type(d.params[i])}, "
                           f"not {show_type(d.result)}")
    return MetaSubstitution({m: (k, Var(k - 1 - i))}, theta, _codomain(theta, {m}, {}))


def imitation(theta: dict, m: str, op, tyargs: tuple, sig, supply: NameSupply):
    """``m[z..] |-> F(x1. m1[z.., x1], ...)`` with fresh ``mi``; returns ``(subst, fresh decls)``."""
    d = _decl(theta, m)
    arity, res = sig.ops[op].instance(tuple(tyargs))
    if res != d.result:
        raise BindingError(f"{op} produces {show_type(res)}, {m} needs {show_type(d.result)}")
    k = len(d.params)
    fresh = {}
    names = []
    for bs, r in arity:
        n = supply.fresh(m)
        fresh[n] = MetaDecl(n, d.params + tuple(bs), r)
        names.append(n)
    body = Op(op, tuple(tyargs), _scoped_args(arity, k, names, d.params))
    return MetaSubstitution({m: (k, body)}, theta, _codomain(theta, {m}, fresh)), fresh


def elimination(theta: dict, m: str, kept, supply: NameSupply):
    d = _decl(theta, m)
    k = len(d.params)
    kept = tuple(kept)
    if any(not 0 <= j < k for j in kept):
        raise BindingError(f"kept index out of range for {m}")
    if any(a >= b for a, b in zip(kept, kept[1:])):
        raise BindingError("kept indices must be strictly increasing")
    e = supply.fresh(m)
    decl = MetaDecl(e, tuple(d.params[j] for j in kept), d.result)
    body = Meta(e, tuple(Var(k - 1 - j) for j in kept))
    fresh = {e: decl}
    return MetaSubstitution({m: (k, body)}, theta, _codomain(theta, {m}, fresh)), fresh


def identification(theta: dict, m: str, n: str, supply: NameSupply):
    if m == n:
        raise BindingError("identification needs two distinct metavariables")
    dm, dn = _decl(theta, m), _decl(theta, n)
    if dm.result != dn.result:
        raise BindingError(f"{m} and {n} have different result types")
    k, l = len(dm.params), len(dn.params)
    i = supply.fresh(m)
    fresh = {i: MetaDecl(i, dm.params + dn.params, dm.result)}
    ms = []
    for j in range(l):
        nm = supply.fresh(m)
        fresh[nm] = MetaDecl(nm, dm.params, dn.params[j])
        ms.append(nm)
    ns = []
    for j in range(k):
        nn = supply.fresh(n)
        fresh[nn] = MetaDecl(nn, dn.params, dm.params[j])
        ns.append(nn)
    zm, zn = zs(k), zs(l)
    body_m = Meta(i, zm + tuple(Meta(x, zm) for x in ms))
    body_n = Meta(i, tuple(Meta(x, zn) for x in ns) + zn)
    sub = MetaSubstitution({m: (k, body_m), n: (l, body_n)}, theta, _codomain(theta, {m, n}, fresh))
    return sub, fresh


def iteration(theta: dict, m: str, op, tyargs: tuple, gamma, sig, supply: NameSupply):
    """``m[z..] |-> h[z.., F(x1. k1[z.., x1], ...)]`` where ``F`` produces ``gamma``."""
    d = _decl(theta, m)
    arity, res = sig.ops[op].instance(tuple(tyargs))
    if res != gamma:
        raise BindingError(f"{op} produces {show_type(res)}, not {show_type(gamma)}")
    k = len(d.params)
    h = supply.fresh(m)
    fresh = {h: MetaDecl(h, d.params + (gamma,), d.result)}
    names = []
    for bs, r in arity:
        n = supply.fresh(m)
        fresh[n] = MetaDecl(n, d.params + tuple(bs), r)
        names.append(n)
    inner = Op(op, tuple(tyargs), _scoped_args(arity, k, names, d.params))
    body = Meta(h, zs(k) + (inner,))
    return MetaSubstitution({m: (k, body)}, theta, _codomain(theta, {m}, fresh)), fresh


@dataclass(frozen=True)
class BindingRequest:
    kind: str                     # projection | imitation | elimination | identification | iteration
    target: str
    data: dict = field(default_factory=dict)


def make_binding(theta: dict, req: BindingRequest, sig=None, supply: NameSupply = None) -> MetaSubstitution:
    supply = supply or NameSupply(theta)
    d = req.data
    if req.kind == "projection":
        return jp_projection(theta, req.target, d["index"])
    if req.kind == "imitation":
        return imitation(theta, req.target, d["op"], d.get("tyargs", ()), sig, supply)[0]
    if req.kind == "elimination":
        return elimination(theta, req.target, d["kept"], supply)[0]
    if req.kind == "identification":
        return identification(theta, req.target, d["partner"], supply)[0]
    if req.kind == "iteration":
        return iteration(theta, req.target, d["op"], d.get("tyargs", ()), d["gamma"], sig, supply)[0]
    raise BindingError(f"unknown binding kind {req.kind}")
