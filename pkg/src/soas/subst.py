"""Variable and metavariable substitution, composition, parametrisation."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .syntax import Constraint, MetaDecl, SoasError, typecheck
from .terms import Meta, Op, Term, Var


def zs(k: int) -> tuple:
    """The parameter variables ``z1..zk`` as seen inside an abstracted body."""
    return tuple(Var(k - 1 - i) for i in range(k))


@dataclass
class MetaSubstitution:
    """``[m[z1..zk] |-> body]``; bodies are closed apart from the ``k`` parameters.

    ``domain``/``codomain`` are metavariable contexts (name -> MetaDecl) and may
    be None when the caller does not track them.  Omitted entries are identity.
    """
    mapping: dict = field(default_factory=dict)      # name -> (k, body)
    domain: Optional[dict] = None
    codomain: Optional[dict] = None

    def __call__(self, t: Term, depth: int = 0) -> Term:
        return apply_meta(self, t, depth)

    def body(self, name: str, k: Optional[int] = None):
        if name in self.mapping:
            return self.mapping[name]
        if k is None:
            k = len(self.domain[name].params)
        return k, Meta(name, zs(k))

    def items(self):
        return self.mapping.items()

    def restrict(self, names) -> "MetaSubstitution":
        names = set(names)
        dom = {n: d for n, d in self.domain.items() if n in names} if self.domain is not None else None
        return MetaSubstitution({n: e for n, e in self.mapping.items() if n in names}, dom, self.codomain)

    def is_identity(self) -> bool:
        return all(body == Meta(n, zs(k)) for n, (k, body) in self.mapping.items())

    def typecheck(self, sig) -> None:
        """Check every body against its declared type (needs both contexts)."""
        for n, (k, body) in self.mapping.items():
            d = self.domain[n]
            if k != len(d.params):
                raise SoasError(f"{n} abstracts {k} parameters, declared with {len(d.params)}")
            self.mapping[n] = (k, typecheck(sig, self.codomain, d.params, body, d.result))


def identity(domain: Optional[dict] = None) -> MetaSubstitution:
    return MetaSubstitution({}, domain, domain)


def subst_vars(t: Term, values) -> Term:
    """Replace ``Var(i)`` by ``values[i]`` for ``i < len(values)``; higher indices drop by ``len(values)``."""
    return kernels.instantiate(t, tuple(reversed(values)), 0)


def apply_meta(theta: MetaSubstitution, t: Term, depth: int = 0) -> Term:
    if theta.domain is not None:
        for m in kernels.metas(t):
            if m not in theta.domain:
                raise SoasError(f"metavariable {m} is not in the substitution's domain")
    return kernels.apply_meta_map(theta.mapping, t, depth)


def compose(theta2: MetaSubstitution, theta1: MetaSubstitution) -> MetaSubstitution:
    """``theta2 . theta1``: apply ``theta1`` first."""
    if theta1.domain is not None:
        names = list(theta1.domain)
    else:
        names = list(theta1.mapping) + [n for n in theta2.mapping if n not in theta1.mapping]
    out = {}
    for n in names:
        if n in theta1.mapping:
            k, body = theta1.mapping[n]
            out[n] = (k, kernels.apply_meta_map(theta2.mapping, body, k))
        elif n in theta2.mapping:
            out[n] = theta2.mapping[n]
    out = {n: (k, b) for n, (k, b) in out.items() if b != Meta(n, zs(k))}
    return MetaSubstitution(out, theta1.domain, theta2.codomain)


def compose_all(thetas) -> MetaSubstitution:
    """``thetas[-1] . ... . thetas[0]`` (the first one is applied first)."""
    acc = MetaSubstitution()
    for th in thetas:
        acc = compose(th, acc)
    return acc


def rename_metas(t: Term, ren: dict) -> Term:
    if not ren or not t._hm:
        return t
    if t.__class__ is Meta:
        return Meta(ren.get(t.name, t.name), tuple(rename_metas(p, ren) for p in t.params))
    if t.__class__ is Op:
        return Op(t.name, t.tyargs, tuple((k, rename_metas(b, ren)) for k, b in t.args))
    return t


class NameSupply:
    """Deterministic fresh names: the original name's stem plus a counter."""

    def __init__(self, avoid=(), counter: int = 0):
        self.used = set(avoid)
        self.counter = counter

    @staticmethod
    def stem(name: str) -> str:
        s = name.rstrip("0123456789'").lstrip("%")
        return s or "m"

    def fresh(self, base: str = "m") -> str:
        stem = self.stem(base)
        while True:
            self.counter += 1
            n = f"{stem}{self.counter}"
            if n not in self.used:
                self.used.add(n)
                return n

    def copy(self) -> "NameSupply":
        return NameSupply(self.used, self.counter)


def _names_of(obj) -> list:
    if isinstance(obj, MetaSubstitution):
        names = list(obj.domain or obj.mapping)
        for _, b in obj.mapping.values():
            names.extend(sorted(kernels.metas(b)))
        if obj.codomain:
            names.extend(obj.codomain)
        return list(dict.fromkeys(names))
    if hasattr(obj, "xi"):        # axiom
        return list(obj.xi)
    raise TypeError(f"cannot freshen {type(obj).__name__}")


def rename(obj, ren: dict):
    """Apply an injective renaming of metavariables to a substitution or axiom."""
    if isinstance(obj, MetaSubstitution):
        dom = {ren.get(n, n): dataclasses.replace(d, name=ren.get(n, n)) for n, d in obj.domain.items()} \
            if obj.domain is not None else None
        cod = {ren.get(n, n): dataclasses.replace(d, name=ren.get(n, n)) for n, d in obj.codomain.items()} \
            if obj.codomain is not None else None
        mp = {ren.get(n, n): (k, rename_metas(b, ren)) for n, (k, b) in obj.mapping.items()}
        return MetaSubstitution(mp, dom, cod)
    xi = {ren.get(n, n): dataclasses.replace(d, name=ren.get(n, n)) for n, d in obj.xi.items()}
    return dataclasses.replace(obj, xi=xi, lhs=rename_metas(obj.lhs, ren), rhs=rename_metas(obj.rhs, ren))


def freshen(obj, avoid, supply: Optional[NameSupply] = None):
    """Rename the metavariables of ``obj`` that clash with ``avoid``.

    Returns ``(renamed copy, renaming)``; the renaming is injective and its
    inverse is ``{v: k for k, v in renaming.items()}``.
    """
    names = _names_of(obj)
    supply = supply or NameSupply(set(avoid) | set(names))
    supply.used |= set(avoid) | set(names)
    ren = {}
    for n in names:
        if n in avoid:
            ren[n] = supply.fresh(n)
    return rename(obj, ren), ren


def parametrise(theta: dict, exists, item, supply: Optional[NameSupply] = None, n_forall: int = 0):
    """Turn existential variables into nullary metavariables.

    ``exists`` is a sequence of ``(name, type)`` for the existential context,
    which sits outside the universal one.  ``item`` is a Term (whose innermost
    ``n_forall`` free variables are universal), a Constraint (whose
    ``ctx`` is the universal part), or an Axiom (whose whole variable context
    is existential).  Returns ``(extended theta, parametrised item, hats)``.
    """
    exists = list(exists)
    if not exists:
        return dict(theta), item, []
    supply = supply or NameSupply(theta)
    supply.used |= set(theta)
    hats = []
    theta = dict(theta)
    for name, ty in exists:
        h = name if name not in supply.used else supply.fresh(name)
        supply.used.add(h)
        theta[h] = MetaDecl(h, (), ty)
        hats.append(h)
    e = len(hats)

    def go(t, a):
        return _replace_outer(t, a, e, hats, 0)

    if isinstance(item, Constraint):
        a = len(item.ctx)
        return theta, Constraint(item.ctx, go(item.lhs, a), go(item.rhs, a), item.type), hats
    if isinstance(item, Term):
        return theta, go(item, n_forall), hats
    # axiom: its variable context is entirely existential
    xi = dict(item.xi)
    for h in hats:
        xi[h] = theta[h]
    new = dataclasses.replace(item, xi=xi, lhs=go(item.lhs, 0), rhs=go(item.rhs, 0), varctx=())
    return theta, new, hats


def _replace_outer(t, a, e, hats, b):
    if t._fv <= a + b:
        return t
    cls = t.__class__
    if cls is Var:
        j = t.index - b - a
        return Meta(hats[e - 1 - j], ())
    if cls is Meta:
        return Meta(t.name, tuple(_replace_outer(p, a, e, hats, b) for p in t.params))
    return Op(t.name, t.tyargs, tuple((k, _replace_outer(bd, a, e, hats, b + k)) for k, bd in t.args))
