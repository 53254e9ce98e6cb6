"""Signatures, metavariable contexts, constraints and the typing judgement."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .terms import Meta, Op, Term, Var
from .types import (ARROW, PROD, Sort, TyCon, TypeExpr, TypeUnifier, TyVar, is_ground,
                    show_type, subst_type, type_vars)


class SoasError(Exception):
    """Base class for user-facing errors."""


class TypeCheckError(SoasError):
    def __init__(self, msg: str, path: tuple = ()):
        super().__init__(f"{msg} (at path {list(path)})" if path else msg)
        self.path = path


@dataclass(frozen=True)
class OperatorDecl:
    name: str
    tyvars: tuple          # schematic type variable names
    arity: tuple           # ((binder types...), result type) per argument
    result: TypeExpr

    def instance(self, tyargs: tuple):
        """Arity and result type under the instantiation ``tyargs``."""
        s = dict(zip(self.tyvars, tyargs))
        arity = tuple((tuple(subst_type(a, s) for a in bs), subst_type(r, s)) for bs, r in self.arity)
        return arity, subst_type(self.result, s)

    def is_mixed(self) -> bool:
        counts = [len(bs) for bs, _ in self.arity]
        return any(c == 0 for c in counts) and any(c > 0 for c in counts)


@dataclass(frozen=True)
class MetaDecl:
    name: str
    params: tuple
    result: TypeExpr

    def __str__(self):
        return f"{self.name} : [{', '.join(show_type(p) for p in self.params)}]{show_type(self.result, 2)}"


@dataclass
class Signature:
    sorts: set = field(default_factory=set)
    tycons: dict = field(default_factory=dict)     # name -> arity
    ops: dict = field(default_factory=dict)        # name -> OperatorDecl

    @classmethod
    def stlc(cls, base=("a", "b")) -> "Signature":
        """Simply-typed lambda calculus with pairs over the given base sorts."""
        s, t = TyVar("s"), TyVar("t")
        arr, pr = TyCon(ARROW, (s, t)), TyCon(PROD, (s, t))
        sig = cls(set(base), {ARROW: 2, PROD: 2}, {})
        for d in (OperatorDecl("abs", ("s", "t"), (((s,), t),), arr),
                  OperatorDecl("app", ("s", "t"), (((), arr), ((), s)), t),
                  OperatorDecl("pair", ("s", "t"), (((), s), ((), t)), pr),
                  OperatorDecl("fst", ("s", "t"), (((), pr),), s),
                  OperatorDecl("snd", ("s", "t"), (((), pr),), t)):
            sig.add_op(d)
        return sig

    def add_op(self, decl: OperatorDecl) -> None:
        if decl.name in self.ops:
            raise SoasError(f"duplicate operator {decl.name}")
        self.ops[decl.name] = decl
        for bs, r in decl.arity:
            for ty in (*bs, r):
                self.check_type(ty, decl.tyvars)
        self.check_type(decl.result, decl.tyvars)

    def check_type(self, ty: TypeExpr, tyvars=()) -> None:
        if isinstance(ty, Sort):
            if ty.name not in self.sorts:
                raise SoasError(f"unknown sort {ty.name}")
        elif isinstance(ty, TyVar):
            if ty.name not in tyvars:
                raise SoasError(f"undeclared type variable {ty.name}")
        else:
            if self.tycons.get(ty.name) != len(ty.args):
                raise SoasError(f"type constructor {ty.name} used with {len(ty.args)} arguments")
            for a in ty.args:
                self.check_type(a, tyvars)

    def validate(self) -> None:
        for d in self.ops.values():
            for bs, r in d.arity:
                for ty in (*bs, r):
                    self.check_type(ty, d.tyvars)
            self.check_type(d.result, d.tyvars)

    def op_instance(self, t: Op):
        return self.ops[t.name].instance(t.tyargs)


@dataclass(frozen=True)
class Constraint:
    ctx: tuple            # types of the universally quantified variables, outermost first
    lhs: Term
    rhs: Term
    type: TypeExpr

    def flipped(self) -> "Constraint":
        return Constraint(self.ctx, self.rhs, self.lhs, self.type)


@dataclass
class UnificationProblem:
    theta: dict                 # name -> MetaDecl, ordered
    constraints: list
    name: str = "problem"
    var_names: tuple = ()       # display names for the universal context

    def metas(self) -> set:
        out: set = set()
        for c in self.constraints:
            kernels.metas(c.lhs, out)
            kernels.metas(c.rhs, out)
        return out


def meta_context(*decls: MetaDecl) -> dict:
    return {d.name: d for d in decls}


# -- typing ---------------------------------------------------------------

def typecheck(sig: Signature, theta: dict, ctx, t: Term, ty: Optional[TypeExpr] = None,
              rigid_tyvars=()) -> Term:
    """Check ``theta | ctx |- t : ty`` and return ``t`` with operator type instantiations filled in.

    Operators written without a type instantiation get one inferred; any
    instantiation that is still undetermined at the end is an error.
    Schematic variables named in ``rigid_tyvars`` may appear (axioms only).
    """
    u = TypeUnifier()
    if ty is None:
        ty = u.fresh()
    out = _check(sig, theta, tuple(ctx), t, ty, u, (), set(rigid_tyvars))
    return _zonk_term(out, u)


def _check(sig, theta, ctx, t, ty, u, path, rigid):
    cls = t.__class__
    if cls is Var:
        n = len(ctx)
        if t.index >= n:
            raise TypeCheckError(f"variable index {t.index} out of scope", path)
        have = ctx[n - 1 - t.index]
        if not u.unify(have, ty):
            raise TypeCheckError(f"type mismatch: variable has type {show_type(u.zonk(have))}, "
                                 f"expected {show_type(u.zonk(ty))}", path)
        return t
    if cls is Meta:
        d = theta.get(t.name)
        if d is None:
            raise TypeCheckError(f"unknown metavariable {t.name}", path)
        if len(d.params) != len(t.params):
            raise TypeCheckError(f"metavariable {t.name} expects {len(d.params)} parameters, "
                                 f"got {len(t.params)}", path)
        if not u.unify(d.result, ty):
            raise TypeCheckError(f"type mismatch: {t.name} has type {show_type(d.result)}, "
                                 f"expected {show_type(u.zonk(ty))}", path)
        ps = tuple(_check(sig, theta, ctx, p, pt, u, path + (i,), rigid)
                   for i, (p, pt) in enumerate(zip(t.params, d.params)))
        return Meta(t.name, ps)
    if cls is Op:
        d = sig.ops.get(t.name)
        if d is None:
            raise TypeCheckError(f"unknown operator {t.name}", path)
        if len(d.arity) != len(t.args):
            raise TypeCheckError(f"operator {t.name} expects {len(d.arity)} arguments, got {len(t.args)}", path)
        if t.tyargs:
            if len(t.tyargs) != len(d.tyvars):
                raise TypeCheckError(f"operator {t.name} expects {len(d.tyvars)} type arguments", path)
            for a in t.tyargs:
                for v in type_vars(a):
                    if v not in rigid and not v.startswith("?"):
                        raise TypeCheckError(f"schematic type variable {v} in a concrete term", path)
            tyargs = t.tyargs
        else:
            tyargs = tuple(u.fresh() for _ in d.tyvars)
        arity, res = d.instance(tyargs)
        if not u.unify(res, ty):
            raise TypeCheckError(f"type mismatch: {t.name} produces {show_type(u.zonk(res))}, "
                                 f"expected {show_type(u.zonk(ty))}", path)
        args = []
        for i, ((k, body), (bs, r)) in enumerate(zip(t.args, arity)):
            if k != len(bs):
                raise TypeCheckError(f"argument {i + 1} of {t.name} binds {len(bs)} variables, got {k}", path)
            args.append((k, _check(sig, theta, ctx + tuple(bs), body, r, u, path + (i,), rigid)))
        return Op(t.name, tyargs, tuple(args))
    raise TypeCheckError(f"not a term: {t!r}", path)


def _zonk_term(t: Term, u: TypeUnifier, path=()) -> Term:
    cls = t.__class__
    if cls is Var:
        return t
    if cls is Meta:
        return Meta(t.name, tuple(_zonk_term(p, u, path + (i,)) for i, p in enumerate(t.params)))
    tyargs = tuple(u.zonk(a) for a in t.tyargs)
    for a in tyargs:
        if any(v.startswith("?") for v in type_vars(a)):
            raise TypeCheckError(f"ambiguous schematic instantiation for {t.name}", path)
    return Op(t.name, tyargs, tuple((k, _zonk_term(b, u, path + (i,))) for i, (k, b) in enumerate(t.args)))


def type_of(sig: Signature, theta: dict, ctx, t: Term) -> TypeExpr:
    """Type of an already annotated term, read off its head."""
    if t.__class__ is Var:
        return ctx[len(ctx) - 1 - t.index]
    if t.__class__ is Meta:
        return theta[t.name].result
    return sig.op_instance(t)[1]


def infer_type(sig: Signature, theta: dict, ctx, t: Term) -> TypeExpr:
    u = TypeUnifier()
    ty = u.fresh()
    _check(sig, theta, tuple(ctx), t, ty, u, (), set())
    out = u.zonk(ty)
    if not is_ground(out):
        raise TypeCheckError("ambiguous type")
    return out


def subst_term_types(t: Term, s: dict) -> Term:
    """Substitute schematic type variables inside operator instantiations."""
    if not s:
        return t
    cls = t.__class__
    if cls is Var:
        return t
    if cls is Meta:
        return Meta(t.name, tuple(subst_term_types(p, s) for p in t.params))
    return Op(t.name, tuple(subst_type(a, s) for a in t.tyargs),
              tuple((k, subst_term_types(b, s)) for k, b in t.args))


def term_types(t: Term, out=None) -> set:
    """All type instantiations mentioned by operators in ``t``."""
    if out is None:
        out = set()
    if t.__class__ is Op:
        out.update(t.tyargs)
        for _, b in t.args:
            term_types(b, out)
    elif t.__class__ is Meta:
        for p in t.params:
            term_types(p, out)
    return out


def check_constraint(sig: Signature, theta: dict, c: Constraint) -> Constraint:
    lhs = typecheck(sig, theta, c.ctx, c.lhs, c.type)
    rhs = typecheck(sig, theta, c.ctx, c.rhs, c.type)
    return Constraint(c.ctx, lhs, rhs, c.type)


# -- structural utilities -------------------------------------------------

def alpha_equal(t: Term, u: Term) -> bool:
    return t == u


def free_metavariables(t: Term) -> set:
    return kernels.metas(t)


MIXED_CAVEAT = ("unification is sound but completeness is not guaranteed for "
                "signatures with mixed operators")


def mixed_operator_lint(sig: Signature) -> list:
    out = []
    for d in sig.ops.values():
        if d.is_mixed():
            out.append(f"operator {d.name} is mixed (has arguments with and without "
                       f"bound variables): {MIXED_CAVEAT}")
    return out
