"""Second-order terms with de Bruijn indices.

``Var(i)`` refers to the i-th enclosing variable counting outwards from the
innermost binder (0 = most recently bound).  A context ``[x1, ..., xn]`` is
listed outermost first, so ``Var(0)`` is ``xn``.

``Op(name, tyargs, args)`` carries the instantiation of the operator's
schematic type variables and a tuple of scoped arguments ``(k, body)`` where
``k`` variables are bound in ``body``.  ``Meta(name, params)`` is a
metavariable occurrence ``name[params...]``.

Nodes are immutable and hash-consed only in the weak sense that their hash is
computed once at construction.  Structural equality coincides with alpha
equivalence.
"""
from __future__ import annotations


class Term:
    # _h: cached hash; _fv: 1 + largest free de Bruijn index (0 if closed);
    # _hm: whether any metavariable occurs.
    __slots__ = ("_h", "_fv", "_hm")

    def __hash__(self) -> int:
        return self._h

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)


class Var(Term):
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index
        self._h = hash(("V", index))
        self._fv = index + 1
        self._hm = False

    def __eq__(self, other) -> bool:
        return self is other or (other.__class__ is Var and other.index == self.index)

    __hash__ = Term.__hash__

    def __repr__(self) -> str:
        return f"Var({self.index})"

    def __reduce__(self):
        return (Var, (self.index,))


class Meta(Term):
    __slots__ = ("name", "params")

    def __init__(self, name: str, params: tuple = ()):
        self.name = name
        self.params = params
        self._h = hash(("M", name, params))
        fv = 0
        for p in params:
            if p._fv > fv:
                fv = p._fv
        self._fv = fv
        self._hm = True

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (other.__class__ is Meta and other._h == self._h
                and other.name == self.name and other.params == self.params)

    __hash__ = Term.__hash__

    def __repr__(self) -> str:
        return f"Meta({self.name!r}, {self.params!r})"

    def __reduce__(self):
        return (Meta, (self.name, self.params))


class Op(Term):
    __slots__ = ("name", "tyargs", "args")

    def __init__(self, name: str, tyargs: tuple = (), args: tuple = ()):
        self.name = name
        self.tyargs = tyargs
        self.args = args
        self._h = hash(("O", name, tyargs, args))
        fv = 0
        hm = False
        for k, b in args:
            if b._fv - k > fv:
                fv = b._fv - k
            if b._hm:
                hm = True
        self._fv = fv
        self._hm = hm

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (other.__class__ is Op and other._h == self._h and other.name == self.name
                and other.tyargs == self.tyargs and other.args == self.args)

    __hash__ = Term.__hash__

    def __repr__(self) -> str:
        return f"Op({self.name!r}, {self.tyargs!r}, {self.args!r})"

    def __reduce__(self):
        return (Op, (self.name, self.tyargs, self.args))


def op(name: str, *args, tyargs: tuple = ()) -> Op:
    """Convenience constructor: bare terms are unscoped, ``(k, body)`` pairs scoped."""
    scoped = tuple(a if isinstance(a, tuple) else (0, a) for a in args)
    return Op(name, tuple(tyargs), scoped)


def meta(name: str, *params: Term) -> Meta:
    return Meta(name, tuple(params))


def children(t: Term) -> list:
    """Immediate subterms with the number of binders crossed to reach them."""
    if t.__class__ is Op:
        return [(k, b) for k, b in t.args]
    if t.__class__ is Meta:
        return [(0, p) for p in t.params]
    return []


def subterm_at(t: Term, path: tuple) -> Term:
    for i in path:
        if t.__class__ is Op:
            t = t.args[i][1]
        elif t.__class__ is Meta:
            t = t.params[i]
        else:
            raise IndexError(f"path {path} leaves the term at a variable")
    return t


def binders_along(t: Term, path: tuple) -> int:
    """Number of variables bound between the root of ``t`` and ``path``."""
    n = 0
    for i in path:
        if t.__class__ is Op:
            k, t = t.args[i]
            n += k
        elif t.__class__ is Meta:
            t = t.params[i]
        else:
            raise IndexError(f"path {path} leaves the term at a variable")
    return n


def replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if t.__class__ is Op:
        args = list(t.args)
        k, b = args[i]
        args[i] = (k, replace_at(b, rest, new))
        return Op(t.name, t.tyargs, tuple(args))
    if t.__class__ is Meta:
        ps = list(t.params)
        ps[i] = replace_at(ps[i], rest, new)
        return Meta(t.name, tuple(ps))
    raise IndexError(f"path {path} leaves the term at a variable")


def positions(t: Term, prefix: tuple = (), depth: int = 0):
    """Pre-order (leftmost-outermost) walk yielding ``(path, binder_depth, subterm)``."""
    yield prefix, depth, t
    if t.__class__ is Op:
        for i, (k, b) in enumerate(t.args):
            yield from positions(b, prefix + (i,), depth + k)
    elif t.__class__ is Meta:
        for i, p in enumerate(t.params):
            yield from positions(p, prefix + (i,), depth)
