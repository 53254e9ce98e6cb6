"""Pure-Python de Bruijn kernels.

These are the hot loops of the solver: shifting, parameter instantiation and
metavariable substitution.  ``_ckernels.pyx`` is a line-for-line compiled twin;
``soas.kernels`` picks one at import time.
"""
from __future__ import annotations

from .terms import Meta, Op, Var

IMPL = "python"


def shift(t, d: int, cutoff: int = 0):
    """Add ``d`` to every free index ``>= cutoff``."""
    if d == 0 or t._fv <= cutoff:
        return t
    cls = t.__class__
    if cls is Var:
        i = t.index
        if i >= cutoff:
            if i + d < 0:
                raise ValueError("negative de Bruijn index after shift")
            return Var(i + d)
        return t
    if cls is Meta:
        return Meta(t.name, tuple([shift(p, d, cutoff) for p in t.params]))
    return Op(t.name, t.tyargs, tuple([(k, shift(b, d, cutoff + k)) for k, b in t.args]))


def instantiate(body, params, extra: int = 0):
    """Plug ``params`` into a body abstracted over ``k = len(params)`` variables.

    ``body`` lives in ``A, z1..zk`` (``zk`` is index 0).  ``params`` are in the
    order ``z1..zk`` and live in ``A, D`` with ``|D| = extra``.  The result
    lives in ``A, D``.
    """
    k = len(params)
    if k == 0 and extra == 0:
        return body
    return _inst(body, params, k, extra, 0)


def _inst(t, params, k, extra, b):
    if t._fv <= b:
        return t
    cls = t.__class__
    if cls is Var:
        j = t.index - b
        if j < k:
            return shift(params[k - 1 - j], b, 0)
        return Var(j - k + extra + b)
    if cls is Meta:
        return Meta(t.name, tuple([_inst(p, params, k, extra, b) for p in t.params]))
    return Op(t.name, t.tyargs, tuple([(kk, _inst(bd, params, k, extra, b + kk)) for kk, bd in t.args]))


def apply_meta_map(mapping, t, depth: int = 0):
    """Apply ``{name: (k, body)}`` to every metavariable occurrence in ``t``.

    ``depth`` is the number of variables in scope at ``t`` that are *not* in the
    ambient context the bodies were written for (bodies are shifted over them).
    """
    if not t._hm:
        return t
    cls = t.__class__
    if cls is Meta:
        ps = tuple([apply_meta_map(mapping, p, depth) for p in t.params])
        entry = mapping.get(t.name)
        if entry is None:
            return Meta(t.name, ps)
        k, body = entry
        if k != len(ps):
            raise ValueError(f"metavariable {t.name} expects {k} parameters, got {len(ps)}")
        return instantiate(body, ps, depth)
    if cls is Op:
        return Op(t.name, t.tyargs, tuple([(k, apply_meta_map(mapping, b, depth + k)) for k, b in t.args]))
    return t


def size(t) -> int:
    cls = t.__class__
    if cls is Var:
        return 1
    if cls is Meta:
        n = 1
        for p in t.params:
            n += size(p)
        return n
    n = 1
    for _, b in t.args:
        n += size(b)
    return n


def metas(t, out=None) -> set:
    if out is None:
        out = set()
    if not t._hm:
        return out
    if t.__class__ is Meta:
        out.add(t.name)
        for p in t.params:
            metas(p, out)
    elif t.__class__ is Op:
        for _, b in t.args:
            metas(b, out)
    return out


def occurs(name: str, t) -> bool:
    if not t._hm:
        return False
    if t.__class__ is Meta:
        if t.name == name:
            return True
        for p in t.params:
            if occurs(name, p):
                return True
        return False
    for _, b in t.args:
        if occurs(name, b):
            return True
    return False


def free_vars(t, depth: int = 0, out=None) -> set:
    """Free indices of ``t`` as seen from outside ``depth`` binders."""
    if out is None:
        out = set()
    if t._fv <= depth:
        return out
    cls = t.__class__
    if cls is Var:
        out.add(t.index - depth)
    elif cls is Meta:
        for p in t.params:
            free_vars(p, depth, out)
    else:
        for k, b in t.args:
            free_vars(b, depth + k, out)
    return out


def remap_free(t, table, b: int = 0):
    """Rename free index ``j`` to ``table[j]``; raises KeyError if unmapped."""
    if t._fv <= b:
        return t
    cls = t.__class__
    if cls is Var:
        return Var(table[t.index - b] + b)
    if cls is Meta:
        return Meta(t.name, tuple([remap_free(p, table, b) for p in t.params]))
    return Op(t.name, t.tyargs, tuple([(k, remap_free(bd, table, b + k)) for k, bd in t.args]))
