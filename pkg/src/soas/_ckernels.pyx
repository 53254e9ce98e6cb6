# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``soas._kernels``; same signatures and semantics."""
from soas.terms import Meta, Op, Var

IMPL = "cython"


cpdef object shift(object t, int d, int cutoff=0):
    cdef int i
    if d == 0 or t._fv <= cutoff:
        return t
    cls = type(t)
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


cpdef object instantiate(object body, tuple params, int extra=0):
    cdef int k = len(params)
    if k == 0 and extra == 0:
        return body
    return _inst(body, params, k, extra, 0)


cdef object _inst(object t, tuple params, int k, int extra, int b):
    cdef int j
    if t._fv <= b:
        return t
    cls = type(t)
    if cls is Var:
        j = t.index - b
        if j < k:
            return shift(params[k - 1 - j], b, 0)
        return Var(j - k + extra + b)
    if cls is Meta:
        return Meta(t.name, tuple([_inst(p, params, k, extra, b) for p in t.params]))
    return Op(t.name, t.tyargs, tuple([(kk, _inst(bd, params, k, extra, b + kk)) for kk, bd in t.args]))


cpdef object apply_meta_map(dict mapping, object t, int depth=0):
    if not t._hm:
        return t
    cls = type(t)
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


cpdef int size(object t):
    cdef int n = 1
    cls = type(t)
    if cls is Var:
        return 1
    if cls is Meta:
        for p in t.params:
            n += size(p)
        return n
    for _, b in t.args:
        n += size(b)
    return n


cpdef set metas(object t, set out=None):
    if out is None:
        out = set()
    if not t._hm:
        return out
    cls = type(t)
    if cls is Meta:
        out.add(t.name)
        for p in t.params:
            metas(p, out)
    elif cls is Op:
        for _, b in t.args:
            metas(b, out)
    return out


cpdef bint occurs(str name, object t):
    if not t._hm:
        return False
    if type(t) is Meta:
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


cpdef set free_vars(object t, int depth=0, set out=None):
    if out is None:
        out = set()
    if t._fv <= depth:
        return out
    cls = type(t)
    if cls is Var:
        out.add(t.index - depth)
    elif cls is Meta:
        for p in t.params:
            free_vars(p, depth, out)
    else:
        for k, b in t.args:
            free_vars(b, depth + k, out)
    return out


cpdef object remap_free(object t, object table, int b=0):
    if t._fv <= b:
        return t
    cls = type(t)
    if cls is Var:
        return Var(table[t.index - b] + b)
    if cls is Meta:
        return Meta(t.name, tuple([remap_free(p, table, b) for p in t.params]))
    return Op(t.name, t.tyargs, tuple([(k, remap_free(bd, table, b + k)) for k, bd in t.args]))
