"""Pretty-printing with invented bound-variable names."""
from __future__ import annotations

import os
import sys

from ..syntax import SoasError
from ..terms import Meta, Var
from ..types import show_type

_NAMES = ["x", "y", "z", "w", "u", "v", "p", "q", "r", "s"]


def _fresh(taken) -> str:
    for n in _NAMES:
        if n not in taken:
            return n
    i = 1
    while f"x{i}" in taken:
        i += 1
    return f"x{i}"


def show_term(t, names=(), sig=None, explicit: bool = False) -> str:
    """Render ``t`` with ``names`` (outermost first) for its free variables.

    Bound variables get the first name from x, y, z, ... not already in use;
    operator names are avoided so that nullary operators stay unambiguous.
    """
    reserved = set(sig.ops) if sig is not None else set()
    return _show(t, list(names), reserved, explicit)


def _show(t, env, reserved, explicit):
    cls = t.__class__
    if cls is Var:
        i = len(env) - 1 - t.index
        if i < 0:
            return f"#{t.index - len(env)}"
        return env[i]
    if cls is Meta:
        return f"{t.name}[{', '.join(_show(p, env, reserved, explicit) for p in t.params)}]"
    head = t.name
    if explicit and t.tyargs:
        head += "<" + ", ".join(show_type(a) for a in t.tyargs) + ">"
    if not t.args:
        return head if not explicit or not t.tyargs else head + "()"
    parts = []
    for k, b in t.args:
        bs = []
        taken = set(env) | reserved
        for _ in range(k):
            n = _fresh(taken | set(bs))
            bs.append(n)
        body = _show(b, env + bs, reserved, explicit)
        parts.append(f"{' '.join(bs)}. {body}" if bs else body)
    return f"{head}({', '.join(parts)})"


def show_term_checked(t, names, sig, theta, ctx) -> str:
    """Plain rendering when it reparses to the same term, explicit instantiations otherwise."""
    from .parser import parse_term
    plain = show_term(t, names, sig)
    try:
        back = parse_term(sig, plain, theta, names, None, ctx)
        if back == t:
            return plain
    except SoasError:
        pass
    return show_term(t, names, sig, explicit=True)


def param_names(k: int) -> list:
    return [f"z{i + 1}" for i in range(k)]


def show_subst(theta, sig=None, domain=None, codomain=None, sep="\n") -> str:
    """``M[z1,z2] |-> body`` lines; unmapped domain entries are left out."""
    lines = []
    for name, (k, body) in theta.mapping.items():
        ps = param_names(k)
        if sig is not None and domain is not None and codomain is not None and name in domain:
            b = show_term_checked(body, ps, sig, codomain, domain[name].params)
        else:
            b = show_term(body, ps, sig)
        lines.append(f"{name}[{','.join(ps)}] |-> {b}")
    return sep.join(lines) if lines else "(identity)"


def show_decl(d) -> str:
    return f"{d.name} : [{', '.join(show_type(p) for p in d.params)}]{_show_res(d.result)}"


def _show_res(ty):
    s = show_type(ty)
    return f"({s})" if " " in s else s


def show_certificate(cert, names=(), sig=None) -> str:
    lines = [f"   {show_term(cert.start, names, sig)}"]
    for i, st in enumerate(cert.steps, 1):
        arrow = "->" if st.direction == "lr" else "<-"
        lines.append(f"{i:>2}. {arrow} {st.axiom} at {list(st.path)}")
        lines.append(f"   {show_term(st.after, names, sig)}")
    return "\n".join(lines)


def use_color(stream=None) -> bool:
    mode = os.environ.get("SOAS_COLOR", "auto")
    if mode == "never":
        return False
    stream = stream or sys.stdout
    return hasattr(stream, "isatty") and stream.isatty()


def paint(text: str, code: str, on: bool) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if on else text
