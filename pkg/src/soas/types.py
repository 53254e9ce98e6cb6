"""Simple types over declared sorts and type constructors.

A type is one of

* ``Sort(name)``            -- a declared base sort,
* ``TyCon(name, args)``     -- a declared constructor applied to types,
* ``TyVar(name)``           -- a schematic variable; only legal inside operator
                               and axiom declarations (and, transiently, as an
                               inference unknown while typechecking).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union


@dataclass(frozen=True, slots=True)
class Sort:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class TyCon:
    name: str
    args: tuple

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class TyVar:
    name: str

    def __str__(self) -> str:
        return self.name


TypeExpr = Union[Sort, TyCon, TyVar]

ARROW = "arrow"
PROD = "prod"


def arrow(a: TypeExpr, b: TypeExpr) -> TyCon:
    return TyCon(ARROW, (a, b))


def prod(a: TypeExpr, b: TypeExpr) -> TyCon:
    return TyCon(PROD, (a, b))


def show_type(t: TypeExpr, prec: int = 0) -> str:
    # precedences: 0 = arrow (right assoc), 1 = product (left assoc), 2 = atom
    if isinstance(t, TyCon):
        if t.name == ARROW and len(t.args) == 2:
            s = f"{show_type(t.args[0], 1)} -> {show_type(t.args[1], 0)}"
            return f"({s})" if prec > 0 else s
        if t.name == PROD and len(t.args) == 2:
            s = f"{show_type(t.args[0], 1)} * {show_type(t.args[1], 2)}"
            return f"({s})" if prec > 1 else s
        if not t.args:
            return t.name
        return f"{t.name}({', '.join(show_type(a) for a in t.args)})"
    return t.name


def type_vars(t: TypeExpr) -> Iterator[str]:
    if isinstance(t, TyVar):
        yield t.name
    elif isinstance(t, TyCon):
        for a in t.args:
            yield from type_vars(a)


def is_ground(t: TypeExpr) -> bool:
    return next(type_vars(t), None) is None


def subst_type(t: TypeExpr, s: Mapping[str, TypeExpr]) -> TypeExpr:
    if not s:
        return t
    if isinstance(t, TyVar):
        return s.get(t.name, t)
    if isinstance(t, TyCon):
        return TyCon(t.name, tuple(subst_type(a, s) for a in t.args))
    return t


def match_type(pattern: TypeExpr, ground: TypeExpr, s: dict) -> Optional[dict]:
    """First-order matching of ``pattern`` against ``ground``.

    Extends ``s`` in place and returns it, or returns None on mismatch (``s``
    may then hold partial bindings; callers pass a copy when that matters).
    """
    if isinstance(pattern, TyVar):
        bound = s.get(pattern.name)
        if bound is None:
            s[pattern.name] = ground
            return s
        return s if bound == ground else None
    if isinstance(pattern, Sort):
        return s if pattern == ground else None
    if not isinstance(ground, TyCon) or ground.name != pattern.name or len(ground.args) != len(pattern.args):
        return None
    for p, g in zip(pattern.args, ground.args):
        if match_type(p, g, s) is None:
            return None
    return s


class TypeUnifier:
    """Union-find style store for inference unknowns (``TyVar`` named ``?n``)."""

    def __init__(self) -> None:
        self.bindings: dict = {}
        self._counter = 0

    def fresh(self) -> TyVar:
        self._counter += 1
        return TyVar(f"?{self._counter}")

    def resolve(self, t: TypeExpr) -> TypeExpr:
        while isinstance(t, TyVar) and t.name in self.bindings:
            t = self.bindings[t.name]
        return t

    def zonk(self, t: TypeExpr) -> TypeExpr:
        t = self.resolve(t)
        if isinstance(t, TyCon):
            return TyCon(t.name, tuple(self.zonk(a) for a in t.args))
        return t

    def _occurs(self, name: str, t: TypeExpr) -> bool:
        t = self.resolve(t)
        if isinstance(t, TyVar):
            return t.name == name
        if isinstance(t, TyCon):
            return any(self._occurs(name, a) for a in t.args)
        return False

    def unify(self, a: TypeExpr, b: TypeExpr) -> bool:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return True
        if isinstance(a, TyVar) and a.name.startswith("?"):
            if self._occurs(a.name, b):
                return False
            self.bindings[a.name] = b
            return True
        if isinstance(b, TyVar) and b.name.startswith("?"):
            return self.unify(b, a)
        if isinstance(a, TyCon) and isinstance(b, TyCon):
            if a.name != b.name or len(a.args) != len(b.args):
                return False
            return all(self.unify(x, y) for x, y in zip(a.args, b.args))
        return False


def subterm_types(types: Iterable[TypeExpr]) -> set:
    """All ground types occurring in ``types``, closed under taking components."""
    out: set = set()
    stack = list(types)
    while stack:
        t = stack.pop()
        if t in out or not is_ground(t):
            if isinstance(t, TyCon):
                stack.extend(t.args)
            continue
        out.add(t)
        if isinstance(t, TyCon):
            stack.extend(t.args)
    return out


def type_depth(t: TypeExpr) -> int:
    if isinstance(t, TyCon) and t.args:
        return 1 + max(type_depth(a) for a in t.args)
    return 0


def sort_key(t: TypeExpr) -> tuple:
    return (type_depth(t), show_type(t))
