"""Concrete syntax for signatures, axioms, problems and substitutions.

    -- comment
    sort a .
    tycon arrow 2 .
    op abs <s,t> : (s . t) -> (s -> t) .
    axiom beta <s,t> : m : [s]t, n : []s |- app(abs(x. m[x]), n[]) --> m[n[]] : t .
    axiom subst_var : M : []star | x : star |- subst(a. x, M[]) == x : star .
    problem P : exists m : [s1,s2]t . forall g : s1, y : s2 . lhs == rhs : t /\\ ... .

Binder names are converted to de Bruijn indices.  ``s -> t`` and ``s * t``
are sugar for the ``arrow`` and ``prod`` type constructors.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..equational import Axiom, Presentation, check_axiom
from ..subst import MetaSubstitution, parametrise
from ..syntax import (Constraint, MetaDecl, OperatorDecl, Signature, SoasError, TypeCheckError,
                      UnificationProblem, typecheck)
from ..terms import Meta, Op, Var
from ..types import ARROW, PROD, Sort, TyCon, TyVar


class ParseError(SoasError):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>--(?!>)[^\n]*)
  | (?P<sym>-->|\|->|->|==|\|-|/\\|[()\[\],.:<>*;|{}])
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_%][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        s = m.group()
        if m.lastgroup not in ("ws", "comment"):
            out.append(Tok(m.lastgroup, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Tok("eof", "", line, col))
    return out


@dataclass
class ProblemFile:
    sig: Signature
    presentation: Presentation
    problems: dict = field(default_factory=dict)     # name -> UnificationProblem
    warnings: list = field(default_factory=list)


class Parser:
    def __init__(self, text: str, sig: Signature = None):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig if sig is not None else Signature()

    # -- token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg):
        t = self.tok
        raise ParseError(msg, t.line, t.col)

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"expected a name, found {self.tok.text or 'end of input'!r}")
        s = self.tok.text
        self.i += 1
        return s

    # -- types
    def type_(self, tyvars=()):
        left = self.prod_type(tyvars)
        if self.accept("->"):
            return TyCon(ARROW, (left, self.type_(tyvars)))
        return left

    def prod_type(self, tyvars):
        left = self.atom_type(tyvars)
        while self.accept("*"):
            left = TyCon(PROD, (left, self.atom_type(tyvars)))
        return left

    def atom_type(self, tyvars):
        if self.accept("("):
            t = self.type_(tyvars)
            self.expect(")")
            return t
        tok = self.tok
        name = self.ident()
        if name in tyvars:
            return TyVar(name)
        if name in self.sig.tycons:
            args = ()
            if self.tok.text == "(" and self.sig.tycons[name] > 0:
                self.expect("(")
                args = [self.type_(tyvars)]
                while self.accept(","):
                    args.append(self.type_(tyvars))
                self.expect(")")
                args = tuple(args)
            if len(args) != self.sig.tycons[name]:
                raise ParseError(f"type constructor {name} expects {self.sig.tycons[name]} arguments",
                                 tok.line, tok.col)
            return TyCon(name, args)
        if name in self.sig.sorts:
            return Sort(name)
        raise ParseError(f"unknown type {name}", tok.line, tok.col)

    def tyvar_list(self):
        vs = []
        if self.accept("<"):
            if not self.accept(">"):
                vs.append(self.ident())
                while self.accept(","):
                    vs.append(self.ident())
                self.expect(">")
        return tuple(vs)

    # -- declarations
    def file(self) -> ProblemFile:
        if self.tok.kind == "eof":
            raise ParseError("no signature")
        pres = Presentation(self.sig, [])
        pf = ProblemFile(self.sig, pres)
        while self.tok.kind != "eof":
            kw = self.tok
            word = self.ident()
            if word == "sort":
                self.sig.sorts.add(self.ident())
            elif word == "tycon":
                name = self.ident()
                if self.tok.kind != "num":
                    self.error("expected an arity")
                self.sig.tycons[name] = int(self.tok.text)
                self.i += 1
            elif word == "op":
                self.op_decl()
            elif word == "axiom":
                ax = self.axiom_decl()
                if any(a.name == ax.name for a in pres.axioms):
                    raise ParseError(f"duplicate axiom {ax.name}", kw.line, kw.col)
                try:
                    pres.axioms.append(check_axiom(self.sig, ax))
                except SoasError as e:
                    raise ParseError(str(e), kw.line, kw.col) from None
            elif word == "problem":
                p = self.problem_decl()
                pf.problems[p.name] = p
            else:
                raise ParseError(f"unknown declaration {word!r}", kw.line, kw.col)
            self.expect(".")
        if not self.sig.ops and not self.sig.sorts:
            raise ParseError("no signature")
        return pf

    def op_decl(self):
        tok = self.tok
        name = self.ident()
        tvs = self.tyvar_list()
        self.expect(":")
        arity = []
        if self.tok.text == "(" and self._paren_followed_by_arrow():
            self.expect("(")
            if not self.accept(")"):
                arity.append(self.arg_arity(tvs))
                while self.accept(","):
                    arity.append(self.arg_arity(tvs))
                self.expect(")")
            self.expect("->")
        result = self.type_(tvs)
        try:
            self.sig.add_op(OperatorDecl(name, tvs, tuple(arity), result))
        except SoasError as e:
            raise ParseError(str(e), tok.line, tok.col) from None

    def _paren_followed_by_arrow(self) -> bool:
        depth = 0
        j = self.i
        while j < len(self.toks):
            t = self.toks[j].text
            if t == "(":
                depth += 1
            elif t == ")":
                depth -= 1
                if depth == 0:
                    return self.toks[j + 1].text == "->"
            j += 1
        return False

    def arg_arity(self, tvs):
        # either "t1 t2 . t" or a bare type
        j = self.i
        depth = 0
        has_dot = False
        while True:
            t = self.toks[j].text
            if t == "(":
                depth += 1
            elif t == ")":
                if depth == 0:
                    break
                depth -= 1
            elif t == "," and depth == 0:
                break
            elif t == "." and depth == 0:
                has_dot = True
                break
            elif self.toks[j].kind == "eof":
                break
            j += 1
        binders = []
        if has_dot:
            while not self.accept("."):
                binders.append(self.atom_type(tvs))
        return tuple(binders), self.type_(tvs)

    def meta_ctx(self, tyvars=(), allow_vars=False):
        """``m : [s..]t, ...``; with ``allow_vars`` an entry ``x : t`` is a first-order variable."""
        metas, variables = {}, []
        if self.tok.text in ("|-", "|", "."):
            return metas, variables
        while True:
            tok = self.tok
            name = self.ident()
            self.expect(":")
            if self.accept("["):
                params = []
                if not self.accept("]"):
                    params.append(self.type_(tyvars))
                    while self.accept(","):
                        params.append(self.type_(tyvars))
                    self.expect("]")
                decl = MetaDecl(name, tuple(params), self.type_(tyvars))
            else:
                ty = self.type_(tyvars)
                if allow_vars:
                    variables.append((name, ty))
                    decl = None
                else:
                    decl = MetaDecl(name, (), ty)
            if decl is not None:
                if name in metas:
                    raise ParseError(f"duplicate metavariable {name}", tok.line, tok.col)
                metas[name] = decl
            if not self.accept(","):
                break
        return metas, variables

    def var_ctx(self, tyvars=()):
        out = []
        if self.tok.text in ("|-", "."):
            return out
        while True:
            name = self.ident()
            self.expect(":")
            out.append((name, self.type_(tyvars)))
            if not self.accept(","):
                break
        return out

    def axiom_decl(self) -> Axiom:
        name = self.ident()
        tvs = self.tyvar_list()
        self.expect(":")
        metas, _ = self.meta_ctx(tvs)
        varctx = []
        if self.accept("|"):
            varctx = self.var_ctx(tvs)
        self.expect("|-")
        names = [n for n, _ in varctx]
        lhs = self.term(list(names), metas)
        if self.accept("-->"):
            oriented = True
        else:
            self.expect("==")
            oriented = False
        rhs = self.term(list(names), metas)
        self.expect(":")
        ty = self.type_(tvs)
        return Axiom(name, metas, lhs, rhs, ty, tvs, oriented, tuple(varctx))

    def problem_decl(self) -> UnificationProblem:
        name = self.ident()
        self.expect(":")
        metas, exvars = {}, []
        if self.accept("exists"):
            metas, exvars = self.meta_ctx(allow_vars=True)
            self.expect(".")
        forall = []
        if self.accept("forall"):
            forall = self.var_ctx()
            self.expect(".")
        cs = [self.constraint(metas, exvars, forall)]
        while self.accept("/\\"):
            cs.append(self.constraint(metas, exvars, forall))
        return self.finish_problem(name, metas, exvars, forall, cs)

    def constraint(self, metas, exvars, forall):
        tok = self.tok
        names = [n for n, _ in exvars] + [n for n, _ in forall]
        lhs = self.term(list(names), metas)
        self.expect("==")
        rhs = self.term(list(names), metas)
        self.expect(":")
        ty = self.type_()
        return tok, lhs, rhs, ty

    def finish_problem(self, name, metas, exvars, forall, cs):
        ctx = tuple(ty for _, ty in forall)
        full = tuple(ty for _, ty in exvars) + ctx
        theta = dict(metas)
        out = []
        hats = None
        for tok, lhs, rhs, ty in cs:
            try:
                lhs = typecheck(self.sig, theta, full, lhs, ty)
                rhs = typecheck(self.sig, theta, full, rhs, ty)
            except TypeCheckError as e:
                raise ParseError(f"problem {name}: {e}", tok.line, tok.col) from None
            out.append(Constraint(ctx, lhs, rhs, ty))
        if exvars:
            th = theta
            res = []
            for c in out:
                th2, c2, hats = parametrise(theta, exvars, c)
                th = th2
                res.append(c2)
            theta, out = th, res
        return UnificationProblem(theta, out, name, tuple(n for n, _ in forall))

    # -- terms
    def term(self, env: list, metas: dict):
        """Parse a term; ``env`` lists variable names in scope, outermost first."""
        tok = self.tok
        if tok.kind != "ident":
            self.error(f"expected a term, found {tok.text or 'end of input'!r}")
        name = self.ident()
        if self.tok.text == "[":
            self.expect("[")
            ps = []
            if not self.accept("]"):
                ps.append(self.term(env, metas))
                while self.accept(","):
                    ps.append(self.term(env, metas))
                self.expect("]")
            if metas is not None and name not in metas:
                raise ParseError(f"unknown metavariable {name}", tok.line, tok.col)
            return Meta(name, tuple(ps))
        tyargs = ()
        if self.tok.text == "<" and name in self.sig.ops:
            self.expect("<")
            ts = [self.type_()]
            while self.accept(","):
                ts.append(self.type_())
            self.expect(">")
            tyargs = tuple(ts)
        if self.tok.text == "(":
            if name not in self.sig.ops:
                raise ParseError(f"unknown operator {name}", tok.line, tok.col)
            self.expect("(")
            args = []
            if not self.accept(")"):
                args.append(self.scoped(env, metas))
                while self.accept(","):
                    args.append(self.scoped(env, metas))
                self.expect(")")
            return Op(name, tyargs, tuple(args))
        if name in env:
            return Var(env[::-1].index(name))
        if name in self.sig.ops:
            return Op(name, tyargs, ())
        raise ParseError(f"unknown name {name}", tok.line, tok.col)

    def scoped(self, env, metas):
        binders = []
        j = self.i
        while self.toks[j].kind == "ident":
            j += 1
        if j > self.i and self.toks[j].text == ".":
            while self.tok.text != ".":
                binders.append(self.ident())
            self.expect(".")
        body = self.term(env + binders, metas)
        return len(binders), body


def parse_file(text: str) -> ProblemFile:
    return Parser(text).file()


def parse_term(pf_or_sig, text: str, metas: dict = None, names=(), ty=None, ctx=None):
    """Parse and typecheck a standalone term over ``names`` (with types ``ctx``)."""
    sig = pf_or_sig.sig if isinstance(pf_or_sig, ProblemFile) else pf_or_sig
    p = Parser(text, sig)
    t = p.term(list(names), metas if metas is not None else {})
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after term")
    if ctx is not None:
        t = typecheck(sig, metas or {}, ctx, t, ty)
    return t


def parse_type(sig: Signature, text: str):
    p = Parser(text, sig)
    t = p.type_()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after type")
    return t


def parse_subst(sig: Signature, text: str, domain: dict) -> MetaSubstitution:
    """``[exists n : [..]t, ...] M[z1,z2] |-> body ; ...`` (also newline separated).

    Bodies may mention the parameters and the declared codomain metavariables.
    """
    p = Parser(text, sig)
    codomain = {}
    mapping = {}
    while p.tok.kind != "eof":
        if p.accept(";") or p.accept("."):
            continue
        if p.tok.text in ("exists", "domain") and p.peek().kind == "ident" and p.peek(2).text == ":":
            word = p.ident()
            metas, _ = p.meta_ctx()
            if word == "exists":
                codomain.update(metas)
            continue
        tok = p.tok
        name = p.ident()
        if name not in domain:
            raise ParseError(f"{name} is not a metavariable of the problem", tok.line, tok.col)
        p.expect("[")
        params = []
        if not p.accept("]"):
            params.append(p.ident())
            while p.accept(","):
                params.append(p.ident())
            p.expect("]")
        if p.tok.text != "|->":
            p.error("expected '|->'")
        p.i += 1
        body = p.term(params, None)
        if name in mapping:
            raise ParseError(f"{name} mapped twice", tok.line, tok.col)
        d = domain[name]
        if len(params) != len(d.params):
            raise ParseError(f"{name} takes {len(d.params)} parameters", tok.line, tok.col)
        mapping[name] = (len(params), body)
    cod = dict(domain)
    for n in mapping:
        cod.pop(n, None)
    cod.update(codomain)
    theta = MetaSubstitution(mapping, dict(domain), cod)
    try:
        theta.typecheck(sig)
    except (TypeCheckError, KeyError) as e:
        raise ParseError(f"ill-typed substitution: {e}") from None
    return theta
