"""Command-line entry point: ``soas unify|check|rewrite|equal|compare|lint``."""
from __future__ import annotations

import argparse
import json
import sys

from ..engine import Refuted, Solver, Strategy, Verified, Witness, check_unifier, subsumes
from ..equational import (EqualityCertificate, axiom_lint, equal_modulo, normalize_chain,
                          rewrite_once)
from ..syntax import SoasError, infer_type, mixed_operator_lint
from .parser import ParseError, Parser, parse_file, parse_subst, parse_term
from .printer import (paint, show_certificate, show_decl, show_subst, show_term, use_color)

EXIT_OK, EXIT_ERROR, EXIT_NONE, EXIT_UNKNOWN = 0, 1, 2, 3


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="soas", description="E-unification for second-order abstract syntax")
    sub = ap.add_subparsers(dest="command", required=True)

    u = sub.add_parser("unify", help="enumerate E-unifiers of a problem")
    u.add_argument("file")
    u.add_argument("--problem")
    u.add_argument("--max-solutions", type=int, default=1)
    u.add_argument("--max-mutations", type=int, default=6)
    u.add_argument("--max-bindings", type=int, default=12)
    u.add_argument("--max-nonshrinking", type=int, default=12)
    u.add_argument("--max-depth", type=int)
    u.add_argument("--timeout", type=float, default=300.0, help="seconds (0 for none)")
    u.add_argument("--iterate", type=_on_off, default=True, metavar="on|off")
    u.add_argument("--iter-type-depth", type=int, default=1)
    u.add_argument("--strategy", choices=["fair", "best-first"], default="fair")
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--trace", action="store_true", help="print rule traces and certificates")
    u.add_argument("--json", action="store_true")

    c = sub.add_parser("check", help="verify a substitution against a problem")
    c.add_argument("file")
    c.add_argument("--problem")
    c.add_argument("--subst", required=True, help="substitution file (text or unify --json output)")
    c.add_argument("--budget", type=int, default=8)
    c.add_argument("--json", action="store_true")

    r = sub.add_parser("rewrite", help="one-step rewrites or a normalizing chain")
    _term_args(r)
    r.add_argument("--term", required=True)
    r.add_argument("--steps", type=int, help="follow a rewrite chain for up to N steps")

    e = sub.add_parser("equal", help="search for an equality certificate")
    _term_args(e)
    e.add_argument("--left", required=True)
    e.add_argument("--right", required=True)
    e.add_argument("--budget", type=int, default=8)

    m = sub.add_parser("compare", help="subsumption check in both directions")
    m.add_argument("file")
    m.add_argument("--problem")
    m.add_argument("--theta", required=True)
    m.add_argument("--xi", required=True)
    m.add_argument("--budget", type=int, default=8)
    m.add_argument("--timeout", type=float, default=20.0)

    lt = sub.add_parser("lint", help="mixed-operator and degenerate-axiom warnings")
    lt.add_argument("file")
    return ap


def _term_args(p):
    p.add_argument("file")
    p.add_argument("--problem", help="borrow the metavariables and variables of a problem")
    p.add_argument("--ctx", default="", help='free variables, e.g. "x : a, y : a -> b"')


# -- helpers --------------------------------------------------------------------

def _load(path):
    with open(path, encoding="utf-8") as f:
        return parse_file(f.read())


def _problem(pf, name):
    if name is None:
        if len(pf.problems) != 1:
            raise SoasError("choose a problem with --problem (file has "
                            f"{len(pf.problems)}: {', '.join(pf.problems) or 'none'})")
        return next(iter(pf.problems.values()))
    if name not in pf.problems:
        raise SoasError(f"no problem named {name}")
    return pf.problems[name]


def _read_subst(pf, path, domain):
    with open(path, encoding="utf-8") as f:
        text = f.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        sols = data.get("solutions", [])
        if not sols:
            raise SoasError(f"{path} holds no solutions")
        text = sols[0]["subst"]
    return parse_subst(pf.sig, text, domain)


def _term_env(pf, args):
    names, ctx, metas = [], [], {}
    if args.problem:
        P = _problem(pf, args.problem)
        metas = dict(P.theta)
        names = list(P.var_names) if P.var_names else [f"x{i + 1}" for i in range(len(P.constraints[0].ctx))]
        ctx = list(P.constraints[0].ctx) if P.constraints else []
    if args.ctx.strip():
        p = Parser(args.ctx, pf.sig)
        for n, ty in p.var_ctx():
            names.append(n)
            ctx.append(ty)
        if p.tok.kind != "eof":
            p.error(f"unexpected {p.tok.text!r} in context")
    return names, tuple(ctx), metas


def _term(pf, text, names, ctx, metas):
    t = parse_term(pf, text, metas, names, None, ctx)
    return t, infer_type(pf.sig, metas, ctx, t)


def subst_text(sol, sig, domain) -> str:
    """A ``parse_subst``-readable rendering (codomain declarations first)."""
    head = ", ".join(show_decl(d) for d in sol.unifier.codomain.values())
    body = show_subst(sol.unifier, sig, domain, sol.unifier.codomain, sep=" ; ")
    return (f"exists {head} ; " if head else "") + body


def _cert_json(cert, names, sig):
    return {"start": show_term(cert.start, names, sig), "end": show_term(cert.end, names, sig),
            "steps": [{"axiom": s.axiom, "direction": s.direction, "path": list(s.path),
                       "after": show_term(s.after, names, sig)} for s in cert.steps]}


def _names(P, c):
    names = list(P.var_names)
    return names if len(names) == len(c.ctx) else [f"x{i + 1}" for i in range(len(c.ctx))]


# -- subcommands ----------------------------------------------------------------

def cmd_unify(args, out) -> int:
    pf = _load(args.file)
    P = _problem(pf, args.problem)
    strat = Strategy(discipline=args.strategy, max_mutations=args.max_mutations,
                     max_bindings=args.max_bindings, max_nonshrinking=args.max_nonshrinking,
                     max_solutions=args.max_solutions or None, max_seconds=args.timeout or None,
                     max_depth=args.max_depth, iter_type_depth=args.iter_type_depth,
                     iterate=args.iterate, seed=args.seed)
    solver = Solver(P, pf.presentation, strat)
    color = use_color(out) and not args.json
    if not args.json:
        for w in solver.warnings:
            print(paint(f"warning: {w}", "33", color), file=sys.stderr)
    found = []
    for i, sol in enumerate(solver.solve(), 1):
        found.append(sol)
        if args.json:
            continue
        if i > 1:
            print(file=out)
        print(paint(f"solution {i}", "1", color) + f" (depth {sol.depth})", file=out)
        print(show_subst(sol.unifier, pf.sig, P.theta, sol.unifier.codomain), file=out)
        if args.trace:
            print("trace: " + " ; ".join(" ".join(map(str, t)) for t in sol.trace), file=out)
            for c, cert in zip(P.constraints, sol.certificates):
                print(show_certificate(cert, _names(P, c), pf.sig), file=out)
        out.flush()
    if args.json:
        doc = {"problem": P.name, "warnings": solver.warnings, "stats": solver.stats, "solutions": [
            {"subst": subst_text(s, pf.sig, P.theta),
             "unifier": {m: {"params": k, "body": show_term(b, [f"z{j + 1}" for j in range(k)], pf.sig)}
                         for m, (k, b) in s.unifier.mapping.items()},
             "codomain": {n: show_decl(d) for n, d in s.unifier.codomain.items()},
             "depth": s.depth, "trace": [list(t) for t in s.trace],
             "certificates": [_cert_json(cert, _names(P, c), pf.sig)
                              for c, cert in zip(P.constraints, s.certificates)]}
            for s in found]}
        json.dump(doc, out, indent=2, default=str)
        print(file=out)
    if not found:
        why = "timeout" if solver.stats.get("timeout") else "budgets exhausted"
        print(f"no solution ({why})", file=sys.stderr)
        return EXIT_NONE
    return EXIT_OK


def cmd_check(args, out) -> int:
    pf = _load(args.file)
    P = _problem(pf, args.problem)
    xi = _read_subst(pf, args.subst, P.theta)
    res = check_unifier(P, pf.presentation, xi, budget=args.budget)
    if args.json:
        doc = {"result": type(res).__name__}
        if isinstance(res, Verified):
            doc["certificates"] = [_cert_json(cert, _names(P, c), pf.sig)
                                   for c, cert in zip(P.constraints, res.certificates)]
        else:
            doc["detail"] = getattr(res, "detail", "")
        json.dump(doc, out, indent=2)
        print(file=out)
    elif isinstance(res, Verified):
        print("Verified", file=out)
        for i, (c, cert) in enumerate(zip(P.constraints, res.certificates), 1):
            print(f"constraint {i}: {len(cert.steps)} step(s)", file=out)
            print(show_certificate(cert, _names(P, c), pf.sig), file=out)
    else:
        print(f"{type(res).__name__}: {res.detail}", file=out)
    if isinstance(res, Verified):
        return EXIT_OK
    return EXIT_ERROR if isinstance(res, Refuted) else EXIT_UNKNOWN


def cmd_rewrite(args, out) -> int:
    pf = _load(args.file)
    names, ctx, metas = _term_env(pf, args)
    t, _ = _term(pf, args.term, names, ctx, metas)
    E = pf.presentation
    if args.steps:
        steps = normalize_chain(E, metas, ctx, t, args.steps)
        print(show_certificate(EqualityCertificate(t, tuple(steps), steps[-1].after if steps else t),
                               names, pf.sig), file=out)
        return EXIT_OK
    steps = rewrite_once(E, metas, ctx, t)
    if not steps:
        print("no rewrites", file=out)
    for st in steps:
        arrow = "->" if st.direction == "lr" else "<-"
        print(f"{arrow} {st.axiom} at {list(st.path)}: {show_term(st.after, names, pf.sig)}", file=out)
    return EXIT_OK


def cmd_equal(args, out) -> int:
    pf = _load(args.file)
    names, ctx, metas = _term_env(pf, args)
    s, ty = _term(pf, args.left, names, ctx, metas)
    t = parse_term(pf, args.right, metas, names, ty, ctx)
    res = equal_modulo(pf.presentation, metas, ctx, s, t, max_steps=args.budget)
    if not res:
        print(f"Unknown (no chain within {args.budget} steps)", file=out)
        return EXIT_UNKNOWN
    print(f"equal: {len(res.steps)} step(s)", file=out)
    print(show_certificate(res, names, pf.sig), file=out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    pf = _load(args.file)
    P = _problem(pf, args.problem)
    theta = _read_subst(pf, args.theta, P.theta)
    xi = _read_subst(pf, args.xi, P.theta)
    for label, a, b in (("theta <= xi", theta, xi), ("xi <= theta", xi, theta)):
        res = subsumes(a, b, pf.presentation, budget=args.budget, max_seconds=args.timeout)
        if isinstance(res, Witness):
            print(f"{label}: Witness", file=out)
            print("  " + show_subst(res.eta, sep="\n  "), file=out)
        else:
            print(f"{label}: Unknown", file=out)
    return EXIT_OK


def cmd_lint(args, out) -> int:
    pf = _load(args.file)
    msgs = mixed_operator_lint(pf.sig) + axiom_lint(pf.presentation) + list(pf.warnings)
    for m in msgs:
        print(f"warning: {m}", file=out)
    if not msgs:
        print("no warnings", file=out)
    return EXIT_OK


COMMANDS = {"unify": cmd_unify, "check": cmd_check, "rewrite": cmd_rewrite, "equal": cmd_equal,
            "compare": cmd_compare, "lint": cmd_lint}


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as e:
        print(f"{args.file}:{e}" if e.line else f"error: {e}", file=sys.stderr)
    except (SoasError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
