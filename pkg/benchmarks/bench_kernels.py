"""Compare the compiled kernels with the pure-Python fallback.

Part one times each kernel on the same random terms through both modules.
Part two runs a whole search in two subprocesses, one of them with
SOAS_PURE=1, so the engine picks up each implementation through the normal
import-time selection.
"""
import argparse
import importlib
import json
import os
import random
import subprocess
import sys
import timeit

from soas import _kernels
from soas.terms import Meta, Op, Var

OPS = {"c": (), "f": (0, 0), "g": (0,), "lam": (1,)}
METAS = {"M": 2, "N": 1}


def random_term(rng, scope, depth):
    if depth <= 0 or rng.random() < 0.15:
        return Var(rng.randrange(scope)) if scope and rng.random() < 0.7 else Op("c")
    r = rng.random()
    if r < 0.15:
        m = rng.choice(sorted(METAS))
        return Meta(m, tuple(random_term(rng, scope, depth - 1) for _ in range(METAS[m])))
    name = rng.choice(["f", "g", "lam"])
    return Op(name, (), tuple((k, random_term(rng, scope + k, depth - 1)) for k in OPS[name]))


def kernel_cases(rng, n):
    terms = [random_term(rng, 3, 9) for _ in range(n)]
    bodies = {"M": (2, random_term(rng, 5, 4)), "N": (1, random_term(rng, 4, 4))}
    vals = (Op("c"), Var(0), Op("g", (), ((0, Var(1)),)))
    return {
        "shift": lambda k: [k.shift(t, 2) for t in terms],
        "instantiate": lambda k: [k.instantiate(t, vals) for t in terms],
        "apply_meta_map": lambda k: [k.apply_meta_map(bodies, t) for t in terms],
        "size": lambda k: [k.size(t) for t in terms],
        "metas": lambda k: [k.metas(t) for t in terms],
        "free_vars": lambda k: [k.free_vars(t) for t in terms],
    }


SEARCH = """
import json, time
from pathlib import Path
from soas import kernels
from soas.cli.parser import parse_file
from soas.engine import Solver, Strategy
pf = parse_file(Path({path!r}).read_text())
P = pf.problems["mgu_example"]
t = time.perf_counter()
solver = Solver(P, pf.presentation, Strategy(max_solutions=3, max_seconds=600))
n = len(list(solver.solve()))
print(json.dumps({{"impl": kernels.IMPL, "seconds": time.perf_counter() - t, "solutions": n,
                  "nodes": solver.stats["nodes"]}}))
"""


def run_search(pure):
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    env = dict(os.environ, SOAS_PURE="1" if pure else "0")
    code = SEARCH.format(path=os.path.join(root, "corpus", "stlc.soas"))
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-search", action="store_true", help="skip the end-to-end search comparison")
    args = ap.parse_args(argv)

    impls = [("python", _kernels)]
    try:
        impls.append(("cython", importlib.import_module("soas._ckernels")))
    except ImportError:
        print("compiled kernels not built; timing the pure-Python fallback only")
    cases = kernel_cases(random.Random(args.seed), args.terms)
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name, _ in impls) + ("     speedup" if len(impls) > 1 else ""))
    for kname, fn in cases.items():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for _, mod in impls]
        row = f"{kname:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)
    if args.no_search:
        return 0
    print()
    print("search on the mgu example (3 solutions):")
    results = [run_search(pure=True), run_search(pure=False)]
    for r in results:
        print(f"  {r['impl']:<8} {r['seconds']:.2f}s  nodes={r['nodes']}  solutions={r['solutions']}")
    if results[1]["impl"] != results[0]["impl"]:
        print(f"  speedup {results[0]['seconds'] / results[1]['seconds']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
