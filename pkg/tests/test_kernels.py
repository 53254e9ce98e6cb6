import importlib

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import named_apply_meta
from soas import _kernels, kernels
from soas.subst import subst_vars
from soas.terms import Meta, Op, Var
from strategies import meta_maps, terms

IMPLS = [_kernels]
try:
    IMPLS.append(importlib.import_module("soas._ckernels"))
except ImportError:
    pass


def test_selected_implementation_is_reported():
    assert kernels.IMPL in ("cython", "python")


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.IMPL)
def test_shift_examples(impl):
    t = Op("lam", (), ((1, Op("f", (), ((0, Var(0)), (0, Var(1))))),))
    assert impl.shift(t, 2) == Op("lam", (), ((1, Op("f", (), ((0, Var(0)), (0, Var(3))))),))
    assert impl.shift(Var(0), 1, cutoff=1) == Var(0)
    with pytest.raises(ValueError):
        impl.shift(Var(0), -1)


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.IMPL)
def test_instantiate_example(impl):
    # body app(var0, var1) with z1 := g (Var 1), z2 := y (Var 0)
    body = Op("f", (), ((0, Var(0)), (0, Var(1))))
    assert impl.instantiate(body, (Var(1), Var(0))) == Op("f", (), ((0, Var(0)), (0, Var(1))))
    assert impl.instantiate(Var(0), (Meta("M", (Var(3),)),)) == Meta("M", (Var(3),))


@given(terms(2), meta_maps())
def test_apply_meta_matches_named_oracle(t, mp):
    names = ["u", "v"]
    assert kernels.apply_meta_map(mp, t) == named_apply_meta(mp, t, names)


@given(terms(2), meta_maps())
def test_implementations_agree(t, mp):
    outs = [(impl.apply_meta_map(mp, t), impl.size(t), impl.metas(t), impl.free_vars(t),
             impl.shift(t, 3, 1)) for impl in IMPLS]
    assert all(o == outs[0] for o in outs)


@given(terms(3, {}), terms(2, {}))
def test_subst_vars_matches_named_oracle(body, val):
    # ``body`` lives in (u, v, x); discharging x with ``val`` leaves (u, v)
    want = named_apply_meta({"H": (1, body)}, Meta("H", (val,)), ["u", "v"])
    assert subst_vars(body, [val]) == want


def test_subst_vars_examples():
    app = lambda a, b: Op("f", (), ((0, a), (0, b)))
    assert subst_vars(app(Var(0), Var(1)), [Var(5), Var(7)]) == app(Var(5), Var(7))
    # abs(x. var1) where var1 refers outside: the value is shifted under the binder
    body = Op("lam", (), ((1, Var(1)),))
    assert subst_vars(body, [Var(0)]) == Op("lam", (), ((1, Var(1)),))
    assert subst_vars(body, [Var(3)]) == Op("lam", (), ((1, Var(4)),))
    assert subst_vars(Var(0), [Meta("M", (Var(2),))]) == Meta("M", (Var(2),))


@given(terms(2))
def test_free_vars_and_remap_roundtrip(t):
    fv = kernels.free_vars(t)
    table = {i: i + 5 for i in fv}
    back = {i + 5: i for i in fv}
    assert kernels.remap_free(kernels.remap_free(t, table), back) == t
    assert all(i < 2 for i in fv)


@given(st.integers(0, 3), terms(2))
def test_shift_roundtrip(d, t):
    assert kernels.shift(kernels.shift(t, d), -d) == t


def test_benchmark_script_runs(capsys):
    import runpy
    from conftest import ROOT
    mod = runpy.run_path(str(ROOT / "benchmarks" / "bench_kernels.py"))
    assert mod["main"](["--terms", "10", "--repeat", "1", "--no-search"]) == 0
    assert "apply_meta_map" in capsys.readouterr().out
