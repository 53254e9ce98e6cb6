import io
import json

import pytest

from conftest import CORPUS
from soas.cli.main import EXIT_ERROR, EXIT_NONE, EXIT_OK, EXIT_UNKNOWN, main
from soas.cli.parser import ParseError, parse_file, parse_subst, parse_term
from soas.cli.printer import show_subst, show_term
from soas.terms import Meta

STLC = str(CORPUS / "stlc.soas")
UNTYPED = str(CORPUS / "untyped.soas")
LAMBDA_MU = str(CORPUS / "lambda_mu.soas")


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_corpus_parses(corpus):
    assert set(corpus) == {"stlc", "untyped", "lambda_mu"}
    assert len(corpus["stlc"].presentation.axioms) == 5
    assert len(corpus["lambda_mu"].presentation.axioms) == 7
    assert set(corpus["stlc"].problems) == {"mgu_example", "fig6"}


def test_print_parse_round_trip(corpus):
    for pf in corpus.values():
        for P in pf.problems.values():
            for c in P.constraints:
                names = list(P.var_names)
                for t in (c.lhs, c.rhs):
                    text = show_term(t, names, pf.sig)
                    assert parse_term(pf, text, P.theta, names, c.type, c.ctx) == t


def test_nullary_metavariable_prints_with_brackets():
    assert show_term(Meta("M", ())) == "M[]"


def test_substitution_round_trip(stlc):
    P = stlc.problems["mgu_example"]
    theta = parse_subst(stlc.sig, "M[z1, z2] |-> app(z2, z1)", P.theta)
    again = parse_subst(stlc.sig, show_subst(theta, stlc.sig, P.theta), P.theta)
    assert again.mapping == theta.mapping


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_file("sort a .\nop c : a\nop d : a .")
    assert e.value.line == 3


def test_empty_file_is_an_error(tmp_path, capsys):
    p = tmp_path / "empty.soas"
    p.write_text("")
    code, _ = run("lint", str(p))
    assert code == EXIT_ERROR and "no signature" in capsys.readouterr().err


def test_unify_prints_unifier_then_trace():
    code, out = run("unify", STLC, "--problem", "mgu_example", "--trace")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("solution 1")
    assert lines[1] == "M[z1,z2] |-> app(z2, z1)"
    assert lines[2].startswith("trace: ")


def test_unify_needs_a_problem_name_when_ambiguous():
    code, _ = run("unify", STLC)
    assert code == EXIT_ERROR


def test_unify_without_solutions():
    code, _ = run("unify", STLC, "--problem", "mgu_example", "--max-bindings", "1", "--max-mutations", "0")
    assert code == EXIT_NONE


def test_json_output_is_accepted_by_check(tmp_path):
    code, out = run("unify", STLC, "--problem", "mgu_example", "--json")
    assert code == EXIT_OK
    doc = json.loads(out)
    sol = doc["solutions"][0]
    assert sol["unifier"]["M"] == {"params": 2, "body": "app(z2, z1)"}
    assert sol["certificates"][0]["steps"]
    p = tmp_path / "sol.json"
    p.write_text(out)
    code, out = run("check", STLC, "--problem", "mgu_example", "--subst", str(p))
    assert code == EXIT_OK and out.startswith("Verified")


def test_check_exit_codes(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("M[z1, z2] |-> z1")
    code, out = run("check", UNTYPED, "--subst", str(p), "--budget", "6")
    assert code == EXIT_UNKNOWN and out.startswith("Unknown")
    code, _ = run("check", STLC, "--problem", "mgu_example", "--subst", str(p))
    assert code == EXIT_ERROR


def test_rewrite_and_equal():
    code, out = run("rewrite", STLC, "--ctx", "y : a", "--term", "app(abs(x. x), y)")
    assert code == EXIT_OK and out.strip() == "-> beta at []: y"
    code, out = run("equal", STLC, "--ctx", "g : a -> b, c : a", "--left",
                    "app(app(abs(x. abs(y. app(y, x))), g), abs(z. app(z, c)))", "--right", "app(g, c)")
    assert code == EXIT_OK and out.startswith("equal: 3 step(s)")
    code, out = run("equal", STLC, "--ctx", "u : a, v : a", "--left", "u", "--right", "v", "--budget", "3")
    assert code == EXIT_UNKNOWN


def test_rewrite_chain():
    code, out = run("rewrite", STLC, "--ctx", "p : a * b", "--term", "fst(pair(fst(p), snd(p)))", "--steps", "5")
    assert code == EXIT_OK and "beta_fst" in out


def test_compare_prints_both_directions(tmp_path):
    t = tmp_path / "t.txt"
    x = tmp_path / "x.txt"
    t.write_text("M[z1, z2] |-> app(z2, z1)")
    x.write_text("M[z1, z2] |-> app(z1, app(z2, abs(z. z)))")
    code, out = run("compare", UNTYPED, "--theta", str(t), "--xi", str(x))
    assert code == EXIT_OK
    assert out.splitlines() == ["theta <= xi: Unknown", "xi <= theta: Unknown"]


def test_lint_lambda_mu():
    code, out = run("lint", LAMBDA_MU)
    assert code == EXIT_OK
    mixed = [line for line in out.splitlines() if "mixed" in line]
    assert len(mixed) == 1 and "subst" in mixed[0] and "completeness is not guaranteed" in mixed[0]


def test_lint_clean_file():
    code, out = run("lint", UNTYPED)
    assert code == EXIT_OK and out.strip() == "no warnings"


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "soas", "rewrite", STLC, "--ctx", "y : a", "--term",
                        "app(abs(x. x), y)"], capture_output=True, text=True)
    assert r.returncode == 0 and "beta" in r.stdout
