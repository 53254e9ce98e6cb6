"""Smaller versions of the randomised acceptance suites, on other seeds."""
import pytest

from desk import INSTANCES, misses
from rules import RULES
from suites import matching, per_rule, solved_forms, soundness


def test_emitted_solutions_replay():
    n, sols, failures = soundness(101, 120)
    assert n == 120 and sols > 50
    assert failures == []


def test_each_rule_is_sound():
    done, fails = per_rule(102, 15, max_seconds=240)
    assert all(done[r] >= 15 for r in RULES), dict(done)
    assert sum(fails.values()) == 0, dict(fails)


def test_matching_agrees_with_oracle():
    n, bad, exact = matching(103, 80)
    assert bad == [] and exact > n // 2


def test_solved_form_unifiers():
    n, bad = solved_forms(104, 200)
    assert bad == []


@pytest.mark.parametrize("name", sorted(INSTANCES))
def test_desk_instance_has_no_misses(name):
    found, sols, missed = misses(name)
    assert found and not missed
