import math

import pytest
from hypothesis import given, settings, strategies as st

from pateleak.accountant import (ACCOUNT_ONLY, REFUSE_OVER_BUDGET, BudgetLedger,
                                 calibrate_gamma, worst_case_plan)
from pateleak.errors import InvalidInputError, NoSolutionError
from pateleak.noise import laplace_model
from pateleak.rnm import entrywise_leakage


def test_account_only_sums():
    ledger = BudgetLedger()
    for i, x in enumerate([0.1, 0.2, 0.3]):
        e = ledger.record(i, x)
        assert not e.refused
    assert ledger.cumulative_nats == pytest.approx(0.6, abs=1e-15)
    assert [e.cum for e in ledger.entries] == pytest.approx([0.1, 0.3, 0.6])


def test_refusal_is_logged_but_not_charged():
    ledger = BudgetLedger(0.2, REFUSE_OVER_BUDGET)
    assert not ledger.record("a", 0.15).refused
    second = ledger.record("b", 0.15)
    assert second.refused
    assert second.cum == pytest.approx(0.15)
    assert ledger.cumulative_nats == pytest.approx(0.15)
    assert len(ledger.entries) == 2 and len(ledger.answered) == 1
    assert not ledger.record("c", 0.05).refused


def test_exact_budget_is_not_refused():
    ledger = BudgetLedger(0.5, REFUSE_OVER_BUDGET)
    assert not ledger.record(0, 0.25).refused
    assert not ledger.record(1, 0.25).refused
    assert ledger.record(2, 1e-9).refused


@pytest.mark.parametrize("kwargs", [
    {"policy": "sometimes"},
    {"budget_nats": -1.0},
    {"budget_nats": 0.0},
    {"policy": REFUSE_OVER_BUDGET},
])
def test_bad_ledger(kwargs):
    with pytest.raises(InvalidInputError):
        BudgetLedger(**kwargs)


def test_negative_cost_rejected():
    with pytest.raises(InvalidInputError):
        BudgetLedger().record(0, -0.1)


@settings(max_examples=100)
@given(st.lists(st.floats(0, 0.3), max_size=30), st.floats(0.1, 2.0))
def test_budget_never_exceeded(costs, budget):
    ledger = BudgetLedger(budget, REFUSE_OVER_BUDGET)
    for i, c in enumerate(costs):
        ledger.record(i, c)
        assert ledger.cumulative_nats <= budget + 1e-12
    assert ledger.cumulative_nats == pytest.approx(math.fsum(e.nats for e in ledger.answered))


def test_jsonl_round_trip(tmp_path):
    ledger = BudgetLedger(0.2, REFUSE_OVER_BUDGET)
    for i, x in enumerate([0.1, 0.15, 0.05]):
        ledger.record(i, x)
    path = tmp_path / "ledger.jsonl"
    ledger.to_jsonl(path)
    back = BudgetLedger.from_jsonl(path, 0.2, REFUSE_OVER_BUDGET)
    assert [(e.id, e.refused) for e in back.entries] == [(0, False), (1, True), (2, False)]
    assert back.cumulative_nats == pytest.approx(ledger.cumulative_nats)
    assert back.record(3, 0.1).refused


def test_worst_case_plan():
    assert worst_case_plan(50, 0.1) == pytest.approx(5.0)


def test_calibrate_gamma_hits_target():
    g = calibrate_gamma((4, 3, 2, 1), 0.085)
    assert g == pytest.approx(0.0999691, abs=1e-6)
    assert entrywise_leakage((4, 3, 2, 1), laplace_model(g)).value_nats == pytest.approx(
        0.085, abs=1e-9)


def test_calibrate_gamma_uniform_histogram():
    g = calibrate_gamma((0, 0, 0), 0.3)
    assert g >= 0.3
    assert entrywise_leakage((0, 0, 0), laplace_model(g)).value_nats == pytest.approx(
        0.3, abs=1e-9)


def test_calibrate_gamma_unreachable():
    with pytest.raises(NoSolutionError):
        calibrate_gamma((0, 0), math.log(2))
    with pytest.raises(NoSolutionError):
        calibrate_gamma((0, 0), 0.69, gamma_max=5.0)
    with pytest.raises(InvalidInputError):
        calibrate_gamma((0, 0), 0.0)
