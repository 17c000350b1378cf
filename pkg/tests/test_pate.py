import numpy as np
import pytest

from pateleak.accountant import ACCOUNT_ONLY, REFUSE_OVER_BUDGET, BudgetLedger
from pateleak.errors import InvalidInputError
from pateleak.noise import laplace_model
from pateleak.pate import (LabeledDataset, NearestNeighbourTeacher, TeacherEnsemble,
                           answer_query, partition, query_cost, run_queries,
                           vote_histogram)
from pateleak.rnm import entrywise_leakage


@pytest.fixture
def example_ensemble():
    # eleven one-record teachers voting (5, 3, 2, 1) on every query
    labels = np.array([0] * 5 + [1] * 3 + [2] * 2 + [3])
    data = LabeledDataset(np.arange(11.0), labels, 4)
    return TeacherEnsemble.train(data, 11, seed=0)


def test_partition_is_disjoint_cover():
    parts = partition(103, 7, seed=4)
    flat = np.concatenate(parts)
    assert sorted(flat) == list(range(103))
    sizes = [len(p) for p in parts]
    assert max(sizes) - min(sizes) <= 1
    assert all(np.array_equal(a, b) for a, b in zip(parts, partition(103, 7, seed=4)))


def test_partition_rejects():
    with pytest.raises(InvalidInputError):
        partition(5, 6, 0)
    with pytest.raises(InvalidInputError):
        partition(5, 0, 0)


def test_dataset_validation():
    with pytest.raises(InvalidInputError):
        LabeledDataset(np.zeros((3, 2)), [0, 1, 4], 3)
    with pytest.raises(InvalidInputError):
        LabeledDataset(np.zeros((3, 2)), [0, 1], 3)


def test_dataset_from_csv(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,label\n0,0,1\n1,1,0\n2,0.5,2\n")
    data = LabeledDataset.from_csv(path, 3)
    assert data.features.shape == (3, 2)
    assert list(data.labels) == [1, 0, 2]
    with pytest.raises(InvalidInputError):
        LabeledDataset.from_csv(path, 3, label_column="y")


def test_teacher_tie_breaking():
    t = NearestNeighbourTeacher([[1.0], [-1.0]], [2, 0], [5, 3])
    assert t.predict([0.0]) == 0
    assert t.predict([0.9]) == 2


def test_vote_histogram(example_ensemble):
    hist = vote_histogram(example_ensemble, [100.0])
    assert sorted(hist, reverse=True) == [5, 3, 2, 1]
    assert hist.sum() == 11


def test_query_cost_with_target(example_ensemble):
    noise = laplace_model(0.1)
    record = 0  # label 0, so the known votes are (4, 3, 2, 1)
    cost, hist, v_minus = query_cost(example_ensemble, [0.0], noise, record)
    assert tuple(hist) == (5, 3, 2, 1)
    assert tuple(v_minus) == (4, 3, 2, 1)
    assert cost == pytest.approx(0.0850252, abs=5e-6)


def test_query_cost_worst_case(example_ensemble):
    noise = laplace_model(0.1)
    cost, _, v_minus = query_cost(example_ensemble, [0.0], noise)
    each = [entrywise_leakage(v, noise).value_nats
            for v in [(4, 3, 2, 1), (5, 2, 2, 1), (5, 3, 1, 1), (5, 3, 2, 0)]]
    assert cost == pytest.approx(max(each))
    assert cost <= 0.1


def test_answer_query_withholds_label_when_refused(example_ensemble):
    noise = laplace_model(0.1)
    ledger = BudgetLedger(0.05, REFUSE_OVER_BUDGET)
    ans = answer_query(example_ensemble, [0.0], noise, ledger, seed=1)
    assert ans.refused and ans.label is None
    assert ledger.cumulative_nats == 0.0


def test_run_queries_is_reproducible(example_ensemble):
    noise = laplace_model(0.1)
    qs = [[float(i)] for i in range(8)]
    a = run_queries(example_ensemble, qs, noise, BudgetLedger(), seed=3)
    b = run_queries(example_ensemble, qs, noise, BudgetLedger(), seed=3)
    assert [x.label for x in a] == [x.label for x in b]
    assert all(x.label in range(4) for x in a)


def test_run_queries_stops_at_refusal(example_ensemble):
    noise = laplace_model(0.1)
    qs = [[0.0]] * 10
    ledger = BudgetLedger(0.3, REFUSE_OVER_BUDGET)
    out = run_queries(example_ensemble, qs, noise, ledger, target_entry_index=0)
    assert [x.refused for x in out] == [False, False, False, True]
    assert ledger.cumulative_nats <= 0.3
    more = run_queries(example_ensemble, qs, noise, BudgetLedger(0.3, REFUSE_OVER_BUDGET),
                       target_entry_index=0, stop_on_refusal=False)
    assert len(more) == 10 and sum(not x.refused for x in more) == 3
