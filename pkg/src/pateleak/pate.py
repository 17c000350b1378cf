"""Small deterministic PATE pipeline for leakage accounting.

Teachers are 1-nearest-neighbour classifiers on disjoint partitions of a
labelled dataset. They are deterministic, which is the least private case:
the only protection comes from the noisy aggregation. Each answered query is
charged its exact entrywise leakage for the known-votes histogram, which is
the full histogram minus the vote of the teacher that holds the target
record. If no target is designated, the charge is the worst case over every
teacher whose vote could be the unknown one.
"""

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .accountant import BudgetLedger
from .errors import InvalidInputError
from .noise import NoiseModel
from .rnm import DEFAULT_TOL, entrywise_leakage, noisy_argmax_sample


@dataclass(frozen=True)
class LabeledDataset:
    """Records with integer labels in ``0..m-1``."""

    features: np.ndarray
    labels: np.ndarray
    m: int

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim == 1:
            feats = feats[:, None]
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise InvalidInputError("one label per record is required")
        if labels.size and (not np.all(labels == np.round(labels))
                            or labels.min() < 0 or labels.max() >= self.m):
            raise InvalidInputError(f"labels must be integers in 0..{self.m - 1}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels.astype(int))

    @property
    def n(self):
        return self.labels.size

    @classmethod
    def from_csv(cls, path, m, label_column="label"):
        """Read a CSV with numeric feature columns and one label column."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or label_column not in reader.fieldnames:
                raise InvalidInputError(f"CSV has no {label_column!r} column")
            cols = [c for c in reader.fieldnames if c != label_column]
            feats, labels = [], []
            for row in reader:
                feats.append([float(row[c]) for c in cols])
                labels.append(int(row[label_column]))
        return cls(np.array(feats).reshape(len(labels), len(cols)), np.array(labels), m)


def partition(n, L, seed):
    """Split record indices ``0..n-1`` into ``L`` disjoint nonempty parts.

    Indices are shuffled with ``seed`` and dealt round-robin, so part sizes
    differ by at most one.
    """
    if int(L) != L or L < 1:
        raise InvalidInputError("L must be a positive integer")
    if L > n:
        raise InvalidInputError(f"cannot split {n} records into {L} nonempty parts")
    order = np.random.default_rng(seed).permutation(n)
    return [np.sort(order[i::L]) for i in range(int(L))]


class NearestNeighbourTeacher:
    """Deterministic 1-NN classifier over one partition (Euclidean).

    Distance ties go to the lowest record index, then the lowest label.
    """

    def __init__(self, features, labels, record_ids):
        if len(labels) == 0:
            raise InvalidInputError("a teacher needs at least one record")
        self.features = np.asarray(features, dtype=float)
        self.labels = np.asarray(labels, dtype=int)
        self.record_ids = np.asarray(record_ids)

    def predict(self, query):
        q = np.asarray(query, dtype=float).reshape(-1)
        dist = np.sum((self.features - q) ** 2, axis=1)
        # lexsort: last key is primary.
        best = np.lexsort((self.labels, self.record_ids, dist))[0]
        return int(self.labels[best])


def train_stub_teacher(dataset: LabeledDataset, indices):
    indices = np.asarray(indices, dtype=int)
    return NearestNeighbourTeacher(dataset.features[indices], dataset.labels[indices],
                                   indices)


@dataclass
class TeacherEnsemble:
    partitions: list
    teachers: list
    m: int

    @classmethod
    def train(cls, dataset: LabeledDataset, L, seed):
        parts = partition(dataset.n, L, seed)
        return cls(parts, [train_stub_teacher(dataset, p) for p in parts], dataset.m)

    def votes(self, query):
        return [t.predict(query) for t in self.teachers]

    def teacher_of(self, record_index):
        for i, part in enumerate(self.partitions):
            if record_index in part:
                return i
        raise InvalidInputError(f"record {record_index} is in no partition")


def vote_histogram(ensemble: TeacherEnsemble, query):
    """Counts of teacher votes per class; sums to ``L``."""
    return np.bincount(ensemble.votes(query), minlength=ensemble.m).astype(float)


@dataclass(frozen=True)
class QueryAnswer:
    label: Optional[int]
    leakage_nats: float
    refused: bool
    histogram: tuple
    v_minus: tuple


def query_cost(ensemble, query, noise, target_entry_index=None, tol=DEFAULT_TOL):
    """Entrywise leakage charged for one query, and the ``v_minus`` used."""
    votes = ensemble.votes(query)
    hist = np.bincount(votes, minlength=ensemble.m).astype(float)
    if target_entry_index is not None:
        candidates = [votes[ensemble.teacher_of(target_entry_index)]]
    else:
        candidates = sorted(set(votes))
    best = None
    for c in candidates:
        v_minus = hist.copy()
        v_minus[c] -= 1.0
        cost = entrywise_leakage(v_minus, noise, tol).value_nats
        if best is None or cost > best[0]:
            best = (cost, v_minus)
    return best[0], hist, best[1]


def answer_query(ensemble: TeacherEnsemble, query, noise: NoiseModel,
                 ledger: BudgetLedger, target_entry_index=None, seed=None,
                 query_id=None, tol=DEFAULT_TOL):
    """Label one query through noisy argmax and charge the ledger.

    The label is withheld (``None``) when the ledger refuses the charge.
    """
    cost, hist, v_minus = query_cost(ensemble, query, noise, target_entry_index, tol)
    entry = ledger.record(query_id if query_id is not None else len(ledger.entries), cost)
    label = None if entry.refused else noisy_argmax_sample(hist, noise, seed)
    return QueryAnswer(label, cost, entry.refused, tuple(hist), tuple(v_minus))


def run_queries(ensemble, queries, noise, ledger, target_entry_index=None, seed=0,
                stop_on_refusal=True, tol=DEFAULT_TOL):
    """Answer ``queries`` in order; stop at the first refusal if asked."""
    answers = []
    for i, q in enumerate(queries):
        ans = answer_query(ensemble, q, noise, ledger, target_entry_index,
                           seed=[seed, i], query_id=i, tol=tol)
        answers.append(ans)
        if ans.refused and stop_on_refusal:
            break
    return answers
