"""Per-query leakage accounting with optional budget refusal.

Leakage composes additively across queries, so the ledger simply sums the
per-query costs (in nats). Under ``refuse_over_budget`` a query whose cost
would push the total past the budget is refused: it is logged with
``refused=True`` but never charged.

Only answered queries are charged. Whether the refusal decision itself
reveals anything is not modelled.
"""

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Optional

from scipy.optimize import brentq

from .errors import ConsistencyError, InvalidInputError, NoSolutionError
from .laplace import total_bound
from .noise import laplace_model
from .rnm import DEFAULT_TOL, as_histogram, entrywise_leakage

ACCOUNT_ONLY = "account_only"
REFUSE_OVER_BUDGET = "refuse_over_budget"
POLICIES = (ACCOUNT_ONLY, REFUSE_OVER_BUDGET)


@dataclass(frozen=True)
class LedgerEntry:
    id: object
    nats: float
    cum: float
    refused: bool
    method: str = "quadrature"


@dataclass
class BudgetLedger:
    budget_nats: Optional[float] = None
    policy: str = ACCOUNT_ONLY
    entries: list = field(default_factory=list)
    _charged: list = field(default_factory=list, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False,
                                  compare=False)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise InvalidInputError(f"unknown policy {self.policy!r}")
        if self.budget_nats is not None and not self.budget_nats > 0:
            raise InvalidInputError("budget_nats must be positive")
        if self.policy == REFUSE_OVER_BUDGET and self.budget_nats is None:
            raise InvalidInputError("refuse_over_budget needs budget_nats")

    @property
    def cumulative_nats(self):
        return math.fsum(self._charged)

    @property
    def answered(self):
        return [e for e in self.entries if not e.refused]

    def would_refuse(self, leakage_nats):
        return (self.policy == REFUSE_OVER_BUDGET
                and self.cumulative_nats + leakage_nats > self.budget_nats)

    def record(self, query_id, leakage_nats, method="quadrature"):
        """Charge one query. Returns the new :class:`LedgerEntry`; check its
        ``refused`` flag before releasing the answer."""
        leakage_nats = float(leakage_nats)
        if not leakage_nats >= 0:
            raise InvalidInputError("leakage must be nonnegative")
        with self._lock:
            refused = self.would_refuse(leakage_nats)
            if not refused:
                self._charged.append(leakage_nats)
            entry = LedgerEntry(query_id, leakage_nats, self.cumulative_nats,
                                refused, method)
            self.entries.append(entry)
        return entry

    def to_jsonl(self, path):
        """Write one JSON object per entry."""
        with open(path, "w") as fh:
            for e in self.entries:
                fh.write(json.dumps({"id": e.id, "nats": e.nats, "cum": e.cum,
                                     "refused": e.refused}) + "\n")

    @classmethod
    def from_jsonl(cls, path, budget_nats=None, policy=ACCOUNT_ONLY):
        ledger = cls(budget_nats=budget_nats, policy=policy)
        with open(path) as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                entry = LedgerEntry(rec["id"], rec["nats"], rec["cum"], rec["refused"])
                if not entry.refused:
                    ledger._charged.append(entry.nats)
                ledger.entries.append(entry)
        return ledger


def worst_case_plan(k, gamma):
    """Budget needed a priori for ``k`` Laplace queries: ``k * gamma``."""
    return total_bound(k, gamma)


def calibrate_gamma(v_minus, target_nats, tol=1e-9, gamma_max=1e3):
    """Laplace ``gamma`` whose entrywise leakage at ``v_minus`` is ``target_nats``.

    Leakage never exceeds ``gamma``, so the root lies at or above the target.
    The upper end is doubled until the leakage reaches the target. Leakage
    must increase along the bracket, and this is checked.

    Raises
    ------
    NoSolutionError
        If no ``gamma <= gamma_max`` reaches the target.
    ConsistencyError
        If leakage is observed to decrease in ``gamma`` on the bracket.
    """
    v_minus = as_histogram(v_minus)
    m = v_minus.size
    if not target_nats > 0:
        raise InvalidInputError("target_nats must be positive")
    if not target_nats < math.log(m):
        raise NoSolutionError(f"target {target_nats} >= log(m) = {math.log(m)}")
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    quad_tol = min(DEFAULT_TOL, tol * 1e-2)

    def leak(gamma):
        return entrywise_leakage(v_minus, laplace_model(gamma), quad_tol).value_nats

    seen = [(target_nats, leak(target_nats))]
    hi = 2.0 * target_nats
    while True:
        seen.append((hi, leak(hi)))
        if seen[-1][1] >= target_nats:
            break
        if hi >= gamma_max:
            raise NoSolutionError(
                f"leakage {seen[-1][1]:.6g} at gamma={hi:g} is still below "
                f"target {target_nats:g}")
        hi = min(2.0 * hi, gamma_max)
    lo = seen[-2][0]

    probe = [(g, leak(g)) for g in (lo + (hi - lo) * f for f in (0.25, 0.5, 0.75))]
    values = [val for _, val in sorted(seen + probe)]
    if any(b < a - quad_tol * m for a, b in zip(values, values[1:])):
        raise ConsistencyError("leakage is not increasing in gamma on the bracket")

    return brentq(lambda g: leak(g) - target_nats, lo, hi, xtol=tol * 1e-3,
                  rtol=1e-15)
