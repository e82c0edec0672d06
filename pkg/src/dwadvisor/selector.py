"""Greedy selection of indexes and views under a storage budget.

The greedy is ascending: start from the current configuration, and each
round add the candidate with the best benefit per byte, re-evaluating every
benefit against the configuration built so far.  Five strategies couple the
two structure families: ``joint`` pools everything under one budget,
``mvfirst``/``indfirst`` run the families in sequence with a budget split
``alpha`` (unused bytes roll over), and ``views_only``/``indexes_only``
restrict the pool.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .candidates import CandidateIndex, CandidateView
from .cost import Configuration, workload_cost
from .errors import InvalidAlpha, InvalidBudget, ValidationError

STRATEGIES = ("joint", "mvfirst", "indfirst", "views_only", "indexes_only")


@dataclass(frozen=True)
class SelectionParams:
    budget_bytes: int
    strategy: str = "joint"
    alpha: float = 0.5  # view share of the budget for mvfirst / indfirst

    def __post_init__(self):
        if not isinstance(self.budget_bytes, int) or self.budget_bytes <= 0:
            raise InvalidBudget(f"budget must be a positive number of bytes, got {self.budget_bytes}")
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}")
        if not 0 <= self.alpha <= 1:
            raise InvalidAlpha(f"alpha must lie in [0, 1], got {self.alpha}")


class Round(NamedTuple):
    number: int
    candidate_id: str
    benefit: int
    size_bytes: int
    ratio: float
    remaining_bytes: int

    def __str__(self):
        return (f"round {self.number}: {self.candidate_id} benefit={self.benefit} "
                f"size={self.size_bytes} ratio={self.ratio:.6g} remaining={self.remaining_bytes}")


def benefit(s, config: Configuration, workload, catalog) -> int:
    """Pages saved over the workload by adding ``s`` to ``config``."""
    if s in config:
        raise ValidationError(f"{s.id} is already in the configuration")
    before = workload_cost(workload, config, catalog).total
    return before - workload_cost(workload, config.with_(s), catalog).total


def _eligible(s, config: Configuration) -> bool:
    if isinstance(s, CandidateIndex) and s.on_view:
        return s.table in config.ids
    return True


def greedy_select(candidates, workload, catalog, budget_bytes: int,
                  start: Configuration | None = None, trace: list | None = None) -> Configuration:
    """Ascending benefit-per-byte greedy.

    ``budget_bytes`` bounds the bytes added on top of ``start``.  Ties on the
    ratio go to the larger benefit, then the smaller id.  Rounds are appended
    to ``trace`` when a list is given.
    """
    if not isinstance(budget_bytes, int) or budget_bytes <= 0:
        raise InvalidBudget(f"budget must be a positive number of bytes, got {budget_bytes}")
    config = start or Configuration()
    remaining = budget_bytes
    pool = {c.id: c for c in candidates if c.id not in config.ids}
    current = workload_cost(workload, config, catalog).total
    rounds = len(trace) if trace is not None else 0

    while True:
        best = None
        for cid in sorted(pool):
            s = pool[cid]
            if s.size_bytes > remaining or not _eligible(s, config):
                continue
            gain = current - workload_cost(workload, config.with_(s), catalog).total
            if gain <= 0:
                continue
            key = (Fraction(gain, s.size_bytes), gain)
            if best is None or key > best[0]:
                best = (key, s, gain)
        if best is None:
            break
        _, s, gain = best
        config = config.with_(s)
        remaining -= s.size_bytes
        current -= gain
        del pool[s.id]
        rounds += 1
        if trace is not None:
            trace.append(Round(rounds, s.id, gain, s.size_bytes, gain / s.size_bytes, remaining))
    return Configuration(config.structures, workload_cost=current)


def _flatten_views(views):
    out = []
    for v in views:
        out.append(v)
        out.extend(v.secondary_indexes)
    return out


def select(params: SelectionParams, index_candidates, view_candidates, workload, catalog,
           trace: list | None = None) -> Configuration:
    """Run one coupling strategy; all candidates must already be sized."""
    indexes = [c for c in index_candidates if not c.on_view]
    views = list(view_candidates)
    budget = params.budget_bytes

    def run(pool, limit, start=None):
        if limit <= 0:
            cfg = start or Configuration()
            return Configuration(cfg.structures,
                                 workload_cost=workload_cost(workload, cfg, catalog).total)
        return greedy_select(pool, workload, catalog, limit, start=start, trace=trace)

    if params.strategy == "joint":
        return run(indexes + _flatten_views(views), budget)
    if params.strategy == "views_only":
        return run(views, budget)
    if params.strategy == "indexes_only":
        return run(indexes, budget)
    if params.strategy == "mvfirst":
        first = run(views, int(params.alpha * budget))
        chosen = [s for s in first.structures if isinstance(s, CandidateView)]
        second_pool = indexes + [ix for v in chosen for ix in v.secondary_indexes]
        return run(second_pool, budget - first.total_size_bytes, start=first)
    # indfirst
    first = run(indexes, int((1 - params.alpha) * budget))
    return run(_flatten_views(views), budget - first.total_size_bytes, start=first)
