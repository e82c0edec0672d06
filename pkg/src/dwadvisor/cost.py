"""Optimizer-independent cost models.

Storage is measured in bytes and access cost in pages read.  The formulas:

* bitmap join index: ``ceil(|F| * card(attr) / 8)`` bytes
* B-tree on table T with key width k: ``|T| * (k + 8)`` bytes
* view: ``min(prod card(dims), |F|)`` rows of ``sum dim widths + 8 per aggregate``
* selectivity: ``1/card`` (equality), ``k/card`` (IN list), ``1/3`` (range),
  multiplied across predicates (independence)

A query is priced as the cheapest applicable plan among a full star-join
scan, a bitmap-join plan, reading an answering view, and probing a
secondary index on an answering view.  A bitmap plan ANDs the bitmaps of any
non-empty subset of the query's restricted attributes, fetches the surviving
fact pages, then joins only the dimensions the rest of the query still
touches; the cheapest subset wins.  B-tree candidates never lower a
query's cost; they are carried for DDL output only.
"""
from __future__ import annotations

import csv
import io
import math
from itertools import combinations
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .candidates import BITMAP_JOIN, CandidateIndex, CandidateView, can_answer
from .catalog import Catalog, attribute_ref, split_attr, table_pages
from .errors import UnsizedStructure, ValidationError
from .workload import ParsedQuery, Predicate

AGGREGATE_WIDTH = 8
POINTER_WIDTH = 8
RANGE_SELECTIVITY = 1 / 3

SCAN, BITMAP, BTREE_PLAN, VIEW, VIEW_INDEX = "scan", "bitmap", "btree", "view", "view+index"
# lower rank wins a tie on cost
PLAN_RANK = {VIEW_INDEX: 0, VIEW: 1, BITMAP: 2, BTREE_PLAN: 3, SCAN: 4}


def index_size(ix: CandidateIndex, catalog: Catalog, view: CandidateView | None = None) -> int:
    if ix.kind == BITMAP_JOIN:
        card = attribute_ref(catalog, ix.key[0]).cardinality
        return math.ceil(catalog.fact.row_count * card / 8)
    key_width = sum(attribute_ref(catalog, a).width_bytes for a in ix.key)
    if ix.on_view:
        if view is None or view.id != ix.table:
            raise ValidationError(f"index {ix.id} needs its view {ix.table} to be sized")
        rows = view_rows(view, catalog)
    else:
        rows = catalog.table(ix.table).row_count
    return rows * (key_width + POINTER_WIDTH)


def view_rows(v: CandidateView, catalog: Catalog) -> int:
    rows = math.prod(attribute_ref(catalog, d).cardinality for d in v.dimensions)
    return min(rows, catalog.fact.row_count)


def view_size(v: CandidateView, catalog: Catalog) -> int:
    width = sum(attribute_ref(catalog, d).width_bytes for d in v.dimensions)
    width += AGGREGATE_WIDTH * len(v.aggregates)
    return view_rows(v, catalog) * width


def sized(candidate, catalog: Catalog):
    """Copy of ``candidate`` with ``size_bytes`` filled (views: secondaries too)."""
    if isinstance(candidate, CandidateView):
        v = replace(candidate, size_bytes=view_size(candidate, catalog))
        secondaries = tuple(replace(ix, size_bytes=index_size(ix, catalog, v))
                            for ix in candidate.secondary_indexes)
        return replace(v, secondary_indexes=secondaries)
    return replace(candidate, size_bytes=index_size(candidate, catalog))


def pages(size_bytes: int, catalog: Catalog) -> int:
    return max(1, math.ceil(size_bytes / catalog.page_size_bytes))


def selectivity(p: Predicate, catalog: Catalog) -> float:
    if p.op == "range":
        return RANGE_SELECTIVITY
    card = attribute_ref(catalog, p.attribute).cardinality
    if p.op == "in":
        return min(1.0, len(set(p.values)) / card)
    return 1 / card


def _selectivity_of(preds, catalog):
    return math.prod(selectivity(p, catalog) for p in preds)


@dataclass(frozen=True)
class Configuration:
    structures: tuple = ()  # sized candidates
    workload_cost: int | None = field(default=None, compare=False)

    def __post_init__(self):
        view_ids = {s.id for s in self.structures if isinstance(s, CandidateView)}
        for s in self.structures:
            if isinstance(s, CandidateIndex) and s.on_view and s.table not in view_ids:
                raise ValidationError(f"secondary index {s.id} present without its view {s.table}")

    @property
    def ids(self) -> frozenset:
        return frozenset(s.id for s in self.structures)

    @property
    def total_size_bytes(self) -> int:
        return sum(_size(s) for s in self.structures)

    def __contains__(self, candidate) -> bool:
        return candidate.id in self.ids

    def with_(self, candidate) -> "Configuration":
        return Configuration(self.structures + (candidate,))


def _size(s) -> int:
    if s.size_bytes is None:
        raise UnsizedStructure(f"{s.id} has no size; pass candidates through sized()")
    return s.size_bytes


class QueryPlan(NamedTuple):
    query_id: int
    plan: str
    pages: int
    used: tuple  # structure ids


@dataclass(frozen=True)
class CostBreakdown:
    queries: tuple  # of QueryPlan, workload order

    @property
    def total(self) -> int:
        return sum(p.pages for p in self.queries)

    def to_text(self) -> str:
        lines = [f"{'query':>5}  {'plan':<10}  {'pages':>8}  structures"]
        for p in self.queries:
            lines.append(f"{p.query_id:>5}  {p.plan:<10}  {p.pages:>8}  {' '.join(p.used) or '-'}")
        lines.append(f"{'total':>5}  {'':<10}  {self.total:>8}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query", "plan", "pages", "structures"])
        for p in self.queries:
            w.writerow([p.query_id, p.plan, p.pages, " ".join(p.used)])
        w.writerow(["total", "", self.total, ""])
        return buf.getvalue()


class _Lookup:
    """Per-configuration indexes over the structures, built once per evaluation."""

    def __init__(self, config: Configuration, catalog: Catalog):
        self.bitmaps = {}
        self.views = []
        self.view_indexes = {}
        for s in config.structures:
            _size(s)
            if isinstance(s, CandidateView):
                self.views.append(s)
            elif s.kind == BITMAP_JOIN:
                self.bitmaps[s.key[0]] = s
            elif s.on_view:
                self.view_indexes.setdefault(s.table, []).append(s)


def _plans(q: ParsedQuery, look: _Lookup, catalog: Catalog):
    fact = catalog.fact
    fact_pages = table_pages(catalog, fact.name)
    yield SCAN, fact_pages + sum(table_pages(catalog, t) for t in q.tables if t != fact.name), ()

    restricted = q.restriction_attributes
    covered = [a for a in restricted if a in look.bitmaps]
    if covered:
        needed = {split_attr(a)[0] for a in q.group_by}
        needed |= {split_attr(a.arg)[0] for a in q.aggregates if a.arg != "*"}
        for k in range(1, len(covered) + 1):
            for subset in combinations(covered, k):
                used = [look.bitmaps[a] for a in subset]
                sel = _selectivity_of([p for p in q.restrictions if p.attribute in subset], catalog)
                joined = needed | {split_attr(a)[0] for a in restricted if a not in subset}
                joined.discard(fact.name)
                cost = (sum(pages(b.size_bytes, catalog) for b in used)
                        + math.ceil(sel * fact_pages)
                        + sum(table_pages(catalog, t) for t in joined))
                yield BITMAP, cost, tuple(b.id for b in used)

    for v in look.views:
        if not can_answer(v, q):
            continue
        vpages = pages(v.size_bytes, catalog)
        yield VIEW, vpages, (v.id,)
        for ix in look.view_indexes.get(v.id, ()):
            attr = ix.key[0]
            if attr in restricted:
                sel = _selectivity_of([p for p in q.restrictions if p.attribute == attr], catalog)
                yield VIEW_INDEX, math.ceil(sel * vpages) + 1, (v.id, ix.id)


def _best(q, look, catalog) -> QueryPlan:
    plan, cost, used = min(_plans(q, look, catalog), key=lambda p: (p[1], PLAN_RANK[p[0]], p[2]))
    return QueryPlan(q.id, plan, cost, used)


def query_cost(q: ParsedQuery, config: Configuration, catalog: Catalog) -> QueryPlan:
    return _best(q, _Lookup(config, catalog), catalog)


def workload_cost(workload, config: Configuration, catalog: Catalog) -> CostBreakdown:
    look = _Lookup(config, catalog)
    return CostBreakdown(tuple(_best(q, look, catalog) for q in workload))
