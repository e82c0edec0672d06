"""A tiny in-memory star dataset for checking view answers exactly.

Rows are plain dicts.  Queries are evaluated two ways: directly over the
star join of base tables, and by re-aggregating the rows of a materialized
candidate view.  Both return ``{group key tuple: tuple of aggregate values}``
with AVG as an exact :class:`~fractions.Fraction`.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .candidates import CandidateView
from .catalog import Catalog, split_attr
from .cost import AGGREGATE_WIDTH
from .workload import Aggregate, ParsedQuery

_REDUCERS = {"SUM": sum, "MIN": min, "MAX": max}


def make_dataset(catalog: Catalog, seed: int = 0, fact_rows: int | None = None,
                 value_range: int = 100) -> dict:
    """Random rows for every table.

    Dimension keys run ``0..row_count-1``; other columns draw from
    ``range(cardinality)``.  Fact foreign keys draw uniformly from the
    referenced keys and measures from ``range(min(cardinality, value_range))``.
    """
    rng = random.Random(seed)
    data = {}
    for t in catalog.dimensions:
        rows = []
        for i in range(t.row_count):
            rows.append({c.name: i if c.name == t.primary_key else rng.randrange(c.cardinality)
                         for c in t.columns})
        data[t.name] = rows
    fact = catalog.fact
    fks = {fk.column: fk for fk in fact.foreign_keys}
    rows = []
    for i in range(fact_rows if fact_rows is not None else fact.row_count):
        row = {}
        for c in fact.columns:
            if c.name == fact.primary_key:
                row[c.name] = i
            elif c.name in fks:
                row[c.name] = rng.randrange(catalog.table(fks[c.name].ref_table).row_count)
            else:
                row[c.name] = rng.randrange(min(c.cardinality, value_range))
        rows.append(row)
    data[fact.name] = rows
    return data


def star_join(data: dict, catalog: Catalog, tables) -> list[dict]:
    """Fact rows joined to the given dimensions; keys are ``table.column``."""
    fact = catalog.fact
    lookups = {}
    for t in tables:
        if t == fact.name:
            continue
        fk = catalog.fk_to(t)
        lookups[t] = (fk.column, {r[fk.ref_column]: r for r in data[t]})
    out = []
    for frow in data[fact.name]:
        row = {f"{fact.name}.{k}": v for k, v in frow.items()}
        ok = True
        for t, (col, index) in lookups.items():
            drow = index.get(frow[col])
            if drow is None:
                ok = False
                break
            row.update({f"{t}.{k}": v for k, v in drow.items()})
        if ok:
            out.append(row)
    return out


def _matches(row, predicates) -> bool:
    for p in predicates:
        v = row[p.attribute]
        if p.op == "eq" and v != p.values[0]:
            return False
        if p.op == "in" and v not in p.values:
            return False
        if p.op == "range" and not p.values[0] <= v <= p.values[1]:
            return False
    return True


def _empty_result(aggregates):
    return tuple(0 if a.func == "COUNT" else None for a in aggregates)


def answer_query(q: ParsedQuery, data: dict, catalog: Catalog) -> dict:
    rows = [r for r in star_join(data, catalog, q.tables) if _matches(r, q.restrictions)]
    for a, b in q.join_edges:
        rows = [r for r in rows if r[a] == r[b]]
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault(tuple(r[g] for g in q.group_by), []).append(r)
    if not groups and not q.group_by:
        return {(): _empty_result(q.aggregates)}
    result = {}
    for key, members in groups.items():
        values = []
        for a in q.aggregates:
            if a.func == "COUNT":
                values.append(len(members))
                continue
            col = [r[a.arg] for r in members]
            if a.func == "AVG":
                values.append(Fraction(sum(col), len(col)))
            else:
                values.append(_REDUCERS[a.func](col))
        result[key] = tuple(values)
    return result


def materialize_view(v: CandidateView, data: dict, catalog: Catalog) -> list[dict]:
    """Rows of ``v``: one per dimension-value combination present in the data."""
    dims = sorted(v.dimensions)
    groups: dict[tuple, list] = {}
    for r in star_join(data, catalog, v.tables):
        groups.setdefault(tuple(r[d] for d in dims), []).append(r)
    out = []
    for key, members in groups.items():
        row = dict(zip(dims, key))
        for a in v.aggregates:
            if a.func == "COUNT":
                row[a] = len(members)
            else:
                col = [m[a.arg] for m in members]
                row[a] = _REDUCERS[a.func](col)
        out.append(row)
    return out


def answer_from_view(q: ParsedQuery, view_rows: list[dict]) -> dict:
    count = Aggregate("COUNT", "*")
    rows = [r for r in view_rows if _matches(r, q.restrictions)]
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault(tuple(r[g] for g in q.group_by), []).append(r)
    if not groups and not q.group_by:
        return {(): _empty_result(q.aggregates)}
    result = {}
    for key, members in groups.items():
        values = []
        for a in q.aggregates:
            if a.func == "COUNT":
                values.append(sum(m[count] for m in members))
            elif a.func == "SUM":
                values.append(sum(m[a] for m in members))
            elif a.func == "MIN":
                values.append(min(m[a] for m in members))
            elif a.func == "MAX":
                values.append(max(m[a] for m in members))
            else:
                total = sum(m[Aggregate("SUM", a.arg)] for m in members)
                values.append(Fraction(total, sum(m[count] for m in members)))
        result[key] = tuple(values)
    return result


def view_row_width(v: CandidateView, catalog: Catalog) -> int:
    width = 0
    for d in v.dimensions:
        t, c = split_attr(d)
        width += catalog.table(t).column(c).width_bytes
    return width + AGGREGATE_WIDTH * len(v.aggregates)
