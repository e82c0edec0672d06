"""Seeded generator of star-join aggregate workloads for desk-scale runs."""
from __future__ import annotations

import random

from .catalog import Catalog

_FUNCS = ("SUM", "COUNT", "MIN", "MAX", "AVG")


def _non_key_columns(catalog: Catalog, table):
    return [c for c in table.columns if not catalog.is_key(f"{table.name}.{c.name}")]


def _predicate(rng, ref, card):
    kind = rng.choice(("eq", "in", "range"))
    if kind == "eq" or card < 2:
        return f"{ref} = {rng.randrange(card)}"
    if kind == "in":
        values = sorted(rng.sample(range(card), min(card, rng.randint(2, 3))))
        return f"{ref} IN ({', '.join(str(v) for v in values)})"
    lo, hi = sorted(rng.sample(range(card), 2))
    return f"{ref} BETWEEN {lo} AND {hi}"


def generate_query(catalog: Catalog, rng: random.Random) -> str:
    fact = catalog.fact
    dims = list(catalog.dimensions)
    chosen = rng.sample(dims, rng.randint(0, min(3, len(dims))))
    alias = {fact.name: "f"}
    for k, d in enumerate(chosen, 1):
        alias[d.name] = f"d{k}"

    attrs = [(d, c) for d in chosen for c in _non_key_columns(catalog, d)]
    group = rng.sample(attrs, rng.randint(0, min(2, len(attrs))))
    restricted = rng.sample(attrs, rng.randint(0, min(2, len(attrs))))

    measures = _non_key_columns(catalog, fact) or [fact.column(fact.primary_key)]
    aggs = []
    for _ in range(rng.randint(1, 2)):
        func = rng.choice(_FUNCS)
        if func == "COUNT" and rng.random() < 0.5:
            item = "COUNT(*)"
        else:
            item = f"{func}(f.{rng.choice(measures).name})"
        if item not in aggs:
            aggs.append(item)

    select = [f"{alias[d.name]}.{c.name}" for d, c in group] + aggs
    joins = []
    for d in chosen:
        fk = catalog.fk_to(d.name)
        joins.append((d, f"f.{fk.column} = {alias[d.name]}.{fk.ref_column}"))
    preds = [_predicate(rng, f"{alias[d.name]}.{c.name}", c.cardinality) for d, c in restricted]

    if joins and rng.random() < 0.5:
        from_sql = f"{fact.name} f" + "".join(
            f" JOIN {d.name} {alias[d.name]} ON {cond}" for d, cond in joins)
        where = preds
    else:
        from_sql = ", ".join([f"{fact.name} f"] + [f"{d.name} {alias[d.name]}" for d in chosen])
        where = [cond for _, cond in joins] + preds

    sql = f"SELECT {', '.join(select)} FROM {from_sql}"
    if where:
        sql += " WHERE " + " AND ".join(where)
    if group:
        sql += " GROUP BY " + ", ".join(f"{alias[d.name]}.{c.name}" for d, c in group)
    return sql + ";"


def generate_workload(catalog: Catalog, n: int, seed: int = 0) -> str:
    """``n`` grammar-conformant queries as workload-file text; same seed, same bytes."""
    if n < 1:
        raise ValueError("query count must be at least 1")
    rng = random.Random(seed)
    lines = [f"-- generated workload: {n} queries, seed {seed}"]
    lines += [generate_query(catalog, rng) for _ in range(n)]
    return "\n".join(lines) + "\n"
