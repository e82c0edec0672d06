"""Candidate indexes and materialized views.

Frequent itemsets become bitmap join indexes and B-tree indexes; query
clusters become merged star-aggregate views, each with its own secondary
B-tree candidates.  Identifiers are derived from a structural description
so generation order never changes them.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace

from .catalog import Catalog, attribute_ref, split_attr
from .errors import EmptyCluster
from .workload import Aggregate, ParsedQuery

BTREE = "btree"
BITMAP_JOIN = "bitmap_join"


def _digest(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:10]


@dataclass(frozen=True)
class CandidateIndex:
    kind: str  # BTREE or BITMAP_JOIN
    table: str  # base table, or the view id for an index on a view
    key: tuple  # btree: ordered attributes; bitmap_join: (dimension attribute,)
    join_path: tuple = ()  # bitmap_join only: (fact fk attribute, dimension pk attribute)
    on_view: bool = False
    size_bytes: int | None = field(default=None, compare=False)

    @property
    def id(self) -> str:
        if self.kind == BITMAP_JOIN:
            return f"bj_{_digest('bj|' + self.key[0] + '|' + '|'.join(self.join_path))}"
        prefix = "vix" if self.on_view else "ix"
        return f"{prefix}_{_digest(prefix + '|' + self.table + '|' + ','.join(self.key))}"

    @property
    def label(self) -> str:
        if self.kind == BITMAP_JOIN:
            return f"bitmap_join({self.key[0]} via {self.join_path[0]})"
        return f"btree({self.table}: {', '.join(a.split('.', 1)[1] for a in self.key)})"


@dataclass(frozen=True)
class CandidateView:
    dimensions: frozenset  # attributes the view groups by
    aggregates: frozenset  # of Aggregate
    tables: frozenset
    source: tuple = field(default=(), compare=False)  # query ids of the source cluster
    secondary_indexes: tuple = field(default=(), compare=False)
    size_bytes: int | None = field(default=None, compare=False)

    kind = "view"

    @property
    def id(self) -> str:
        desc = "mv|" + ",".join(sorted(self.dimensions)) + "|" \
            + ",".join(sorted(str(a) for a in self.aggregates)) + "|" + ",".join(sorted(self.tables))
        return f"mv_{_digest(desc)}"

    @property
    def label(self) -> str:
        dims = ", ".join(sorted(self.dimensions)) or "-"
        aggs = ", ".join(sorted(str(a) for a in self.aggregates))
        return f"view(dims: {dims}; aggs: {aggs})"


def indexes_from_itemsets(itemsets, catalog: Catalog) -> set[CandidateIndex]:
    fact = catalog.fact.name
    out = set()
    for itemset in itemsets:
        attrs = sorted(itemset.attributes)
        for attr in attrs:
            table, _ = split_attr(attr)
            attribute_ref(catalog, attr)
            if catalog.table(table).kind == "dimension" and not catalog.is_key(attr):
                fk = catalog.fk_to(table)
                out.add(CandidateIndex(
                    BITMAP_JOIN, fact, (attr,),
                    join_path=(f"{fact}.{fk.column}", f"{fk.ref_table}.{fk.ref_column}")))
            out.add(CandidateIndex(BTREE, table, (attr,)))
        tables = {split_attr(a)[0] for a in attrs}
        if len(attrs) > 1 and len(tables) == 1:
            ordered = sorted(attrs, key=lambda a: (-attribute_ref(catalog, a).cardinality, a))
            out.add(CandidateIndex(BTREE, tables.pop(), tuple(ordered)))
    return out


def view_from_cluster(cluster, workload, catalog: Catalog) -> CandidateView:
    """Merge a cluster's queries into one view that answers all of them.

    Restrictions are lifted into grouping dimensions, AVG is stored as SUM
    plus COUNT(*), and every COUNT becomes COUNT(*) (no NULLs are modeled).
    """
    ids = set(cluster.query_ids)
    members = [q for q in workload if q.id in ids]
    if not members:
        raise EmptyCluster("cluster has no member queries")
    dims = set()
    aggs = {Aggregate("COUNT", "*")}
    tables = {catalog.fact.name}
    for q in members:
        dims.update(q.group_by)
        dims.update(p.attribute for p in q.restrictions)
        tables.update(q.tables)
        for a in q.aggregates:
            if a.func == "AVG":
                aggs.add(Aggregate("SUM", a.arg))
            elif a.func != "COUNT":
                aggs.add(a)
    for d in dims:
        attribute_ref(catalog, d)
        tables.add(split_attr(d)[0])
    view = CandidateView(frozenset(dims), frozenset(aggs), frozenset(tables),
                         source=tuple(sorted(ids)))
    return replace(view, secondary_indexes=tuple(indexes_on_view(view, workload)))


def indexes_on_view(view: CandidateView, workload) -> list[CandidateIndex]:
    ids = set(view.source)
    restricted = set()
    for q in workload:
        if q.id in ids:
            restricted.update(p.attribute for p in q.restrictions)
    return [CandidateIndex(BTREE, view.id, (a,), on_view=True)
            for a in sorted(restricted & view.dimensions)]


def can_answer(view: CandidateView, q: ParsedQuery) -> bool:
    if not q.tables <= view.tables:
        return False
    if not set(q.group_by) <= view.dimensions:
        return False
    if not {p.attribute for p in q.restrictions} <= view.dimensions:
        return False
    return all(_derivable(a, view.aggregates) for a in q.aggregates)


def _derivable(agg: Aggregate, stored) -> bool:
    count = Aggregate("COUNT", "*")
    if agg.func == "COUNT":
        return count in stored
    if agg.func == "AVG":
        return Aggregate("SUM", agg.arg) in stored and count in stored
    return agg in stored


def build_candidates(itemsets, clusters, workload, catalog: Catalog):
    """Index and view candidates for one workload, coalesced by identity.

    Returns ``(indexes, views)`` as lists sorted by id.  Views built from
    different clusters with the same structure keep the union of their
    secondary indexes.
    """
    indexes = sorted(indexes_from_itemsets(itemsets, catalog), key=lambda c: c.id)
    by_id: dict[str, CandidateView] = {}
    for cluster in clusters:
        v = view_from_cluster(cluster, workload, catalog)
        if v.id in by_id:
            old = by_id[v.id]
            merged = {ix.id: ix for ix in old.secondary_indexes + v.secondary_indexes}
            v = replace(old, source=tuple(sorted(set(old.source) | set(v.source))),
                        secondary_indexes=tuple(merged[k] for k in sorted(merged)))
        by_id[v.id] = v
    return indexes, [by_id[k] for k in sorted(by_id)]


# --------------------------------------------------------------------------
# DDL

def _col_alias(attr: str) -> str:
    return attr.replace(".", "__")


def _agg_alias(agg: Aggregate) -> str:
    if agg.arg == "*":
        return f"{agg.func.lower()}__star"
    return f"{agg.func.lower()}__{_col_alias(agg.arg)}"


def _join_conditions(tables, catalog: Catalog):
    fact = catalog.fact.name
    conds = []
    for t in sorted(tables):
        if t != fact:
            fk = catalog.fk_to(t)
            conds.append(f"{fact}.{fk.column} = {t}.{fk.ref_column}")
    return conds


def to_ddl(candidate, catalog: Catalog) -> str:
    if isinstance(candidate, CandidateView):
        dims = sorted(candidate.dimensions)
        aggs = sorted(candidate.aggregates, key=str)
        items = [f"{d} AS {_col_alias(d)}" for d in dims] + [f"{a} AS {_agg_alias(a)}" for a in aggs]
        fact = catalog.fact.name
        tables = [fact] + sorted(t for t in candidate.tables if t != fact)
        sql = (f"CREATE MATERIALIZED VIEW {candidate.id} AS SELECT {', '.join(items)} "
               f"FROM {', '.join(tables)}")
        conds = _join_conditions(candidate.tables, catalog)
        if conds:
            sql += " WHERE " + " AND ".join(conds)
        if dims:
            sql += " GROUP BY " + ", ".join(dims)
        return sql + ";"
    if candidate.kind == BITMAP_JOIN:
        attr = candidate.key[0]
        dim = split_attr(attr)[0]
        fk, pk = candidate.join_path
        return (f"CREATE BITMAP INDEX {candidate.id} ON {candidate.table}({attr}) "
                f"FROM {candidate.table}, {dim} WHERE {fk} = {pk};")
    if candidate.on_view:
        cols = ", ".join(_col_alias(a) for a in candidate.key)
    else:
        cols = ", ".join(split_attr(a)[1] for a in candidate.key)
    return f"CREATE INDEX {candidate.id} ON {candidate.table}({cols});"


def read_ddl(text: str) -> list[dict]:
    """Parse DDL emitted by :func:`to_ddl` back into structural descriptions.

    Each statement yields a dict with ``id`` and ``kind`` plus the fields
    needed to rebuild the candidate (``table``/``key``/``join_path`` for
    indexes, ``dimensions``/``aggregates``/``tables`` for views).
    """
    out = []
    for stmt in (s.strip() for s in text.split(";")):
        if not stmt:
            continue
        m = re.fullmatch(r"CREATE BITMAP INDEX (\w+) ON (\w+)\(([\w.]+)\) FROM (\w+), (\w+) "
                         r"WHERE ([\w.]+) = ([\w.]+)", stmt)
        if m:
            out.append({"id": m[1], "kind": BITMAP_JOIN, "table": m[2], "key": (m[3],),
                        "join_path": (m[6], m[7])})
            continue
        m = re.fullmatch(r"CREATE INDEX (\w+) ON (\w+)\(([\w, ]+)\)", stmt)
        if m:
            cols = [c.strip() for c in m[3].split(",")]
            on_view = m[1].startswith("vix_")
            key = tuple(c.replace("__", ".", 1) if on_view else f"{m[2]}.{c}" for c in cols)
            out.append({"id": m[1], "kind": BTREE, "table": m[2], "key": key, "on_view": on_view})
            continue
        m = re.fullmatch(r"CREATE MATERIALIZED VIEW (\w+) AS SELECT (.+?) FROM ([\w, ]+?)"
                         r"(?: WHERE (.+?))?(?: GROUP BY (.+))?", stmt)
        if m:
            dims, aggs = set(), set()
            for item in m[2].split(", "):
                expr = item.split(" AS ")[0]
                am = re.fullmatch(r"(SUM|COUNT|MIN|MAX|AVG)\(([\w.*]+)\)", expr)
                if am:
                    aggs.add(Aggregate(am[1], am[2]))
                else:
                    dims.add(expr)
            out.append({"id": m[1], "kind": "view", "dimensions": frozenset(dims),
                        "aggregates": frozenset(aggs),
                        "tables": frozenset(t.strip() for t in m[3].split(","))})
            continue
        raise ValueError(f"unrecognized DDL statement: {stmt[:60]}")
    return out
