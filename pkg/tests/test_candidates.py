import random

import pytest
from hypothesis import given, settings, strategies as st

from dwadvisor.candidates import (
    BITMAP_JOIN, BTREE, CandidateIndex, CandidateView, build_candidates, can_answer,
    indexes_from_itemsets, indexes_on_view, read_ddl, to_ddl, view_from_cluster)
from dwadvisor.catalog import attribute_ref
from dwadvisor.errors import EmptyCluster
from dwadvisor.generator import generate_workload
from dwadvisor.miner import Itemset, QueryCluster, cluster_queries, mine_frequent_itemsets
from dwadvisor.tinydb import answer_from_view, answer_query, make_dataset, materialize_view
from dwadvisor.workload import Aggregate, build_matrix, parse_query, parse_workload


def itemset(*attrs):
    return Itemset(frozenset(attrs), 1.0, 1)


def described(indexes):
    return {(ix.kind, ix.table, ix.key) for ix in indexes}


def test_bitmap_and_btree_from_dimension_attribute(catalog):
    got = indexes_from_itemsets([itemset("date.year")], catalog)
    assert described(got) == {(BITMAP_JOIN, "sales", ("date.year",)), (BTREE, "date", ("date.year",))}
    bj = next(ix for ix in got if ix.kind == BITMAP_JOIN)
    assert bj.join_path == ("sales.date_id", "date.date_id")


def test_key_attribute_gets_btree_only(catalog):
    got = indexes_from_itemsets([itemset("product.product_id")], catalog)
    assert described(got) == {(BTREE, "product", ("product.product_id",))}
    got = indexes_from_itemsets([itemset("sales.product_id")], catalog)
    assert described(got) == {(BTREE, "sales", ("sales.product_id",))}


def test_composite_btree_ordered_by_cardinality(catalog):
    got = indexes_from_itemsets([itemset("date.year", "date.month")], catalog)
    assert (BTREE, "date", ("date.month", "date.year")) in described(got)
    assert len(got) == 5  # two bitmaps, two single btrees, one composite


def test_multi_table_itemset_has_no_composite(catalog):
    got = indexes_from_itemsets([itemset("date.year", "product.category")], catalog)
    assert all(len(ix.key) == 1 for ix in got)


def test_candidates_coalesced_and_order_independent(catalog, workload):
    sets = list(mine_frequent_itemsets(build_matrix(workload), 0.25))
    a = indexes_from_itemsets(sets, catalog)
    random.Random(3).shuffle(sets)
    b = indexes_from_itemsets(sets, catalog)
    assert a == b
    assert len({ix.id for ix in a}) == len(a)


def test_view_from_single_query(catalog, fixture_query):
    v = view_from_cluster(QueryCluster((0,), frozenset()), [fixture_query], catalog)
    assert v.dimensions == {"product.category", "date.year"}
    assert v.aggregates == {Aggregate("SUM", "sales.amount"), Aggregate("COUNT", "*")}
    assert v.tables == {"sales", "product", "date"}
    assert [ix.key for ix in v.secondary_indexes] == [("date.year",)]
    assert v.secondary_indexes[0].table == v.id


def test_view_merge_is_union(catalog):
    qs = parse_workload(
        "SELECT p.category, COUNT(*) FROM sales s, product p WHERE s.product_id = p.product_id "
        "GROUP BY p.category; SELECT c.region, AVG(s.amount) FROM sales s, customer c "
        "WHERE s.customer_id = c.customer_id GROUP BY c.region;", catalog)
    v = view_from_cluster(QueryCluster((0, 1), frozenset()), qs, catalog)
    assert v.dimensions == {"product.category", "customer.region"}
    assert v.aggregates == {Aggregate("SUM", "sales.amount"), Aggregate("COUNT", "*")}
    assert all(a.func != "AVG" for a in v.aggregates)
    assert indexes_on_view(v, qs) == []


def test_empty_cluster(catalog, workload):
    with pytest.raises(EmptyCluster):
        view_from_cluster(QueryCluster((99,), frozenset()), workload, catalog)


def test_two_restricted_dimensions_two_secondaries(catalog):
    qs = parse_workload(
        "SELECT COUNT(*) FROM sales s, date d WHERE s.date_id = d.date_id AND d.year = 1;"
        "SELECT COUNT(*) FROM sales s, product p WHERE s.product_id = p.product_id AND p.category = 'x';",
        catalog)
    v = view_from_cluster(QueryCluster((0, 1), frozenset()), qs, catalog)
    assert sorted(ix.key for ix in v.secondary_indexes) == [("date.year",), ("product.category",)]


def test_can_answer(catalog, fixture_query):
    v = view_from_cluster(QueryCluster((0,), frozenset()), [fixture_query], catalog)
    assert can_answer(v, fixture_query)
    narrow = CandidateView(frozenset({"product.category"}), v.aggregates, v.tables)
    grouped = parse_query("SELECT p.category, d.year, SUM(s.amount) FROM sales s, product p, date d "
                          "WHERE s.product_id = p.product_id AND s.date_id = d.date_id "
                          "GROUP BY p.category, d.year", catalog)
    assert not can_answer(narrow, grouped)
    avg = parse_query("SELECT p.category, AVG(s.amount), COUNT(s.quantity) FROM sales s, product p "
                      "WHERE s.product_id = p.product_id GROUP BY p.category", catalog)
    assert can_answer(v, avg)
    mx = parse_query("SELECT MAX(s.amount) FROM sales s", catalog)
    assert not can_answer(v, mx)
    other_table = parse_query("SELECT SUM(s.amount) FROM sales s, customer c "
                              "WHERE s.customer_id = c.customer_id", catalog)
    assert not can_answer(v, other_table)


def test_build_candidates_merges_duplicate_views(catalog):
    qs = parse_workload(
        "SELECT COUNT(*) FROM sales s, date d WHERE s.date_id = d.date_id AND d.year = 1;"
        "SELECT d.year, COUNT(*) FROM sales s, date d WHERE s.date_id = d.date_id GROUP BY d.year;",
        catalog)
    clusters = [QueryCluster((0,), frozenset()), QueryCluster((1,), frozenset())]
    _, views = build_candidates([], clusters, qs, catalog)
    assert len(views) == 1
    assert views[0].source == (0, 1)
    assert len(views[0].secondary_indexes) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 20), st.sampled_from([0.2, 0.5, 0.8]))
def test_coverage_by_construction(catalog, seed, n, tau):
    qs = parse_workload(generate_workload(catalog, n, seed), catalog)
    for cluster in cluster_queries(build_matrix(qs), tau):
        v = view_from_cluster(cluster, qs, catalog)
        for q in qs:
            if q.id in cluster.query_ids:
                assert can_answer(v, q)
        for d in v.dimensions:
            attribute_ref(catalog, d)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12))
def test_rollup_answers_match_base_tables(tiny_catalog, seed, n):
    qs = parse_workload(generate_workload(tiny_catalog, n, seed), tiny_catalog)
    data = make_dataset(tiny_catalog, seed=seed)
    for cluster in cluster_queries(build_matrix(qs), 0.3):
        v = view_from_cluster(cluster, qs, tiny_catalog)
        rows = materialize_view(v, data, tiny_catalog)
        for q in qs:
            if q.id in cluster.query_ids:
                assert answer_from_view(q, rows) == answer_query(q, data, tiny_catalog)


def test_ddl_round_trip(catalog, workload):
    sets = mine_frequent_itemsets(build_matrix(workload), 0.25)
    indexes, views = build_candidates(sets, cluster_queries(build_matrix(workload), 0.5), workload, catalog)
    structures = indexes + [s for v in views for s in (v, *v.secondary_indexes)]
    text = "\n".join(to_ddl(s, catalog) for s in structures)
    parsed = read_ddl(text)
    assert len(parsed) == len(structures)
    for s, d in zip(structures, parsed):
        assert d["id"] == s.id
        if isinstance(s, CandidateView):
            assert (d["dimensions"], d["aggregates"], d["tables"]) == (s.dimensions, s.aggregates, s.tables)
        else:
            assert (d["kind"], d["table"], d["key"]) == (s.kind, s.table, s.key)
            rebuilt = CandidateIndex(d["kind"], d["table"], d["key"],
                                     join_path=d.get("join_path", ()), on_view=d.get("on_view", False))
            assert rebuilt.id == s.id


def test_ddl_templates(catalog, fixture_query):
    bj = next(ix for ix in indexes_from_itemsets([itemset("date.year")], catalog) if ix.kind == BITMAP_JOIN)
    assert to_ddl(bj, catalog) == (
        f"CREATE BITMAP INDEX {bj.id} ON sales(date.year) FROM sales, date "
        "WHERE sales.date_id = date.date_id;")
    v = view_from_cluster(QueryCluster((0,), frozenset()), [fixture_query], catalog)
    assert to_ddl(v, catalog) == (
        f"CREATE MATERIALIZED VIEW {v.id} AS SELECT date.year AS date__year, "
        "product.category AS product__category, COUNT(*) AS count__star, "
        "SUM(sales.amount) AS sum__sales__amount FROM sales, date, product "
        "WHERE sales.date_id = date.date_id AND sales.product_id = product.product_id "
        "GROUP BY date.year, product.category;")
    assert to_ddl(v.secondary_indexes[0], catalog) == \
        f"CREATE INDEX {v.secondary_indexes[0].id} ON {v.id}(date__year);"
