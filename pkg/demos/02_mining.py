"""
Frequent itemsets and query clusters
====================================

The two mining steps behind candidate generation: Apriori over the matrix
columns for indexes, average-link clustering over its rows for views.
"""
from dwadvisor import (build_matrix, cluster_queries, fixture_path, load_catalog, load_workload,
                       mine_frequent_itemsets)

catalog = load_catalog(fixture_path("retail_catalog.json"))
m = build_matrix(load_workload(fixture_path("retail_workload.sql"), catalog))

# attribute sets used together by at least a quarter of the queries
itemsets = mine_frequent_itemsets(m, minsup=0.25)
print(len(itemsets), "frequent itemsets")
for s in sorted(itemsets, key=lambda s: (-s.support, sorted(s.attributes)))[:8]:
    print(f"{s.support:.3f}", sorted(s.attributes))

# a higher threshold keeps only the common core
print(len(mine_frequent_itemsets(m, minsup=0.75)), "at minsup 0.75")

# queries that share most of their attributes end up together
for tau in (0.3, 0.5, 0.8):
    print(tau, [c.query_ids for c in cluster_queries(m, tau)])
