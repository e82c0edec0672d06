"""
From SQL workload to query-attribute matrix
============================================

Parse the bundled retail workload against its catalog and look at which
attributes each query touches.
"""
from dwadvisor import build_matrix, fixture_path, load_catalog, load_workload
from dwadvisor.workload import GROUP_BY, WHERE_RESTRICTION, ExtractionRuleSet

catalog = load_catalog(fixture_path("retail_catalog.json"))
print(catalog.fact.name, "->", [t.name for t in catalog.dimensions])

workload = load_workload(fixture_path("retail_workload.sql"), catalog)
q = workload[0]
print(q.sql)
print("restrictions:", q.restrictions)
print("group by:    ", q.group_by)
print("aggregates:  ", q.aggregates)

# one row per query, one column per attribute, 1 where the query uses it
m = build_matrix(workload)
print(m.attributes)
print(m.cells)

# switching off the join rule drops the key columns from the matrix
no_joins = build_matrix(workload, ExtractionRuleSet.only(WHERE_RESTRICTION, GROUP_BY))
print(no_joins.attributes)
