"""
Candidates and what they cost
=============================

Build index and view candidates for the retail workload, then price the
first query under a few hand-picked configurations.
"""
from dwadvisor import Configuration, fixture_path, generate_candidates, load_catalog, load_workload
from dwadvisor import query_cost, workload_cost

catalog = load_catalog(fixture_path("retail_catalog.json"))
workload = load_workload(fixture_path("retail_workload.sql"), catalog)
cands = generate_candidates(workload, catalog)

for ix in cands.indexes:
    print(f"{ix.id}  {ix.size_bytes:>9} B  {ix.label}")
for v in cands.views:
    print(f"{v.id}  {v.size_bytes:>9} B  {v.label}  answers {v.source}")

q = workload[0]
print(q.sql)
print("no structures:", query_cost(q, Configuration(), catalog))

bitmaps = [ix for ix in cands.indexes if ix.kind == "bitmap_join"]
year = next(ix for ix in bitmaps if ix.key == ("date.year",))
print("year bitmap:  ", query_cost(q, Configuration((year,)), catalog))

view = next(v for v in cands.views if 0 in v.source)
print("view:         ", query_cost(q, Configuration((view,)), catalog))

# whole-workload breakdown with every bitmap in place
print(workload_cost(workload, Configuration(tuple(bitmaps)), catalog).to_text())
