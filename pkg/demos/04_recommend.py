"""
Recommending under a storage budget
===================================

Run the whole pipeline with each coupling strategy and compare the
configurations they settle on.
"""
from dwadvisor import fixture_path, load_catalog, load_workload, recommend
from dwadvisor.selector import STRATEGIES

catalog = load_catalog(fixture_path("retail_catalog.json"))
workload = load_workload(fixture_path("retail_workload.sql"), catalog)

rec = recommend(workload, catalog, budget_bytes=1 << 20)
print(rec.to_text())
for r in rec.trace:
    print(r)

# with a lopsided split (10% to views) the sequenced strategies fall behind
budget = 45_000
print(f"{'strategy':<13} {'cost':>6} {'bytes':>7}  structures")
for strategy in STRATEGIES:
    r = recommend(workload, catalog, budget, strategy=strategy, alpha=0.1)
    ids = " ".join(s.id for s in r.configuration.structures) or "-"
    print(f"{strategy:<13} {r.final.total:>6} {r.configuration.total_size_bytes:>7}  {ids}")

# the report is deterministic JSON, ready to hand back to `dwadvisor explain`
print(rec.to_json()[:400])
