"""Acceptance criteria, one PASS/FAIL line each in the terminal summary.

Every tolerance here is exact unless a runtime bound is stated.
"""
import json
import random
import time
from itertools import combinations

import numpy as np

from dwadvisor import fixture_path
from dwadvisor.candidates import CandidateIndex, CandidateView, can_answer, view_from_cluster
from dwadvisor.cli import main
from dwadvisor.cost import Configuration, query_cost, workload_cost
from dwadvisor.generator import generate_workload
from dwadvisor.miner import cluster_queries, mine_frequent_itemsets
from dwadvisor.pipeline import generate_candidates, recommend
from dwadvisor.selector import STRATEGIES, SelectionParams, greedy_select, select
from dwadvisor.tinydb import answer_from_view, answer_query, make_dataset, materialize_view
from dwadvisor.workload import QueryAttributeMatrix, build_matrix, parse_workload

from oracles import (
    brute_force_itemsets, cost_relevant_pool, exhaustive_best, random_nested_configs, seeded_instance)

N_MATRICES = 60
N_SEEDED = 50


def _report(record, number, ok, detail):
    record(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
    return ok


def _random_matrix(rng):
    nq, na = rng.randint(1, 10), rng.randint(1, 12)
    density = rng.uniform(0.2, 0.8)
    cells = np.array([[rng.random() < density for _ in range(na)] for _ in range(nq)], dtype=np.uint8)
    attrs = tuple(f"t.a{j:02d}" for j in range(na))
    return QueryAttributeMatrix(tuple(range(nq)), attrs, cells)


def _mining_corpus():
    rng = random.Random(2024)
    return [(_random_matrix(rng), rng.choice([0.1, 0.2, 0.25, 0.34, 0.5, 0.75, 1.0]))
            for _ in range(N_MATRICES)]


def _rows(m):
    return [{a for a, bit in zip(m.attributes, row) if bit} for row in m.cells]


def test_criterion_1_mining_matches_brute_force(record):
    start = time.perf_counter()
    mismatches = 0
    for m, minsup in _mining_corpus():
        mined = {i.attributes: i.count for i in mine_frequent_itemsets(m, minsup)}
        supports_ok = all(abs(i.support - i.count / len(m.queries)) < 1e-12
                          for i in mine_frequent_itemsets(m, minsup))
        if mined != brute_force_itemsets(_rows(m), m.attributes, minsup) or not supports_ok:
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 10
    assert _report(record, 1, ok, f"{N_MATRICES} matrices, {mismatches} mismatches, {elapsed:.2f} s (< 10 s)")


def test_criterion_2_downward_closure(record):
    violations = 0
    for m, minsup in _mining_corpus():
        found = {i.attributes: i.count for i in mine_frequent_itemsets(m, minsup)}
        for items, count in found.items():
            for sub in combinations(items, len(items) - 1):
                if sub and (frozenset(sub) not in found or found[frozenset(sub)] < count):
                    violations += 1
    assert _report(record, 2, violations == 0, f"{N_MATRICES} matrices, {violations} violations")


def test_criterion_3_view_coverage(record, catalog):
    failures = checked = 0
    for seed in range(100):
        n = 1 + seed % 20
        qs = parse_workload(generate_workload(catalog, n, seed), catalog)
        for tau in (0.3, 0.5, 0.8):
            for cluster in cluster_queries(build_matrix(qs), tau):
                v = view_from_cluster(cluster, qs, catalog)
                for qid in cluster.query_ids:
                    checked += 1
                    failures += not can_answer(v, qs[qid])
    assert _report(record, 3, failures == 0,
                   f"100 workloads (n <= 20), {checked} member queries, {failures} failures")


def test_criterion_4_rollup_correctness(record, tiny_catalog):
    failures = checked = 0
    for seed in range(30):
        qs = parse_workload(generate_workload(tiny_catalog, 1 + seed % 12, seed), tiny_catalog)
        data = make_dataset(tiny_catalog, seed=seed)
        for tau in (0.2, 0.5):
            for cluster in cluster_queries(build_matrix(qs), tau):
                v = view_from_cluster(cluster, qs, tiny_catalog)
                rows = materialize_view(v, data, tiny_catalog)
                for qid in cluster.query_ids:
                    checked += 1
                    failures += answer_from_view(qs[qid], rows) != answer_query(qs[qid], data, tiny_catalog)
    assert _report(record, 4, failures == 0,
                   f"100 fact rows, {checked} member queries answered from views, {failures} mismatches")


def test_criterion_5_monotonicity(record, catalog):
    violations = instances = 0
    for seed in range(100):
        rng = random.Random(seed)
        qs = parse_workload(generate_workload(catalog, rng.randint(1, 12), seed), catalog)
        cands = generate_candidates(qs, catalog, minsup=0.2, tau=0.4)
        for _ in range(10):
            small, big = random_nested_configs(cands, rng)
            instances += 1
            if workload_cost(qs, big, catalog).total > workload_cost(qs, small, catalog).total:
                violations += 1
    assert _report(record, 5, violations == 0 and instances == 1000,
                   f"{instances} nested pairs, {violations} violations")


def _violations(config, budget):
    bad = int(config.total_size_bytes > budget)
    views = {s.id for s in config.structures if isinstance(s, CandidateView)}
    bad += sum(1 for s in config.structures
               if isinstance(s, CandidateIndex) and s.on_view and s.table not in views)
    return bad


def test_criterion_6_budget_and_dependency(record, catalog, workload):
    runs = violations = 0
    cases = []
    fixture_cands = generate_candidates(workload, catalog)
    for budget in (1, 1000, 65_536, 300_000, 1 << 20, 8 << 20):
        cases.append((workload, fixture_cands, budget))
    for seed in range(N_SEEDED):
        qs, cands, pool, budget = seeded_instance(catalog, seed)
        cases.append((qs, cands, budget))
    for qs, cands, budget in cases:
        for strategy in STRATEGIES:
            for alpha in (0.0, 0.3, 0.5, 1.0):
                config = select(SelectionParams(budget, strategy, alpha), cands.indexes, cands.views,
                                qs, catalog)
                runs += 1
                violations += _violations(config, budget)
    assert _report(record, 6, violations == 0,
                   f"fixture + {N_SEEDED} seeded instances, {runs} runs, {violations} violations")


def test_criterion_7_greedy_vs_exhaustive(record, catalog, workload, fixture_query):
    # single-query fixture: every cost-relevant candidate, a sweep of budgets
    single = [fixture_query]
    pool = cost_relevant_pool(generate_candidates(single, catalog))
    assert len(pool) <= 12
    single_ok = True
    for budget in (100, 1080, 5000, 40_000, 200_000, 1 << 20):
        greedy = greedy_select(pool, single, catalog, budget).workload_cost
        single_ok &= greedy == exhaustive_best(pool, single, catalog, budget)[0]

    ratios = []
    fixture_pool = cost_relevant_pool(generate_candidates(workload, catalog))
    assert len(fixture_pool) <= 12
    for budget in (1000, 40_000, 100_000, 200_000, 1 << 20):
        greedy = greedy_select(fixture_pool, workload, catalog, budget).workload_cost
        ratios.append(greedy / exhaustive_best(fixture_pool, workload, catalog, budget)[0])
    for seed in range(N_SEEDED):
        qs, _, pool, budget = seeded_instance(catalog, seed)
        greedy = greedy_select(pool, qs, catalog, budget).workload_cost
        ratios.append(greedy / exhaustive_best(pool, qs, catalog, budget)[0])
    worst = max(ratios)
    ok = single_ok and worst <= 2
    assert _report(record, 7, ok,
                   f"single-query fixture {'equal' if single_ok else 'NOT equal'} to optimum; "
                   f"{len(ratios)} instances, worst greedy/optimum ratio {worst:.4f} (<= 2)")


def test_criterion_8_end_to_end_fixture(record, catalog, workload, fixture_query, fixture_view):
    start = time.perf_counter()
    rec = recommend(workload, catalog, 1 << 20)
    elapsed = time.perf_counter() - start
    bitmaps = {ix.key: ix for ix in rec.candidates.indexes if ix.kind == "bitmap_join"}
    first = rec.candidates.by_id()[rec.trace[0].candidate_id]
    checks = {
        "baseline 494": query_cost(fixture_query, Configuration(), catalog).pages == 494,
        "view 1080 B": fixture_view.size_bytes == 1080,
        "bitmap 37500 B": bitmaps[("date.year",)].size_bytes == 37500,
        "view picked first": isinstance(first, CandidateView),
        "runtime < 1 s": elapsed < 1,
    }
    failed = [k for k, v in checks.items() if not v]
    assert _report(record, 8, not failed,
                   f"{', '.join(checks)}; {elapsed:.3f} s" + (f"; failed: {failed}" if failed else ""))


def test_criterion_9_deterministic_json(record, tmp_path):
    cat, wl = str(fixture_path("retail_catalog.json")), str(fixture_path("retail_workload.sql"))
    outputs = []
    for run in ("a", "b"):
        out_dir = tmp_path / run
        assert main(["recommend", "--catalog", cat, "--workload", wl, "--budget", "1M",
                     "--out-dir", str(out_dir), "--format", "json"]) == 0
        outputs.append((out_dir / "report.json").read_bytes())
    same = outputs[0] == outputs[1]
    json.loads(outputs[0])
    assert _report(record, 9, same, f"two recommend runs, {len(outputs[0])} bytes, identical={same}")
