import pytest

from dwadvisor import fixture_path, load_catalog, load_workload
from dwadvisor.candidates import BITMAP_JOIN, indexes_from_itemsets, view_from_cluster
from dwadvisor.catalog import catalog_from_dict
from dwadvisor.cost import sized
from dwadvisor.miner import Itemset, QueryCluster

ACCEPTANCE_LOG = []


def tiny_catalog_dict():
    """A star small enough to materialize: 100 fact rows, three small dimensions."""
    return {
        "page_size_bytes": 256,
        "tables": [
            {"name": "f", "kind": "fact", "row_count": 100, "primary_key": "id",
             "foreign_keys": [{"column": "a_id", "references": "a.a_id"},
                              {"column": "b_id", "references": "b.b_id"},
                              {"column": "c_id", "references": "c.c_id"}],
             "columns": [{"name": "id", "width_bytes": 8, "cardinality": 100},
                         {"name": "a_id", "width_bytes": 4, "cardinality": 10},
                         {"name": "b_id", "width_bytes": 4, "cardinality": 8},
                         {"name": "c_id", "width_bytes": 4, "cardinality": 6},
                         {"name": "m1", "width_bytes": 8, "cardinality": 50},
                         {"name": "m2", "width_bytes": 4, "cardinality": 20}]},
            {"name": "a", "kind": "dimension", "row_count": 10, "primary_key": "a_id",
             "columns": [{"name": "a_id", "width_bytes": 4, "cardinality": 10},
                         {"name": "a1", "width_bytes": 4, "cardinality": 3},
                         {"name": "a2", "width_bytes": 8, "cardinality": 5}]},
            {"name": "b", "kind": "dimension", "row_count": 8, "primary_key": "b_id",
             "columns": [{"name": "b_id", "width_bytes": 4, "cardinality": 8},
                         {"name": "b1", "width_bytes": 4, "cardinality": 4},
                         {"name": "b2", "width_bytes": 2, "cardinality": 2}]},
            {"name": "c", "kind": "dimension", "row_count": 6, "primary_key": "c_id",
             "columns": [{"name": "c_id", "width_bytes": 4, "cardinality": 6},
                         {"name": "c1", "width_bytes": 4, "cardinality": 3}]},
        ],
    }


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(fixture_path("retail_catalog.json"))


@pytest.fixture(scope="session")
def workload(catalog):
    return load_workload(fixture_path("retail_workload.sql"), catalog)


@pytest.fixture(scope="session")
def fixture_query(workload):
    return workload[0]


@pytest.fixture(scope="session")
def fixture_view(catalog, fixture_query):
    """The view built for the fixture query alone: (category, year; SUM, COUNT)."""
    return sized(view_from_cluster(QueryCluster((0,), frozenset()), [fixture_query], catalog), catalog)


@pytest.fixture(scope="session")
def year_bitmap(catalog):
    ixs = indexes_from_itemsets([Itemset(frozenset({"date.year"}), 1.0, 1)], catalog)
    return sized(next(ix for ix in ixs if ix.kind == BITMAP_JOIN), catalog)


@pytest.fixture(scope="session")
def tiny_catalog():
    return catalog_from_dict(tiny_catalog_dict())


@pytest.fixture
def record():
    """Append one line to the acceptance summary printed after the run."""
    return ACCEPTANCE_LOG.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
