"""Index and materialized view advisor for star-schema data warehouses.

The pipeline: parse a SQL workload, build the query-attribute matrix, mine
frequent itemsets (index candidates) and cluster queries (view candidates),
size everything with mathematical cost models, then greedily select a
configuration under a storage budget.
"""
from importlib.resources import files

from .candidates import CandidateIndex, CandidateView, can_answer, indexes_from_itemsets, view_from_cluster
from .catalog import Catalog, attribute_ref, load_catalog, table_pages
from .cost import Configuration, query_cost, workload_cost
from .miner import Itemset, QueryCluster, cluster_queries, jaccard, mine_frequent_itemsets
from .pipeline import Recommendation, generate_candidates, recommend
from .selector import SelectionParams, benefit, greedy_select, select
from .workload import ExtractionRuleSet, build_matrix, extract_attributes, load_workload, parse_query

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path of a bundled fixture: ``retail_catalog.json`` or ``retail_workload.sql``."""
    return files(__name__).joinpath("data", name)
