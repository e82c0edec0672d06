"""End-to-end recommendation: workload in, configuration and report out."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .candidates import CandidateView, build_candidates, to_ddl
from .catalog import Catalog
from .cost import Configuration, CostBreakdown, sized, workload_cost
from .errors import UnknownStructureId, ValidationError
from .miner import DEFAULT_MINSUP, DEFAULT_TAU, cluster_queries, mine_frequent_itemsets
from .selector import SelectionParams, select
from .workload import DEFAULT_RULES, ExtractionRuleSet, QueryAttributeMatrix, build_matrix

_SIZE_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([KMG]?)B?\s*$", re.IGNORECASE)
_UNITS = {"": 1, "K": 1024, "M": 1024 ** 2, "G": 1024 ** 3}


def parse_size(text) -> int:
    """Byte count from ``"500"``, ``"64K"``, ``"1M"``, ``"2G"`` (binary units)."""
    if isinstance(text, int):
        return text
    m = _SIZE_RE.match(str(text))
    if not m:
        raise ValueError(f"invalid size {text!r}")
    return int(float(m[1]) * _UNITS[m[2].upper()])


@dataclass
class CandidateSet:
    matrix: QueryAttributeMatrix
    itemsets: set
    clusters: list
    indexes: list  # sized base-table index candidates
    views: list  # sized views, secondary indexes attached

    def by_id(self) -> dict:
        out = {c.id: c for c in self.indexes}
        for v in self.views:
            out[v.id] = v
            for ix in v.secondary_indexes:
                out[ix.id] = ix
        return out


def generate_candidates(workload, catalog: Catalog, minsup=DEFAULT_MINSUP, tau=DEFAULT_TAU,
                        rules: ExtractionRuleSet = DEFAULT_RULES, max_itemset_length=None) -> CandidateSet:
    matrix = build_matrix(workload, rules)
    itemsets = mine_frequent_itemsets(matrix, minsup, max_length=max_itemset_length)
    clusters = cluster_queries(matrix, tau)
    indexes, views = build_candidates(itemsets, clusters, workload, catalog)
    return CandidateSet(matrix, itemsets, clusters,
                        [sized(c, catalog) for c in indexes], [sized(v, catalog) for v in views])


@dataclass
class Recommendation:
    configuration: Configuration
    baseline: CostBreakdown
    final: CostBreakdown
    ddl: list
    parameters: dict
    trace: list = field(default_factory=list)
    candidates: CandidateSet | None = None

    @property
    def saving_fraction(self) -> float:
        if self.baseline.total == 0:
            return 0.0
        return 1 - self.final.total / self.baseline.total

    def to_dict(self) -> dict:
        return {
            "parameters": self.parameters,
            "baseline_cost": self.baseline.total,
            "final_cost": self.final.total,
            "saving_fraction": round(self.saving_fraction, 6),
            "total_size_bytes": self.configuration.total_size_bytes,
            "structures": [
                {"id": s.id, "kind": s.kind, "label": s.label, "size_bytes": s.size_bytes}
                for s in self.configuration.structures
            ],
            "queries": [
                {"query": p.query_id, "plan": p.plan, "pages": p.pages, "structures": list(p.used)}
                for p in self.final.queries
            ],
            "ddl": self.ddl,
            "trace": [r._asdict() for r in self.trace],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        p = self.parameters
        lines = [
            "parameters: " + ", ".join(f"{k}={p[k]}" for k in sorted(p)),
            f"baseline cost: {self.baseline.total} pages",
            f"final cost:    {self.final.total} pages",
            f"saving:        {self.saving_fraction:.2%}",
            f"total size:    {self.configuration.total_size_bytes} bytes",
            "",
            "selected structures:",
        ]
        if not self.configuration.structures:
            lines.append("  (none)")
        for s in self.configuration.structures:
            lines.append(f"  {s.id:<14} {s.size_bytes:>10} B  {s.label}")
        lines += ["", "per-query plans:", self.final.to_text().rstrip(), "", "DDL:"]
        lines += [f"  {d}" for d in self.ddl] or ["  (none)"]
        return "\n".join(lines) + "\n"


def recommend(workload, catalog: Catalog, budget_bytes: int, strategy="joint", alpha=0.5,
              minsup=DEFAULT_MINSUP, tau=DEFAULT_TAU, rules: ExtractionRuleSet = DEFAULT_RULES,
              max_itemset_length=None) -> Recommendation:
    params = SelectionParams(budget_bytes, strategy, alpha)
    cands = generate_candidates(workload, catalog, minsup, tau, rules, max_itemset_length)
    trace = []
    config = select(params, cands.indexes, cands.views, workload, catalog, trace=trace)
    return Recommendation(
        configuration=config,
        baseline=workload_cost(workload, Configuration(), catalog),
        final=workload_cost(workload, config, catalog),
        ddl=[to_ddl(s, catalog) for s in config.structures],
        parameters={"minsup": minsup, "tau": tau, "budget_bytes": budget_bytes,
                    "strategy": strategy, "alpha": alpha},
        trace=trace,
        candidates=cands,
    )


def configuration_from_ids(ids, candidates: CandidateSet) -> Configuration:
    """Rebuild a configuration from structure ids emitted by a previous run."""
    table = candidates.by_id()
    structures = []
    for sid in ids:
        if sid not in table:
            raise UnknownStructureId(f"unknown structure id {sid!r}")
        structures.append(table[sid])
    # views first so secondary indexes always follow their view
    structures.sort(key=lambda s: not isinstance(s, CandidateView))
    try:
        return Configuration(tuple(structures))
    except ValidationError as exc:
        raise UnknownStructureId(str(exc)) from None
