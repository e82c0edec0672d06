"""Mining the query-attribute matrix.

Frequent itemsets (levelwise, Apriori-style) feed index candidates;
average-link agglomerative clustering of matrix rows feeds view candidates.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InvalidMinsup, InvalidThreshold, LengthMismatch
from .workload import QueryAttributeMatrix

DEFAULT_MINSUP = 0.25
DEFAULT_TAU = 0.5

# Absorbs float noise when comparing supports and similarities to thresholds.
_EPS = 1e-9


@dataclass(frozen=True)
class Itemset:
    attributes: frozenset
    support: float
    count: int = 0

    def __str__(self):
        return "{" + ", ".join(sorted(self.attributes)) + f"}}:{self.support:.4g}"


@dataclass(frozen=True)
class QueryCluster:
    query_ids: tuple  # sorted
    attributes: frozenset  # union of the members' extracted attributes


def _meets(count, n_rows, minsup):
    return count + _EPS >= minsup * n_rows


def mine_frequent_itemsets(m: QueryAttributeMatrix, minsup: float = DEFAULT_MINSUP,
                           max_length: int | None = None) -> set[Itemset]:
    """All attribute sets whose support is at least ``minsup``.

    Candidates of size k+1 are joined from frequent k-sets sharing a k-1
    prefix and pruned unless every k-subset is frequent.
    """
    if not 0 < minsup <= 1:
        raise InvalidMinsup(f"minsup must lie in (0, 1], got {minsup}")
    n_rows, n_cols = m.cells.shape
    if n_rows == 0 or n_cols == 0:
        return set()
    cells = m.cells.astype(bool)

    found: dict[tuple, int] = {}
    counts = cells.sum(axis=0)
    level = [(j,) for j in range(n_cols) if _meets(int(counts[j]), n_rows, minsup)]
    for (j,) in level:
        found[(j,)] = int(counts[j])

    k = 1
    while level and (max_length is None or k < max_length):
        frequent = set(level)
        candidates = []
        for a, b in combinations(level, 2):
            if a[:-1] != b[:-1]:
                continue
            cand = a + (b[-1],) if a[-1] < b[-1] else b + (a[-1],)
            if all(sub in frequent for sub in combinations(cand, k)):
                candidates.append(cand)
        next_level = []
        for cand in candidates:
            count = int(cells[:, list(cand)].all(axis=1).sum())
            if _meets(count, n_rows, minsup):
                found[cand] = count
                next_level.append(cand)
        level = sorted(next_level)
        k += 1

    return {
        Itemset(frozenset(m.attributes[j] for j in cols), count / n_rows, count)
        for cols, count in found.items()
    }


def jaccard(row_i, row_j) -> float:
    a = np.asarray(row_i, dtype=bool)
    b = np.asarray(row_j, dtype=bool)
    if a.shape != b.shape:
        raise LengthMismatch(f"rows of length {a.size} and {b.size}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def similarity_matrix(cells) -> np.ndarray:
    x = np.asarray(cells, dtype=np.int64)
    inter = x @ x.T
    sizes = x.sum(axis=1)
    union = sizes[:, None] + sizes[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        sim = np.where(union == 0, 1.0, inter / np.maximum(union, 1))
    return sim


def cluster_queries(m: QueryAttributeMatrix, tau: float = DEFAULT_TAU) -> list[QueryCluster]:
    """Average-link agglomerative clustering on Jaccard similarity.

    Merging stops once no pair of clusters reaches average similarity
    ``tau``.  Ties go to the pair with the lowest (min id, min id).
    """
    if not 0 < tau <= 1:
        raise InvalidThreshold(f"tau must lie in (0, 1], got {tau}")
    n = len(m.queries)
    if n == 0:
        return []
    # Clusters are keyed by their lowest row index; sums[i, j] holds the total
    # pairwise similarity between clusters i and j.
    sums = similarity_matrix(m.cells)
    sizes = np.ones(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    members = {i: [i] for i in range(n)}
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)

    while active.sum() > 1:
        avg = sums / np.outer(sizes, sizes)
        mask = upper & active[:, None] & active[None, :]
        avg = np.where(mask, avg, -np.inf)
        best = avg.max()
        if best + _EPS < tau:
            break
        i, j = np.argwhere(avg >= best - _EPS)[0]
        sums[i, :] += sums[j, :]
        sums[:, i] += sums[:, j]
        sizes[i] += sizes[j]
        active[j] = False
        members[i].extend(members.pop(j))

    clusters = []
    for i in sorted(members):
        rows = sorted(members[i])
        attrs = frozenset(a for r in rows for a, v in zip(m.attributes, m.cells[r]) if v)
        clusters.append(QueryCluster(tuple(sorted(m.queries[r] for r in rows)), attrs))
    return clusters


def itemsets_to_csv(itemsets) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=";", lineterminator="\n")
    w.writerow(["attributes", "support"])
    for s in sorted(itemsets, key=lambda s: (len(s.attributes), sorted(s.attributes))):
        w.writerow([" ".join(sorted(s.attributes)), f"{s.support:.6g}"])
    return buf.getvalue()


def clusters_to_csv(clusters) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=";", lineterminator="\n")
    w.writerow(["cluster_id", "query_ids"])
    for k, c in enumerate(clusters):
        w.writerow([k, " ".join(str(q) for q in c.query_ids)])
    return buf.getvalue()
