"""Trait analytics: boolean matrix, correlations, distances, and the MST.

Each policy category gets a 0/1 signal series over the trait columns.
Pearson correlation is undefined for pairs involving a constant series.
Distances are Euclidean; the minimum-spanning tree is built with
Kruskal's algorithm and union-find, with lexicographic label tie-breaks
so that output is deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import PolicyError, TaxonomyModel

NULL_MODES = ("include", "collapse", "exclude")

NULL_POLICY_LABEL = "Null Policy"


@dataclass(frozen=True)
class TraitMatrix:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    cells: np.ndarray  # bool, shape (rows, cols)

    def row(self, label: str) -> np.ndarray:
        try:
            i = self.row_labels.index(label)
        except ValueError:
            raise PolicyError("E_NOT_FOUND", f"no matrix row {label!r}") from None
        return self.cells[i]


@dataclass(frozen=True)
class SignalSeries:
    category_id: str
    values: tuple[int, ...]


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    cells: tuple[tuple[Optional[float], ...], ...]  # None = undefined


@dataclass(frozen=True)
class DistanceMatrix:
    labels: tuple[str, ...]
    cells: np.ndarray  # float, shape (n, n)


@dataclass(frozen=True)
class MstResult:
    labels: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]  # (i, j, weight) with i < j
    pruned: tuple[tuple[Optional[float], ...], ...]  # non-tree cells are None
    adjacency: np.ndarray  # int 0/1, shape (n, n)

    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))


def build_trait_matrix(model: TaxonomyModel, null_mode: str = "include") -> TraitMatrix:
    """Boolean (category x trait) matrix in document order.

    include keeps every category as a row, collapse replaces all-zero rows
    with a single "Null Policy" row, exclude drops them.
    """
    if null_mode not in NULL_MODES:
        raise PolicyError("E_BAD_FILTER", f"unknown null mode {null_mode!r}")
    col_labels = tuple(t.id for t in model.traits)
    col_index = {t: i for i, t in enumerate(col_labels)}

    rows: list[np.ndarray] = []
    labels: list[str] = []
    saw_null = False
    for category in model.categories:
        cells = np.zeros(len(col_labels), dtype=bool)
        for trait_id in category.implementable_trait_ids:
            if trait_id in col_index:
                cells[col_index[trait_id]] = True
        if not cells.any():
            saw_null = True
            if null_mode == "exclude":
                continue
            if null_mode == "collapse":
                continue
        labels.append(category.id)
        rows.append(cells)
    if null_mode == "collapse" and saw_null:
        labels.append(NULL_POLICY_LABEL)
        rows.append(np.zeros(len(col_labels), dtype=bool))

    cells = np.array(rows, dtype=bool) if rows else np.zeros((0, len(col_labels)), dtype=bool)
    return TraitMatrix(tuple(labels), col_labels, cells)


def signal_series(matrix: TraitMatrix, category_id: str) -> SignalSeries:
    """The 0/1 vector of one matrix row, in column order."""
    row = matrix.row(category_id)
    return SignalSeries(category_id, tuple(int(v) for v in row))


def pearson_correlation(matrix: TraitMatrix) -> CorrelationMatrix:
    """Pairwise Pearson r over the 0/1 rows.

    A cell is None whenever either row is constant (zero standard
    deviation), including the diagonal of a constant row.
    """
    if len(matrix.row_labels) < 2:
        raise PolicyError("E_BAD_FILTER", "correlation needs at least two rows")
    data = matrix.cells.astype(float)
    centered = data - data.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered**2).sum(axis=1))
    constant = norms == 0.0

    n = data.shape[0]
    cells: list[tuple[Optional[float], ...]] = []
    for i in range(n):
        row: list[Optional[float]] = []
        for j in range(n):
            if constant[i] or constant[j]:
                row.append(None)
            else:
                r = float(np.dot(centered[i], centered[j]) / (norms[i] * norms[j]))
                row.append(max(-1.0, min(1.0, r)))
        cells.append(tuple(row))
    return CorrelationMatrix(matrix.row_labels, tuple(cells))


def euclidean_distance(matrix: TraitMatrix) -> DistanceMatrix:
    """d(i, j) = sqrt(sum_k (x_ik - x_jk)^2); sqrt(Hamming) for 0/1 rows."""
    if len(matrix.row_labels) < 2:
        raise PolicyError("E_BAD_FILTER", "distance needs at least two rows")
    data = matrix.cells.astype(float)
    diff = data[:, None, :] - data[None, :, :]
    cells = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(cells, 0.0)
    return DistanceMatrix(matrix.row_labels, cells)


class UnionFind:
    """Disjoint sets over range(n) with union by rank and path compression."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def kruskal_mst(dist: DistanceMatrix) -> MstResult:
    """Minimum-spanning tree over a complete distance matrix.

    Equal-weight edges are taken in ascending lexicographic order of their
    label pair, which pins the tree even when many distances tie.
    """
    labels = dist.labels
    n = len(labels)
    if n == 0:
        raise PolicyError("E_EMPTY", "distance matrix has no nodes")

    candidates = []
    for i in range(n):
        for j in range(i + 1, n):
            pair = tuple(sorted((labels[i], labels[j])))
            candidates.append((float(dist.cells[i, j]), pair, i, j))
    candidates.sort(key=lambda e: (e[0], e[1]))

    uf = UnionFind(n)
    edges: list[tuple[int, int, float]] = []
    for weight, _, i, j in candidates:
        if uf.union(i, j):
            edges.append((i, j, weight))
            if len(edges) == n - 1:
                break

    adjacency = np.zeros((n, n), dtype=int)
    pruned_grid: list[list[Optional[float]]] = [[None] * n for _ in range(n)]
    for i in range(n):
        pruned_grid[i][i] = 0.0
    for i, j, weight in edges:
        adjacency[i, j] = adjacency[j, i] = 1
        pruned_grid[i][j] = pruned_grid[j][i] = weight

    return MstResult(
        labels=labels,
        edges=tuple(edges),
        pruned=tuple(tuple(row) for row in pruned_grid),
        adjacency=adjacency,
    )


def trait_less_category_ids(model: TaxonomyModel) -> list[str]:
    return [c.id for c in model.categories if not c.implementable_trait_ids]


__all__ = [
    "NULL_MODES",
    "NULL_POLICY_LABEL",
    "TraitMatrix",
    "SignalSeries",
    "CorrelationMatrix",
    "DistanceMatrix",
    "MstResult",
    "UnionFind",
    "build_trait_matrix",
    "signal_series",
    "pearson_correlation",
    "euclidean_distance",
    "kruskal_mst",
    "trait_less_category_ids",
]
