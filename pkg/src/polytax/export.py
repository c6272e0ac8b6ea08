"""Exporters: DOT for trees and MSTs, CSV for matrices, markdown tables.

All exporters are pure functions of (model, options) and emit byte-stable
UTF-8 payloads, so repeated exports diff clean.
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .analytics import CorrelationMatrix, DistanceMatrix, MstResult, TraitMatrix
from .enumeration import iter_tree
from .model import TaxonomyModel

Matrix = Union[TraitMatrix, CorrelationMatrix, DistanceMatrix]


@dataclass(frozen=True)
class ExportArtifact:
    kind: str
    text: str

    @property
    def data(self) -> bytes:
        return self.text.encode("utf-8")


def slugify(label: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")
    return slug or "node"


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_tree_dot(model: TaxonomyModel) -> ExportArtifact:
    """DOT digraph of the taxonomy: boxed groups, plain category leaves."""
    lines = ["digraph taxonomy {", "  rankdir=LR;"]
    slugs: dict[str, str] = {}
    used: set[str] = set()
    for node, _ in iter_tree(model):
        slug = slugify(node.label)
        while slug in used:
            slug += "_"
        used.add(slug)
        slugs[node.id] = slug
        shape = "box" if node.kind == "group" else "plaintext"
        lines.append(f"  {slug} [label={_quote(node.label)}, shape={shape}];")
    for node, _ in iter_tree(model):
        for child_id in node.children:
            lines.append(f"  {slugs[node.id]} -> {slugs[child_id]};")
    lines.append("}")
    return ExportArtifact("dot-tree", "\n".join(lines) + "\n")


def export_tree_text(model: TaxonomyModel) -> ExportArtifact:
    """Two-space indented text tree with node kind suffixes."""
    lines = [
        f"{'  ' * depth}{node.label} [{node.kind}]"
        for node, depth in iter_tree(model)
    ]
    return ExportArtifact("text-tree", "\n".join(lines) + "\n")


def export_mst_dot(mst: MstResult) -> ExportArtifact:
    """Undirected DOT graph; edge labels carry weights to 6 decimals."""
    lines = ["graph mst {", "  layout=neato;"]
    slugs = []
    used: set[str] = set()
    for label in mst.labels:
        slug = slugify(label)
        while slug in used:
            slug += "_"
        used.add(slug)
        slugs.append(slug)
        lines.append(f"  {slug} [label={_quote(label)}];")
    for i, j, weight in mst.edges:
        lines.append(f"  {slugs[i]} -- {slugs[j]} [label={_quote(f'{weight:.6f}')}];")
    lines.append("}")
    return ExportArtifact("dot-mst", "\n".join(lines) + "\n")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return repr(float(value))


def export_matrix_csv(matrix: Matrix) -> ExportArtifact:
    """RFC-4180-style CSV: header row of column labels, label column first.

    Booleans become 0/1 and undefined correlations become empty fields.
    """
    if isinstance(matrix, TraitMatrix):
        kind = "csv-matrix"
        cols = matrix.col_labels
        rows = matrix.row_labels
        cells = matrix.cells
    elif isinstance(matrix, CorrelationMatrix):
        kind = "csv-correlation"
        cols = matrix.labels
        rows = matrix.labels
        cells = matrix.cells
    else:
        kind = "csv-distance"
        cols = matrix.labels
        rows = matrix.labels
        cells = matrix.cells

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([""] + list(cols))
    for label, row in zip(rows, cells):
        writer.writerow([label] + [_format_cell(v) for v in row])
    return ExportArtifact(kind, buf.getvalue())


def export_pruned_csv(mst: MstResult) -> ExportArtifact:
    """The MST-pruned distance matrix as CSV; non-tree cells are empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([""] + list(mst.labels))
    for label, row in zip(mst.labels, mst.pruned):
        writer.writerow([label] + [_format_cell(v) for v in row])
    return ExportArtifact("csv-distance", buf.getvalue())


def export_table_markdown(model: TaxonomyModel, table_name: str) -> ExportArtifact:
    """Markdown pipe table mirroring one checkmark table, plus a tags column."""
    table = model.table(table_name)
    if table is None:
        raise KeyError(table_name)
    trait_names = [
        model.trait(t).name if model.trait(t) else t for t in table.trait_columns
    ]
    lines = [
        "| Category | " + " | ".join(trait_names) + " | tags |",
        "|" + " --- |" * (len(trait_names) + 2),
    ]
    for row in table.rows:
        category = model.category(row.category_id)
        name = category.name if category else row.category_id
        marks = [
            "x" if t in row.marks else "" for t in table.trait_columns
        ]
        tags = ", ".join(sorted(category.cross_tags)) if category else ""
        lines.append("| " + " | ".join([name] + marks + [tags]) + " |")
    return ExportArtifact("markdown-table", "\n".join(lines) + "\n")


def export_schema_list(schemas) -> ExportArtifact:
    """One schema per line: category/trait[/subtrait]."""
    lines = []
    for schema in schemas:
        parts = [schema.category_id, schema.trait_id]
        if schema.subtrait_id is not None:
            parts.append(schema.subtrait_id)
        lines.append("/".join(parts))
    return ExportArtifact("schema-list", "\n".join(lines) + ("\n" if lines else ""))


__all__ = [
    "ExportArtifact",
    "slugify",
    "export_tree_dot",
    "export_tree_text",
    "export_mst_dot",
    "export_matrix_csv",
    "export_pruned_csv",
    "export_table_markdown",
    "export_schema_list",
]
