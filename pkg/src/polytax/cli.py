"""Command-line interface.

Exit codes: 0 success, 1 validation or lookup errors, 2 usage errors.
The bundled dataset is the default input; POLYTAX_DATA or --input
override it.
"""
from __future__ import annotations

import json
import sys
from typing import Optional

import click

from . import analytics, enumeration, export, ingest
from .model import PolicyError, TaxonomyModel, validate_model


def _load_input(input_path: Optional[str]) -> TaxonomyModel:
    if input_path is None:
        return ingest.load_bundled_dataset()
    model, diags = ingest.load_model_from_path(input_path)
    errors = [d for d in diags if d.is_error()]
    if model is None or errors:
        for d in errors or diags:
            click.echo(f"{d.severity}: {d.code} at {d.path}: {d.message}", err=True)
        raise SystemExit(1)
    return model


def _write_out(text: str, out: Optional[str]) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)


input_option = click.option(
    "--input", "input_path", default=None, type=click.Path(exists=True),
    help="Taxonomy file (defaults to the bundled dataset).",
)
null_mode_option = click.option(
    "--null-mode", default="include",
    type=click.Choice(analytics.NULL_MODES),
    help="How to treat categories that implement no traits.",
)
out_option = click.option("--out", default=None, type=click.Path(), help="Output file.")


@click.group()
def main():
    """Economic-policy taxonomy engine and trait analytics."""


@main.command()
@click.argument("file", type=click.Path(exists=True))
def validate(file):
    """Validate a taxonomy-definition file."""
    model, diags = ingest.load_model_from_path(file)
    for d in diags:
        click.echo(f"{d.severity}: {d.code} at {d.path}: {d.message}", err=True)
    if model is None or any(d.is_error() for d in diags):
        raise SystemExit(1)
    click.echo(
        f"OK: {len(model.traits)} traits, {len(model.categories)} categories, "
        f"{len(model.tables)} tables"
    )


@main.command()
@input_option
@click.option("--format", "fmt", default="text", type=click.Choice(["dot", "text"]))
@out_option
def tree(input_path, fmt, out):
    """Print the taxonomy tree."""
    model = _load_input(input_path)
    if fmt == "dot":
        artifact = export.export_tree_dot(model)
    else:
        artifact = export.export_tree_text(model)
    _write_out(artifact.text, out)


def _make_filter(table, tag, trait, group):
    return enumeration.EnumerationFilter(
        table=table,
        cross_tag=tag,
        trait_id=trait,
        group_prefix=tuple(group.split("/")) if group else None,
    )


@main.group()
def policies():
    """Enumerate atomic-policy schemas."""


@policies.command("list")
@input_option
@click.option("--table", default=None)
@click.option("--tag", default=None)
@click.option("--trait", default=None)
@click.option("--group", default=None, help="Group path prefix, '/'-separated.")
@click.option("--expand-subtraits", is_flag=True)
def policies_list(input_path, table, tag, trait, group, expand_subtraits):
    """List schemas, one category/trait[/subtrait] per line."""
    model = _load_input(input_path)
    try:
        schemas = enumeration.enumerate_schemas(
            model, _make_filter(table, tag, trait, group), expand_subtraits
        )
    except PolicyError as exc:
        click.echo(str(exc), err=True)
        raise SystemExit(1)
    click.echo(export.export_schema_list(schemas).text, nl=False)


@policies.command("count")
@input_option
@click.option("--table", default=None)
@click.option("--tag", default=None)
@click.option("--trait", default=None)
@click.option("--group", default=None)
@click.option("--expand-subtraits", is_flag=True)
@click.option("--by", default=None, type=click.Choice(["table", "category", "trait"]))
def policies_count(input_path, table, tag, trait, group, expand_subtraits, by):
    """Count schemas under a filter, or grouped counts with --by."""
    model = _load_input(input_path)
    try:
        if by is not None:
            counts = enumeration.count_checkmarks(model, by)
            for name in sorted(counts):
                click.echo(f"{name}: {counts[name]}")
            return
        schemas = enumeration.enumerate_schemas(
            model, _make_filter(table, tag, trait, group), expand_subtraits
        )
    except PolicyError as exc:
        click.echo(str(exc), err=True)
        raise SystemExit(1)
    click.echo(str(len(schemas)))


@main.command()
@input_option
@null_mode_option
@out_option
def matrix(input_path, null_mode, out):
    """Export the boolean trait matrix as CSV."""
    model = _load_input(input_path)
    tm = analytics.build_trait_matrix(model, null_mode)
    _write_out(export.export_matrix_csv(tm).text, out)


@main.command()
@input_option
@null_mode_option
@out_option
def corr(input_path, null_mode, out):
    """Export the Pearson correlation matrix as CSV."""
    model = _load_input(input_path)
    tm = analytics.build_trait_matrix(model, null_mode)
    _write_out(export.export_matrix_csv(analytics.pearson_correlation(tm)).text, out)


@main.command()
@input_option
@null_mode_option
@out_option
def dist(input_path, null_mode, out):
    """Export the Euclidean distance matrix as CSV."""
    model = _load_input(input_path)
    tm = analytics.build_trait_matrix(model, null_mode)
    _write_out(export.export_matrix_csv(analytics.euclidean_distance(tm)).text, out)


@main.command()
@input_option
@null_mode_option
@click.option("--format", "fmt", default="dot", type=click.Choice(["dot", "csv"]))
@out_option
def mst(input_path, null_mode, fmt, out):
    """Export the minimum-spanning tree (DOT) or pruned distances (CSV)."""
    model = _load_input(input_path)
    tm = analytics.build_trait_matrix(model, null_mode)
    result = analytics.kruskal_mst(analytics.euclidean_distance(tm))
    if fmt == "dot":
        artifact = export.export_mst_dot(result)
    else:
        artifact = export.export_pruned_csv(result)
    _write_out(artifact.text, out)


@main.command()
@click.argument("base", type=click.Path(exists=True))
@click.argument("ext", type=click.Path(exists=True))
@out_option
def merge(base, ext, out):
    """Merge an extension document into a base taxonomy file."""
    base_model, diags = ingest.load_model_from_path(base)
    if base_model is None or any(d.is_error() for d in diags):
        for d in diags:
            click.echo(f"{d.severity}: {d.code} at {d.path}: {d.message}", err=True)
        raise SystemExit(1)
    with open(ext, encoding="utf-8") as f:
        extension = json.load(f)
    try:
        merged = ingest.merge_extension(base_model, extension)
    except ingest.IngestError as exc:
        for d in exc.diagnostics:
            click.echo(f"{d.severity}: {d.code} at {d.path}: {d.message}", err=True)
        raise SystemExit(1)
    _write_out(ingest.serialize_taxonomy_document(merged), out)


@main.command()
@input_option
@click.argument("name")
def show(input_path, name):
    """Look up a category or tree node by id or name."""
    model = _load_input(input_path)
    try:
        found = enumeration.lookup(model, name)
    except PolicyError as exc:
        click.echo(str(exc), err=True)
        raise SystemExit(1)
    if hasattr(found, "implementable_trait_ids"):
        click.echo(f"category {found.id}: {found.name}")
        click.echo("group path: " + " > ".join(found.group_path))
        if found.cross_tags:
            click.echo("tags: " + ", ".join(sorted(found.cross_tags)))
        click.echo("traits: " + (", ".join(sorted(found.implementable_trait_ids)) or "(none)"))
    else:
        click.echo(f"node {found.id} [{found.kind}]: {found.label}")


def run_cli(argv) -> int:
    """Invoke the CLI programmatically; returns the exit code."""
    try:
        main.main(args=list(argv), standalone_mode=False)
        return 0
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 2
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1


if __name__ == "__main__":
    main()
