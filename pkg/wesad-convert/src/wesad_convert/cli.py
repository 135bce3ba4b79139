"""Command line entry point for the record-to-store converter."""

from __future__ import annotations

import sys

import click

from .convert import ConversionError, convert


@click.command()
@click.option(
    "--source",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Directory holding one <subject>/<subject>.pkl record per subject.",
)
@click.option(
    "--out",
    required=True,
    type=click.Path(file_okay=False),
    help="Destination directory for the converted store.",
)
@click.option(
    "--subjects",
    default=None,
    help="Comma-separated subject ids to convert (default: all fifteen).",
)
def main(source: str, out: str, subjects: str | None) -> None:
    """Convert subject records under SOURCE into a columnar store at OUT."""
    subset = None
    if subjects is not None:
        subset = tuple(s.strip() for s in subjects.split(",") if s.strip())
    try:
        report = convert(source, out, subjects=subset)
    except ConversionError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"converted {len(report.subjects)} subjects to {out}")


if __name__ == "__main__":
    main()
