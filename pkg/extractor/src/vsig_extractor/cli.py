"""CLI for the figure embedding extractor."""

from __future__ import annotations

import click

from .extract import ExtractSpec, extract
from .preprocess import DEFAULT_SIDE


@click.command()
@click.option("--input-dir", required=True, help="Directory of figure images.")
@click.option("--out-vsig", required=True, help="Output VSIG embedding file.")
@click.option("--out-metadata", required=True, help="Output figure metadata JSONL.")
@click.option("--side", type=int, default=DEFAULT_SIDE, show_default=True)
@click.option(
    "--backbone",
    default="resnet50",
    show_default=True,
    help="resnet50 | resnet50-untrained[:SEED] | tiny[:SEED]",
)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--field", "field_label", default="unlabeled", show_default=True)
@click.option("--year", type=int, default=2000, show_default=True)
@click.option(
    "--paper-id-sep",
    default="__",
    show_default=True,
    help="Paper id = filename stem up to this separator.",
)
def main(input_dir, out_vsig, out_metadata, side, backbone, batch_size, field_label, year, paper_id_sep):
    """Embed a directory of figure images into the VSIG container."""
    try:
        spec = ExtractSpec(
            input_dir=input_dir,
            output_vsig=out_vsig,
            output_metadata=out_metadata,
            side=side,
            backbone=backbone,
            batch_size=batch_size,
            field_label=field_label,
            year=year,
            paper_id_sep=paper_id_sep,
        )
        report = extract(spec)
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"embedded {report.processed} images at width {report.width}"
        + (f", skipped {len(report.skipped)}: {report.skipped}" if report.skipped else "")
    )


if __name__ == "__main__":
    main()
