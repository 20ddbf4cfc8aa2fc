#!/usr/bin/env python3
"""Sweep PCA dimensions and cluster counts on a synthetic corpus and print
the resulting table: per dimension, the cumulative explained variance and
the average/max correlation between visual and citation distance over a k
range. A quick way to eyeball where the correlation saturates.

Usage:
    python3 scripts/pca_k_sweep.py --out /tmp/vizsig-sweep
"""

import argparse
import csv
from pathlib import Path

from click.testing import CliRunner

from vizsig.cli import main as cli


def run(args: list[str]) -> None:
    result = CliRunner().invoke(cli, args)
    if result.exit_code != 0:
        raise SystemExit(result.output)
    print(result.output.strip())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--dims", default="2,4,8,12")
    parser.add_argument("--k-range", default="2..10")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    run(
        [
            "synth", "--out", str(out), "--fields", "6",
            "--figures-per-field", "400", "--papers-per-field", "30",
            "--dim", "16", "--seed", str(args.seed),
        ]
    )
    run(
        [
            "sweep-pca",
            "--embeddings", str(out / "embeddings.vsig"),
            "--figures", str(out / "figures.jsonl"),
            "--papers", str(out / "papers.jsonl"),
            "--edges", str(out / "edges.txt"),
            "--dims", args.dims,
            "--k-range", args.k_range,
            "--pca-seed", str(args.seed),
            "--kmeans-seed", str(args.seed),
            "--citation-seed", str(args.seed),
            "--out", str(out / "sweep.csv"),
        ]
    )
    with open(out / "sweep.csv") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))


if __name__ == "__main__":
    main()
