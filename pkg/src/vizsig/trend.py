"""Temporal series: figure-type adoption and abstract keyword usage.

Counting is paper-level: a paper contributes once per year no matter how
many of its figures carry the type, and once no matter how many phrases its
abstract matches. Series cover the full year range of the supplied corpus,
zero-filled, so aligned plotting needs no post-processing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Union

from .corpus import FigureMeta, PaperMeta
from .errors import VizsigError


@dataclass(frozen=True)
class TrendSeries:
    label: str
    points: dict[int, int]  # year -> count, contiguous corpus year range

    def total(self) -> int:
        return sum(self.points.values())


def _year_range(years: Sequence[int]) -> range:
    return range(min(years), max(years) + 1)


def figure_type_trend(
    predictions: Mapping[str, str],
    figures: Sequence[FigureMeta],
    type_label: str,
    fields: Sequence[str],
) -> list[TrendSeries]:
    """Papers per (field, year) containing at least one figure of `type_label`.

    `predictions` maps figure_id to predicted label; every predicted figure
    needs a metadata record, and every requested field must exist in the
    metadata.
    """
    meta = {f.figure_id: f for f in figures}
    known_fields = {f.field for f in figures}
    for fld in fields:
        if fld not in known_fields:
            raise VizsigError(f"unknown field '{fld}'")
    years = _year_range([f.year for f in figures])
    counted: dict[str, set[str]] = {fld: set() for fld in fields}
    counts: dict[str, dict[int, int]] = {
        fld: {y: 0 for y in years} for fld in fields
    }
    for fid, label in predictions.items():
        fig = meta.get(fid)
        if fig is None:
            raise VizsigError(f"predicted figure '{fid}' has no metadata record")
        if label != type_label or fig.field not in counted:
            continue
        if fig.paper_id in counted[fig.field]:
            continue
        counted[fig.field].add(fig.paper_id)
        counts[fig.field][fig.year] += 1
    return [TrendSeries(label=fld, points=counts[fld]) for fld in sorted(set(fields))]


def keyword_trend(
    papers: Sequence[PaperMeta],
    phrases: Sequence[str],
    fields: Sequence[str],
) -> list[TrendSeries]:
    """Papers per (field, year) whose abstract contains any phrase.

    Matching is case-insensitive substring; a paper counts once even if
    several phrases match.
    """
    if not phrases or any(not p for p in phrases):
        raise ValueError("phrases must be non-empty")
    known_fields = {p.field for p in papers}
    for fld in fields:
        if fld not in known_fields:
            raise VizsigError(f"unknown field '{fld}'")
    lowered = [p.lower() for p in phrases]
    years = _year_range([p.year for p in papers])
    counts: dict[str, dict[int, int]] = {
        fld: {y: 0 for y in years} for fld in fields
    }
    wanted = set(fields)
    for paper in papers:
        if paper.field not in wanted or not paper.abstract:
            continue
        abstract = paper.abstract.lower()
        if any(phrase in abstract for phrase in lowered):
            counts[paper.field][paper.year] += 1
    return [TrendSeries(label=fld, points=counts[fld]) for fld in sorted(set(fields))]


def citation_trend(
    yearly_counts: Mapping[str, Mapping[int, int]]
) -> list[TrendSeries]:
    """Adapt per-paper yearly citation counts into aligned trend series."""
    all_years = [y for counts in yearly_counts.values() for y in counts]
    if not all_years:
        return [
            TrendSeries(label=pid, points={}) for pid in sorted(yearly_counts)
        ]
    years = _year_range(all_years)
    out = []
    for pid in sorted(yearly_counts):
        points = {y: int(yearly_counts[pid].get(y, 0)) for y in years}
        out.append(TrendSeries(label=pid, points=points))
    return out


def write_trend_csv(
    series: Sequence[TrendSeries], path: Union[str, Path], comment: str | None = None
) -> None:
    """CSV: ``label`` column then one column per year."""
    years = sorted({y for s in series for y in s.points})
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label"] + [str(y) for y in years])
        for s in series:
            writer.writerow([s.label] + [str(s.points.get(y, 0)) for y in years])
