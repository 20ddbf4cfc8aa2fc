"""Corpus data model and on-disk formats.

Holds the figure/paper metadata types, the dense embedding matrix, and the
readers and writers for every file format the toolkit exchanges:

* VSIG embedding container: ``b"VSIG"`` magic, 1-byte version (=1), two
  little-endian uint32 counts (n rows, d columns), ``n*d`` little-endian
  float32 values row-major, then a footer of n figure ids encoded as
  uint16 length + UTF-8 bytes. Bit-exact round trips.
* Metadata files: JSON Lines, one record per non-empty line.
* Citation edge files: plain text, one ``citing_id,cited_id`` per line.

Validation of the join between embeddings and metadata is an explicit step
(`validate_corpus`), never implicit on load.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DuplicateIdError,
    FormatError,
    MalformedHeaderError,
    MetadataError,
    NonFiniteValueError,
    TruncatedPayloadError,
)

FieldLabel = str  # compared by exact byte equality; must be non-empty

VSIG_MAGIC = b"VSIG"
VSIG_VERSION = 1
_HEADER = struct.Struct("<4sBII")  # magic, version, n, d -> 13 bytes

YEAR_MIN = 1900
YEAR_MAX = 2100


def _check_year(year: int, what: str) -> None:
    if not isinstance(year, int) or isinstance(year, bool):
        raise ValueError(f"{what}: year must be an integer, got {year!r}")
    if not YEAR_MIN <= year <= YEAR_MAX:
        raise ValueError(f"{what}: year {year} outside [{YEAR_MIN}, {YEAR_MAX}]")


@dataclass(frozen=True)
class FigureMeta:
    """One figure: identity, owning paper, field label, year, optional caption."""

    figure_id: str
    paper_id: str
    field: FieldLabel
    year: int
    caption: str | None = None

    def __post_init__(self):
        if not self.figure_id:
            raise ValueError("figure_id must be non-empty")
        if not self.paper_id:
            raise ValueError("paper_id must be non-empty")
        if not self.field:
            raise ValueError(f"figure '{self.figure_id}': field must be non-empty")
        _check_year(self.year, f"figure '{self.figure_id}'")


@dataclass(frozen=True)
class PaperMeta:
    """One paper: identity, field label, year, optional abstract."""

    paper_id: str
    field: FieldLabel
    year: int
    abstract: str | None = None

    def __post_init__(self):
        if not self.paper_id:
            raise ValueError("paper_id must be non-empty")
        if not self.field:
            raise ValueError(f"paper '{self.paper_id}': field must be non-empty")
        _check_year(self.year, f"paper '{self.paper_id}'")


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Dense n x d float32 matrix with one figure id per row.

    Immutable after construction; values are stored row-major and never
    contain NaN or infinity.
    """

    values: np.ndarray
    row_ids: tuple[str, ...]

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"values must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix must be at least 1x1, got {arr.shape}")
        finite_rows = np.isfinite(arr).all(axis=1)
        if not finite_rows.all():
            row = int(np.flatnonzero(~finite_rows)[0])
            raise NonFiniteValueError(f"non-finite value at row {row}")
        ids = tuple(str(r) for r in self.row_ids)
        if len(ids) != arr.shape[0]:
            raise ValueError(
                f"{len(ids)} row_ids for {arr.shape[0]} rows"
            )
        if len(set(ids)) != len(ids):
            seen: dict[str, int] = {}
            for i, rid in enumerate(ids):
                if rid in seen:
                    raise DuplicateIdError(
                        f"duplicate row_id '{rid}' at rows {seen[rid]} and {i}"
                    )
                seen[rid] = i
        if arr.flags.writeable:
            arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "row_ids", ids)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def write_embeddings(matrix: EmbeddingMatrix, path: Union[str, Path]) -> None:
    """Write `matrix` to `path` in the VSIG binary format (bit-exact)."""
    parts = [_HEADER.pack(VSIG_MAGIC, VSIG_VERSION, matrix.n, matrix.d)]
    parts.append(matrix.values.astype("<f4", copy=False).tobytes(order="C"))
    for rid in matrix.row_ids:
        raw = rid.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"row_id too long to encode: {len(raw)} bytes")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
    Path(path).write_bytes(b"".join(parts))


def read_embeddings(path: Union[str, Path]) -> EmbeddingMatrix:
    """Read a VSIG file; inverse of `write_embeddings` on valid inputs."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MalformedHeaderError(
            f"{path}: file has {len(raw)} bytes, header needs {_HEADER.size}"
        )
    magic, version, n, d = _HEADER.unpack_from(raw, 0)
    if magic != VSIG_MAGIC:
        raise MalformedHeaderError(f"{path}: bad magic {magic!r}")
    if version != VSIG_VERSION:
        raise MalformedHeaderError(f"{path}: unsupported version {version}")
    if n < 1 or d < 1:
        raise MalformedHeaderError(f"{path}: header declares empty matrix n={n} d={d}")
    offset = _HEADER.size
    need = n * d * 4
    if len(raw) - offset < need:
        raise TruncatedPayloadError(
            f"{path}: truncated payload, expected {need} bytes, have {len(raw) - offset}"
        )
    values = np.frombuffer(raw, dtype="<f4", count=n * d, offset=offset).reshape(n, d)
    offset += need
    ids: list[str] = []
    for i in range(n):
        if offset + 2 > len(raw):
            raise TruncatedPayloadError(f"{path}: footer truncated at row id {i}")
        (length,) = struct.unpack_from("<H", raw, offset)
        offset += 2
        if offset + length > len(raw):
            raise TruncatedPayloadError(f"{path}: footer truncated inside row id {i}")
        ids.append(raw[offset : offset + length].decode("utf-8"))
        offset += length
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes after footer")
    return EmbeddingMatrix(values, tuple(ids))


def _figure_from_record(obj: dict, where: str) -> FigureMeta:
    try:
        return FigureMeta(
            figure_id=obj["figure_id"],
            paper_id=obj["paper_id"],
            field=obj["field"],
            year=obj["year"],
            caption=obj.get("caption"),
        )
    except KeyError as exc:
        raise MetadataError(f"{where}: missing key {exc}") from None
    except (ValueError, TypeError) as exc:
        raise MetadataError(f"{where}: {exc}") from None


def _paper_from_record(obj: dict, where: str) -> PaperMeta:
    try:
        return PaperMeta(
            paper_id=obj["paper_id"],
            field=obj["field"],
            year=obj["year"],
            abstract=obj.get("abstract"),
        )
    except KeyError as exc:
        raise MetadataError(f"{where}: missing key {exc}") from None
    except (ValueError, TypeError) as exc:
        raise MetadataError(f"{where}: {exc}") from None


def read_metadata(path: Union[str, Path]) -> list[FigureMeta] | list[PaperMeta]:
    """Read a JSON Lines metadata file.

    Records carrying a ``figure_id`` key parse as figures, the rest as
    papers; a single file must not mix the two. Empty lines are skipped,
    order is preserved, duplicate ids are an error naming both lines.
    """
    records: list = []
    kind: str | None = None
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MetadataError(f"{where}: malformed record: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise MetadataError(f"{where}: record is not an object")
            this_kind = "figure" if "figure_id" in obj else "paper"
            if kind is None:
                kind = this_kind
            elif kind != this_kind:
                raise MetadataError(
                    f"{where}: {this_kind} record in a file of {kind} records"
                )
            if kind == "figure":
                rec = _figure_from_record(obj, where)
                rid = rec.figure_id
            else:
                rec = _paper_from_record(obj, where)
                rid = rec.paper_id
            if rid in seen:
                raise DuplicateIdError(
                    f"duplicate {kind}_id '{rid}' on lines {seen[rid]} and {lineno}"
                )
            seen[rid] = lineno
            records.append(rec)
    return records


def _meta_to_record(rec: Union[FigureMeta, PaperMeta]) -> dict:
    if isinstance(rec, FigureMeta):
        obj = {
            "figure_id": rec.figure_id,
            "paper_id": rec.paper_id,
            "field": rec.field,
            "year": rec.year,
        }
        if rec.caption is not None:
            obj["caption"] = rec.caption
    else:
        obj = {"paper_id": rec.paper_id, "field": rec.field, "year": rec.year}
        if rec.abstract is not None:
            obj["abstract"] = rec.abstract
    return obj


def write_metadata(
    records: Sequence[Union[FigureMeta, PaperMeta]], path: Union[str, Path]
) -> None:
    """Write metadata records as JSON Lines (inverse of `read_metadata`)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_meta_to_record(rec), ensure_ascii=False))
            fh.write("\n")


def read_edges(path: Union[str, Path]) -> list[tuple[str, str]]:
    """Read a citation edge file: one ``citing_id,cited_id`` per line."""
    edges: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = stripped.split(",")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise MetadataError(
                    f"{path}:{lineno}: expected 'citing_id,cited_id', got {stripped!r}"
                )
            edges.append((parts[0], parts[1]))
    return edges


def write_edges(edges: Iterable[tuple[str, str]], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for citing, cited in edges:
            fh.write(f"{citing},{cited}\n")


@dataclass(frozen=True)
class CorpusValidationReport:
    """Result of the explicit embeddings/metadata join check."""

    n_rows: int
    n_figures: int
    n_papers: int
    rows_without_figure: tuple[str, ...]
    figures_without_row: tuple[str, ...]
    figures_without_paper: tuple[str, ...]
    zero_figure_papers: int

    @property
    def ok(self) -> bool:
        return not self.rows_without_figure and not self.figures_without_row

    def summary(self) -> str:
        lines = [
            f"rows={self.n_rows} figures={self.n_figures} papers={self.n_papers}",
            f"rows without figure metadata: {len(self.rows_without_figure)}",
            f"figure records without embedding row: {len(self.figures_without_row)}",
            f"figures referencing unknown papers: {len(self.figures_without_paper)}",
            f"papers with zero figures: {self.zero_figure_papers}",
        ]
        return "\n".join(lines)


def validate_corpus(
    embeddings: EmbeddingMatrix,
    figures: Sequence[FigureMeta],
    papers: Sequence[PaperMeta] = (),
) -> CorpusValidationReport:
    """Cross-check the embedding rows against figure (and paper) metadata.

    Reports orphans in both directions rather than raising; large corpora
    can defer this O(n) join until they need it.
    """
    row_ids = set(embeddings.row_ids)
    fig_ids = {f.figure_id for f in figures}
    paper_ids = {p.paper_id for p in papers}
    rows_without = tuple(sorted(row_ids - fig_ids))
    figs_without = tuple(sorted(fig_ids - row_ids))
    figs_no_paper: tuple[str, ...] = ()
    zero_fig_papers = 0
    if papers:
        figs_no_paper = tuple(
            sorted(f.figure_id for f in figures if f.paper_id not in paper_ids)
        )
        papers_with_figs = {f.paper_id for f in figures}
        zero_fig_papers = sum(1 for p in papers if p.paper_id not in papers_with_figs)
    return CorpusValidationReport(
        n_rows=embeddings.n,
        n_figures=len(figures),
        n_papers=len(papers),
        rows_without_figure=rows_without,
        figures_without_row=figs_without,
        figures_without_paper=figs_no_paper,
        zero_figure_papers=zero_fig_papers,
    )
