"""Directory of figure images -> VSIG embedding file + metadata lines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import UnidentifiedImageError

from .backbone import resolve_backbone
from .preprocess import DEFAULT_SIDE, load_rgb, to_model_array
from .vsig import write_vsig

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tiff", ".webp"}


@dataclass(frozen=True)
class ExtractSpec:
    input_dir: str
    output_vsig: str
    output_metadata: str
    side: int = DEFAULT_SIDE
    backbone: str = "resnet50"
    batch_size: int = 16
    # image files carry no corpus metadata, so field/year are supplied here
    # and the paper id is the filename stem up to `paper_id_sep` (if present)
    field_label: str = "unlabeled"
    year: int = 2000
    paper_id_sep: str = "__"

    def __post_init__(self):
        if self.side < 1:
            raise ValueError("target side length must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not self.field_label:
            raise ValueError("field label must be non-empty")


@dataclass
class ExtractReport:
    processed: int = 0
    skipped: list[str] = field(default_factory=list)
    width: int = 0


def _candidate_files(root: Path) -> list[Path]:
    files = [
        p
        for p in sorted(root.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    return files


def extract(spec: ExtractSpec) -> ExtractReport:
    """Embed every decodable image under `spec.input_dir`.

    Files are processed in sorted name order; undecodable ones are skipped
    and listed in the report. Row ids are filename stems. Raises if the
    directory yields no decodable image at all.
    """
    root = Path(spec.input_dir)
    files = _candidate_files(root)
    if not files:
        raise ValueError(f"{root}: no image files found")
    backbone = resolve_backbone(spec.backbone)
    report = ExtractReport(width=backbone.width)

    ids: list[str] = []
    arrays: list[np.ndarray] = []
    for path in files:
        try:
            image = load_rgb(path)
        except (UnidentifiedImageError, OSError):
            report.skipped.append(path.name)
            continue
        arrays.append(to_model_array(image, side=spec.side))
        ids.append(path.stem)
    if not ids:
        raise ValueError(f"{root}: no decodable images among {len(files)} files")
    if len(set(ids)) != len(ids):
        raise ValueError(f"{root}: duplicate filename stems")

    rows = np.empty((len(ids), backbone.width), dtype=np.float32)
    for start in range(0, len(ids), spec.batch_size):
        stop = min(start + spec.batch_size, len(ids))
        rows[start:stop] = backbone.features(np.stack(arrays[start:stop]))
    write_vsig(rows, ids, spec.output_vsig)

    with open(spec.output_metadata, "w", encoding="utf-8") as fh:
        for stem in ids:
            paper_id = stem.split(spec.paper_id_sep)[0] if spec.paper_id_sep else stem
            record = {
                "figure_id": stem,
                "paper_id": paper_id,
                "field": spec.field_label,
                "year": spec.year,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    report.processed = len(ids)
    return report
