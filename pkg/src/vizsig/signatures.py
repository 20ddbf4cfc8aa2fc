"""K-means clustering, per-field visual signatures, and visual distance.

Lloyd's algorithm with k-means++ seeding and explicit restarts; convergence
is the exact assignment fixpoint, so refitting and reassigning the training
data reproduce each other. A field's visual signature is the normalized
histogram of its figures over the fitted clusters, and the visual distance
between two fields is the Euclidean distance between their histograms.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .container import read_container, write_container
from .corpus import EmbeddingMatrix, FigureMeta
from .errors import FormatError, VizsigError
from .matrices import DistanceMatrix, _format_float

DEFAULT_K = 4
DEFAULT_MAX_ITER = 300
DEFAULT_N_INIT = 10

_HIST_TOL = 1e-9
_CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class KMeansModel:
    k: int
    centroids: np.ndarray  # k x p, float64
    inertia: float
    iterations_run: int
    inertia_trace: tuple[float, ...] = ()

    def __post_init__(self):
        cent = np.asarray(self.centroids, dtype=np.float64)
        if self.k < 1 or cent.shape[0] != self.k or cent.ndim != 2:
            raise ValueError(f"centroids must be k x p with k={self.k}")
        if not np.isfinite(cent).all():
            raise ValueError("centroids must be finite")
        if self.inertia < 0:
            raise ValueError("inertia must be non-negative")
        cent.setflags(write=False)
        object.__setattr__(self, "centroids", cent)


@dataclass(frozen=True, eq=False)
class VisualSignature:
    """Normalized histogram of one field's figures over the k clusters."""

    field: str
    histogram: np.ndarray
    support: int

    def __post_init__(self):
        hist = np.asarray(self.histogram, dtype=np.float64)
        if hist.ndim != 1:
            raise ValueError("histogram must be a vector")
        if np.any(hist < 0) or abs(hist.sum() - 1.0) > _HIST_TOL:
            raise ValueError(
                f"field '{self.field}': histogram must be non-negative and sum to 1"
            )
        if self.support < 1:
            raise ValueError(f"field '{self.field}': support must be >= 1")
        hist.setflags(write=False)
        object.__setattr__(self, "histogram", hist)

    @property
    def k(self) -> int:
        return self.histogram.shape[0]


def _as_array(data) -> np.ndarray:
    values = data.values if isinstance(data, EmbeddingMatrix) else np.asarray(data)
    return np.ascontiguousarray(values, dtype=np.float64)


def _sq_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distances, chunked over rows.

    Computed from explicit differences (not the expanded dot-product form)
    so that equidistant points produce exactly equal values and the
    lowest-index tie rule is meaningful.
    """
    n = X.shape[0]
    out = np.empty((n, centroids.shape[0]), dtype=np.float64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        diff = X[start:stop, None, :] - centroids[None, :, :]
        out[start:stop] = np.einsum("nkp,nkp->nk", diff, diff)
    return out


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]), dtype=np.float64)
    centers[0] = X[int(rng.integers(n))]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(
    X: np.ndarray, centroids: np.ndarray, k: int, max_iter: int
) -> tuple[np.ndarray, np.ndarray, float, int, list[float]]:
    n = X.shape[0]
    prev_assign: np.ndarray | None = None
    trace: list[float] = []
    assign = np.zeros(n, dtype=np.int64)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = _sq_distances(X, centroids)
        assign = d2.argmin(axis=1)  # argmin takes the lowest index on ties
        counts = np.bincount(assign, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            own = d2[np.arange(n), assign]
            for e in empties:
                movable = counts[assign] > 1
                if not movable.any():
                    break
                candidate = int(np.where(movable, own, -np.inf).argmax())
                counts[assign[candidate]] -= 1
                assign[candidate] = e
                counts[e] += 1
                own[candidate] = 0.0
        centroids = np.empty_like(centroids)
        for c in range(k):
            members = X[assign == c]
            centroids[c] = members.mean(axis=0)
        inertia = float(((X - centroids[assign]) ** 2).sum())
        trace.append(inertia)
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
    return centroids, assign, trace[-1], iterations, trace


def kmeans_fit(
    data,
    k: int,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    n_init: int = DEFAULT_N_INIT,
) -> KMeansModel:
    """Fit k centroids with Lloyd iterations until the assignment fixpoint.

    Runs `n_init` k-means++ initializations drawn from `seed` and keeps the
    lowest-inertia result; deterministic for a fixed seed.
    """
    X = _as_array(data)
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty data")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    best: KMeansModel | None = None
    for child in np.random.SeedSequence(seed).spawn(n_init):
        rng = np.random.default_rng(child)
        centroids = _kmeanspp_init(X, k, rng)
        centroids, _, inertia, iters, trace = _lloyd(X, centroids, k, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansModel(
                k=k,
                centroids=centroids,
                inertia=inertia,
                iterations_run=iters,
                inertia_trace=tuple(trace),
            )
    assert best is not None
    return best


def kmeans_assign(model: KMeansModel, data) -> np.ndarray:
    """Nearest-centroid index per row; ties go to the lowest cluster index."""
    X = _as_array(data)
    if X.shape[1] != model.centroids.shape[1]:
        raise ValueError(
            f"data has {X.shape[1]} columns, centroids have {model.centroids.shape[1]}"
        )
    return _sq_distances(X, model.centroids).argmin(axis=1)


def build_signatures(
    assignments: Mapping[str, int],
    figures: Iterable[FigureMeta],
    k: int,
) -> list[VisualSignature]:
    """Per-field normalized histograms over cluster indices.

    `assignments` maps figure_id to cluster index; every assigned figure
    must have a metadata record. Returns one signature per field present,
    sorted by field label. Input order never matters.
    """
    meta = {f.figure_id: f for f in figures}
    counts: dict[str, np.ndarray] = {}
    for fid, cluster in assignments.items():
        fig = meta.get(fid)
        if fig is None:
            raise VizsigError(f"figure '{fid}' has no metadata record")
        if not 0 <= cluster < k:
            raise VizsigError(
                f"figure '{fid}': cluster {cluster} outside [0, {k})"
            )
        counts.setdefault(fig.field, np.zeros(k, dtype=np.float64))[cluster] += 1
    out = []
    for field in sorted(counts):
        c = counts[field]
        total = int(c.sum())
        out.append(VisualSignature(field=field, histogram=c / total, support=total))
    return out


def visual_distance(
    signatures: Sequence[VisualSignature], metric: str = "euclidean"
) -> DistanceMatrix:
    """Pairwise distance between signature histograms, labels sorted.

    The default is plain Euclidean distance on the normalized histograms;
    "hellinger" is available as an alternative but is never the default.
    """
    if not signatures:
        raise ValueError("no signatures")
    if metric not in ("euclidean", "hellinger"):
        raise ValueError(f"unknown metric {metric!r}")
    ks = {s.k for s in signatures}
    if len(ks) != 1:
        raise ValueError(f"signatures mix cluster counts: {sorted(ks)}")
    ordered = sorted(signatures, key=lambda s: s.field)
    labels = tuple(s.field for s in ordered)
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate field labels among signatures")
    m = len(ordered)
    vals = np.zeros((m, m), dtype=np.float64)
    for i in range(m):
        for j in range(i + 1, m):
            hi, hj = ordered[i].histogram, ordered[j].histogram
            if metric == "hellinger":
                diff = np.sqrt(hi) - np.sqrt(hj)
                d = float(np.sqrt((diff * diff).sum()) / np.sqrt(2.0))
            else:
                diff = hi - hj
                d = float(np.sqrt((diff * diff).sum()))
            vals[i, j] = vals[j, i] = d
    return DistanceMatrix(labels, vals)


def write_signatures_csv(
    signatures: Sequence[VisualSignature],
    path: Union[str, Path],
    comment: str | None = None,
) -> None:
    """CSV: header ``field,c0..c{k-1}``, one row per field signature."""
    k = signatures[0].k
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["field"] + [f"c{i}" for i in range(k)])
        for sig in sorted(signatures, key=lambda s: s.field):
            writer.writerow([sig.field] + [_format_float(x) for x in sig.histogram])


def read_signatures_csv(path: Union[str, Path]) -> list[VisualSignature]:
    """Read signatures written by `write_signatures_csv`.

    The CSV carries only the field label and the k frequencies, so the
    returned signatures have a placeholder support of 1.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise FormatError(f"{path}: need a header and at least one signature row")
    k = len(rows[0]) - 1
    out = []
    for row in rows[1:]:
        if len(row) != k + 1:
            raise FormatError(f"{path}: ragged signature row {row!r}")
        out.append(
            VisualSignature(
                field=row[0],
                histogram=np.array([float(x) for x in row[1:]]),
                support=1,
            )
        )
    return out


def write_assignments_csv(
    assignments: Mapping[str, int],
    k: int,
    path: Union[str, Path],
    comment: str | None = None,
) -> None:
    """CSV of figure_id,cluster with a ``# k=<k>`` line so files self-describe."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"# k={k}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["figure_id", "cluster"])
        for fid in assignments:
            writer.writerow([fid, assignments[fid]])


def read_assignments_csv(path: Union[str, Path]) -> tuple[dict[str, int], int | None]:
    k: int | None = None
    out: dict[str, int] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = []
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0].startswith("#"):
                text = ",".join(row).lstrip("#").strip()
                if text.startswith("k="):
                    k = int(text[2:])
                continue
            rows.append(row)
    if not rows or rows[0][:2] != ["figure_id", "cluster"]:
        raise FormatError(f"{path}: expected 'figure_id,cluster' header")
    for row in rows[1:]:
        if len(row) != 2:
            raise FormatError(f"{path}: malformed assignment row {row!r}")
        out[row[0]] = int(row[1])
    return out, k


def save_kmeans(model: KMeansModel, path: Union[str, Path]) -> None:
    write_container(
        {
            "centroids": model.centroids,
            "meta": json.dumps(
                {
                    "k": model.k,
                    "inertia": model.inertia,
                    "iterations_run": model.iterations_run,
                }
            ),
        },
        path,
    )


def load_kmeans(path: Union[str, Path]) -> KMeansModel:
    sections = read_container(path)
    meta = json.loads(sections["meta"])
    return KMeansModel(
        k=int(meta["k"]),
        centroids=sections["centroids"],
        inertia=float(meta["inertia"]),
        iterations_run=int(meta["iterations_run"]),
    )
