"""Statistical comparison and hierarchy over distance matrices.

Mantel tests run one-sided (permuted correlation >= observed) on Spearman
correlations of the strict upper triangles. When the permutation group is
small enough (factorial(m) - 1 <= requested permutations) the test
enumerates every non-identity label permutation once, making the p-value
exact; otherwise it samples permutations from per-permutation RNG streams
derived from the seed, so the result does not depend on evaluation order.

UPGMA merges the closest cluster pair, averaging distances weighted by
member count; cophenetic() inverts a dendrogram back into the implied
ultrametric, which is the natural oracle for it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from itertools import permutations as iter_permutations
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .matrices import DistanceMatrix, LabeledMatrix, _format_float

DEFAULT_PERMUTATIONS = 9_999


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); ties receive the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float((xc * xc).sum()) * float((yc * yc).sum()))
    if denom == 0.0:
        raise ValueError("zero variance")
    return float((xc * yc).sum() / denom)


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-tie fractional ranks."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    if xa.shape[0] < 3:
        raise ValueError("need at least 3 observations")
    try:
        return _pearson(_average_ranks(xa), _average_ranks(ya))
    except ValueError:
        raise ValueError("zero variance in ranks") from None


@dataclass(frozen=True)
class MantelReport:
    r: float
    p_value: float
    z_score: float
    permutations: int
    seed: int
    exhaustive: bool = False

    def __post_init__(self):
        if not -1.0 - 1e-12 <= self.r <= 1.0 + 1e-12:
            raise ValueError(f"r={self.r} outside [-1, 1]")
        if not 0.0 < self.p_value <= 1.0:
            raise ValueError(f"p_value={self.p_value} outside (0, 1]")
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")


def _upper(values: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(values.shape[0], k=1)
    return values[iu]


def mantel_test(
    a: DistanceMatrix,
    b: DistanceMatrix,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    method: str = "auto",
) -> MantelReport:
    """One-sided Mantel test between two aligned distance matrices.

    Permutes B's labels jointly over rows and columns. Requires identical
    label order, m >= 4, permutations >= 99, and no missing entries.
    p = (1 + #{r_perm >= r_obs}) / (1 + permutations); the z score uses the
    population standard deviation of the permuted correlations.

    `method` selects the null distribution:

    * "exact": enumerate every non-identity label permutation; p is the
      exact permutation p-value with resolution 1 / m!.
    * "sampled": draw exactly `permutations` uniform non-identity
      permutations from per-permutation RNG streams. The identity stays
      excluded because the observed statistic already occupies the +1 slot,
      so the attainable minimum is exactly 1 / (permutations + 1).
    * "auto": "exact" when the whole group fits the budget
      (m! - 1 <= permutations), else "sampled".
    """
    if a.labels != b.labels:
        raise ValueError("matrices must share the same labels in the same order")
    m = a.m
    if m < 4:
        raise ValueError("need at least 4 labels")
    if permutations < 99:
        raise ValueError("need at least 99 permutations")
    if method not in ("auto", "sampled", "exact"):
        raise ValueError(f"unknown method {method!r}")
    if a.has_missing or b.has_missing:
        raise ValueError("matrices contain missing (NaN) entries")
    iu = np.triu_indices(m, k=1)
    a_upper = a.values[iu]
    b_values = b.values
    try:
        a_ranks = _average_ranks(a_upper)
        r_obs = _pearson(a_ranks, _average_ranks(b_values[iu]))
    except ValueError:
        raise ValueError("degenerate constant matrix") from None

    n_exhaustive = math.factorial(m) - 1
    if method == "exact" and n_exhaustive > 500_000:
        raise ValueError(f"exact enumeration infeasible for m={m}")
    exhaustive = method == "exact" or (method == "auto" and n_exhaustive <= permutations)
    perm_rs = []
    if exhaustive:
        identity = tuple(range(m))
        for perm in iter_permutations(range(m)):
            if perm == identity:
                continue
            p = np.array(perm)
            perm_rs.append(_pearson(a_ranks, _average_ranks(b_values[np.ix_(p, p)][iu])))
        n_perm = n_exhaustive
    else:
        identity_arr = np.arange(m)
        for stream in np.random.SeedSequence(seed).spawn(permutations):
            rng = np.random.default_rng(stream)
            p = rng.permutation(m)
            while np.array_equal(p, identity_arr):
                p = rng.permutation(m)
            perm_rs.append(_pearson(a_ranks, _average_ranks(b_values[np.ix_(p, p)][iu])))
        n_perm = permutations

    perm_arr = np.array(perm_rs)
    greater = int((perm_arr >= r_obs).sum())
    p_value = (1 + greater) / (1 + n_perm)
    std = float(perm_arr.std())
    z = (r_obs - float(perm_arr.mean())) / std if std > 0 else math.nan
    return MantelReport(
        r=r_obs,
        p_value=p_value,
        z_score=z,
        permutations=n_perm,
        seed=seed,
        exhaustive=exhaustive,
    )


@dataclass(frozen=True)
class Merge:
    a: int  # cluster ids: leaves are 0..m-1 in label order, merges continue upward
    b: int
    distance: float
    height: float  # distance / 2, the conventional ultrametric node height
    size: int


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]

    def __post_init__(self):
        if len(self.merges) != len(self.leaves) - 1:
            raise ValueError("a dendrogram over m leaves needs m - 1 merges")


def upgma(d: DistanceMatrix) -> Dendrogram:
    """Average-linkage agglomeration; ties pick the smallest (i, j) pair.

    Cluster ids follow label order for leaves and creation order for merged
    clusters, so the tie rule is deterministic.
    """
    m = d.m
    if m < 2:
        raise ValueError("need at least 2 labels")
    if d.has_missing:
        raise ValueError("matrix contains missing (NaN) entries")
    dist: dict[tuple[int, int], float] = {}
    for i in range(m):
        for j in range(i + 1, m):
            dist[(i, j)] = float(d.values[i, j])
    sizes = {i: 1 for i in range(m)}
    active = list(range(m))
    merges: list[Merge] = []
    next_id = m
    while len(active) > 1:
        best: tuple[int, int] | None = None
        best_d = math.inf
        for ai in range(len(active)):
            for aj in range(ai + 1, len(active)):
                pair = (active[ai], active[aj])
                val = dist[pair]
                if val < best_d:
                    best_d = val
                    best = pair
        assert best is not None
        i, j = best
        ni, nj = sizes[i], sizes[j]
        merges.append(
            Merge(a=i, b=j, distance=best_d, height=best_d / 2.0, size=ni + nj)
        )
        for c in active:
            if c == i or c == j:
                continue
            dic = dist.pop((min(i, c), max(i, c)))
            djc = dist.pop((min(j, c), max(j, c)))
            dist[(c, next_id)] = (ni * dic + nj * djc) / (ni + nj)
        del dist[(i, j)]
        active = [c for c in active if c not in (i, j)]
        active.append(next_id)
        sizes[next_id] = ni + nj
        next_id += 1
    return Dendrogram(leaves=d.labels, merges=tuple(merges))


def cophenetic(dendrogram: Dendrogram) -> DistanceMatrix:
    """Pairwise distance implied by the dendrogram: the lowest common merge."""
    m = len(dendrogram.leaves)
    vals = np.zeros((m, m), dtype=np.float64)
    groups: dict[int, list[int]] = {i: [i] for i in range(m)}
    for t, merge in enumerate(dendrogram.merges):
        left = groups.pop(merge.a)
        right = groups.pop(merge.b)
        for x in left:
            for y in right:
                vals[x, y] = vals[y, x] = merge.distance
        groups[m + t] = left + right
    return DistanceMatrix(dendrogram.leaves, vals)


def to_newick(dendrogram: Dendrogram) -> str:
    """Newick with branch lengths from node heights (ultrametric layout)."""
    m = len(dendrogram.leaves)
    children: dict[int, tuple[int, int]] = {}
    heights: dict[int, float] = {i: 0.0 for i in range(m)}
    for t, merge in enumerate(dendrogram.merges):
        children[m + t] = (merge.a, merge.b)
        heights[m + t] = merge.height

    def render(node: int, parent_height: float | None) -> str:
        if node < m:
            label = dendrogram.leaves[node]
            body = label.replace(" ", "_").replace(",", "_").replace(";", "_")
        else:
            a, b = children[node]
            h = heights[node]
            body = f"({render(a, h)},{render(b, h)})"
        if parent_height is None:
            return body
        return f"{body}:{_format_float(parent_height - heights[node])}"

    root = m + len(dendrogram.merges) - 1 if dendrogram.merges else 0
    return render(root, None) + ";"


def discrepancy(a: LabeledMatrix, b: LabeledMatrix) -> LabeledMatrix:
    """Min-max normalize both off-diagonals to [0, 1] and return norm(b) - norm(a).

    Called as discrepancy(visual, citation) this exposes where fields are
    citation-near but visually far (negative) and vice versa (positive).
    """
    if a.labels != b.labels:
        raise ValueError("matrices must share the same labels in the same order")
    m = a.m
    off = ~np.eye(m, dtype=bool)

    def normalize(values: np.ndarray) -> np.ndarray:
        entries = values[off]
        if np.isnan(entries).any():
            raise ValueError("matrix contains missing (NaN) entries")
        lo, hi = float(entries.min()), float(entries.max())
        if hi == lo:
            raise ValueError("constant off-diagonal matrix cannot be normalized")
        out = np.zeros_like(values)
        out[off] = (values[off] - lo) / (hi - lo)
        return out

    result = normalize(b.values) - normalize(a.values)
    np.fill_diagonal(result, 0.0)
    return LabeledMatrix(a.labels, result)


def write_mantel_json(
    report: MantelReport, path: Union[str, Path], extra: dict | None = None
) -> None:
    obj = {
        "r": report.r,
        "p_value": report.p_value,
        "z_score": None if math.isnan(report.z_score) else report.z_score,
        "permutations": report.permutations,
        "seed": report.seed,
        "exhaustive": report.exhaustive,
    }
    if extra:
        obj.update(extra)
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_merges_csv(
    dendrogram: Dendrogram, path: Union[str, Path], comment: str | None = None
) -> None:
    """Merge table; leaf ids 0..m-1 follow the leaf order in the comment."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"# leaves: {','.join(dendrogram.leaves)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "a", "b", "distance", "height", "size"])
        for t, merge in enumerate(dendrogram.merges):
            writer.writerow(
                [
                    t,
                    merge.a,
                    merge.b,
                    _format_float(merge.distance),
                    _format_float(merge.height),
                    merge.size,
                ]
            )
