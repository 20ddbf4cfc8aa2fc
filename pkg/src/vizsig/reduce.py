"""Principal component analysis for figure vectors.

Fit is SVD-based on the mean-centered data (numerically safer than an
explicit covariance eigendecomposition at d up to a few thousand), with all
accumulation in float64. Components carry a deterministic sign convention:
each is flipped so that its largest-magnitude coordinate is positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .container import read_container, write_container
from .corpus import EmbeddingMatrix

DEFAULT_COMPONENTS = 256
DEFAULT_SAMPLE_CAP = 1_500_000

_ORTHO_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Fitted projection: orthonormal components over a shared mean.

    `explained_variance` is sorted non-increasing; ratios are fractions of
    the total variance of the fitted data (all directions, not just the
    retained ones). `padded_components` counts trailing directions that had
    no variance left (rank-deficient input); they are still orthonormal.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    padded_components: int = 0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        comps = np.asarray(self.components, dtype=np.float64)
        ev = np.asarray(self.explained_variance, dtype=np.float64)
        ratio = np.asarray(self.explained_variance_ratio, dtype=np.float64)
        if comps.ndim != 2 or mean.ndim != 1 or comps.shape[1] != mean.shape[0]:
            raise ValueError("components must be p x d with a d-vector mean")
        p = comps.shape[0]
        if ev.shape != (p,) or ratio.shape != (p,):
            raise ValueError("variance vectors must have one entry per component")
        gram = comps @ comps.T
        if not np.allclose(gram, np.eye(p), atol=_ORTHO_TOL, rtol=0):
            raise ValueError(f"components not orthonormal within {_ORTHO_TOL}")
        if np.any(np.diff(ev) > 1e-12) or np.any(ev < -1e-12):
            raise ValueError("explained_variance must be non-negative, descending")
        if np.any(ratio < -1e-12) or np.any(ratio > 1 + 1e-9) or ratio.sum() > 1 + 1e-9:
            raise ValueError("explained_variance_ratio must lie in [0, 1], sum <= 1")
        for arr in (mean, comps, ev, ratio):
            arr.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "explained_variance", ev)
        object.__setattr__(self, "explained_variance_ratio", ratio)

    @property
    def p(self) -> int:
        return self.components.shape[0]

    @property
    def d(self) -> int:
        return self.components.shape[1]


def _apply_sign_convention(components: np.ndarray) -> np.ndarray:
    flipped = components.copy()
    for row in flipped:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return flipped


def pca_fit(
    data: EmbeddingMatrix,
    p: int,
    *,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
) -> PcaModel:
    """Fit a p-component model; requires 1 <= p <= min(n - 1, d) and n >= 2.

    When n exceeds `sample_cap` the model is fitted on a uniform seeded
    sample of `sample_cap` rows.
    """
    n, d = data.n, data.d
    if n < 2:
        raise ValueError(f"need at least 2 rows to fit, got {n}")
    p_max = min(n - 1, d)
    if not 1 <= p <= p_max:
        raise ValueError(f"p={p} out of range [1, {p_max}] for n={n}, d={d}")
    X = data.values.astype(np.float64)
    if n > sample_cap:
        if p > min(sample_cap - 1, d):
            raise ValueError(f"sample_cap={sample_cap} too small to fit p={p}")
        rows = np.sort(np.random.default_rng(seed).choice(n, sample_cap, replace=False))
        X = X[rows]
    n_used = X.shape[0]
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    eig = (s * s) / (n_used - 1)
    total = float(eig.sum())
    # Directions whose singular value is numerically zero carry no variance;
    # they stay orthonormal but are flagged as padding.
    cutoff = s[0] * max(n_used, d) * np.finfo(np.float64).eps if s.size else 0.0
    zero = s[:p] <= cutoff
    ev = eig[:p].copy()
    ev[zero] = 0.0
    ratio = ev / total if total > 0 else np.zeros_like(ev)
    comps = _apply_sign_convention(vt[:p])
    return PcaModel(
        mean=mean,
        components=comps,
        explained_variance=ev,
        explained_variance_ratio=ratio,
        padded_components=int(zero.sum()),
    )


def pca_transform(model: PcaModel, data: EmbeddingMatrix) -> EmbeddingMatrix:
    """Project rows: output_i = components @ (row_i - mean); ids preserved."""
    if data.d != model.d:
        raise ValueError(f"data has {data.d} columns, model expects {model.d}")
    reduced = (data.values.astype(np.float64) - model.mean) @ model.components.T
    return EmbeddingMatrix(reduced.astype(np.float32), data.row_ids)


def pca_inverse_transform(model: PcaModel, reduced: EmbeddingMatrix) -> EmbeddingMatrix:
    """Map projected rows back: mean + components^T @ y."""
    if reduced.d != model.p:
        raise ValueError(f"data has {reduced.d} columns, model has p={model.p}")
    restored = reduced.values.astype(np.float64) @ model.components + model.mean
    return EmbeddingMatrix(restored.astype(np.float32), reduced.row_ids)


def save_pca(model: PcaModel, path: Union[str, Path]) -> None:
    write_container(
        {
            "mean": model.mean,
            "components": model.components,
            "explained_variance": model.explained_variance,
            "explained_variance_ratio": model.explained_variance_ratio,
            "meta": json.dumps({"padded_components": model.padded_components}),
        },
        path,
    )


def load_pca(path: Union[str, Path]) -> PcaModel:
    sections = read_container(path)
    meta = json.loads(sections["meta"])
    return PcaModel(
        mean=sections["mean"],
        components=sections["components"],
        explained_variance=sections["explained_variance"],
        explained_variance_ratio=sections["explained_variance_ratio"],
        padded_components=int(meta["padded_components"]),
    )
