"""Caption topic modeling: TF-IDF term-document matrix and NMF.

NMF uses the multiplicative updates for the squared Frobenius objective
with a small denominator guard; the objective trace is recorded per
iteration and is non-increasing up to numerical slack. Reports normalize
topic-term rows to unit L1 mass, so keyword rankings do not depend on the
W/H scale ambiguity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .corpus import FigureMeta
from .errors import VizsigError
from .matrices import _format_float
from .textmetrics import tokenize

DEFAULT_TOPICS = 5
DEFAULT_MAX_ITER = 200
DEFAULT_TOL = 1e-4

_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class TermDocMatrix:
    """Docs x terms TF-IDF weights; empty documents are dropped and listed."""

    vocabulary: tuple[str, ...]
    weights: np.ndarray
    doc_ids: tuple[str, ...]
    doc_years: tuple[int, ...]
    dropped_docs: tuple[str, ...] = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape != (len(self.doc_ids), len(self.vocabulary)):
            raise ValueError("weights must be docs x terms")
        if len(self.doc_years) != len(self.doc_ids):
            raise ValueError("doc_years must align with doc_ids")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if w.shape[0] and not (w > 0).any(axis=1).all():
            raise ValueError("every document row needs a nonzero entry")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def build_term_doc(
    captions: Sequence[FigureMeta], *, fallback_raw_tf: bool = False
) -> TermDocMatrix:
    """TF-IDF matrix over figure captions: tf(d, x) * ln(N / df(x)), rows L2-normalized.

    Documents with no tokens, and documents whose every token is ubiquitous
    (zero idf everywhere), are dropped and reported. A corpus whose matrix
    would be entirely zero raises "degenerate idf" unless
    `fallback_raw_tf` is set, in which case raw term frequencies are used.
    """
    docs: list[tuple[str, int, dict[str, int]]] = []
    dropped: list[str] = []
    for fig in captions:
        toks = tokenize(fig.caption) if fig.caption else []
        if not toks:
            dropped.append(fig.figure_id)
            continue
        tf: dict[str, int] = {}
        for t in toks:
            tf[t] = tf.get(t, 0) + 1
        docs.append((fig.figure_id, fig.year, tf))
    if not docs:
        raise VizsigError("no non-empty captions")
    n_docs = len(docs)
    df: dict[str, int] = {}
    for _, _, tf in docs:
        for t in tf:
            df[t] = df.get(t, 0) + 1
    vocab = tuple(sorted(df))
    index = {t: i for i, t in enumerate(vocab)}
    idf = np.array([np.log(n_docs / df[t]) for t in vocab])
    if not (idf > 0).any():
        if not fallback_raw_tf:
            raise VizsigError(
                "degenerate idf: every term appears in every document "
                "(set fallback_raw_tf=True to weight by raw term frequency)"
            )
        idf = np.ones(len(vocab))
    weights = np.zeros((n_docs, len(vocab)), dtype=np.float64)
    for row, (_, _, tf) in enumerate(docs):
        for t, count in tf.items():
            weights[row, index[t]] = count * idf[index[t]]
    keep = (weights > 0).any(axis=1)
    for row, (fid, _, _) in enumerate(docs):
        if not keep[row]:
            dropped.append(fid)
    kept_docs = [d for d, flag in zip(docs, keep) if flag]
    weights = weights[keep]
    norms = np.sqrt((weights * weights).sum(axis=1, keepdims=True))
    weights = weights / norms
    return TermDocMatrix(
        vocabulary=vocab,
        weights=weights,
        doc_ids=tuple(d[0] for d in kept_docs),
        doc_years=tuple(d[1] for d in kept_docs),
        dropped_docs=tuple(dropped),
    )


@dataclass(frozen=True, eq=False)
class TopicModel:
    w: np.ndarray  # docs x topics
    h: np.ndarray  # topics x terms
    objective_trace: tuple[float, ...]
    vocabulary: tuple[str, ...]
    doc_ids: tuple[str, ...]
    doc_years: tuple[int, ...]

    def __post_init__(self):
        if np.any(self.w < 0) or np.any(self.h < 0):
            raise ValueError("factors must be non-negative")

    @property
    def topics(self) -> int:
        return self.w.shape[1]

    def h_normalized(self) -> np.ndarray:
        """Topic-term rows scaled to unit L1 mass (scale-stable rankings)."""
        sums = self.h.sum(axis=1, keepdims=True)
        sums[sums == 0] = 1.0
        return self.h / sums


def nmf_fit(
    matrix: TermDocMatrix,
    topics: int = DEFAULT_TOPICS,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> TopicModel:
    """Multiplicative-update NMF of the squared Frobenius objective.

    Uniform(0, 1) seeded initialization; stops at `max_iter` or when the
    relative objective change drops below `tol`.
    """
    v = matrix.weights
    n_docs, n_terms = v.shape
    if not 1 <= topics <= min(n_docs, n_terms):
        raise ValueError(f"topics={topics} outside [1, {min(n_docs, n_terms)}]")
    rng = np.random.default_rng(seed)
    w = rng.random((n_docs, topics))
    h = rng.random((topics, n_terms))
    trace: list[float] = []
    prev: float | None = None
    for _ in range(max_iter):
        h *= (w.T @ v) / (w.T @ w @ h + _EPS)
        w *= (v @ h.T) / (w @ (h @ h.T) + _EPS)
        diff = v - w @ h
        objective = float((diff * diff).sum())
        trace.append(objective)
        if prev is not None and abs(prev - objective) <= tol * max(prev, _EPS):
            break
        prev = objective
    return TopicModel(
        w=w,
        h=h,
        objective_trace=tuple(trace),
        vocabulary=matrix.vocabulary,
        doc_ids=matrix.doc_ids,
        doc_years=matrix.doc_years,
    )


def top_keywords(model: TopicModel, t_index: int, count: int = 10) -> list[str]:
    """Tokens of the `count` largest topic-term weights; ties alphabetical."""
    if not 0 <= t_index < model.topics:
        raise ValueError(f"topic {t_index} outside [0, {model.topics})")
    if count > len(model.vocabulary):
        raise ValueError(f"count={count} exceeds vocabulary size {len(model.vocabulary)}")
    row = model.h[t_index]
    ranked = sorted(zip(model.vocabulary, row), key=lambda kv: (-kv[1], kv[0]))
    return [tok for tok, _ in ranked[:count]]


def topic_share_by_year(model: TopicModel) -> dict[int, np.ndarray]:
    """Fraction of each year's documents whose argmax topic is t.

    Every document is hard-assigned to its largest W entry (lowest index on
    ties); each year's vector sums to 1. Years with no documents are absent.
    """
    assignments = model.w.argmax(axis=1)
    shares: dict[int, np.ndarray] = {}
    for year in sorted(set(model.doc_years)):
        mask = np.array([y == year for y in model.doc_years])
        counts = np.bincount(assignments[mask], minlength=model.topics).astype(np.float64)
        shares[year] = counts / counts.sum()
    return shares


def exemplar_docs(model: TopicModel, t_index: int, count: int = 3) -> list[str]:
    """Doc ids with the largest loading on the topic (report aid)."""
    order = np.argsort(-model.w[:, t_index], kind="stable")
    return [model.doc_ids[i] for i in order[:count]]


def write_topic_report_csv(
    model: TopicModel,
    path: Union[str, Path],
    keywords: int = 10,
    exemplars: int = 3,
    comment: str | None = None,
) -> None:
    """One row per topic: keywords, exemplar docs, per-year share columns."""
    shares = topic_share_by_year(model)
    years = sorted(shares)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["topic", "keywords", "exemplars"] + [str(y) for y in years])
        for t in range(model.topics):
            writer.writerow(
                [
                    t,
                    "|".join(top_keywords(model, t, min(keywords, len(model.vocabulary)))),
                    "|".join(exemplar_docs(model, t, exemplars)),
                ]
                + [_format_float(shares[y][t]) for y in years]
            )
