"""Per-field unigram distributions and the jargon-distance matrix.

The pairwise efficiency E[i][j] is the ratio of field i's unigram entropy
to the cross entropy of field i's distribution against field j's codebook,
both computed over additively smoothed distributions on the union
vocabulary. E is 1 exactly when two smoothed distributions coincide and
strictly below 1 otherwise (Gibbs' inequality), so 1 - (E[i][j] + E[j][i])/2
is a symmetric dissimilarity with zero diagonal.

Note the direction: E is an *efficiency* (identical fields score 1), the
emitted distance is 1 - E averaged. Both matrices are reported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .corpus import FieldLabel, PaperMeta
from .errors import VizsigError
from .matrices import DistanceMatrix

DEFAULT_ALPHA = 0.5

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_MIN_TOKEN_LEN = 2


def tokenize(text: str) -> list[str]:
    """Lowercase, split on any non-alphanumeric, keep tokens of length >= 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= _MIN_TOKEN_LEN]


@dataclass(frozen=True, eq=False)
class TokenDistribution:
    field: FieldLabel
    counts: Mapping[str, int]
    total: int

    def __post_init__(self):
        if not self.counts:
            raise ValueError(f"field '{self.field}': needs at least one token")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError(f"field '{self.field}': negative count")
        if self.total != sum(self.counts.values()):
            raise ValueError(f"field '{self.field}': total does not match counts")


def build_distribution(
    papers: Sequence[PaperMeta], field: FieldLabel
) -> TokenDistribution:
    """Aggregate unigram counts over all abstracts of `field`."""
    counts: dict[str, int] = {}
    for paper in papers:
        if paper.field != field or not paper.abstract:
            continue
        for tok in tokenize(paper.abstract):
            counts[tok] = counts.get(tok, 0) + 1
    if not counts:
        raise VizsigError(f"field '{field}': no usable abstracts")
    return TokenDistribution(field=field, counts=counts, total=sum(counts.values()))


@dataclass(frozen=True, eq=False)
class JargonResult:
    """Efficiency matrix E plus its symmetrized distance, shared label order."""

    labels: tuple[str, ...]
    efficiency: np.ndarray  # m x m, E[i][i] = 1
    distance: DistanceMatrix
    vocabulary_size: int


def jargon_distance(
    dists: Sequence[TokenDistribution], alpha: float = DEFAULT_ALPHA
) -> JargonResult:
    """Entropy / cross-entropy efficiency over the union vocabulary.

    With V the union vocabulary, each field's smoothed probability is
    (count + alpha) / (total + alpha * |V|). Labels are sorted; requires at
    least two distributions and alpha > 0.
    """
    if len(dists) < 2:
        raise ValueError("need at least two distributions")
    if alpha <= 0:
        raise ValueError("alpha must be positive (cross entropy needs full support)")
    fields = [d.field for d in dists]
    if len(set(fields)) != len(fields):
        raise ValueError("duplicate field labels")
    ordered = sorted(dists, key=lambda d: d.field)
    labels = tuple(d.field for d in ordered)
    vocab = sorted(set().union(*(d.counts.keys() for d in ordered)))
    v = len(vocab)
    if v < 2:
        # a one-token vocabulary has zero entropy everywhere, making E = 0/0
        raise ValueError("union vocabulary must contain at least 2 tokens")
    index = {tok: i for i, tok in enumerate(vocab)}

    m = len(ordered)
    counts = np.zeros((m, v), dtype=np.float64)
    for i, dist in enumerate(ordered):
        for tok, c in dist.counts.items():
            counts[i, index[tok]] = c
    totals = counts.sum(axis=1, keepdims=True)
    probs = (counts + alpha) / (totals + alpha * v)
    logs = np.log2(probs)
    entropy = -(probs * logs).sum(axis=1)  # H(X_i)
    cross = -(probs @ logs.T)  # Q[i, j] = cross entropy of field i under j
    # Q(p_i || p_i) is H(X_i) by definition; pin the diagonal so the two
    # summation orders cannot leave E[i][i] a few ulps away from 1.
    np.fill_diagonal(cross, entropy)
    eff = entropy[:, None] / cross
    dist_vals = 1.0 - 0.5 * (eff + eff.T)
    # Exact-arithmetic values are >= 0 by Gibbs' inequality; clamp the last-ulp
    # noise from the two summation orders of H and Q.
    tiny = np.abs(dist_vals) <= 1e-12
    dist_vals[tiny & (dist_vals < 0)] = 0.0
    np.fill_diagonal(dist_vals, 0.0)
    return JargonResult(
        labels=labels,
        efficiency=eff,
        distance=DistanceMatrix(labels, dist_vals),
        vocabulary_size=v,
    )


def write_vocabulary(
    dist: TokenDistribution, path: Union[str, Path]
) -> None:
    """Dump ``token,count`` lines, tokens sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for tok in sorted(dist.counts):
            fh.write(f"{tok},{dist.counts[tok]}\n")
