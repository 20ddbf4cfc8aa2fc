"""Citation graph loading, field path distances, and yearly citation counts.

Path queries run on the undirected view of the citation graph (directed
citation DAGs leave most ordered pairs unreachable, while the metric here is
topological proximity). Field-to-field distance is the mean BFS hop count
over all vertex pairs drawn from the two fields, enumerated exhaustively
when the pair count fits the sampling budget and uniformly sampled
otherwise. Unreachable pairs are excluded from the mean and counted in the
diagnostics instead of being assigned an arbitrary penalty.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .corpus import PaperMeta, read_edges
from .errors import VizsigError
from .matrices import DistanceMatrix

DEFAULT_SAMPLE_SIZE = 10_000


@dataclass(frozen=True)
class GraphLoadReport:
    edges_read: int
    kept_edges: int
    dropped_unknown: int
    dropped_self_loops: int
    duplicate_edges: int


@dataclass(frozen=True, eq=False)
class CitationGraph:
    """Validated citation graph: deduplicated edges over known papers only."""

    ids: tuple[str, ...]
    fields: tuple[str, ...]
    years: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]  # directed (citing, cited), deduplicated
    adjacency: tuple[tuple[int, ...], ...]  # undirected, sorted neighbour lists
    report: GraphLoadReport

    @property
    def n(self) -> int:
        return len(self.ids)

    def index_of(self, paper_id: str) -> int:
        idx = self._index.get(paper_id)
        if idx is None:
            raise VizsigError(f"unknown paper_id '{paper_id}'")
        return idx

    @property
    def _index(self) -> dict[str, int]:
        cached = getattr(self, "_index_cache", None)
        if cached is None:
            cached = {pid: i for i, pid in enumerate(self.ids)}
            object.__setattr__(self, "_index_cache", cached)
        return cached


def build_graph(
    edges: Sequence[tuple[str, str]], papers: Sequence[PaperMeta]
) -> CitationGraph:
    """Validate raw edges against paper metadata.

    Every paper becomes a node (isolated papers included); edges touching
    unknown papers are dropped and counted, as are self-loops and
    duplicates. Node order is sorted by paper id, so the graph does not
    depend on metadata or edge file order.
    """
    ordered = sorted(papers, key=lambda p: p.paper_id)
    ids = tuple(p.paper_id for p in ordered)
    if len(set(ids)) != len(ids):
        raise VizsigError("duplicate paper_id in metadata")
    index = {pid: i for i, pid in enumerate(ids)}
    dropped_unknown = dropped_self = dup = 0
    kept: set[tuple[int, int]] = set()
    for citing, cited in edges:
        a, b = index.get(citing), index.get(cited)
        if a is None or b is None:
            dropped_unknown += 1
            continue
        if a == b:
            dropped_self += 1
            continue
        if (a, b) in kept:
            dup += 1
            continue
        kept.add((a, b))
    neighbours: list[set[int]] = [set() for _ in ids]
    for a, b in kept:
        neighbours[a].add(b)
        neighbours[b].add(a)
    report = GraphLoadReport(
        edges_read=len(edges),
        kept_edges=len(kept),
        dropped_unknown=dropped_unknown,
        dropped_self_loops=dropped_self,
        duplicate_edges=dup,
    )
    return CitationGraph(
        ids=ids,
        fields=tuple(p.field for p in ordered),
        years=tuple(p.year for p in ordered),
        edges=tuple(sorted(kept)),
        adjacency=tuple(tuple(sorted(s)) for s in neighbours),
        report=report,
    )


def load_graph(
    edge_path: Union[str, Path], papers: Sequence[PaperMeta]
) -> CitationGraph:
    return build_graph(read_edges(edge_path), papers)


def bfs_distances(graph: CitationGraph, source: int) -> np.ndarray:
    """Hop counts from `source` on the undirected view; -1 = unreachable."""
    dist = np.full(graph.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    adjacency = graph.adjacency
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in adjacency[u]:
            if dist[v] < 0:
                dist[v] = du + 1
                queue.append(v)
    return dist


@dataclass(frozen=True)
class PairDiagnostics:
    field_a: str
    field_b: str
    sampled_pairs: int
    unreachable_pairs: int
    exhaustive: bool


@dataclass(frozen=True, eq=False)
class FieldPathDistance:
    """Field distance matrix plus per-pair diagnostics.

    The matrix diagonal stays zero; intra-field averages, when requested,
    live in `intra` (and in the diagnostics) so the result remains a valid
    DistanceMatrix. Missing pairs (nothing reachable) are NaN.
    """

    distance: DistanceMatrix
    diagnostics: tuple[PairDiagnostics, ...]
    intra: dict[str, float] | None = None


def avg_shortest_path(
    graph: CitationGraph,
    fields: Sequence[str],
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    seed: int = 0,
    include_intra: bool = False,
) -> FieldPathDistance:
    """Average BFS hop distance between every pair of the given fields.

    A field pair is enumerated exhaustively when |A| * |B| <= sample_size,
    otherwise `sample_size` pairs are drawn uniformly (with replacement)
    from a per-pair RNG stream derived from `seed`. Unreachable pairs are
    excluded from the mean and counted.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    labels = tuple(sorted(set(fields)))
    if len(labels) < 1:
        raise ValueError("need at least one field")
    members: dict[str, np.ndarray] = {}
    field_arr = np.array(graph.fields)
    for lab in labels:
        idx = np.flatnonzero(field_arr == lab)
        if idx.size == 0:
            raise VizsigError(f"field '{lab}' has no nodes in the graph")
        members[lab] = idx
    m = len(labels)
    values = np.zeros((m, m), dtype=np.float64)
    diagnostics: list[PairDiagnostics] = []
    intra: dict[str, float] = {}

    bfs_cache: dict[int, np.ndarray] = {}

    def distances_from(src: int) -> np.ndarray:
        hit = bfs_cache.get(src)
        if hit is None:
            hit = bfs_distances(graph, src)
            bfs_cache[src] = hit
        return hit

    pair_list = []
    for i in range(m):
        start = i if include_intra else i + 1
        for j in range(start, m):
            pair_list.append((i, j))
    streams = np.random.SeedSequence(seed).spawn(len(pair_list))

    for pair_idx, (i, j) in enumerate(pair_list):
        a_nodes, b_nodes = members[labels[i]], members[labels[j]]
        n_pairs = a_nodes.size * b_nodes.size
        exhaustive = n_pairs <= sample_size
        total = 0.0
        reachable = 0
        unreachable = 0
        if exhaustive:
            for src in a_nodes:
                dist = distances_from(int(src))[b_nodes]
                good = dist >= 0
                total += float(dist[good].sum())
                reachable += int(good.sum())
                unreachable += int((~good).sum())
            sampled = n_pairs
        else:
            rng = np.random.default_rng(streams[pair_idx])
            pick_a = a_nodes[rng.integers(0, a_nodes.size, size=sample_size)]
            pick_b = b_nodes[rng.integers(0, b_nodes.size, size=sample_size)]
            for src, dst in zip(pick_a, pick_b):
                d = int(distances_from(int(src))[dst])
                if d < 0:
                    unreachable += 1
                else:
                    total += d
                    reachable += 1
            sampled = sample_size
        mean = total / reachable if reachable else float("nan")
        if i == j:
            intra[labels[i]] = mean
        else:
            values[i, j] = values[j, i] = mean
        diagnostics.append(
            PairDiagnostics(
                field_a=labels[i],
                field_b=labels[j],
                sampled_pairs=sampled,
                unreachable_pairs=unreachable,
                exhaustive=exhaustive,
            )
        )

    return FieldPathDistance(
        distance=DistanceMatrix(labels, values),
        diagnostics=tuple(diagnostics),
        intra=intra if include_intra else None,
    )


def yearly_citation_counts(
    graph: CitationGraph, paper_ids: Sequence[str]
) -> dict[str, dict[int, int]]:
    """count[p][y] = number of citing papers with year y that cite p."""
    wanted = {}
    for pid in paper_ids:
        wanted[graph.index_of(pid)] = pid
    out: dict[str, dict[int, int]] = {pid: {} for pid in paper_ids}
    for citing, cited in graph.edges:
        pid = wanted.get(cited)
        if pid is None:
            continue
        year = graph.years[citing]
        bucket = out[pid]
        bucket[year] = bucket.get(year, 0) + 1
    return {pid: dict(sorted(years.items())) for pid, years in out.items()}


def write_diagnostics_csv(
    result: FieldPathDistance, path: Union[str, Path], comment: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["field_i", "field_j", "sampled_pairs", "unreachable_pairs", "exhaustive"]
        )
        for diag in result.diagnostics:
            writer.writerow(
                [
                    diag.field_a,
                    diag.field_b,
                    diag.sampled_pairs,
                    diag.unreachable_pairs,
                    int(diag.exhaustive),
                ]
            )
