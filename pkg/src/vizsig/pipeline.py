"""End-to-end pipeline: ingest -> PCA -> K-means -> signatures -> distances
-> Mantel -> UPGMA -> discrepancy, with every artifact written to disk.

Each stage is wrapped so the first failure aborts with the stage name.
Reruns with identical inputs and seeds produce byte-identical artifacts:
nothing here depends on wall time, hashing order, or thread count.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, TypeVar

from . import graphmetrics, inference, reduce, signatures, textmetrics
from .corpus import read_embeddings, read_metadata
from .errors import PipelineStageError, VizsigError
from .matrices import write_labeled_csv, write_square_csv

T = TypeVar("T")


@dataclass(frozen=True)
class PipelineConfig:
    embeddings_path: str
    figures_path: str
    papers_path: str
    edges_path: str
    out_dir: str
    dims: int = reduce.DEFAULT_COMPONENTS
    k: int = signatures.DEFAULT_K
    alpha: float = textmetrics.DEFAULT_ALPHA
    sample_size: int = graphmetrics.DEFAULT_SAMPLE_SIZE
    permutations: int = inference.DEFAULT_PERMUTATIONS
    pca_seed: int = 0
    kmeans_seed: int = 0
    citation_seed: int = 0
    mantel_seed: int = 0

    def comment(self, stage: str) -> str:
        """Seed/parameter audit line for output headers.

        Paths stay out on purpose: they live in pipeline_config.json, and
        keeping them out makes runs into different directories byte-identical.
        """
        keys = (
            "dims", "k", "alpha", "sample_size", "permutations",
            "pca_seed", "kmeans_seed", "citation_seed", "mantel_seed",
        )
        values = asdict(self)
        return f"stage={stage} " + " ".join(f"{k}={values[k]}" for k in keys)


def _stage(name: str, fn: Callable[[], T]) -> T:
    try:
        return fn()
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc


def run_pipeline(config: PipelineConfig) -> dict[str, Path]:
    """Run every stage; returns artifact name -> path. Idempotent per seeds."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Path] = {}

    def emit(name: str, filename: str) -> Path:
        path = out / filename
        artifacts[name] = path
        return path

    def ingest():
        embeddings = read_embeddings(config.embeddings_path)
        figures = read_metadata(config.figures_path)
        papers = read_metadata(config.papers_path)
        if figures and not hasattr(figures[0], "figure_id"):
            raise VizsigError(f"{config.figures_path} holds paper records")
        if papers and not hasattr(papers[0], "abstract"):
            raise VizsigError(f"{config.papers_path} holds figure records")
        return embeddings, figures, papers

    embeddings, figures, papers = _stage("ingest", ingest)

    def do_pca():
        model = reduce.pca_fit(embeddings, config.dims, seed=config.pca_seed)
        reduced = reduce.pca_transform(model, embeddings)
        reduce.save_pca(model, emit("pca_model", "pca_model.bin"))
        from .corpus import write_embeddings

        write_embeddings(reduced, emit("reduced", "reduced.vsig"))
        return reduced

    reduced = _stage("pca", do_pca)

    def do_cluster():
        model = signatures.kmeans_fit(reduced, config.k, seed=config.kmeans_seed)
        assign = signatures.kmeans_assign(model, reduced)
        signatures.save_kmeans(model, emit("kmeans_model", "kmeans_model.bin"))
        mapping = dict(zip(reduced.row_ids, (int(c) for c in assign)))
        signatures.write_assignments_csv(
            mapping,
            config.k,
            emit("assignments", "assignments.csv"),
            comment=config.comment("cluster"),
        )
        return mapping

    assignment_map = _stage("cluster", do_cluster)

    def do_signatures():
        sigs = signatures.build_signatures(assignment_map, figures, config.k)
        signatures.write_signatures_csv(
            sigs, emit("signatures", "signatures.csv"), comment=config.comment("signatures")
        )
        return sigs

    sigs = _stage("signatures", do_signatures)

    def do_visual():
        dist = signatures.visual_distance(sigs)
        write_labeled_csv(
            emit("dist_visual", "dist_visual.csv"), dist, comment=config.comment("dist-visual")
        )
        return dist

    visual = _stage("dist-visual", do_visual)

    def do_jargon():
        fields = sorted({p.field for p in papers})
        dists = [textmetrics.build_distribution(papers, f) for f in fields]
        result = textmetrics.jargon_distance(dists, alpha=config.alpha)
        write_square_csv(
            emit("jargon_efficiency", "jargon_efficiency.csv"),
            result.labels,
            result.efficiency,
            comment=config.comment("dist-jargon") + " note=raw-asymmetric-efficiency",
        )
        write_labeled_csv(
            emit("dist_jargon", "dist_jargon.csv"),
            result.distance,
            comment=config.comment("dist-jargon"),
        )
        return result.distance

    jargon = _stage("dist-jargon", do_jargon)

    def do_citation():
        graph = graphmetrics.load_graph(config.edges_path, papers)
        fields = sorted({p.field for p in papers})
        result = graphmetrics.avg_shortest_path(
            graph, fields, sample_size=config.sample_size, seed=config.citation_seed
        )
        write_labeled_csv(
            emit("dist_citation", "dist_citation.csv"),
            result.distance,
            comment=config.comment("dist-citation"),
        )
        graphmetrics.write_diagnostics_csv(
            result,
            emit("dist_citation_diagnostics", "dist_citation_diagnostics.csv"),
            comment=config.comment("dist-citation"),
        )
        return result.distance

    citation = _stage("dist-citation", do_citation)

    def do_mantel():
        common = sorted(set(visual.labels) & set(jargon.labels) & set(citation.labels))
        if len(common) < 4:
            raise VizsigError(
                f"only {len(common)} fields shared by all three matrices, need >= 4"
            )
        pairs = {
            "mantel_visual_citation": (visual, citation),
            "mantel_visual_jargon": (visual, jargon),
            "mantel_jargon_citation": (jargon, citation),
        }
        reports = {}
        for name, (a, b) in pairs.items():
            report = inference.mantel_test(
                a.submatrix(common),
                b.submatrix(common),
                permutations=config.permutations,
                seed=config.mantel_seed,
            )
            inference.write_mantel_json(
                report, emit(name, f"{name}.json"), extra={"labels": common}
            )
            reports[name] = report
        return reports

    _stage("mantel", do_mantel)

    def do_upgma():
        for name, dist in (("visual", visual), ("jargon", jargon), ("citation", citation)):
            if dist.has_missing:
                raise VizsigError(f"{name} distance matrix has missing entries")
            dend = inference.upgma(dist)
            emit(f"upgma_{name}_newick", f"upgma_{name}.nwk").write_text(
                inference.to_newick(dend) + "\n"
            )
            inference.write_merges_csv(
                dend,
                emit(f"upgma_{name}_merges", f"upgma_{name}_merges.csv"),
                comment=config.comment("upgma"),
            )

    _stage("upgma", do_upgma)

    def do_discrepancy():
        common = sorted(set(visual.labels) & set(citation.labels))
        diff = inference.discrepancy(
            visual.submatrix(common), citation.submatrix(common)
        )
        write_labeled_csv(
            emit("discrepancy", "discrepancy_citation_minus_visual.csv"),
            diff,
            comment=config.comment("discrepancy"),
        )

    _stage("discrepancy", do_discrepancy)

    config_path = emit("config", "pipeline_config.json")
    config_path.write_text(json.dumps(asdict(config), sort_keys=True, indent=2) + "\n")
    return artifacts
