"""Command-line surface for the toolkit.

Exit codes: 0 success, 1 data/file error, 2 usage error. Every stochastic
subcommand takes an explicit seed flag with a documented default, and the
resolved configuration is echoed both to stderr and into the ``#`` header
of each output file, so reruns are auditable and byte-identical.

``--threads`` is accepted everywhere for interface stability; all
computations are deterministic reductions, so results never depend on it.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np

from . import (
    figclass,
    graphmetrics,
    inference,
    reduce,
    signatures,
    synthetic,
    textmetrics,
    topics,
    trend as trend_mod,
)
from .corpus import (
    read_edges,
    read_embeddings,
    read_metadata,
    validate_corpus,
    write_edges,
    write_embeddings,
    write_metadata,
)
from .errors import PipelineStageError, VizsigError
from .matrices import read_distance_csv, write_labeled_csv, write_square_csv
from .pipeline import PipelineConfig, run_pipeline


def _run(fn):
    """Map data errors to exit 1; click owns usage errors (exit 2)."""
    try:
        fn()
    except PipelineStageError as exc:
        raise click.ClickException(str(exc)) from exc
    except (VizsigError, OSError, ValueError, KeyError) as exc:
        raise click.ClickException(str(exc)) from exc


def _echo_config(cmd: str, **params) -> str:
    line = f"{cmd} " + " ".join(f"{k}={v}" for k, v in sorted(params.items()))
    click.echo(f"# {line}", err=True)
    return line


threads_option = click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Worker count; results are independent of this value.",
)


@click.group()
def main():
    """Delineate fields from the figures their papers contain."""


@main.command()
@click.option("--embeddings", required=True, help="VSIG embedding file.")
@click.option("--figures", required=True, help="Figure metadata JSONL.")
@click.option("--papers", default=None, help="Paper metadata JSONL (optional).")
@click.option("--strict", is_flag=True, help="Exit 1 if any orphan is found.")
@threads_option
def validate(embeddings, figures, papers, strict, threads):
    """Cross-check embedding rows against metadata and report orphans."""

    def body():
        _echo_config("validate", embeddings=embeddings, figures=figures, papers=papers)
        matrix = read_embeddings(embeddings)
        figs = read_metadata(figures)
        paps = read_metadata(papers) if papers else ()
        report = validate_corpus(matrix, figs, paps)
        click.echo(report.summary())
        if strict and not report.ok:
            raise VizsigError("corpus has orphans (strict mode)")

    _run(body)


@main.command()
@click.option("--embeddings", required=True, help="VSIG embedding file.")
@click.option("--dims", type=int, default=reduce.DEFAULT_COMPONENTS, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--sample-cap",
    type=int,
    default=reduce.DEFAULT_SAMPLE_CAP,
    show_default=True,
    help="Fit on a seeded row sample when the corpus exceeds this.",
)
@click.option("--out-model", required=True, help="Output model container.")
@click.option("--out-reduced", required=True, help="Output reduced VSIG file.")
@threads_option
def pca(embeddings, dims, seed, sample_cap, out_model, out_reduced, threads):
    """Fit a PCA model and write the reduced embedding matrix."""

    def body():
        _echo_config("pca", embeddings=embeddings, dims=dims, seed=seed)
        data = read_embeddings(embeddings)
        model = reduce.pca_fit(data, dims, sample_cap=sample_cap, seed=seed)
        reduce.save_pca(model, out_model)
        write_embeddings(reduce.pca_transform(model, data), out_reduced)
        click.echo(
            f"explained variance ratio (sum of {dims}): "
            f"{model.explained_variance_ratio.sum():.4f}"
        )
        if model.padded_components:
            click.echo(
                f"warning: {model.padded_components} zero-variance components",
                err=True,
            )

    _run(body)


@main.command("sweep-pca")
@click.option("--embeddings", required=True)
@click.option("--figures", required=True)
@click.option("--papers", required=True)
@click.option("--edges", required=True)
@click.option("--dims", default="16,32,64,128,256,320", show_default=True)
@click.option("--k-range", default="2..30", show_default=True)
@click.option("--pca-seed", type=int, default=0, show_default=True)
@click.option("--kmeans-seed", type=int, default=0, show_default=True)
@click.option("--citation-seed", type=int, default=0, show_default=True)
@click.option(
    "--sample-size", type=int, default=graphmetrics.DEFAULT_SAMPLE_SIZE, show_default=True
)
@click.option("--out", required=True, help="Output sweep table CSV.")
@threads_option
def sweep_pca(
    embeddings,
    figures,
    papers,
    edges,
    dims,
    k_range,
    pca_seed,
    kmeans_seed,
    citation_seed,
    sample_size,
    out,
    threads,
):
    """Sweep PCA dimensions and cluster counts against citation distance.

    Emits one row per dimension: cumulative explained variance ratio, the
    mean and max Spearman correlation between visual and citation distance
    over the k range, and the argmax k.
    """

    def body():
        comment = _echo_config(
            "sweep-pca", dims=dims, k_range=k_range, pca_seed=pca_seed,
            kmeans_seed=kmeans_seed, citation_seed=citation_seed,
        )
        dim_list = [int(x) for x in dims.split(",") if x]
        lo, hi = (int(x) for x in k_range.split(".."))
        if not dim_list or lo < 1 or hi < lo:
            raise ValueError(f"bad sweep ranges dims={dims!r} k-range={k_range!r}")
        data = read_embeddings(embeddings)
        figs = read_metadata(figures)
        paps = read_metadata(papers)
        graph = graphmetrics.build_graph(read_edges(edges), paps)
        fields = sorted({p.field for p in paps})
        citation = graphmetrics.avg_shortest_path(
            graph, fields, sample_size=sample_size, seed=citation_seed
        ).distance
        iu = np.triu_indices(citation.m, k=1)
        rows = []
        for dim in dim_list:
            model = reduce.pca_fit(data, dim, seed=pca_seed)
            reduced = reduce.pca_transform(model, data)
            correlations = []
            for k in range(lo, hi + 1):
                km = signatures.kmeans_fit(reduced, k, seed=kmeans_seed)
                assign = signatures.kmeans_assign(km, reduced)
                sigs = signatures.build_signatures(
                    dict(zip(reduced.row_ids, (int(c) for c in assign))), figs, k
                )
                visual = signatures.visual_distance(sigs).submatrix(citation.labels)
                correlations.append(
                    (inference.spearman(visual.values[iu], citation.values[iu]), k)
                )
            best_r, best_k = max(correlations)
            rows.append(
                (
                    dim,
                    float(model.explained_variance_ratio.sum()),
                    float(np.mean([r for r, _ in correlations])),
                    float(best_r),
                    best_k,
                )
            )
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(f"# {comment}\n")
            fh.write(
                "dimension,explained_variance_ratio,avg_correlation,"
                "max_correlation,argmax_k\n"
            )
            for dim, evr, avg_r, max_r, best_k in rows:
                fh.write(f"{dim},{evr!r},{avg_r!r},{max_r!r},{best_k}\n")
        click.echo(f"wrote {out} ({len(rows)} dimensions)")

    _run(body)


@main.command()
@click.option("--embeddings", required=True, help="Reduced VSIG file.")
@click.option("--k", type=int, default=signatures.DEFAULT_K, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-iter", type=int, default=signatures.DEFAULT_MAX_ITER, show_default=True)
@click.option("--n-init", type=int, default=signatures.DEFAULT_N_INIT, show_default=True)
@click.option("--out-model", required=True)
@click.option("--out-assignments", required=True)
@threads_option
def cluster(embeddings, k, seed, max_iter, n_init, out_model, out_assignments, threads):
    """Fit K-means on reduced vectors; write model and per-figure clusters."""

    def body():
        comment = _echo_config(
            "cluster", embeddings=embeddings, k=k, seed=seed, max_iter=max_iter,
            n_init=n_init,
        )
        data = read_embeddings(embeddings)
        model = signatures.kmeans_fit(data, k, seed=seed, max_iter=max_iter, n_init=n_init)
        assign = signatures.kmeans_assign(model, data)
        signatures.save_kmeans(model, out_model)
        signatures.write_assignments_csv(
            dict(zip(data.row_ids, (int(c) for c in assign))),
            k,
            out_assignments,
            comment=comment,
        )
        click.echo(
            f"inertia={model.inertia!r} iterations={model.iterations_run}"
        )

    _run(body)


@main.command("signatures")
@click.option("--assignments", required=True, help="CSV from the cluster step.")
@click.option("--figures", required=True, help="Figure metadata JSONL.")
@click.option("--k", type=int, default=None, help="Cluster count (default: from file).")
@click.option("--out", required=True)
@threads_option
def signatures_cmd(assignments, figures, k, out, threads):
    """Build per-field visual signatures from cluster assignments."""

    def body():
        comment = _echo_config("signatures", assignments=assignments, figures=figures)
        mapping, file_k = signatures.read_assignments_csv(assignments)
        use_k = k if k is not None else file_k
        if use_k is None:
            raise VizsigError("assignment file carries no k; pass --k")
        figs = read_metadata(figures)
        sigs = signatures.build_signatures(mapping, figs, use_k)
        signatures.write_signatures_csv(sigs, out, comment=comment)
        click.echo(f"wrote {out} ({len(sigs)} fields, k={use_k})")

    _run(body)


@main.command("dist-visual")
@click.option("--signatures", "signatures_path", required=True, help="Signature CSV.")
@click.option(
    "--metric",
    type=click.Choice(["euclidean", "hellinger"]),
    default="euclidean",
    show_default=True,
)
@click.option("--out", required=True)
@threads_option
def dist_visual(signatures_path, metric, out, threads):
    """Distance matrix between field signatures."""

    def body():
        comment = _echo_config("dist-visual", signatures=signatures_path, metric=metric)
        sigs = signatures.read_signatures_csv(signatures_path)
        write_labeled_csv(
            out, signatures.visual_distance(sigs, metric=metric), comment=comment
        )
        click.echo(f"wrote {out}")

    _run(body)


@main.command("dist-jargon")
@click.option("--papers", required=True, help="Paper metadata JSONL with abstracts.")
@click.option("--alpha", type=float, default=textmetrics.DEFAULT_ALPHA, show_default=True)
@click.option("--out", required=True, help="Distance matrix CSV.")
@click.option("--out-efficiency", default=None, help="Raw asymmetric E matrix CSV.")
@click.option(
    "--out-vocab-dir", default=None, help="Write per-field token,count dumps here."
)
@threads_option
def dist_jargon(papers, alpha, out, out_efficiency, out_vocab_dir, threads):
    """Jargon distance between fields from abstract unigrams."""

    def body():
        comment = _echo_config("dist-jargon", papers=papers, alpha=alpha)
        paps = read_metadata(papers)
        fields = sorted({p.field for p in paps})
        dists = [textmetrics.build_distribution(paps, f) for f in fields]
        result = textmetrics.jargon_distance(dists, alpha=alpha)
        write_labeled_csv(out, result.distance, comment=comment)
        if out_efficiency:
            write_square_csv(
                out_efficiency, result.labels, result.efficiency, comment=comment
            )
        if out_vocab_dir:
            vocab_dir = Path(out_vocab_dir)
            vocab_dir.mkdir(parents=True, exist_ok=True)
            for dist in dists:
                textmetrics.write_vocabulary(dist, vocab_dir / f"vocab_{dist.field}.csv")
        click.echo(f"wrote {out} ({len(fields)} fields, |V|={result.vocabulary_size})")

    _run(body)


@main.command("dist-citation")
@click.option("--edges", required=True, help="Citation edge file.")
@click.option("--papers", required=True, help="Paper metadata JSONL.")
@click.option(
    "--sample-size", type=int, default=graphmetrics.DEFAULT_SAMPLE_SIZE, show_default=True
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--include-intra", is_flag=True, help="Also compute intra-field averages.")
@click.option("--out", required=True)
@click.option("--out-diagnostics", default=None)
@threads_option
def dist_citation(edges, papers, sample_size, seed, include_intra, out, out_diagnostics, threads):
    """Average shortest citation path between fields (undirected hops)."""

    def body():
        comment = _echo_config(
            "dist-citation", edges=edges, papers=papers, sample_size=sample_size,
            seed=seed,
        )
        paps = read_metadata(papers)
        graph = graphmetrics.load_graph(edges, paps)
        rep = graph.report
        click.echo(
            f"graph: {graph.n} nodes, {rep.kept_edges} edges "
            f"(dropped {rep.dropped_unknown} unknown, {rep.dropped_self_loops} loops, "
            f"{rep.duplicate_edges} duplicates)",
            err=True,
        )
        fields = sorted({p.field for p in paps})
        result = graphmetrics.avg_shortest_path(
            graph, fields, sample_size=sample_size, seed=seed,
            include_intra=include_intra,
        )
        write_labeled_csv(out, result.distance, comment=comment)
        if out_diagnostics:
            graphmetrics.write_diagnostics_csv(result, out_diagnostics, comment=comment)
        if result.intra:
            for field, value in sorted(result.intra.items()):
                click.echo(f"intra {field}: {value!r}")
        click.echo(f"wrote {out}")

    _run(body)


@main.command()
@click.option("--a", "path_a", required=True, help="First distance matrix CSV.")
@click.option("--b", "path_b", required=True, help="Second distance matrix CSV.")
@click.option(
    "--permutations", type=int, default=inference.DEFAULT_PERMUTATIONS, show_default=True
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--method",
    type=click.Choice(["auto", "sampled", "exact"]),
    default="auto",
    show_default=True,
    help="Null distribution: exact enumeration or sampled permutations.",
)
@click.option("--out", default=None, help="Write the JSON report here too.")
@threads_option
def mantel(path_a, path_b, permutations, seed, method, out, threads):
    """Mantel permutation test between two aligned distance matrices."""

    def body():
        _echo_config(
            "mantel", a=path_a, b=path_b, permutations=permutations, seed=seed,
            method=method,
        )
        a = read_distance_csv(path_a)
        b = read_distance_csv(path_b)
        if set(a.labels) == set(b.labels) and a.labels != b.labels:
            b = b.submatrix(a.labels)
        report = inference.mantel_test(
            a, b, permutations=permutations, seed=seed, method=method
        )
        click.echo(
            f"r={report.r:.6f} p={report.p_value:.6g} z={report.z_score:.4f} "
            f"permutations={report.permutations} exhaustive={report.exhaustive}"
        )
        if out:
            inference.write_mantel_json(report, out, extra={"labels": list(a.labels)})

    _run(body)


@main.command()
@click.option("--matrix", "matrix_path", required=True, help="Distance matrix CSV.")
@click.option("--out-newick", required=True)
@click.option("--out-merges", default=None)
@threads_option
def upgma(matrix_path, out_newick, out_merges, threads):
    """Average-linkage dendrogram of a distance matrix."""

    def body():
        comment = _echo_config("upgma", matrix=matrix_path)
        dist = read_distance_csv(matrix_path)
        dend = inference.upgma(dist)
        Path(out_newick).write_text(inference.to_newick(dend) + "\n")
        if out_merges:
            inference.write_merges_csv(dend, out_merges, comment=comment)
        click.echo(f"wrote {out_newick}")

    _run(body)


@main.command()
@click.option("--a", "path_a", required=True, help="Distance matrix to subtract (visual).")
@click.option("--b", "path_b", required=True, help="Distance matrix to keep (citation).")
@click.option("--out", required=True)
@threads_option
def discrepancy(path_a, path_b, out, threads):
    """Normalized difference matrix norm(b) - norm(a)."""

    def body():
        comment = _echo_config("discrepancy", a=path_a, b=path_b)
        a = read_distance_csv(path_a)
        b = read_distance_csv(path_b)
        if set(a.labels) == set(b.labels) and a.labels != b.labels:
            b = b.submatrix(a.labels)
        write_labeled_csv(out, inference.discrepancy(a, b), comment=comment)
        click.echo(f"wrote {out}")

    _run(body)


@main.command("nmf-topics")
@click.option("--figures", required=True, help="Figure metadata JSONL with captions.")
@click.option("--assignments", default=None, help="Restrict to one cluster via this CSV.")
@click.option("--cluster", "cluster_index", type=int, default=None)
@click.option("--topics", "n_topics", type=int, default=topics.DEFAULT_TOPICS, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-iter", type=int, default=topics.DEFAULT_MAX_ITER, show_default=True)
@click.option("--tol", type=float, default=topics.DEFAULT_TOL, show_default=True)
@click.option("--keywords", type=int, default=10, show_default=True)
@click.option("--out", required=True, help="Topic report CSV.")
@threads_option
def nmf_topics(
    figures, assignments, cluster_index, n_topics, seed, max_iter, tol, keywords, out, threads
):
    """NMF topic model over figure captions with per-year topic shares."""

    def body():
        comment = _echo_config(
            "nmf-topics", figures=figures, topics=n_topics, seed=seed,
            cluster=cluster_index,
        )
        figs = read_metadata(figures)
        if assignments is not None:
            if cluster_index is None:
                raise VizsigError("--assignments needs --cluster")
            mapping, _ = signatures.read_assignments_csv(assignments)
            figs = [
                f for f in figs if mapping.get(f.figure_id) == cluster_index
            ]
            if not figs:
                raise VizsigError(f"no figures in cluster {cluster_index}")
        tdm = topics.build_term_doc(figs)
        if tdm.dropped_docs:
            click.echo(f"dropped {len(tdm.dropped_docs)} empty captions", err=True)
        model = topics.nmf_fit(
            tdm, topics=n_topics, seed=seed, max_iter=max_iter, tol=tol
        )
        topics.write_topic_report_csv(model, out, keywords=keywords, comment=comment)
        click.echo(
            f"wrote {out} (objective {model.objective_trace[-1]:.6g} after "
            f"{len(model.objective_trace)} iterations)"
        )

    _run(body)


@main.command("train-classifier")
@click.option("--embeddings", required=True, help="VSIG file of labeled vectors.")
@click.option("--labels", "labels_path", required=True, help="figure_id,label CSV.")
@click.option(
    "--hidden",
    default=",".join(str(h) for h in figclass.DEFAULT_HIDDEN),
    show_default=True,
    help="Hidden layer widths.",
)
@click.option("--dropout", type=float, default=0.5, show_default=True)
@click.option("--learning-rate", type=float, default=0.001, show_default=True)
@click.option("--decay", type=float, default=0.001, show_default=True)
@click.option("--epochs", type=int, default=150, show_default=True)
@click.option("--batch-size", type=int, default=256, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-model", required=True)
@click.option("--out-report", default=None, help="Validation/test report path.")
@threads_option
def train_classifier(
    embeddings, labels_path, hidden, dropout, learning_rate, decay, epochs,
    batch_size, seed, out_model, out_report, threads,
):
    """Train the figure-type classifier on labeled embedding vectors.

    Splits the labeled set 8:1:1 (stratified), trains on the first part,
    tracks validation accuracy, and reports test metrics.
    """

    def body():
        _echo_config(
            "train-classifier", embeddings=embeddings, labels=labels_path,
            hidden=hidden, dropout=dropout, learning_rate=learning_rate,
            decay=decay, epochs=epochs, batch_size=batch_size, seed=seed,
        )
        data = read_embeddings(embeddings)
        label_map = figclass.read_labels_csv(labels_path)
        missing = [rid for rid in data.row_ids if rid not in label_map]
        if missing:
            raise VizsigError(
                f"{len(missing)} rows lack labels (first: '{missing[0]}')"
            )
        y = [label_map[rid] for rid in data.row_ids]
        train_set, val_set, test_set = figclass.split_dataset(
            data.values.astype(np.float64), y, seed=seed
        )
        classes = sorted(set(y))
        layer_sizes = (data.d, *(int(h) for h in hidden.split(",") if h), len(classes))
        config = figclass.MlpConfig(
            layer_sizes=layer_sizes,
            dropout_rate=dropout,
            learning_rate=learning_rate,
            decay=decay,
            epochs=epochs,
            batch_size=batch_size,
            seed=seed,
        )
        model = figclass.train(config, train_set, val_set)
        figclass.save_model(model, out_model)
        report = figclass.evaluate(model, test_set)
        click.echo(report.summary())
        if out_report:
            Path(out_report).write_text(report.summary() + "\n")
        click.echo(f"wrote {out_model}")

    _run(body)


@main.command()
@click.option("--model", "model_path", required=True)
@click.option("--embeddings", required=True)
@click.option("--out", required=True, help="figure_id,label CSV.")
@threads_option
def predict(model_path, embeddings, out, threads):
    """Label embedding vectors with a trained classifier."""

    def body():
        comment = _echo_config("predict", model=model_path, embeddings=embeddings)
        model = figclass.load_model(model_path)
        data = read_embeddings(embeddings)
        labels, _ = figclass.predict(model, data.values.astype(np.float64))
        figclass.write_labels_csv(
            dict(zip(data.row_ids, labels)), out, comment=comment
        )
        click.echo(f"wrote {out} ({data.n} predictions)")

    _run(body)


@main.command()
@click.option("--model", "model_path", required=True)
@click.option("--embeddings", required=True)
@click.option("--labels", "labels_path", required=True, help="Ground truth CSV.")
@click.option("--out-report", default=None)
@click.option("--out-confusion", default=None)
@threads_option
def evaluate(model_path, embeddings, labels_path, out_report, out_confusion, threads):
    """Evaluate a trained classifier against labeled vectors."""

    def body():
        comment = _echo_config(
            "evaluate", model=model_path, embeddings=embeddings, labels=labels_path
        )
        model = figclass.load_model(model_path)
        data = read_embeddings(embeddings)
        label_map = figclass.read_labels_csv(labels_path)
        y = []
        for rid in data.row_ids:
            if rid not in label_map:
                raise VizsigError(f"row '{rid}' has no ground-truth label")
            y.append(label_map[rid])
        report = figclass.evaluate(model, (data.values.astype(np.float64), y))
        click.echo(report.summary())
        if out_report:
            Path(out_report).write_text(report.summary() + "\n")
        if out_confusion:
            figclass.write_confusion_csv(report, out_confusion, comment=comment)

    _run(body)


@main.command()
@click.option(
    "--mode",
    type=click.Choice(["figure-type", "keyword", "citations"]),
    required=True,
)
@click.option("--predictions", default=None, help="figure_id,label CSV (figure-type).")
@click.option("--figures", default=None, help="Figure metadata JSONL (figure-type).")
@click.option("--type-label", default=None, help="Predicted label to track.")
@click.option("--papers", default=None, help="Paper metadata JSONL (keyword/citations).")
@click.option("--phrases", default=None, help="Comma-separated phrases (keyword).")
@click.option("--fields", default=None, help="Comma-separated field labels.")
@click.option("--edges", default=None, help="Citation edge file (citations).")
@click.option("--paper-ids", default=None, help="Comma-separated paper ids (citations).")
@click.option("--out", required=True)
@threads_option
def trend(
    mode, predictions, figures, type_label, papers, phrases, fields, edges,
    paper_ids, out, threads,
):
    """Yearly series: figure-type adoption, keyword usage, or citations."""

    def body():
        comment = _echo_config("trend", mode=mode, out=out)
        if mode == "figure-type":
            if not (predictions and figures and type_label and fields):
                raise VizsigError(
                    "figure-type mode needs --predictions --figures --type-label --fields"
                )
            pred = figclass.read_labels_csv(predictions)
            figs = read_metadata(figures)
            series = trend_mod.figure_type_trend(
                pred, figs, type_label, [f for f in fields.split(",") if f]
            )
        elif mode == "keyword":
            if not (papers and phrases and fields):
                raise VizsigError("keyword mode needs --papers --phrases --fields")
            paps = read_metadata(papers)
            series = trend_mod.keyword_trend(
                paps,
                [p.strip() for p in phrases.split(",") if p.strip()],
                [f for f in fields.split(",") if f],
            )
        else:
            if not (papers and edges and paper_ids):
                raise VizsigError("citations mode needs --papers --edges --paper-ids")
            paps = read_metadata(papers)
            graph = graphmetrics.load_graph(edges, paps)
            counts = graphmetrics.yearly_citation_counts(
                graph, [p for p in paper_ids.split(",") if p]
            )
            series = trend_mod.citation_trend(counts)
        trend_mod.write_trend_csv(series, out, comment=comment)
        click.echo(f"wrote {out} ({len(series)} series)")

    _run(body)


@main.command()
@click.option("--out", "out_dir", required=True, help="Output directory.")
@click.option("--fields", type=int, default=6, show_default=True)
@click.option("--figures-per-field", type=int, default=1000, show_default=True)
@click.option("--papers-per-field", type=int, default=50, show_default=True)
@click.option("--clusters", type=int, default=4, show_default=True)
@click.option("--dim", type=int, default=16, show_default=True)
@click.option("--spread", type=float, default=0.6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--spec", "spec_path", default=None, help="Full SyntheticSpec as JSON.")
@threads_option
def synth(
    out_dir, fields, figures_per_field, papers_per_field, clusters, dim, spread,
    seed, spec_path, threads,
):
    """Generate a synthetic corpus with planted structure.

    Writes embeddings.vsig, figures.jsonl, papers.jsonl, edges.txt, and
    planted_distance.csv (ground-truth field distances).
    """

    def body():
        comment = _echo_config(
            "synth", fields=fields, figures_per_field=figures_per_field,
            clusters=clusters, dim=dim, spread=spread, seed=seed, spec=spec_path,
        )
        if spec_path:
            spec = _spec_from_json(Path(spec_path).read_text())
        else:
            spec = synthetic.default_spec(
                n_fields=fields,
                figures_per_field=figures_per_field,
                papers_per_field=papers_per_field,
                clusters=clusters,
                dim=dim,
                spread=spread,
            )
        corpus = synthetic.generate_synthetic_corpus(spec, seed=seed)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_embeddings(corpus.embeddings, out / "embeddings.vsig")
        write_metadata(corpus.figures, out / "figures.jsonl")
        write_metadata(corpus.papers, out / "papers.jsonl")
        write_edges(corpus.edges, out / "edges.txt")
        write_labeled_csv(
            out / "planted_distance.csv",
            synthetic.planted_field_distance(spec),
            comment=comment,
        )
        click.echo(
            f"wrote {out_dir}: {corpus.embeddings.n} figures, "
            f"{len(corpus.papers)} papers, {len(corpus.edges)} edges"
        )

    _run(body)


def _spec_from_json(text: str) -> synthetic.SyntheticSpec:
    obj = json.loads(text)
    fields = tuple(
        synthetic.SyntheticField(
            name=f["name"],
            proportions=tuple(f["proportions"]),
            token_probs=dict(f["token_probs"]),
            figures=int(f["figures"]),
            papers=int(f["papers"]),
        )
        for f in obj["fields"]
    )
    kwargs = {}
    for key in (
        "years", "abstract_tokens", "caption_tokens", "citations_per_paper",
        "intra_cite_prob",
    ):
        if key in obj:
            kwargs[key] = tuple(obj[key]) if key == "years" else obj[key]
    return synthetic.SyntheticSpec(
        fields=fields,
        centers=tuple(tuple(c) for c in obj["centers"]),
        spread=float(obj["spread"]),
        **kwargs,
    )


@main.command()
@click.option("--embeddings", required=True)
@click.option("--figures", required=True)
@click.option("--papers", required=True)
@click.option("--edges", required=True)
@click.option("--out", "out_dir", required=True)
@click.option("--dims", type=int, default=reduce.DEFAULT_COMPONENTS, show_default=True)
@click.option("--k", type=int, default=signatures.DEFAULT_K, show_default=True)
@click.option("--alpha", type=float, default=textmetrics.DEFAULT_ALPHA, show_default=True)
@click.option(
    "--sample-size", type=int, default=graphmetrics.DEFAULT_SAMPLE_SIZE, show_default=True
)
@click.option(
    "--permutations", type=int, default=inference.DEFAULT_PERMUTATIONS, show_default=True
)
@click.option("--pca-seed", type=int, default=0, show_default=True)
@click.option("--kmeans-seed", type=int, default=0, show_default=True)
@click.option("--citation-seed", type=int, default=0, show_default=True)
@click.option("--mantel-seed", type=int, default=0, show_default=True)
@threads_option
def pipeline(
    embeddings, figures, papers, edges, out_dir, dims, k, alpha, sample_size,
    permutations, pca_seed, kmeans_seed, citation_seed, mantel_seed, threads,
):
    """Run the full pipeline and write every artifact into --out."""

    def body():
        _echo_config(
            "pipeline", embeddings=embeddings, out=out_dir, dims=dims, k=k,
            alpha=alpha, sample_size=sample_size, permutations=permutations,
            pca_seed=pca_seed, kmeans_seed=kmeans_seed,
            citation_seed=citation_seed, mantel_seed=mantel_seed,
        )
        config = PipelineConfig(
            embeddings_path=embeddings,
            figures_path=figures,
            papers_path=papers,
            edges_path=edges,
            out_dir=out_dir,
            dims=dims,
            k=k,
            alpha=alpha,
            sample_size=sample_size,
            permutations=permutations,
            pca_seed=pca_seed,
            kmeans_seed=kmeans_seed,
            citation_seed=citation_seed,
            mantel_seed=mantel_seed,
        )
        artifacts = run_pipeline(config)
        for name in sorted(artifacts):
            click.echo(f"{name}: {artifacts[name]}")

    _run(body)


if __name__ == "__main__":
    main()
