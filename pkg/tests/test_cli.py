import json

import numpy as np
import pytest
from click.testing import CliRunner

from vizsig.cli import main
from vizsig.corpus import (
    EmbeddingMatrix,
    read_embeddings,
    write_embeddings,
    write_metadata,
)
from vizsig.matrices import DistanceMatrix, read_distance_csv, write_labeled_csv


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    """Small synthetic corpus rendered once for the whole module."""
    directory = tmp_path_factory.mktemp("corpus")
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "synth",
            "--out",
            str(directory),
            "--fields",
            "4",
            "--figures-per-field",
            "120",
            "--papers-per-field",
            "15",
            "--dim",
            "8",
            "--seed",
            "3",
        ],
    )
    assert result.exit_code == 0, result.output
    return directory


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_unknown_subcommand_is_usage_error():
    result = invoke("no-such-command")
    assert result.exit_code == 2


def test_missing_required_flag_is_usage_error():
    result = invoke("pca")
    assert result.exit_code == 2


def test_missing_file_is_data_error(tmp_path):
    result = invoke(
        "pca",
        "--embeddings", tmp_path / "nope.vsig",
        "--dims", 2,
        "--out-model", tmp_path / "m.bin",
        "--out-reduced", tmp_path / "r.vsig",
    )
    assert result.exit_code == 1


def test_validate(corpus_dir):
    result = invoke(
        "validate",
        "--embeddings", corpus_dir / "embeddings.vsig",
        "--figures", corpus_dir / "figures.jsonl",
        "--papers", corpus_dir / "papers.jsonl",
    )
    assert result.exit_code == 0, result.output
    assert "rows without figure metadata: 0" in result.output


def test_stage_by_stage(tmp_path, corpus_dir):
    steps = [
        [
            "pca",
            "--embeddings", corpus_dir / "embeddings.vsig",
            "--dims", 5,
            "--seed", 0,
            "--out-model", tmp_path / "pca.bin",
            "--out-reduced", tmp_path / "reduced.vsig",
        ],
        [
            "cluster",
            "--embeddings", tmp_path / "reduced.vsig",
            "--k", 4,
            "--seed", 0,
            "--out-model", tmp_path / "km.bin",
            "--out-assignments", tmp_path / "assign.csv",
        ],
        [
            "signatures",
            "--assignments", tmp_path / "assign.csv",
            "--figures", corpus_dir / "figures.jsonl",
            "--out", tmp_path / "sigs.csv",
        ],
        [
            "dist-visual",
            "--signatures", tmp_path / "sigs.csv",
            "--out", tmp_path / "dv.csv",
        ],
        [
            "dist-jargon",
            "--papers", corpus_dir / "papers.jsonl",
            "--out", tmp_path / "dj.csv",
            "--out-efficiency", tmp_path / "eff.csv",
            "--out-vocab-dir", tmp_path / "vocab",
        ],
        [
            "dist-citation",
            "--edges", corpus_dir / "edges.txt",
            "--papers", corpus_dir / "papers.jsonl",
            "--seed", 0,
            "--out", tmp_path / "dc.csv",
            "--out-diagnostics", tmp_path / "dc_diag.csv",
        ],
    ]
    for step in steps:
        result = invoke(*step)
        assert result.exit_code == 0, f"{step[0]}: {result.output}"

    dv = read_distance_csv(tmp_path / "dv.csv")
    assert dv.m == 4
    assert np.allclose(dv.values, dv.values.T)
    vocab_files = sorted(p.name for p in (tmp_path / "vocab").iterdir())
    assert vocab_files == [f"vocab_field0{i}.csv" for i in range(4)]

    result = invoke(
        "mantel",
        "--a", tmp_path / "dv.csv",
        "--b", corpus_dir / "planted_distance.csv",
        "--permutations", 999,
        "--seed", 1,
    )
    assert result.exit_code == 0, result.output
    assert "r=" in result.output

    result = invoke(
        "upgma",
        "--matrix", tmp_path / "dv.csv",
        "--out-newick", tmp_path / "dv.nwk",
        "--out-merges", tmp_path / "dv_merges.csv",
    )
    assert result.exit_code == 0
    assert (tmp_path / "dv.nwk").read_text().strip().endswith(";")

    result = invoke(
        "discrepancy",
        "--a", tmp_path / "dv.csv",
        "--b", tmp_path / "dc.csv",
        "--out", tmp_path / "disc.csv",
    )
    assert result.exit_code == 0


def test_mantel_identical_min_p(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.random((10, 10))
    values = (values + values.T) / 2
    np.fill_diagonal(values, 0)
    dm = DistanceMatrix(tuple(f"L{i}" for i in range(10)), values)
    write_labeled_csv(tmp_path / "a.csv", dm)
    result = invoke(
        "mantel",
        "--a", tmp_path / "a.csv",
        "--b", tmp_path / "a.csv",
        "--permutations", 9999,
        "--seed", 7,
        "--out", tmp_path / "report.json",
    )
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["r"] == pytest.approx(1.0)
    assert report["p_value"] == pytest.approx(0.0001)


def test_pipeline_full_and_byte_identical_rerun(tmp_path, corpus_dir):
    args = [
        "pipeline",
        "--embeddings", corpus_dir / "embeddings.vsig",
        "--figures", corpus_dir / "figures.jsonl",
        "--papers", corpus_dir / "papers.jsonl",
        "--edges", corpus_dir / "edges.txt",
        "--dims", 5,
        "--k", 4,
        "--permutations", 199,
    ]
    r1 = invoke(*args, "--out", tmp_path / "run1")
    assert r1.exit_code == 0, r1.output
    r2 = invoke(*args, "--out", tmp_path / "run2", "--threads", 4)
    assert r2.exit_code == 0

    names = sorted(p.name for p in (tmp_path / "run1").iterdir())
    expected = {
        "pca_model.bin",
        "reduced.vsig",
        "kmeans_model.bin",
        "assignments.csv",
        "signatures.csv",
        "dist_visual.csv",
        "dist_jargon.csv",
        "jargon_efficiency.csv",
        "dist_citation.csv",
        "dist_citation_diagnostics.csv",
        "mantel_visual_citation.json",
        "mantel_visual_jargon.json",
        "mantel_jargon_citation.json",
        "discrepancy_citation_minus_visual.csv",
        "pipeline_config.json",
    }
    assert expected.issubset(set(names))
    for name in names:
        if name == "pipeline_config.json":
            continue  # embeds the differing out_dir path
        b1 = (tmp_path / "run1" / name).read_bytes()
        b2 = (tmp_path / "run2" / name).read_bytes()
        assert b1 == b2, f"{name} differs between reruns"


def test_pipeline_missing_edges_names_stage(tmp_path, corpus_dir):
    result = invoke(
        "pipeline",
        "--embeddings", corpus_dir / "embeddings.vsig",
        "--figures", corpus_dir / "figures.jsonl",
        "--papers", corpus_dir / "papers.jsonl",
        "--edges", tmp_path / "missing.txt",
        "--dims", 5,
        "--permutations", 199,
        "--out", tmp_path / "run",
    )
    assert result.exit_code == 1
    assert "dist-citation" in result.output


def test_classifier_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    n = 120
    half = n // 2
    values = np.vstack(
        [rng.normal(3, 0.5, (half, 6)), rng.normal(-3, 0.5, (half, 6))]
    ).astype(np.float32)
    ids = tuple(f"fig{i:03d}" for i in range(n))
    write_embeddings(EmbeddingMatrix(values, ids), tmp_path / "vec.vsig")
    labels = {fid: ("diagram" if i < half else "negative") for i, fid in enumerate(ids)}
    with open(tmp_path / "labels.csv", "w") as fh:
        for fid, lab in labels.items():
            fh.write(f"{fid},{lab}\n")

    result = invoke(
        "train-classifier",
        "--embeddings", tmp_path / "vec.vsig",
        "--labels", tmp_path / "labels.csv",
        "--hidden", "16,8",
        "--dropout", 0.0,
        "--epochs", 40,
        "--seed", 0,
        "--out-model", tmp_path / "model.bin",
    )
    assert result.exit_code == 0, result.output
    assert "accuracy" in result.output

    result = invoke(
        "predict",
        "--model", tmp_path / "model.bin",
        "--embeddings", tmp_path / "vec.vsig",
        "--out", tmp_path / "pred.csv",
    )
    assert result.exit_code == 0, result.output

    result = invoke(
        "evaluate",
        "--model", tmp_path / "model.bin",
        "--embeddings", tmp_path / "vec.vsig",
        "--labels", tmp_path / "labels.csv",
        "--out-confusion", tmp_path / "conf.csv",
    )
    assert result.exit_code == 0, result.output

    figures = [
        {"figure_id": fid, "paper_id": f"p{i // 2}", "field": "cs", "year": 2014 + i % 3}
        for i, fid in enumerate(ids)
    ]
    with open(tmp_path / "figures.jsonl", "w") as fh:
        for obj in figures:
            fh.write(json.dumps(obj) + "\n")
    result = invoke(
        "trend",
        "--mode", "figure-type",
        "--predictions", tmp_path / "pred.csv",
        "--figures", tmp_path / "figures.jsonl",
        "--type-label", "diagram",
        "--fields", "cs",
        "--out", tmp_path / "trend.csv",
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "trend.csv").read_text().splitlines()[1].startswith("label,2014")


def test_trend_keyword_and_citations(tmp_path, corpus_dir):
    result = invoke(
        "trend",
        "--mode", "keyword",
        "--papers", corpus_dir / "papers.jsonl",
        "--phrases", "tok000,tok001",
        "--fields", "field00,field01",
        "--out", tmp_path / "kw.csv",
    )
    assert result.exit_code == 0, result.output

    result = invoke(
        "trend",
        "--mode", "citations",
        "--papers", corpus_dir / "papers.jsonl",
        "--edges", corpus_dir / "edges.txt",
        "--paper-ids", "field00-p0000,field01-p0001",
        "--out", tmp_path / "cit.csv",
    )
    assert result.exit_code == 0, result.output


def test_nmf_topics_cli(tmp_path, corpus_dir):
    result = invoke(
        "nmf-topics",
        "--figures", corpus_dir / "figures.jsonl",
        "--topics", 3,
        "--seed", 0,
        "--out", tmp_path / "topics.csv",
    )
    assert result.exit_code == 0, result.output
    header = [
        line
        for line in (tmp_path / "topics.csv").read_text().splitlines()
        if not line.startswith("#")
    ][0]
    assert header.startswith("topic,keywords,exemplars")


def test_sweep_pca_cli(tmp_path, corpus_dir):
    result = invoke(
        "sweep-pca",
        "--embeddings", corpus_dir / "embeddings.vsig",
        "--figures", corpus_dir / "figures.jsonl",
        "--papers", corpus_dir / "papers.jsonl",
        "--edges", corpus_dir / "edges.txt",
        "--dims", "3,5",
        "--k-range", "2..4",
        "--out", tmp_path / "sweep.csv",
    )
    assert result.exit_code == 0, result.output
    lines = [
        line
        for line in (tmp_path / "sweep.csv").read_text().splitlines()
        if not line.startswith("#")
    ]
    assert lines[0] == (
        "dimension,explained_variance_ratio,avg_correlation,max_correlation,argmax_k"
    )
    assert len(lines) == 3
    assert lines[1].startswith("3,") and lines[2].startswith("5,")


def test_synth_deterministic(tmp_path):
    for sub in ("a", "b"):
        result = invoke(
            "synth",
            "--out", tmp_path / sub,
            "--fields", 2,
            "--figures-per-field", 30,
            "--papers-per-field", 6,
            "--dim", 8,
            "--seed", 5,
        )
        assert result.exit_code == 0, result.output
    for name in ("embeddings.vsig", "figures.jsonl", "papers.jsonl", "edges.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synth_from_spec_json(tmp_path):
    spec = {
        "fields": [
            {
                "name": "x",
                "proportions": [1.0, 0.0],
                "token_probs": {"aa": 1.0},
                "figures": 10,
                "papers": 2,
            },
            {
                "name": "y",
                "proportions": [0.0, 1.0],
                "token_probs": {"bb": 1.0},
                "figures": 10,
                "papers": 2,
            },
        ],
        "centers": [[5.0, 0.0], [0.0, 5.0]],
        "spread": 0.2,
    }
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    result = invoke("synth", "--out", tmp_path / "out", "--spec", tmp_path / "spec.json")
    assert result.exit_code == 0, result.output
    matrix = read_embeddings(tmp_path / "out" / "embeddings.vsig")
    assert matrix.n == 20 and matrix.d == 2


def test_help_on_every_subcommand():
    runner = CliRunner()
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    subcommands = [
        "validate", "pca", "sweep-pca", "cluster", "signatures", "dist-visual",
        "dist-jargon", "dist-citation", "mantel", "upgma", "discrepancy",
        "nmf-topics", "train-classifier", "predict", "evaluate", "trend",
        "synth", "pipeline",
    ]
    for sub in subcommands:
        assert sub in result.output
        sub_result = runner.invoke(main, [sub, "--help"])
        assert sub_result.exit_code == 0, sub
        assert "--help" in sub_result.output
