"""Toolkit for delineating knowledge domains from the figures papers contain.

Pipeline: ingest figure embeddings -> PCA -> K-means -> per-field visual
signatures -> visual/jargon/citation distance matrices -> Mantel tests,
UPGMA dendrograms, and discrepancy maps -> figure-type classification and
adoption trends.
"""

from .corpus import (
    CorpusValidationReport,
    EmbeddingMatrix,
    FieldLabel,
    FigureMeta,
    PaperMeta,
    read_edges,
    read_embeddings,
    read_metadata,
    validate_corpus,
    write_edges,
    write_embeddings,
    write_metadata,
)
from .errors import VizsigError
from .graphmetrics import (
    CitationGraph,
    FieldPathDistance,
    avg_shortest_path,
    build_graph,
    load_graph,
    yearly_citation_counts,
)
from .inference import (
    Dendrogram,
    MantelReport,
    cophenetic,
    discrepancy,
    mantel_test,
    spearman,
    to_newick,
    upgma,
)
from .matrices import DistanceMatrix, LabeledMatrix, read_distance_csv, write_labeled_csv
from .reduce import PcaModel, pca_fit, pca_inverse_transform, pca_transform
from .signatures import (
    KMeansModel,
    VisualSignature,
    build_signatures,
    kmeans_assign,
    kmeans_fit,
    visual_distance,
)
from .synthetic import (
    SyntheticCorpus,
    SyntheticField,
    SyntheticSpec,
    default_spec,
    generate_synthetic_corpus,
    planted_field_distance,
)
from .textmetrics import (
    JargonResult,
    TokenDistribution,
    build_distribution,
    jargon_distance,
    tokenize,
)
from .topics import (
    TermDocMatrix,
    TopicModel,
    build_term_doc,
    nmf_fit,
    top_keywords,
    topic_share_by_year,
)
from .figclass import (
    EvalReport,
    MlpConfig,
    MlpModel,
    evaluate,
    gradient_check,
    predict,
    split_dataset,
    train,
)
from .trend import TrendSeries, figure_type_trend, keyword_trend

__version__ = "0.1.0"

__all__ = [
    "CitationGraph",
    "CorpusValidationReport",
    "Dendrogram",
    "DistanceMatrix",
    "EmbeddingMatrix",
    "EvalReport",
    "FieldLabel",
    "FieldPathDistance",
    "FigureMeta",
    "JargonResult",
    "KMeansModel",
    "LabeledMatrix",
    "MantelReport",
    "MlpConfig",
    "MlpModel",
    "PaperMeta",
    "PcaModel",
    "SyntheticCorpus",
    "SyntheticField",
    "SyntheticSpec",
    "TermDocMatrix",
    "TokenDistribution",
    "TopicModel",
    "TrendSeries",
    "VisualSignature",
    "VizsigError",
    "avg_shortest_path",
    "build_distribution",
    "build_graph",
    "build_signatures",
    "build_term_doc",
    "cophenetic",
    "default_spec",
    "discrepancy",
    "evaluate",
    "figure_type_trend",
    "generate_synthetic_corpus",
    "gradient_check",
    "jargon_distance",
    "keyword_trend",
    "kmeans_assign",
    "kmeans_fit",
    "load_graph",
    "mantel_test",
    "nmf_fit",
    "pca_fit",
    "pca_inverse_transform",
    "pca_transform",
    "planted_field_distance",
    "predict",
    "read_distance_csv",
    "read_edges",
    "read_embeddings",
    "read_metadata",
    "spearman",
    "split_dataset",
    "to_newick",
    "tokenize",
    "top_keywords",
    "topic_share_by_year",
    "train",
    "upgma",
    "validate_corpus",
    "visual_distance",
    "write_edges",
    "write_embeddings",
    "write_labeled_csv",
    "write_metadata",
    "yearly_citation_counts",
]
