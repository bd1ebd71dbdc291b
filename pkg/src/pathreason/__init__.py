"""Path-based knowledge-graph completion with text-enhanced reasoning.

The package turns a triple store into ranked link predictions: it extracts
relation paths between entity pairs by seeded random walks, verbalizes
entities and paths into textual statements, consumes pre-computed text
embeddings for those statements, scores queries with attention over
per-path vectors, and reports per-relation average precision.
"""

from .dataset import (
    QueryInstance,
    SamplingConfig,
    build_instances,
    corrupt_triple,
    instance_to_line,
    read_instances,
    split_triples,
    write_instances,
)
from .embeddings import (
    TextEmbeddingStore,
    lookup,
    read_store,
    synthetic_vector,
    write_store,
)
from .errors import (
    ConfigError,
    FormatError,
    MissingEmbeddingError,
    ParseError,
    PathReasonError,
    SamplingError,
)
from .evaluation import (
    EvalReport,
    RelationRow,
    average_precision,
    explain_instance,
    mean_average_precision,
    score_instances,
    write_report,
)
from .graph import (
    DatasetStats,
    EntityMeta,
    KnowledgeGraph,
    Triple,
    graph_stats,
    load_graph,
    load_graph_files,
    subgraph_without,
    with_inverses,
    write_stats,
)
from .model import (
    FeatureContext,
    ForwardTrace,
    HyperParams,
    ModelParams,
    attend,
    encode_path_A,
    encode_path_B,
    enhance_entity,
    grad_batch,
    init_params,
    load_checkpoint,
    loss_batch,
    permute_relation_embeddings,
    save_checkpoint,
    score_pair,
)
from .paths import (
    Path,
    WalkConfig,
    cap_paths,
    enumerate_paths,
    path_from_str,
    path_to_str,
    read_path_file,
    sample_paths,
    write_path_file,
)
from .training import (
    AdamState,
    EpochRecord,
    GridSpec,
    TrainConfig,
    adam_update,
    dev_accuracy,
    grid_search,
    train,
    write_log,
)
from .verbalize import (
    RelationTemplate,
    Statement,
    Verbalizer,
    fnv1a64,
    load_templates,
    read_statements,
    write_statements,
)

__version__ = "1.0.0"

__all__ = [
    "AdamState",
    "ConfigError",
    "DatasetStats",
    "EntityMeta",
    "EpochRecord",
    "EvalReport",
    "FeatureContext",
    "FormatError",
    "ForwardTrace",
    "GridSpec",
    "HyperParams",
    "KnowledgeGraph",
    "MissingEmbeddingError",
    "ModelParams",
    "ParseError",
    "Path",
    "PathReasonError",
    "QueryInstance",
    "RelationRow",
    "RelationTemplate",
    "SamplingConfig",
    "SamplingError",
    "Statement",
    "TextEmbeddingStore",
    "TrainConfig",
    "Triple",
    "Verbalizer",
    "WalkConfig",
    "adam_update",
    "attend",
    "average_precision",
    "build_instances",
    "cap_paths",
    "corrupt_triple",
    "dev_accuracy",
    "encode_path_A",
    "encode_path_B",
    "enhance_entity",
    "enumerate_paths",
    "explain_instance",
    "fnv1a64",
    "grad_batch",
    "graph_stats",
    "grid_search",
    "init_params",
    "instance_to_line",
    "load_checkpoint",
    "load_graph",
    "load_graph_files",
    "load_templates",
    "lookup",
    "loss_batch",
    "mean_average_precision",
    "path_from_str",
    "path_to_str",
    "permute_relation_embeddings",
    "read_instances",
    "read_path_file",
    "read_statements",
    "read_store",
    "sample_paths",
    "save_checkpoint",
    "score_instances",
    "score_pair",
    "split_triples",
    "subgraph_without",
    "synthetic_vector",
    "train",
    "with_inverses",
    "write_instances",
    "write_log",
    "write_path_file",
    "write_report",
    "write_stats",
    "write_statements",
    "write_store",
]
