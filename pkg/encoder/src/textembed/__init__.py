"""Statement embedding exporter: keyed sentences in, binary vectors out."""

from .encoders import TransformerEncoder
from .exporter import (
    DuplicateKeyError,
    ExportResult,
    StatementFileError,
    export_embeddings,
    read_statement_file,
    write_embedding_file,
)

__version__ = "1.0.0"

__all__ = [
    "DuplicateKeyError",
    "ExportResult",
    "StatementFileError",
    "TransformerEncoder",
    "export_embeddings",
    "read_statement_file",
    "write_embedding_file",
]
