from .model import (
    Cpg,
    CpgEdge,
    CpgError,
    CpgNode,
    EdgeKind,
    LexError,
    NestingOverflow,
    NodeKind,
    base_variable,
)
from .index import FunctionIndex, IoError, build_function_index
from .interchange import DanglingEdge, SchemaViolation, export_cpg, import_cpg
from .parser import parse_translation_unit

__all__ = [
    "Cpg",
    "CpgEdge",
    "CpgError",
    "CpgNode",
    "DanglingEdge",
    "EdgeKind",
    "FunctionIndex",
    "IoError",
    "LexError",
    "NestingOverflow",
    "NodeKind",
    "SchemaViolation",
    "base_variable",
    "build_function_index",
    "export_cpg",
    "import_cpg",
    "parse_translation_unit",
]
